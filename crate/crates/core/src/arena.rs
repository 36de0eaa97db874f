//! Symbolic game arenas induced by weak automata.
//!
//! The state space is the product of the component automata, each encoded
//! in its own block of state bits. The system picks the outputs `X`, then the
//! environment the inputs `Y`; one step moves every component.

use rustc_hash::FxHashMap as HashMap;

use serde::{Deserialize, Serialize};

use crate::automata::{Combiner, Compiled, Dwa};
use crate::bdd::{BddRef, BddStore, Var, VarRole};
use crate::error::{Error, Result};
use crate::logic::VariablePartition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    #[default]
    Binary,
    OneHot,
}

#[derive(Clone, Debug)]
pub struct ArenaOptions {
    pub encoding: Encoding,
    /// Maximum number of state bits.
    pub bit_budget: usize,
    pub node_cap: usize,
}

impl Default for ArenaOptions {
    fn default() -> Self {
        ArenaOptions {
            encoding: Encoding::Binary,
            bit_budget: 48,
            node_cap: crate::bdd::DEFAULT_NODE_CAP,
        }
    }
}

/// Encoding of one component automaton.
#[derive(Clone, Debug)]
pub struct ComponentCode {
    pub states: usize,
    /// Positions of this component's bits within `Arena::z`.
    pub bits: std::ops::Range<usize>,
    pub codes: Vec<u64>,
    pub accepting: Vec<bool>,
    pub initial: usize,
    /// Predicate over the component bits for every automaton state.
    pub state_pred: Vec<BddRef>,
    pub valid: BddRef,
    pub acc: BddRef,
}

#[derive(Clone, Debug)]
pub struct Arena {
    pub store: BddStore,
    pub z: Vec<Var>,
    pub x: Vec<Var>,
    pub y: Vec<Var>,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
    pub components: Vec<ComponentCode>,
    pub combiner: Combiner,
    /// Next-state function of every state bit, over `Z ∪ X ∪ Y`.
    pub next: Vec<BddRef>,
    pub acc: BddRef,
    pub init: BddRef,
    pub init_code: u64,
    /// Codes that decode to a state of every component.
    pub valid: BddRef,
    subst: HashMap<Var, BddRef>,
    primed: Vec<Var>,
    relation: Option<BddRef>,
}

fn bits_for(n: usize, enc: Encoding) -> usize {
    match (n, enc) {
        (0 | 1, _) => 0,
        (n, Encoding::Binary) => (usize::BITS - (n - 1).leading_zeros()) as usize,
        (n, Encoding::OneHot) => n,
    }
}

impl Arena {
    /// Arena for a compiled specification (components or one product).
    pub fn from_compiled(c: &Compiled, partition: &VariablePartition, opts: &ArenaOptions) -> Result<Arena> {
        build_arena(&c.dwas, &c.combiner, partition, opts)
    }

    pub fn num_state_bits(&self) -> usize {
        self.z.len()
    }

    /// Every code over the state bits.
    pub fn all(&self) -> BddRef {
        BddRef::TRUE
    }

    /// Predicate of the tuple of component states `qs`.
    pub fn state_pred(&mut self, qs: &[usize]) -> BddRef {
        let preds: Vec<BddRef> = qs
            .iter()
            .zip(&self.components)
            .map(|(&q, c)| c.state_pred[q])
            .collect();
        self.store.and_all(preds)
    }

    /// Code (bit `i` is `z[i]`) of a tuple of component states.
    pub fn encode(&self, qs: &[usize]) -> u64 {
        let mut code = 0u64;
        for (c, &q) in self.components.iter().zip(qs) {
            code |= c.codes[q] << c.bits.start;
        }
        code
    }

    /// Component states of a code; `None` marks padding in that component.
    pub fn decode(&self, code: u64) -> Vec<Option<usize>> {
        self.components
            .iter()
            .map(|c| {
                let width = c.bits.len();
                let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
                let part = (code >> c.bits.start) & mask;
                c.codes.iter().position(|&k| k == part)
            })
            .collect()
    }

    /// Membership of a state code in a set over `Z`.
    pub fn contains(&self, set: BddRef, code: u64) -> bool {
        // State bits occupy the lowest variable indices.
        self.store.eval_bits(set, code)
    }

    /// Successor code of `code` under outputs `x` and inputs `y` (bit masks
    /// in partition order).
    pub fn step_code(&self, code: u64, x: u64, y: u64) -> u64 {
        let nz = self.z.len();
        let nx = self.x.len();
        let bits = code | x << nz | y << (nz + nx);
        let mut out = 0u64;
        for (k, &f) in self.next.iter().enumerate() {
            if self.store.eval_bits(f, bits) {
                out |= 1 << k;
            }
        }
        out
    }

    /// `W ∘ δ`: the set of (z, x, y) whose successor lies in `w`.
    pub fn pre_image(&mut self, w: BddRef) -> BddRef {
        self.store.compose(w, &self.subst)
    }

    /// States from which the system can force the next state into `w`.
    pub fn cpre_s(&mut self, w: BddRef) -> BddRef {
        let f = self.pre_image(w);
        let f = self.store.forall(&self.y, f);
        self.store.exists(&self.x, f)
    }

    /// States from which the environment can force the next state into `w`.
    pub fn cpre_e(&mut self, w: BddRef) -> BddRef {
        let f = self.pre_image(w);
        let f = self.store.exists(&self.y, f);
        self.store.forall(&self.x, f)
    }

    /// States with some successor in `w`.
    pub fn pre_exists(&mut self, w: BddRef) -> BddRef {
        let f = self.pre_image(w);
        let xy: Vec<Var> = self.x.iter().chain(&self.y).copied().collect();
        self.store.exists(&xy, f)
    }

    /// Primed copies of the state bits, created on first use.
    pub fn primed(&mut self) -> Vec<Var> {
        if self.primed.is_empty() {
            for &v in &self.z {
                let name = format!("{}'", self.store.var_info(v).name);
                self.primed.push(self.store.add_var(name, VarRole::NextStateBit));
            }
        }
        self.primed.clone()
    }

    /// Monolithic relation `T(z, x, y, z')`.
    pub fn relation(&mut self) -> BddRef {
        if let Some(r) = self.relation {
            return r;
        }
        let primed = self.primed();
        let mut t = BddRef::TRUE;
        for (k, &p) in primed.iter().enumerate() {
            let pv = self.store.var(p);
            let eq = self.store.iff(pv, self.next[k]);
            t = self.store.and(t, eq);
        }
        self.store.protect(t);
        self.relation = Some(t);
        t
    }

    /// Successors of `s` via the relation and renaming.
    pub fn post_relational(&mut self, s: BddRef) -> BddRef {
        let t = self.relation();
        let conj = self.store.and(s, t);
        let mut vars: Vec<Var> = self.z.clone();
        vars.extend(&self.x);
        vars.extend(&self.y);
        let img = self.store.exists(&vars, conj);
        let back: HashMap<Var, BddRef> = self
            .primed
            .clone()
            .into_iter()
            .zip(self.z.clone())
            .map(|(p, z)| (p, self.store.var(z)))
            .collect();
        self.store.compose(img, &back)
    }

    /// Successors of `s` by splitting on the next-state functions, without a
    /// primed relation.
    pub fn post_split(&mut self, s: BddRef) -> BddRef {
        let next = self.next.clone();
        let z = self.z.clone();
        let mut memo = HashMap::default();
        image_rec(&mut self.store, s, &next, &z, 0, &mut memo)
    }

    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "state bits {} | outputs {} | inputs {}\n",
            self.z.len(),
            self.x.len(),
            self.y.len()
        ));
        for v in 0..self.store.num_vars() {
            let info = self.store.var_info(Var(v as u32));
            out.push_str(&format!("  var {v:3} {:?} {}\n", info.role, info.name));
        }
        for (k, &f) in self.next.iter().enumerate() {
            out.push_str(&format!("  next[{k}] size {}\n", self.store.size(f)));
        }
        out.push_str(&format!("  acc size {}\n", self.store.size(self.acc)));
        for (i, c) in self.components.iter().enumerate() {
            out.push_str(&format!(
                "  component {i}: {} states, bits {:?}, initial {}\n",
                c.states, c.bits, c.initial
            ));
        }
        out
    }
}

fn image_rec(
    store: &mut BddStore,
    s: BddRef,
    next: &[BddRef],
    z: &[Var],
    k: usize,
    memo: &mut HashMap<(BddRef, usize), BddRef>,
) -> BddRef {
    if s.is_false() {
        return BddRef::FALSE;
    }
    if k == next.len() {
        return BddRef::TRUE;
    }
    if let Some(&r) = memo.get(&(s, k)) {
        return r;
    }
    let on = store.and(s, next[k]);
    let off = store.diff(s, next[k]);
    let hi = image_rec(store, on, next, z, k + 1, memo);
    let lo = image_rec(store, off, next, z, k + 1, memo);
    let zk = store.var(z[k]);
    let r = store.ite(zk, hi, lo);
    memo.insert((s, k), r);
    r
}

/// Encodes `dwas` (combined by `combiner`) as a game over `partition`.
pub fn build_arena(
    dwas: &[Dwa],
    combiner: &Combiner,
    partition: &VariablePartition,
    opts: &ArenaOptions,
) -> Result<Arena> {
    let widths: Vec<usize> = dwas.iter().map(|d| bits_for(d.len(), opts.encoding)).collect();
    let needed: usize = widths.iter().sum();
    if needed > opts.bit_budget.min(63) {
        return Err(Error::EncodingOverflow {
            needed,
            budget: opts.bit_budget.min(63),
        });
    }
    let mut store = BddStore::with_cap(opts.node_cap);
    let mut z = Vec::new();
    let mut ranges = Vec::new();
    for (c, &w) in widths.iter().enumerate() {
        let start = z.len();
        for b in 0..w {
            z.push(store.add_var(format!("z{c}.{b}"), VarRole::StateBit));
        }
        ranges.push(start..z.len());
    }
    let x: Vec<Var> = partition
        .outputs
        .iter()
        .map(|n| store.add_var(n.clone(), VarRole::Output))
        .collect();
    let y: Vec<Var> = partition
        .inputs
        .iter()
        .map(|n| store.add_var(n.clone(), VarRole::Input))
        .collect();
    if x.len() + y.len() + z.len() > 64 {
        return Err(Error::EncodingOverflow {
            needed: x.len() + y.len() + z.len(),
            budget: 64,
        });
    }

    let mut next = vec![BddRef::FALSE; z.len()];
    let mut components = Vec::new();
    for (c, d) in dwas.iter().enumerate() {
        let atom_var: Vec<Var> = d
            .alphabet
            .names()
            .iter()
            .map(|n| {
                if let Some(i) = partition.outputs.iter().position(|o| o == n) {
                    Ok(x[i])
                } else if let Some(i) = partition.inputs.iter().position(|o| o == n) {
                    Ok(y[i])
                } else {
                    Err(Error::Internal(format!("atom {n} is not in the partition")))
                }
            })
            .collect::<Result<_>>()?;
        let range = ranges[c].clone();
        let codes: Vec<u64> = (0..d.len())
            .map(|q| match opts.encoding {
                Encoding::Binary => q as u64,
                Encoding::OneHot if d.len() == 1 => 0,
                Encoding::OneHot => 1 << q,
            })
            .collect();
        let zc: Vec<Var> = z[range.clone()].to_vec();
        let state_pred: Vec<BddRef> = codes
            .iter()
            .map(|&k| {
                let lits: Vec<(Var, bool)> = zc.iter().enumerate().map(|(b, &v)| (v, k >> b & 1 == 1)).collect();
                store.cube(&lits)
            })
            .collect();
        let valid = store.or_all(state_pred.clone());
        let acc_preds: Vec<BddRef> = (0..d.len())
            .filter(|&q| d.states[q].accepting)
            .map(|q| state_pred[q])
            .collect();
        let acc = store.or_all(acc_preds);
        // Guards in the arena store, per state and edge.
        let mut moves: Vec<Vec<(BddRef, usize)>> = Vec::new();
        for s in &d.states {
            moves.push(
                s.edges
                    .iter()
                    .map(|e| (store.import(&d.store, e.guard, &|v| atom_var[v.index()]), e.to))
                    .collect(),
            );
        }
        for (b, &zb) in zc.iter().enumerate() {
            let mut f = BddRef::FALSE;
            for q in 0..d.len() {
                let gs: Vec<BddRef> = moves[q]
                    .iter()
                    .filter(|(_, t)| codes[*t] >> b & 1 == 1)
                    .map(|(g, _)| *g)
                    .collect();
                let g = store.or_all(gs);
                let term = store.and(state_pred[q], g);
                f = store.or(f, term);
            }
            // Padding codes keep their bits.
            let pad = store.not(valid);
            let own = store.var(zb);
            let keep = store.and(pad, own);
            next[range.start + b] = store.or(f, keep);
        }
        components.push(ComponentCode {
            states: d.len(),
            bits: range,
            codes,
            accepting: d.states.iter().map(|s| s.accepting).collect(),
            initial: d.initial,
            state_pred,
            valid,
            acc,
        });
    }
    let acc = combine(&mut store, combiner, &components);
    let valid = store.and_all(components.iter().map(|c| c.valid).collect::<Vec<_>>());
    let init_preds: Vec<BddRef> = components.iter().map(|c| c.state_pred[c.initial]).collect();
    let init = store.and_all(init_preds);
    let mut init_code = 0;
    for c in &components {
        init_code |= c.codes[c.initial] << c.bits.start;
    }
    store.check()?;
    let subst: HashMap<Var, BddRef> = z.iter().copied().zip(next.iter().copied()).collect();
    for &f in next.iter().chain([&acc, &init, &valid]) {
        store.protect(f);
    }
    for c in &components {
        for &f in c.state_pred.iter().chain([&c.valid, &c.acc]) {
            store.protect(f);
        }
    }
    Ok(Arena {
        store,
        z,
        x,
        y,
        outputs: partition.outputs.clone(),
        inputs: partition.inputs.clone(),
        components,
        combiner: combiner.clone(),
        next,
        acc,
        init,
        init_code,
        valid,
        subst,
        primed: Vec::new(),
        relation: None,
    })
}

fn combine(store: &mut BddStore, c: &Combiner, comps: &[ComponentCode]) -> BddRef {
    match c {
        Combiner::Comp(i) => comps[*i].acc,
        Combiner::And(xs) => {
            let parts: Vec<BddRef> = xs.iter().map(|x| combine(store, x, comps)).collect();
            store.and_all(parts)
        }
        Combiner::Or(xs) => {
            let parts: Vec<BddRef> = xs.iter().map(|x| combine(store, x, comps)).collect();
            store.or_all(parts)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Owner {
    System,
    Environment,
}

/// The three-layer game graph: `q`, then `(q, x)`, then `(q, x, y)`.
#[derive(Clone, Debug)]
pub struct ExplicitGame {
    pub nz: usize,
    pub nx: usize,
    pub ny: usize,
    pub owner: Vec<Owner>,
    pub succ: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
    /// Layer (0, 1, 2) of every node.
    pub layer: Vec<u8>,
    /// State code underlying every node.
    pub code: Vec<u64>,
}

impl ExplicitGame {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn states(&self) -> usize {
        1 << self.nz
    }

    pub fn node_of_state(&self, code: u64) -> usize {
        code as usize
    }

    pub fn node_of_choice(&self, code: u64, x: u64) -> usize {
        self.states() + ((code as usize) << self.nx) + x as usize
    }

    pub fn node_of_move(&self, code: u64, x: u64, y: u64) -> usize {
        self.states() + (self.states() << self.nx) + ((((code as usize) << self.nx) + x as usize) << self.ny) + y as usize
    }

    /// Predecessor lists.
    pub fn preds(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for (v, ss) in self.succ.iter().enumerate() {
            for &s in ss {
                p[s].push(v);
            }
        }
        p
    }
}

pub const DEFAULT_EXPLICIT_CAP: usize = 1 << 16;

/// Explicit three-layer graph over all state codes. Intermediate nodes
/// inherit the acceptance of their state.
pub fn to_explicit(arena: &Arena, cap: usize) -> Result<ExplicitGame> {
    let (nz, nx, ny) = (arena.z.len(), arena.x.len(), arena.y.len());
    let states = 1usize << nz;
    let total = states
        .checked_mul(1 + (1usize << nx) + (1usize << (nx + ny)))
        .filter(|_| nx + ny < 24)
        .unwrap_or(usize::MAX);
    if states > cap || total > cap.saturating_mul(64) {
        return Err(Error::ExplicitCap { states: total, cap });
    }
    let mut g = ExplicitGame {
        nz,
        nx,
        ny,
        owner: Vec::with_capacity(total),
        succ: Vec::with_capacity(total),
        accepting: Vec::with_capacity(total),
        layer: Vec::with_capacity(total),
        code: Vec::with_capacity(total),
    };
    let acc: Vec<bool> = (0..states as u64).map(|q| arena.contains(arena.acc, q)).collect();
    for q in 0..states as u64 {
        g.owner.push(Owner::System);
        g.layer.push(0);
        g.code.push(q);
        g.accepting.push(acc[q as usize]);
        g.succ.push(Vec::new());
    }
    for q in 0..states as u64 {
        for x in 0..1u64 << nx {
            g.owner.push(Owner::Environment);
            g.layer.push(1);
            g.code.push(q);
            g.accepting.push(acc[q as usize]);
            g.succ.push(Vec::new());
            let n = g.node_of_choice(q, x);
            g.succ[q as usize].push(n);
        }
    }
    for q in 0..states as u64 {
        for x in 0..1u64 << nx {
            for y in 0..1u64 << ny {
                let to = arena.step_code(q, x, y);
                g.owner.push(Owner::System);
                g.layer.push(2);
                g.code.push(q);
                g.accepting.push(acc[q as usize]);
                g.succ.push(vec![to as usize]);
                let n = g.node_of_move(q, x, y);
                let c = g.node_of_choice(q, x);
                g.succ[c].push(n);
            }
        }
    }
    debug_assert_eq!(g.len(), total);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{build_component, compile_dfa, Automaton};
    use crate::logic::{parse_ltlf, Quant};
    use proptest::prelude::*;

    fn part(inputs: &[&str], outputs: &[&str]) -> VariablePartition {
        VariablePartition::new(inputs.iter().copied(), outputs.iter().copied()).unwrap()
    }

    fn comp(q: Quant, s: &str, p: &VariablePartition) -> Dwa {
        let dfa = compile_dfa(&parse_ltlf(s, None).unwrap(), &p.alphabet()).unwrap();
        crate::automata::minimize_dwa(&build_component(q, &dfa))
    }

    /// One state bit, δ(z, x, y) = x ∧ ¬y, state 1 accepting.
    fn toy() -> Arena {
        let p = part(&["y"], &["x"]);
        let mut a = Automaton::new(p.alphabet());
        a.add_state(false);
        a.add_state(true);
        let x = a.store.var(Var(0));
        let ny = a.store.nvar(Var(1));
        let g = a.store.and(x, ny);
        let h = a.store.not(g);
        for q in 0..2 {
            a.add_edge(q, g, 1);
            a.add_edge(q, h, 0);
        }
        build_arena(&[Dwa::new(a)], &Combiner::Comp(0), &p, &ArenaOptions::default()).unwrap()
    }

    #[test]
    fn cpre_toy_example() {
        let mut a = toy();
        let w = a.store.var(a.z[0]);
        assert!(a.cpre_s(w).is_false());
        // The environment cannot force z = 1 (x = 0 blocks it) but can
        // always force z = 0 by playing y = 1.
        assert!(a.cpre_e(w).is_false());
        let nw = a.store.not(w);
        assert!(a.cpre_e(nw).is_true());
        assert!(a.cpre_s(BddRef::TRUE).is_true());
        assert!(a.cpre_s(BddRef::FALSE).is_false());
    }

    #[test]
    fn next_bits_match_transitions() {
        let p = part(&["e"], &["a"]);
        let d = comp(Quant::Exists, "F(a & e)", &p);
        assert_eq!(d.len(), 2);
        let a = build_arena(std::slice::from_ref(&d), &Combiner::Comp(0), &p, &ArenaOptions::default()).unwrap();
        assert_eq!(a.z.len(), 1);
        for q in 0..2u64 {
            for x in 0..2u64 {
                for y in 0..2u64 {
                    let letter = x | y << 1;
                    assert_eq!(a.step_code(q, x, y), d.step(q as usize, letter) as u64);
                }
            }
        }
    }

    #[test]
    fn two_components_and() {
        let p = part(&["e"], &["a"]);
        let d1 = comp(Quant::Exists, "F a", &p);
        let d2 = comp(Quant::Forall, "G e", &p);
        let mut a = build_arena(
            &[d1.clone(), d2.clone()],
            &Combiner::And(vec![Combiner::Comp(0), Combiner::Comp(1)]),
            &p,
            &ArenaOptions::default(),
        )
        .unwrap();
        assert_eq!(a.z.len(), 2);
        let (c0, c1) = (a.components[0].acc, a.components[1].acc);
        let both = a.store.and(c0, c1);
        assert_eq!(a.acc, both);
    }

    #[test]
    fn single_state_has_no_bits() {
        let p = part(&["e"], &["a"]);
        let mut s = Automaton::new(p.alphabet());
        s.add_state(true);
        s.add_edge(0, BddRef::TRUE, 0);
        let a = build_arena(&[Dwa::new(s)], &Combiner::Comp(0), &p, &ArenaOptions::default()).unwrap();
        assert_eq!(a.z.len(), 0);
        assert!(a.acc.is_true());
    }

    #[test]
    fn encoding_overflow() {
        let p = part(&["e"], &["a"]);
        let d = comp(Quant::Exists, "F a", &p);
        let opts = ArenaOptions { bit_budget: 0, ..Default::default() };
        assert!(matches!(
            build_arena(&[d], &Combiner::Comp(0), &p, &opts),
            Err(Error::EncodingOverflow { needed: 1, budget: 0 })
        ));
    }

    #[test]
    fn explicit_layer_sizes() {
        let a = toy();
        let g = to_explicit(&a, DEFAULT_EXPLICIT_CAP).unwrap();
        assert_eq!(g.layer.iter().filter(|&&l| l == 0).count(), 2);
        assert_eq!(g.layer.iter().filter(|&&l| l == 1).count(), 4);
        assert_eq!(g.layer.iter().filter(|&&l| l == 2).count(), 8);
        assert!(matches!(to_explicit(&a, 1), Err(Error::ExplicitCap { .. })));
    }

    #[test]
    fn no_outputs_means_one_choice() {
        let p = part(&["e"], &[]);
        let d = comp(Quant::Exists, "F e", &p);
        let a = build_arena(&[d], &Combiner::Comp(0), &p, &ArenaOptions::default()).unwrap();
        let g = to_explicit(&a, DEFAULT_EXPLICIT_CAP).unwrap();
        for v in 0..g.len() {
            if g.layer[v] == 0 {
                assert_eq!(g.succ[v].len(), 1);
            }
        }
    }

    #[test]
    fn padding_codes_self_loop() {
        let p = part(&["e"], &["a"]);
        let d = comp(Quant::Forall, "G(a -> X e) & G(e -> X a)", &p);
        let a = build_arena(&[d.clone()], &Combiner::Comp(0), &p, &ArenaOptions::default()).unwrap();
        for code in d.len() as u64..1 << a.z.len() {
            assert!(!a.contains(a.acc, code));
            for x in 0..2 {
                for y in 0..2 {
                    assert_eq!(a.step_code(code, x, y), code);
                }
            }
        }
    }

    fn random_arena(seed: u64) -> Arena {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = part(&["y0", "y1"], &["x0"]);
        let n = rng.gen_range(2..=8);
        let mut a = Automaton::new(p.alphabet());
        for _ in 0..n {
            a.add_state(rng.gen_bool(0.5));
        }
        for q in 0..n {
            for l in 0..8u64 {
                let g = a.letter_guard(l);
                let t = rng.gen_range(0..n);
                a.add_edge(q, g, t);
            }
        }
        build_arena(&[Dwa::new(a)], &Combiner::Comp(0), &p, &ArenaOptions::default()).unwrap()
    }

    fn set_from_mask(a: &mut Arena, mask: u64) -> BddRef {
        let states = 1u64 << a.z.len();
        let mut s = BddRef::FALSE;
        for q in 0..states {
            if mask >> q & 1 == 1 {
                let lits: Vec<(Var, bool)> = a.z.iter().enumerate().map(|(b, &v)| (v, q >> b & 1 == 1)).collect();
                let c = a.store.cube(&lits);
                s = a.store.or(s, c);
            }
        }
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cpre_matches_explicit_step(seed in any::<u64>(), mask in any::<u64>(), mask2 in any::<u64>()) {
            let mut a = random_arena(seed);
            let g = to_explicit(&a, DEFAULT_EXPLICIT_CAP).unwrap();
            let states = 1u64 << a.z.len();
            let w = set_from_mask(&mut a, mask);
            let w2 = set_from_mask(&mut a, mask | mask2);
            let cs = a.cpre_s(w);
            let ce = a.cpre_e(w);
            let nw = a.store.not(w);
            let ce_not = a.cpre_e(nw);
            let union = a.store.or(cs, ce_not);
            prop_assert!(union.is_true());
            prop_assert!(a.store.and(cs, ce_not).is_false());
            let cs2 = a.cpre_s(w2);
            prop_assert!(a.store.diff(cs, cs2).is_false());
            for q in 0..states {
                let in_w = |v: usize| mask >> g.code[g.succ[v][0]] & 1 == 1;
                // System picks a choice node all of whose moves land in W.
                let sys = g.succ[q as usize].iter().any(|&c| g.succ[c].iter().all(|&m| in_w(m)));
                let env = g.succ[q as usize].iter().all(|&c| g.succ[c].iter().any(|&m| in_w(m)));
                prop_assert_eq!(a.contains(cs, q), sys);
                prop_assert_eq!(a.contains(ce, q), env);
            }
            let post_r = a.post_relational(w);
            let post_s = a.post_split(w);
            prop_assert_eq!(post_r, post_s);
        }
    }
}
