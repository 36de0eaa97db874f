//! Winning regions of weak games: classical nested fixpoints, alternating
//! safety/reachability, SCC-based solving, and an explicit oracle.

pub mod explicit;
pub mod scc;

use serde::{Deserialize, Serialize};

use crate::arena::{to_explicit, Arena, ArenaOptions, DEFAULT_EXPLICIT_CAP};
use crate::automata::{build_component, compile_dfa_with_budget, minimize_dfa, minimize_dwa, Combiner, DEFAULT_STATE_BUDGET};
use crate::bdd::{BddRef, Var};
use crate::error::{Error, Result};
use crate::logic::{LtlfFormula, Quant, VariablePartition};

pub use explicit::{explicit_oracle_solve, ExplicitSolution, Objective};
pub use scc::{solve_weak_scc, sym_scc_decompose, Domain, ImageMode, SccOptions, SymbolicSccSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Buchi,
    CoBuchi,
    SafeReach,
    Scc,
    Explicit,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Buchi,
        SolverKind::CoBuchi,
        SolverKind::SafeReach,
        SolverKind::Scc,
        SolverKind::Explicit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Buchi => "buchi",
            SolverKind::CoBuchi => "cobuchi",
            SolverKind::SafeReach => "safereach",
            SolverKind::Scc => "scc",
            SolverKind::Explicit => "explicit",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown solver '{s}' (expected buchi, cobuchi, safereach, scc or explicit)"))
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LayerKind {
    /// Reached by forcing the play into the previous layer.
    Reach,
    /// Reached by staying inside the layer (accepting) or descending.
    Safety,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layer {
    /// Cumulative set: every earlier layer is contained in it.
    pub set: BddRef,
    pub kind: LayerKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Outer loop bodies executed.
    pub outer_iters: u64,
    /// Inner fixpoint rounds that changed the iterate, not counting the
    /// first evaluation of each fixpoint.
    pub inner_iters: u64,
    /// All fixpoint operator evaluations.
    pub fixpoint_evals: u64,
    /// Loop-guard evaluations of the outer loop.
    pub guard_checks: u64,
    /// BDD operations spent by the solver.
    pub bdd_ops: u64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub solver: SolverKind,
    pub region: BddRef,
    pub realizable: bool,
    pub layers: Vec<Layer>,
    /// `W_0, W_1, W_2, ...` of the alternating solver; empty otherwise.
    pub chain: Vec<BddRef>,
    pub stats: SolveStats,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub scc: SccOptions,
    pub explicit_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            scc: SccOptions::default(),
            explicit_cap: DEFAULT_EXPLICIT_CAP,
        }
    }
}

/// Runs `f` on `x` and records the evaluation.
fn eval(a: &mut Arena, st: &mut SolveStats, f: impl FnOnce(&mut Arena) -> BddRef) -> Result<BddRef> {
    let r = f(a);
    st.fixpoint_evals += 1;
    a.store.check()?;
    Ok(r)
}

/// `μX. T ∪ (W ∩ CPre_s(X))`. Every changed iterate is passed to `layer`.
pub fn reach_with(
    a: &mut Arena,
    w: BddRef,
    t: BddRef,
    st: &mut SolveStats,
    mut layer: impl FnMut(BddRef),
) -> Result<BddRef> {
    let mut x = BddRef::FALSE;
    let mut first = true;
    loop {
        let next = eval(a, st, |a| {
            let c = a.cpre_s(x);
            let wc = a.store.and(w, c);
            a.store.or(t, wc)
        })?;
        if next == x {
            return Ok(x);
        }
        if !first {
            st.inner_iters += 1;
        }
        first = false;
        x = next;
        layer(x);
    }
}

/// `νX. T ∪ (W ∩ CPre_s(X))`.
pub fn safe_with(a: &mut Arena, w: BddRef, t: BddRef, st: &mut SolveStats) -> Result<BddRef> {
    let mut x = BddRef::TRUE;
    let mut first = true;
    loop {
        let next = eval(a, st, |a| {
            let c = a.cpre_s(x);
            let wc = a.store.and(w, c);
            a.store.or(t, wc)
        })?;
        if next == x {
            return Ok(x);
        }
        if !first {
            st.inner_iters += 1;
        }
        first = false;
        x = next;
    }
}

pub fn reach(a: &mut Arena, w: BddRef, t: BddRef) -> BddRef {
    reach_with(a, w, t, &mut SolveStats::default(), |_| {}).expect("node cap exceeded")
}

pub fn safe(a: &mut Arena, w: BddRef, t: BddRef) -> BddRef {
    safe_with(a, w, t, &mut SolveStats::default()).expect("node cap exceeded")
}

fn push_layer(layers: &mut Vec<Layer>, set: BddRef, kind: LayerKind) {
    if layers.last().is_some_and(|l| l.set == set) {
        return;
    }
    layers.push(Layer { set, kind });
}

/// Bound on rounds of a nested fixpoint over the arena's state codes.
fn round_bound(a: &Arena) -> u128 {
    let n = 1u128 << a.z.len().min(60);
    (n + 1) * (n + 1)
}

fn finish(a: &Arena, solver: SolverKind, region: BddRef, layers: Vec<Layer>, chain: Vec<BddRef>, mut stats: SolveStats, ops0: u64) -> SolveResult {
    stats.bdd_ops = a.store.stats().ops - ops0;
    SolveResult {
        solver,
        region,
        realizable: a.contains(region, a.init_code),
        layers,
        chain,
        stats,
    }
}

/// Classical Büchi fixpoint `νX. μY. (F ∩ CPre_s(X)) ∪ CPre_s(Y)`.
/// Strategy layers are taken from a co-Büchi pass, which on weak arenas
/// yields the same region (checked).
pub fn solve_buchi(a: &mut Arena) -> Result<SolveResult> {
    let ops0 = a.store.stats().ops;
    let f = a.acc;
    let mut st = SolveStats::default();
    let mut x = f;
    let mut x2 = BddRef::TRUE;
    loop {
        st.guard_checks += 1;
        if x == x2 {
            break;
        }
        st.outer_iters += 1;
        x = x2;
        let target = eval(a, &mut st, |a| {
            let c = a.cpre_s(x);
            a.store.and(f, c)
        })?;
        let mut y = BddRef::TRUE;
        let mut y2 = BddRef::FALSE;
        let mut first = true;
        while y != y2 {
            y = y2;
            y2 = eval(a, &mut st, |a| {
                let c = a.cpre_s(y);
                a.store.or(target, c)
            })?;
            if y2 != y && !first {
                st.inner_iters += 1;
            }
            first = false;
        }
        x2 = y;
        if st.fixpoint_evals as u128 > 2 * round_bound(a) {
            return Err(Error::Internal("Büchi fixpoint did not converge".into()));
        }
    }
    let strat = cobuchi_core(a, &mut SolveStats::default())?;
    if strat.0 != x {
        return Err(Error::NotWeak(
            "Büchi and co-Büchi regions differ, so the arena is not weak".into(),
        ));
    }
    Ok(finish(a, SolverKind::Buchi, x, strat.1, Vec::new(), st, ops0))
}

/// Co-Büchi fixpoint: outer least, inner greatest. Each outer iterate is a
/// safety layer.
fn cobuchi_core(a: &mut Arena, st: &mut SolveStats) -> Result<(BddRef, Vec<Layer>)> {
    let f = a.acc;
    let mut x = BddRef::TRUE;
    let mut x2 = BddRef::FALSE;
    let mut layers = Vec::new();
    loop {
        st.guard_checks += 1;
        if x == x2 {
            break;
        }
        st.outer_iters += 1;
        x = x2;
        let target = eval(a, st, |a| a.cpre_s(x))?;
        let mut y = BddRef::FALSE;
        let mut y2 = BddRef::TRUE;
        let mut first = true;
        while y != y2 {
            y = y2;
            y2 = eval(a, st, |a| {
                let c = a.cpre_s(y);
                let fc = a.store.and(f, c);
                a.store.or(target, fc)
            })?;
            if y2 != y && !first {
                st.inner_iters += 1;
            }
            first = false;
        }
        x2 = y;
        if x2 != x {
            push_layer(&mut layers, x2, LayerKind::Safety);
        }
        if st.fixpoint_evals as u128 > 2 * round_bound(a) {
            return Err(Error::Internal("co-Büchi fixpoint did not converge".into()));
        }
    }
    Ok((x, layers))
}

pub fn solve_cobuchi(a: &mut Arena) -> Result<SolveResult> {
    let ops0 = a.store.stats().ops;
    let mut st = SolveStats::default();
    let (region, layers) = cobuchi_core(a, &mut st)?;
    Ok(finish(a, SolverKind::CoBuchi, region, layers, Vec::new(), st, ops0))
}

/// Alternates `W_{2i+1} = Safe(F, W_{2i})` and `W_{2i+2} = Reach(V, W_{2i+1})`
/// from `W_0 = ∅` until two even iterates agree.
pub fn solve_safereach(a: &mut Arena) -> Result<SolveResult> {
    let ops0 = a.store.stats().ops;
    let f = a.acc;
    let mut st = SolveStats::default();
    let mut chain = vec![BddRef::FALSE];
    let mut layers: Vec<Layer> = Vec::new();
    let mut prev_even = BddRef::TRUE;
    let mut even = BddRef::FALSE;
    loop {
        st.guard_checks += 1;
        if even == prev_even {
            break;
        }
        st.outer_iters += 1;
        let odd = safe_with(a, f, even, &mut st)?;
        debug_assert!(a.store.diff(even, odd).is_false());
        push_layer(&mut layers, odd, LayerKind::Safety);
        let mut reach_layers = Vec::new();
        let next = reach_with(a, BddRef::TRUE, odd, &mut st, |x| reach_layers.push(x))?;
        for x in reach_layers {
            push_layer(&mut layers, x, LayerKind::Reach);
        }
        if !a.store.diff(odd, next).is_false() {
            return Err(Error::Internal("alternating chain is not monotone".into()));
        }
        chain.push(odd);
        chain.push(next);
        prev_even = even;
        even = next;
        if st.outer_iters as u128 > round_bound(a) {
            return Err(Error::NotWeak("alternating solver exceeded its round bound".into()));
        }
    }
    Ok(finish(a, SolverKind::SafeReach, even, layers, chain, st, ops0))
}

/// Symbolic set of the given state codes.
pub fn set_of_codes(a: &mut Arena, codes: impl IntoIterator<Item = u64>) -> BddRef {
    let z = a.z.clone();
    let mut s = BddRef::FALSE;
    for q in codes {
        let lits: Vec<(Var, bool)> = z.iter().enumerate().map(|(b, &v)| (v, q >> b & 1 == 1)).collect();
        let c = a.store.cube(&lits);
        s = a.store.or(s, c);
    }
    s
}

/// Explicit oracle on the three-layer graph; layers come from the co-Büchi
/// pass, the region from the oracle (they are checked to agree).
pub fn solve_explicit(a: &mut Arena, cap: usize) -> Result<SolveResult> {
    let ops0 = a.store.stats().ops;
    let g = to_explicit(a, cap)?;
    let sol = explicit_oracle_solve(&g, Objective::Buchi);
    let codes: Vec<u64> = (0..g.states()).filter(|&v| sol.system[v]).map(|v| v as u64).collect();
    let region = set_of_codes(a, codes);
    let mut st = SolveStats::default();
    let (sym, layers) = cobuchi_core(a, &mut st)?;
    if sym != region {
        return Err(Error::Internal("explicit oracle disagrees with the symbolic region".into()));
    }
    let st = SolveStats {
        outer_iters: sol.rounds,
        ..Default::default()
    };
    Ok(finish(a, SolverKind::Explicit, region, layers, Vec::new(), st, ops0))
}

/// Dispatches to the requested solver.
pub fn solve(a: &mut Arena, kind: SolverKind, opts: &SolveOptions) -> Result<SolveResult> {
    match kind {
        SolverKind::Buchi => solve_buchi(a),
        SolverKind::CoBuchi => solve_cobuchi(a),
        SolverKind::SafeReach => solve_safereach(a),
        SolverKind::Scc => {
            let sccs = sym_scc_decompose(a, &opts.scc)?;
            solve_weak_scc(a, &sccs)
        }
        SolverKind::Explicit => solve_explicit(a, opts.explicit_cap),
    }
}

/// Plain LTLf synthesis: reachability of the accepting sink of `∃ phi`.
pub fn synth_ltlf(phi: &LtlfFormula, partition: &VariablePartition) -> Result<(Arena, SolveResult)> {
    let dfa = minimize_dfa(&compile_dfa_with_budget(phi, &partition.alphabet(), DEFAULT_STATE_BUDGET)?);
    let dwa = minimize_dwa(&build_component(Quant::Exists, &dfa));
    let mut a = crate::arena::build_arena(&[dwa], &Combiner::Comp(0), partition, &ArenaOptions::default())?;
    let ops0 = a.store.stats().ops;
    let mut st = SolveStats::default();
    let mut layers = Vec::new();
    let acc = a.acc;
    // The accepting states form a sink, so the target is a safety layer.
    push_layer(&mut layers, acc, LayerKind::Safety);
    let region = reach_with(&mut a, BddRef::TRUE, acc, &mut st, |x| {
        push_layer(&mut layers, x, LayerKind::Reach)
    })?;
    st.outer_iters = 1;
    let r = finish(&a, SolverKind::SafeReach, region, layers, Vec::new(), st, ops0);
    Ok((a, r))
}

#[cfg(test)]
mod tests;
