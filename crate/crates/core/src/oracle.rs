//! Random instances and differential checks against independent oracles.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{build_arena, to_explicit, Arena, ArenaOptions, DEFAULT_EXPLICIT_CAP};
use crate::automata::hoa::export_hoa;
use crate::automata::pipeline::CompileOptions;
use crate::automata::{compile_dfa, compile_obligation, minimize_dfa, tarjan, Automaton, Combiner, Dwa};
use crate::logic::semantics::{words, Closure};
use crate::logic::{Alphabet, Lasso, Letter, LtlfFormula, ObligationFormula, Quant, VariablePartition};
use crate::solve::{explicit_oracle_solve, solve, Domain, Objective, SccOptions, SolveOptions, SolverKind};

/// Random weak automaton: states are grouped into levels that are either
/// all accepting or all rejecting, and edges never go to an earlier level.
pub fn random_weak_dwa<R: Rng>(rng: &mut R, alphabet: &Alphabet, states: usize) -> Dwa {
    let states = states.max(1);
    let groups = rng.gen_range(1..=states.min(4));
    let mut level: Vec<usize> = (0..states).map(|_| rng.gen_range(0..groups)).collect();
    level.sort_unstable();
    level[0] = 0;
    let group_acc: Vec<bool> = (0..groups).map(|_| rng.gen_bool(0.5)).collect();
    let mut a = Automaton::new(alphabet.clone());
    for &l in &level {
        a.add_state(group_acc[l]);
    }
    for q in 0..states {
        let later: Vec<usize> = (0..states).filter(|&t| level[t] >= level[q]).collect();
        for letter in alphabet.letters() {
            let g = a.letter_guard(letter);
            let t = later[rng.gen_range(0..later.len())];
            a.add_edge(q, g, t);
        }
    }
    a.initial = 0;
    Dwa::new(a.trim())
}

/// Partition with outputs `x0..` and inputs `y0..`.
pub fn small_partition(outputs: usize, inputs: usize) -> VariablePartition {
    VariablePartition::new(
        (0..inputs).map(|i| format!("y{i}")),
        (0..outputs).map(|i| format!("x{i}")),
    )
    .expect("disjoint names")
}

/// One or two random weak components over `partition` with a random
/// combiner, at most `max_states` states each.
pub fn random_weak_game<R: Rng>(rng: &mut R, partition: &VariablePartition, max_states: usize) -> (Vec<Dwa>, Combiner) {
    let ab = partition.alphabet();
    let k = rng.gen_range(1..=2);
    let dwas: Vec<Dwa> = (0..k)
        .map(|_| {
            let n = rng.gen_range(1..=max_states);
            random_weak_dwa(rng, &ab, n)
        })
        .collect();
    let combiner = if k == 1 {
        Combiner::Comp(0)
    } else if rng.gen_bool(0.5) {
        Combiner::And(vec![Combiner::Comp(0), Combiner::Comp(1)])
    } else {
        Combiner::Or(vec![Combiner::Comp(0), Combiner::Comp(1)])
    };
    (dwas, combiner)
}

/// Random LTLf formula of at most `max_size` nodes over the given atoms.
pub fn random_ltlf<R: Rng>(rng: &mut R, atoms: &[String], max_size: usize) -> LtlfFormula {
    fn go<R: Rng>(rng: &mut R, atoms: &[String], budget: usize) -> LtlfFormula {
        if budget <= 1 {
            return match rng.gen_range(0..10) {
                0 => LtlfFormula::True,
                1 => LtlfFormula::False,
                _ => LtlfFormula::atom(atoms[rng.gen_range(0..atoms.len())].clone()),
            };
        }
        let rest = budget - 1;
        match rng.gen_range(0..9) {
            0 => LtlfFormula::not(go(rng, atoms, rest)),
            1 => LtlfFormula::strong_next(go(rng, atoms, rest)),
            2 => LtlfFormula::weak_next(go(rng, atoms, rest)),
            3 => LtlfFormula::eventually(go(rng, atoms, rest)),
            4 => LtlfFormula::always(go(rng, atoms, rest)),
            k if rest >= 2 => {
                let left = rng.gen_range(1..rest);
                let (a, b) = (go(rng, atoms, left), go(rng, atoms, rest - left));
                match k {
                    5 | 6 => LtlfFormula::and(a, b),
                    7 => LtlfFormula::or(a, b),
                    _ => LtlfFormula::until(a, b),
                }
            }
            _ => LtlfFormula::atom(atoms[rng.gen_range(0..atoms.len())].clone()),
        }
    }
    let budget = rng.gen_range(1..=max_size.max(1));
    go(rng, atoms, budget)
}

/// Random obligation formula: a Boolean combination of at most
/// `max_components` quantified payloads of at most `payload_size` nodes.
pub fn random_obligation<R: Rng>(rng: &mut R, atoms: &[String], max_components: usize, payload_size: usize) -> ObligationFormula {
    fn go<R: Rng>(rng: &mut R, atoms: &[String], budget: usize, size: usize) -> ObligationFormula {
        if budget <= 1 || rng.gen_bool(0.3) {
            let phi = random_ltlf(rng, atoms, size);
            let q = if rng.gen_bool(0.5) { Quant::Exists } else { Quant::Forall };
            let leaf = ObligationFormula::quantified(q, phi);
            return if rng.gen_bool(0.2) { ObligationFormula::not(leaf) } else { leaf };
        }
        let left = rng.gen_range(1..budget);
        let a = go(rng, atoms, left, size);
        let b = go(rng, atoms, budget - left, size);
        match rng.gen_range(0..5) {
            0 => ObligationFormula::not(ObligationFormula::And(vec![a, b])),
            1 | 2 => ObligationFormula::And(vec![a, b]),
            _ => ObligationFormula::Or(vec![a, b]),
        }
    }
    let budget = rng.gen_range(1..=max_components.max(1));
    go(rng, atoms, budget, payload_size)
}

/// A disagreement between a construction and its oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub check: &'static str,
    /// Serialized instance, shrunk where possible.
    pub instance: String,
    pub detail: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} mismatch: {}\n  instance: {}", self.check, self.detail, self.instance.replace('\n', "\n    "))
    }
}

/// Interns semantic rows so that stepping is a table lookup.
struct RowTable<'a> {
    closure: Closure<'a>,
    rows: Vec<Vec<bool>>,
    /// Keyed by emptiness too: row 0 is the empty trace.
    ids: HashMap<(bool, Vec<bool>), u32>,
    /// `step[row * letters + a]`, `u32::MAX` until computed.
    step: Vec<u32>,
    letters: usize,
    alphabet: Alphabet,
}

impl<'a> RowTable<'a> {
    fn new(phi: &'a LtlfFormula, alphabet: &Alphabet) -> Self {
        let closure = Closure::new(phi);
        let mut t = RowTable {
            closure,
            rows: Vec::new(),
            ids: HashMap::default(),
            step: Vec::new(),
            letters: alphabet.letter_count() as usize,
            alphabet: alphabet.clone(),
        };
        let eps = t.closure.eps_row();
        t.intern(true, eps);
        t
    }

    fn intern(&mut self, empty: bool, row: Vec<bool>) -> u32 {
        let key = (empty, row);
        if let Some(&i) = self.ids.get(&key) {
            return i;
        }
        let i = self.rows.len() as u32;
        let row = key.1.clone();
        self.ids.insert(key, i);
        self.rows.push(row);
        self.step.extend(std::iter::repeat(u32::MAX).take(self.letters));
        i
    }

    /// Row of `a · rest`, where `rest` has row id `r`.
    fn prepend(&mut self, a: Letter, r: u32) -> u32 {
        let k = r as usize * self.letters + a as usize;
        if self.step[k] != u32::MAX {
            return self.step[k];
        }
        let ab = &self.alphabet;
        let row = self.closure.step_row(
            |p| ab.index(p).is_some_and(|b| a >> b & 1 == 1),
            &self.rows[r as usize],
            r == 0,
        );
        let id = self.intern(false, row);
        self.step[k] = id;
        id
    }

    fn holds(&self, r: u32) -> bool {
        self.rows[r as usize][self.closure.root()]
    }
}

/// Compares the minimized DFA of `phi` with the trace semantics on every
/// trace of length at most `max_len`. Returns the number of traces.
pub fn check_dfa_traces(phi: &LtlfFormula, alphabet: &Alphabet, max_len: usize) -> Result<u64, Mismatch> {
    let fail = |detail: String| Mismatch {
        check: "dfa",
        instance: phi.to_string(),
        detail,
    };
    let dfa = compile_dfa(phi, alphabet)
        .map(|d| minimize_dfa(&d))
        .map_err(|e| fail(format!("compilation failed: {e}")))?;
    let table = dfa.0.table();
    let acc: Vec<bool> = dfa.0.states.iter().map(|s| s.accepting).collect();
    let mut sem = RowTable::new(phi, alphabet);
    let l = sem.letters;
    // Level `n` holds every trace of length `n`, first letter most significant.
    let mut rows = vec![0u32];
    let mut states = vec![dfa.0.initial as u32];
    let mut checked = 0u64;
    for n in 0..=max_len {
        if n > 0 {
            let span = rows.len();
            let mut next_rows = vec![0u32; span * l];
            let mut next_states = vec![0u32; span * l];
            for a in 0..l {
                for c in 0..span {
                    next_rows[a * span + c] = sem.prepend(a as Letter, rows[c]);
                }
            }
            for (code, s) in next_states.iter_mut().enumerate() {
                *s = table[states[code / l] as usize][code % l];
            }
            rows = next_rows;
            states = next_states;
        }
        for code in 0..rows.len() {
            checked += 1;
            if acc[states[code] as usize] != sem.holds(rows[code]) {
                let mut word = Vec::new();
                let mut c = code;
                for _ in 0..n {
                    word.push(c % l);
                    c /= l;
                }
                word.reverse();
                let shown: Vec<String> = word.iter().map(|&a| alphabet.show(a as Letter)).collect();
                return Err(fail(format!(
                    "trace [{}]: automaton says {}, semantics says {}",
                    shown.join(" "),
                    acc[states[code] as usize],
                    sem.holds(rows[code])
                )));
            }
        }
    }
    Ok(checked)
}

/// Per component: some / every position of the periodic part accepted.
type LoopFlags = Vec<(bool, bool)>;

fn dfa_loop(table: &[Vec<u32>], acc: &[bool], start: u32, v: &[Letter]) -> (bool, bool) {
    let mut seen = HashSet::default();
    let (mut any, mut all) = (false, true);
    let mut s = start;
    while seen.insert(s) {
        for &a in v {
            s = table[s as usize][a as usize];
            any |= acc[s as usize];
            all &= acc[s as usize];
        }
    }
    (any, all)
}

fn dwa_loop(table: &[Vec<u32>], acc: &[bool], start: u32, v: &[Letter]) -> bool {
    let mut first = HashMap::default();
    let mut boundary = vec![start];
    let mut s = start;
    first.insert(s, 0usize);
    loop {
        for &a in v {
            s = table[s as usize][a as usize];
        }
        if let Some(&i) = first.get(&s) {
            // Iterations i.. repeat forever.
            let mut t = boundary[i];
            for _ in i..boundary.len() {
                for &a in v {
                    t = table[t as usize][a as usize];
                    if acc[t as usize] {
                        return true;
                    }
                }
            }
            return false;
        }
        first.insert(s, boundary.len());
        boundary.push(s);
    }
}

fn eval_leaves(psi: &ObligationFormula, leaves: &[bool], next: &mut usize) -> bool {
    match psi {
        ObligationFormula::Exists(_) | ObligationFormula::Forall(_) => {
            *next += 1;
            leaves[*next - 1]
        }
        ObligationFormula::Not(a) => !eval_leaves(a, leaves, next),
        ObligationFormula::And(xs) => xs.iter().map(|x| eval_leaves(x, leaves, next)).fold(true, |a, b| a && b),
        ObligationFormula::Or(xs) => xs.iter().map(|x| eval_leaves(x, leaves, next)).fold(false, |a, b| a || b),
    }
}

/// Automaton under test in [`check_obligation_lassos`].
pub enum LassoTarget {
    /// The minimal product DWA of the given compile options.
    Minimal(CompileOptions),
    /// A given automaton.
    Given(Dwa),
}

/// Compares a DWA for `psi` with the quantifier semantics on every lasso
/// `u v^ω` with `|u| <= max_stem`, `1 <= |v| <= max_cycle`. Component
/// truth is read off the (separately checked) DFAs of the payloads of `psi`
/// itself, before any normal form. Returns the number of lassos.
pub fn check_obligation_lassos(
    psi: &ObligationFormula,
    alphabet: &Alphabet,
    max_stem: usize,
    max_cycle: usize,
    target: LassoTarget,
) -> Result<u64, Mismatch> {
    let fail = |detail: String| Mismatch {
        check: "dwa",
        instance: psi.to_string(),
        detail,
    };
    let dwa = match target {
        LassoTarget::Minimal(opts) => compile_obligation(psi, alphabet, &opts)
            .map_err(|e| fail(format!("compilation failed: {e}")))?
            .minimal(),
        LassoTarget::Given(d) => d,
    };
    let comps = psi.components();
    let mut dfas = Vec::new();
    for (_, phi) in &comps {
        let d = compile_dfa(phi, alphabet).map_err(|e| fail(format!("compilation failed: {e}")))?;
        dfas.push(minimize_dfa(&d).0);
    }
    let tables: Vec<Vec<Vec<u32>>> = dfas.iter().map(|d| d.table()).collect();
    let accs: Vec<Vec<bool>> = dfas.iter().map(|d| d.states.iter().map(|s| s.accepting).collect()).collect();
    let wt = dwa.aut.table();
    let wacc: Vec<bool> = dwa.states.iter().map(|s| s.accepting).collect();
    let l = alphabet.letter_count();
    let cycles: Vec<Vec<Letter>> = (1..=max_cycle).flat_map(|n| words(l, n)).collect();
    let mut memo: HashMap<(u32, Vec<u32>), Vec<(bool, LoopFlags)>> = HashMap::default();
    let mut checked = 0u64;
    for n in 0..=max_stem {
        for u in words(l, n) {
            let mut q = dwa.initial as u32;
            let mut ps: Vec<u32> = dfas.iter().map(|d| d.initial as u32).collect();
            let mut any_u = vec![false; comps.len()];
            let mut all_u = vec![true; comps.len()];
            for &a in &u {
                q = wt[q as usize][a as usize];
                for k in 0..comps.len() {
                    ps[k] = tables[k][ps[k] as usize][a as usize];
                    any_u[k] |= accs[k][ps[k] as usize];
                    all_u[k] &= accs[k][ps[k] as usize];
                }
            }
            let results = memo.entry((q, ps.clone())).or_insert_with(|| {
                cycles
                    .iter()
                    .map(|v| {
                        let flags = (0..comps.len()).map(|k| dfa_loop(&tables[k], &accs[k], ps[k], v)).collect();
                        (dwa_loop(&wt, &wacc, q, v), flags)
                    })
                    .collect()
            });
            for (v, (accepted, flags)) in cycles.iter().zip(results.iter()) {
                checked += 1;
                let leaves: Vec<bool> = comps
                    .iter()
                    .enumerate()
                    .map(|(k, (quant, _))| match quant {
                        Quant::Exists => any_u[k] || flags[k].0,
                        Quant::Forall => all_u[k] && flags[k].1,
                    })
                    .collect();
                let expected = eval_leaves(psi, &leaves, &mut 0);
                if expected != *accepted {
                    let lasso = Lasso::new(u.clone(), v.clone());
                    return Err(fail(format!(
                        "lasso {}: automaton says {accepted}, semantics says {expected}",
                        lasso.show(alphabet)
                    )));
                }
            }
        }
    }
    Ok(checked)
}

/// Greedy shrinking: replaces the formula by a smaller one that still fails.
pub fn shrink_ltlf(phi: &LtlfFormula, fails: &dyn Fn(&LtlfFormula) -> bool) -> LtlfFormula {
    let mut cur = phi.clone();
    'outer: loop {
        for cand in ltlf_candidates(&cur) {
            if cand.size() < cur.size() && fails(&cand) {
                cur = cand;
                continue 'outer;
            }
        }
        return cur;
    }
}

/// The formula with one subformula replaced by one of its children or a
/// constant.
fn ltlf_candidates(f: &LtlfFormula) -> Vec<LtlfFormula> {
    let mut out: Vec<LtlfFormula> = f.children().into_iter().cloned().collect();
    if !matches!(f, LtlfFormula::True | LtlfFormula::False) {
        out.push(LtlfFormula::True);
        out.push(LtlfFormula::False);
    }
    let kids: Vec<LtlfFormula> = f.children().into_iter().cloned().collect();
    for (i, k) in kids.iter().enumerate() {
        for smaller in ltlf_candidates(k) {
            let mut ks = kids.clone();
            ks[i] = smaller;
            out.push(f.with_children(ks));
        }
    }
    out
}

pub fn shrink_obligation(psi: &ObligationFormula, fails: &dyn Fn(&ObligationFormula) -> bool) -> ObligationFormula {
    let mut cur = psi.clone();
    'outer: loop {
        for cand in obligation_candidates(&cur) {
            if cand.size() < cur.size() && fails(&cand) {
                cur = cand;
                continue 'outer;
            }
        }
        return cur;
    }
}

fn obligation_candidates(psi: &ObligationFormula) -> Vec<ObligationFormula> {
    use ObligationFormula as O;
    match psi {
        O::Exists(phi) | O::Forall(phi) => {
            let q = if matches!(psi, O::Exists(_)) { Quant::Exists } else { Quant::Forall };
            ltlf_candidates(phi).into_iter().map(|p| O::quantified(q, p)).collect()
        }
        O::Not(a) => {
            let mut out = vec![(**a).clone()];
            out.extend(obligation_candidates(a).into_iter().map(O::not));
            out
        }
        O::And(xs) | O::Or(xs) => {
            let mut out: Vec<O> = xs.clone();
            for (i, x) in xs.iter().enumerate() {
                for c in obligation_candidates(x) {
                    let mut ys = xs.clone();
                    ys[i] = c;
                    out.push(if matches!(psi, O::And(_)) { O::And(ys) } else { O::Or(ys) });
                }
            }
            out
        }
    }
}

/// Solves one arena with every solver and the explicit oracle and reports
/// the first disagreement. `under_test` is the arena given to the symbolic
/// solvers; the oracle always solves `reference`.
pub fn check_game(reference: &Arena, under_test: &Arena) -> Result<(), String> {
    let g = to_explicit(reference, DEFAULT_EXPLICIT_CAP).map_err(|e| e.to_string())?;
    let buchi = explicit_oracle_solve(&g, Objective::Buchi);
    let cobuchi = explicit_oracle_solve(&g, Objective::CoBuchi);
    let n = g.states();
    for v in 0..g.len() {
        if buchi.system[v] == buchi.environment[v] {
            return Err(format!("explicit node {v} is won by both or neither player"));
        }
    }
    if buchi.system != cobuchi.system {
        return Err("explicit Büchi and co-Büchi regions differ".into());
    }
    let opts = SolveOptions {
        scc: SccOptions {
            domain: Domain::All,
            ..Default::default()
        },
        ..Default::default()
    };
    for kind in SolverKind::ALL {
        let mut a = under_test.clone();
        let r = solve(&mut a, kind, &opts).map_err(|e| format!("{kind}: {e}"))?;
        if let Some(q) = (0..n as u64).find(|&q| a.contains(r.region, q) != buchi.system[q as usize]) {
            return Err(format!(
                "{kind} and the explicit oracle disagree on state {q:#x} ({} vs {})",
                a.contains(r.region, q),
                buchi.system[q as usize]
            ));
        }
    }
    Ok(())
}

fn game_text(dwas: &[Dwa], combiner: &Combiner) -> String {
    let mut t = format!("combiner {combiner:?}\n");
    for (i, d) in dwas.iter().enumerate() {
        t.push_str(&export_hoa(&d.aut, &format!("component {i}"), None));
    }
    t
}

/// Deliberate corruption used to test that the checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Flip the acceptance of one state of the automaton under test.
    FlipAccepting,
}

/// Flips the acceptance of one reachable state on a cycle, preferring a
/// rejecting one. Flipping a transient state would not change the language.
fn flip_one<R: Rng>(rng: &mut R, d: &Dwa) -> Dwa {
    let mut a = d.aut.clone();
    let succ: Vec<Vec<usize>> = (0..a.len()).map(|q| a.successors(q).collect()).collect();
    let (comp, count) = tarjan(&succ);
    let mut size = vec![0usize; count];
    for &c in &comp {
        size[c] += 1;
    }
    let mut seen = vec![false; a.len()];
    let mut stack = vec![a.initial];
    seen[a.initial] = true;
    while let Some(q) = stack.pop() {
        for &t in &succ[q] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let cyclic = |q: usize| seen[q] && (size[comp[q]] > 1 || succ[q].contains(&q));
    let rejecting: Vec<usize> = (0..a.len()).filter(|&q| cyclic(q) && !a.states[q].accepting).collect();
    let any: Vec<usize> = (0..a.len()).filter(|&q| cyclic(q)).collect();
    let pool = if !rejecting.is_empty() { rejecting } else if !any.is_empty() { any } else { (0..a.len()).collect() };
    let k = pool[rng.gen_range(0..pool.len())];
    a.states[k].accepting = !a.states[k].accepting;
    Dwa::new(a)
}

#[derive(Clone, Debug)]
pub struct CampaignOptions {
    pub seed: u64,
    pub ltlf: usize,
    pub ltlf_size: usize,
    pub ltlf_atoms: usize,
    pub trace_len: usize,
    pub obligations: usize,
    pub obligation_components: usize,
    pub payload_size: usize,
    pub lasso_atoms: usize,
    pub lasso_stem: usize,
    pub lasso_cycle: usize,
    pub games: usize,
    pub game_states: usize,
    pub fault: Option<Fault>,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            seed: 0,
            ltlf: 500,
            ltlf_size: 8,
            ltlf_atoms: 3,
            trace_len: 6,
            obligations: 200,
            obligation_components: 3,
            payload_size: 5,
            lasso_atoms: 2,
            lasso_stem: 4,
            lasso_cycle: 4,
            games: 1000,
            game_states: 8,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CampaignReport {
    pub ltlf_checked: usize,
    pub traces: u64,
    pub obligations_checked: usize,
    pub lassos: u64,
    pub games_checked: usize,
    /// Largest number of state codes among the game arenas.
    pub max_game_codes: u64,
    pub mismatches: Vec<Mismatch>,
}

impl CampaignReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Plain text, identical for identical options.
    pub fn text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "ltlf formulas: {} ({} traces)", self.ltlf_checked, self.traces);
        let _ = writeln!(t, "obligation formulas: {} ({} lassos)", self.obligations_checked, self.lassos);
        let _ = writeln!(t, "weak games: {} (at most {} states)", self.games_checked, self.max_game_codes);
        let _ = writeln!(t, "mismatches: {}", self.mismatches.len());
        for m in &self.mismatches {
            let _ = writeln!(t, "{m}");
        }
        t
    }
}

fn atoms(n: usize) -> Vec<String> {
    (0..n).map(|i| ["p", "q", "r", "s"].get(i).map_or_else(|| format!("p{i}"), |s| s.to_string())).collect()
}

/// Runs the three differential suites. Each suite draws from its own
/// generator seeded from `seed`, so their sizes can change independently.
pub fn run_campaign(opts: &CampaignOptions) -> CampaignReport {
    let mut rep = CampaignReport::default();
    let fault = opts.fault;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ab = Alphabet::new(atoms(opts.ltlf_atoms));
    for _ in 0..opts.ltlf {
        let phi = random_ltlf(&mut rng, ab.names(), opts.ltlf_size);
        rep.ltlf_checked += 1;
        match check_dfa_traces(&phi, &ab, opts.trace_len) {
            Ok(n) => rep.traces += n,
            Err(mut m) => {
                let small = shrink_ltlf(&phi, &|f| check_dfa_traces(f, &ab, opts.trace_len).is_err());
                m.instance = small.to_string();
                rep.mismatches.push(m);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9);
    let ab = Alphabet::new(atoms(opts.lasso_atoms));
    for _ in 0..opts.obligations {
        let psi = random_obligation(&mut rng, ab.names(), opts.obligation_components, opts.payload_size);
        rep.obligations_checked += 1;
        let (stem, cycle) = (opts.lasso_stem, opts.lasso_cycle);
        let target = |psi: &ObligationFormula, rng: &mut ChaCha8Rng| -> LassoTarget {
            match fault {
                None => LassoTarget::Minimal(CompileOptions::default()),
                Some(Fault::FlipAccepting) => {
                    let c = compile_obligation(psi, &ab, &CompileOptions::default()).expect("small formula");
                    LassoTarget::Given(flip_one(rng, &c.minimal()))
                }
            }
        };
        let t = target(&psi, &mut rng);
        match check_obligation_lassos(&psi, &ab, stem, cycle, t) {
            Ok(n) => rep.lassos += n,
            Err(mut m) => {
                if fault.is_none() {
                    let small = shrink_obligation(&psi, &|f| {
                        check_obligation_lassos(f, &ab, stem, cycle, LassoTarget::Minimal(CompileOptions::default()))
                            .is_err()
                    });
                    m.instance = small.to_string();
                }
                rep.mismatches.push(m);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x85eb_ca6b);
    let p = small_partition(1, 2);
    let games: Vec<(Vec<Dwa>, Combiner, Option<Dwa>)> = (0..opts.games)
        .map(|_| {
            let (dwas, comb) = random_weak_game(&mut rng, &p, opts.game_states);
            let bad = fault.map(|Fault::FlipAccepting| flip_one(&mut rng, &dwas[0]));
            (dwas, comb, bad)
        })
        .collect();
    let outcomes = crate::par::map(&games, |(dwas, comb, bad)| {
        let reference = build_arena(dwas, comb, &p, &ArenaOptions::default()).expect("small arena");
        let codes = 1u64 << reference.num_state_bits();
        let tested = match bad {
            None => reference.clone(),
            Some(b) => {
                let mut ds = dwas.clone();
                ds[0] = b.clone();
                build_arena(&ds, comb, &p, &ArenaOptions::default()).expect("small arena")
            }
        };
        (codes, check_game(&reference, &tested))
    });
    for ((dwas, comb, _), (codes, outcome)) in games.iter().zip(outcomes) {
        rep.games_checked += 1;
        rep.max_game_codes = rep.max_game_codes.max(codes);
        if let Err(detail) = outcome {
            rep.mismatches.push(Mismatch {
                check: "game",
                instance: game_text(dwas, comb),
                detail,
            });
        }
    }
    rep
}
