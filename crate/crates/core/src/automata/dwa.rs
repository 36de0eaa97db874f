//! Weak automata for quantified components, Boolean closure, ranks and
//! minimization.

use std::collections::{BTreeMap, VecDeque};

use rustc_hash::FxHashMap as HashMap;

use crate::bdd::BddRef;
use crate::logic::{Lasso, Quant};

use super::{tarjan, Automaton, Dfa, Dwa};

/// Turns a DFA into a weak automaton for `Q Φ` over nonempty prefixes.
pub fn build_component(q: Quant, dfa: &Dfa) -> Dwa {
    let mut a = dfa.0.trim();
    let want_initial = q == Quant::Forall;
    if a.states[a.initial].accepting != want_initial {
        let has_incoming = a
            .states
            .iter()
            .any(|s| s.edges.iter().any(|e| e.to == a.initial));
        if has_incoming {
            let copy = a.add_state(want_initial);
            a.states[copy].edges = a.states[a.initial].edges.clone();
            a.initial = copy;
        } else {
            let init = a.initial;
            a.states[init].accepting = want_initial;
        }
    }
    // Absorbing sinks: accepting states for Exists, rejecting ones for Forall.
    let sink_acc = q == Quant::Exists;
    let sinks: Vec<usize> = (0..a.len())
        .filter(|&s| a.states[s].accepting == sink_acc && s != a.initial)
        .collect();
    if let Some(&keep) = sinks.first() {
        for &s in &sinks {
            a.states[s].edges.clear();
        }
        a.states[keep].edges = vec![super::Edge {
            guard: BddRef::TRUE,
            to: keep,
        }];
        for s in 0..a.len() {
            let edges = std::mem::take(&mut a.states[s].edges);
            for e in edges {
                let to = if sinks.contains(&e.to) { keep } else { e.to };
                a.add_edge(s, e.guard, to);
            }
        }
    }
    let a = a.trim();
    let provenance = a.states.iter().map(|s| vec![s.accepting]).collect();
    Dwa {
        aut: a,
        provenance: Some(provenance),
        scc: None,
        rank: None,
    }
}

fn product(a: &Dwa, b: &Dwa, accept: impl Fn(bool, bool) -> bool) -> Dwa {
    assert_eq!(a.alphabet, b.alphabet, "product operands need the same alphabet");
    let mut out = a.aut.empty_like();
    let ga: Vec<Vec<(BddRef, usize)>> = a
        .states
        .iter()
        .map(|s| {
            s.edges
                .iter()
                .map(|e| (out.store.import(&a.store, e.guard, &|v| v), e.to))
                .collect()
        })
        .collect();
    let gb: Vec<Vec<(BddRef, usize)>> = b
        .states
        .iter()
        .map(|s| {
            s.edges
                .iter()
                .map(|e| (out.store.import(&b.store, e.guard, &|v| v), e.to))
                .collect()
        })
        .collect();
    let prov = |d: &Dwa, q: usize| -> Vec<bool> {
        match &d.provenance {
            Some(p) => p[q].clone(),
            None => vec![d.states[q].accepting],
        }
    };
    let mut ids: HashMap<(usize, usize), usize> = HashMap::default();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut provenance: Vec<Vec<bool>> = Vec::new();
    let mut queue = VecDeque::new();
    let start = (a.initial, b.initial);
    ids.insert(start, out.add_state(accept(a.states[start.0].accepting, b.states[start.1].accepting)));
    pairs.push(start);
    queue.push_back(start);
    while let Some((p, q)) = queue.pop_front() {
        let from = ids[&(p, q)];
        for &(g1, t1) in &ga[p] {
            for &(g2, t2) in &gb[q] {
                let g = out.store.and(g1, g2);
                if g.is_false() {
                    continue;
                }
                let to = *ids.entry((t1, t2)).or_insert_with(|| {
                    pairs.push((t1, t2));
                    queue.push_back((t1, t2));
                    out.add_state(accept(a.states[t1].accepting, b.states[t2].accepting))
                });
                out.add_edge(from, g, to);
            }
        }
    }
    for &(p, q) in &pairs {
        let mut v = prov(a, p);
        v.extend(prov(b, q));
        provenance.push(v);
    }
    out.initial = 0;
    Dwa {
        aut: out,
        provenance: Some(provenance),
        scc: None,
        rank: None,
    }
}

/// Intersection: reachable product with acceptance `F1 × F2`.
pub fn dwa_and(a: &Dwa, b: &Dwa) -> Dwa {
    product(a, b, |x, y| x && y)
}

/// Union: reachable product with acceptance `F1 × Q2 ∪ Q1 × F2`.
pub fn dwa_or(a: &Dwa, b: &Dwa) -> Dwa {
    product(a, b, |x, y| x || y)
}

/// Complement by swapping accepting and rejecting states.
pub fn dwa_not(a: &Dwa) -> Dwa {
    let mut out = a.clone();
    for s in out.aut.states.iter_mut() {
        s.accepting = !s.accepting;
    }
    out.rank = None;
    out
}

/// Returns an accepting/rejecting pair of states sharing an SCC, if any.
pub fn weakness_witness(a: &Automaton) -> Option<(usize, usize)> {
    let (comp, n) = a.sccs();
    let mut acc = vec![None; n];
    let mut rej = vec![None; n];
    for q in 0..a.len() {
        let slot = if a.states[q].accepting { &mut acc } else { &mut rej };
        slot[comp[q]].get_or_insert(q);
    }
    (0..n).find_map(|c| Some((acc[c]?, rej[c]?)))
}

pub fn check_weak(a: &Automaton) -> bool {
    weakness_witness(a).is_none()
}

/// Annotates SCC ids and ranks.
pub fn compute_ranks(a: &Dwa) -> Dwa {
    let (comp, n) = a.sccs();
    let recurrent = a.recurrent(&comp);
    let mut comp_acc = vec![false; n];
    let mut comp_rec = vec![false; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..a.len() {
        comp_acc[comp[q]] = a.states[q].accepting;
        comp_rec[comp[q]] |= recurrent[q];
        for t in a.successors(q) {
            if comp[t] != comp[q] {
                succ[comp[q]].push(comp[t]);
            }
        }
    }
    // Tarjan numbers successors first, so one ascending pass suffices.
    let mut rank = vec![0u32; n];
    for c in 0..n {
        let acc_parity = if comp_acc[c] { 0 } else { 1 };
        rank[c] = match succ[c].iter().map(|&d| rank[d]).max() {
            None => acc_parity,
            Some(l) if !comp_rec[c] => l,
            Some(l) if l % 2 == acc_parity => l,
            Some(l) => l + 1,
        };
    }
    let mut out = a.clone();
    out.rank = Some((0..a.len()).map(|q| rank[comp[q]]).collect());
    out.scc = Some(comp);
    out
}

/// Minimal DWA: re-mark states by rank parity, then refine. The result is
/// in canonical numbering and carries no provenance.
pub fn minimize_dwa(a: &Dwa) -> Dwa {
    let trimmed = Dwa::new(a.aut.trim());
    let ranked = compute_ranks(&trimmed);
    let rank = ranked.rank.clone().unwrap();
    let mut aut = ranked.aut;
    let even: Vec<bool> = rank.iter().map(|r| r % 2 == 0).collect();
    let labels: Vec<u64> = even.iter().map(|&b| b as u64).collect();
    let block = aut.refine(&labels);
    let mut q = aut.quotient(&block, &even);
    Dwa::new(q.canonical())
}

/// Acceptance of `u·v^ω`: run `u`, iterate `v` until a loop boundary state
/// repeats, then inspect the states on the repeated period.
pub fn dwa_accepts_lasso(a: &Automaton, lasso: &Lasso) -> bool {
    let mut q = a.run(&lasso.stem);
    let mut seen: HashMap<usize, usize> = HashMap::default();
    let mut boundary = Vec::new();
    loop {
        if let Some(&first) = seen.get(&q) {
            // Replay the period from the first occurrence.
            let mut s = boundary[first];
            for _ in first..boundary.len() {
                for &l in &lasso.cycle {
                    s = a.step(s, l);
                    if a.states[s].accepting {
                        return true;
                    }
                }
            }
            return false;
        }
        seen.insert(q, boundary.len());
        boundary.push(q);
        for &l in &lasso.cycle {
            q = a.step(q, l);
        }
    }
}

/// Acceptance-vector blocks of a composed automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaPartition {
    /// σ (as a bit vector over components) to member states.
    pub blocks: BTreeMap<Vec<bool>, Vec<usize>>,
    /// Whether σ satisfies the Boolean structure, i.e. the block is accepting.
    pub satisfying: BTreeMap<Vec<bool>, bool>,
}

/// Checks the structural properties of an unminimized composed automaton:
/// homogeneous blocks, every SCC inside one block, acyclic block order.
pub fn check_sigma_partition(a: &Dwa) -> Result<SigmaPartition, String> {
    let prov = a
        .provenance
        .as_ref()
        .ok_or_else(|| "automaton carries no provenance".to_string())?;
    let mut blocks: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    let mut satisfying: BTreeMap<Vec<bool>, bool> = BTreeMap::new();
    for q in 0..a.len() {
        let acc = a.states[q].accepting;
        match satisfying.get(&prov[q]) {
            Some(&b) if b != acc => {
                let other = blocks[&prov[q]][0];
                return Err(format!(
                    "block {:?} mixes accepting and rejecting states ({other}, {q})",
                    prov[q]
                ));
            }
            _ => {
                satisfying.insert(prov[q].clone(), acc);
            }
        }
        blocks.entry(prov[q].clone()).or_default().push(q);
    }
    let (comp, _) = a.sccs();
    let mut comp_block: HashMap<usize, usize> = HashMap::default();
    for q in 0..a.len() {
        if let Some(&p) = comp_block.get(&comp[q]) {
            if prov[p] != prov[q] {
                return Err(format!("SCC of states {p} and {q} spans two blocks"));
            }
        } else {
            comp_block.insert(comp[q], q);
        }
    }
    let keys: Vec<&Vec<bool>> = blocks.keys().collect();
    let index: HashMap<&Vec<bool>, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut succ = vec![Vec::new(); keys.len()];
    for q in 0..a.len() {
        for t in a.successors(q) {
            let (x, y) = (index[&prov[q]], index[&prov[t]]);
            if x != y && !succ[x].contains(&y) {
                succ[x].push(y);
            }
        }
    }
    let (bcomp, n) = tarjan(&succ);
    if n != keys.len() {
        let mut count = vec![0; n];
        for &c in &bcomp {
            count[c] += 1;
        }
        let c = count.iter().position(|&k| k > 1).unwrap();
        let pair: Vec<&Vec<bool>> = (0..keys.len()).filter(|&i| bcomp[i] == c).map(|i| keys[i]).take(2).collect();
        return Err(format!("blocks {:?} and {:?} reach each other", pair[0], pair[1]));
    }
    Ok(SigmaPartition { blocks, satisfying })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::compile_dfa;
    use crate::logic::semantics::all_lassos;
    use crate::logic::{parse_ltlf, Alphabet};

    fn comp(q: Quant, s: &str, ab: &Alphabet) -> Dwa {
        let d = compile_dfa(&parse_ltlf(s, None).unwrap(), ab).unwrap();
        build_component(q, &d)
    }

    #[test]
    fn exists_eventually_last_a() {
        let ab = Alphabet::new(["a"]);
        let d = comp(Quant::Exists, "F(a & X false)", &ab);
        assert_eq!(d.len(), 2);
        assert!(check_weak(&d));
        assert!(dwa_accepts_lasso(&d, &Lasso::new(vec![0], vec![1])));
        for l in all_lassos(2, 3, 3) {
            let any_a = l.stem.iter().chain(&l.cycle).any(|&x| x == 1);
            assert_eq!(dwa_accepts_lasso(&d, &l), any_a);
        }
    }

    #[test]
    fn forall_globally_a() {
        let ab = Alphabet::new(["a"]);
        let d = comp(Quant::Forall, "G a", &ab);
        assert_eq!(d.len(), 2);
        for l in all_lassos(2, 3, 3) {
            let all_a = l.stem.iter().chain(&l.cycle).all(|&x| x == 1);
            assert_eq!(dwa_accepts_lasso(&d, &l), all_a);
        }
    }

    #[test]
    fn exists_true_accepts_everything() {
        let ab = Alphabet::new(["a"]);
        let d = comp(Quant::Exists, "true", &ab);
        assert!(!d.states[d.initial].accepting);
        for l in all_lassos(2, 2, 2) {
            assert!(dwa_accepts_lasso(&d, &l));
        }
    }

    #[test]
    fn complement_is_involution() {
        let ab = Alphabet::new(["a", "b"]);
        let d = comp(Quant::Exists, "F(a & X b)", &ab);
        let nn = dwa_not(&dwa_not(&d));
        let (mut x, mut y) = (d.aut.clone(), nn.aut.clone());
        assert_eq!(x.canonical_string(), y.canonical_string());
        for l in all_lassos(4, 2, 2) {
            assert_ne!(dwa_accepts_lasso(&d, &l), dwa_accepts_lasso(&dwa_not(&d), &l));
        }
    }

    #[test]
    fn boolean_closure_on_lassos() {
        let ab = Alphabet::new(["a", "b"]);
        let x = comp(Quant::Exists, "F a", &ab);
        let y = comp(Quant::Forall, "G b", &ab);
        let and = dwa_and(&x, &y);
        let or = dwa_or(&x, &y);
        assert!(check_weak(&and) && check_weak(&or));
        assert!(dwa_accepts_lasso(&or, &Lasso::new(vec![], vec![2])));
        for l in all_lassos(4, 2, 2) {
            let (p, q) = (dwa_accepts_lasso(&x, &l), dwa_accepts_lasso(&y, &l));
            assert_eq!(dwa_accepts_lasso(&and, &l), p && q);
            assert_eq!(dwa_accepts_lasso(&or, &l), p || q);
        }
        let same = dwa_and(&x, &x);
        for l in all_lassos(4, 2, 2) {
            assert_eq!(dwa_accepts_lasso(&same, &l), dwa_accepts_lasso(&x, &l));
        }
    }

    #[test]
    fn rank_base_cases() {
        let ab = Alphabet::new(["a"]);
        let mut acc = Automaton::new(ab.clone());
        acc.add_state(true);
        acc.add_edge(0, BddRef::TRUE, 0);
        let r = compute_ranks(&Dwa::new(acc.clone()));
        assert_eq!(r.rank.unwrap(), vec![0]);
        acc.states[0].accepting = false;
        let r = compute_ranks(&Dwa::new(acc));
        assert_eq!(r.rank.unwrap(), vec![1]);

        // Transient state with successors of rank 0 and 1.
        let mut t = Automaton::new(ab);
        let s = t.add_state(false);
        let g = t.add_state(true);
        let b = t.add_state(false);
        let ga = t.letter_guard(1);
        let gn = t.letter_guard(0);
        t.add_edge(s, ga, g);
        t.add_edge(s, gn, b);
        t.add_edge(g, BddRef::TRUE, g);
        t.add_edge(b, BddRef::TRUE, b);
        let r = compute_ranks(&Dwa::new(t));
        assert_eq!(r.rank.unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn recurrent_ranks_match_acceptance_parity() {
        let ab = Alphabet::new(["a", "b"]);
        let x = comp(Quant::Exists, "F(a & X false)", &ab);
        let y = comp(Quant::Forall, "G(b -> X a)", &ab);
        let p = compute_ranks(&dwa_or(&dwa_not(&x), &y));
        let comp_ids = p.scc.clone().unwrap();
        let rec = p.recurrent(&comp_ids);
        for (q, r) in p.rank.clone().unwrap().iter().enumerate() {
            if rec[q] {
                assert_eq!(r % 2 == 0, p.states[q].accepting);
            }
        }
    }

    /// Product over all state pairs, reachable or not.
    fn full_product(a: &Dwa, b: &Dwa) -> Automaton {
        let mut out = a.aut.empty_like();
        let n = b.len();
        for p in 0..a.len() {
            for q in 0..n {
                out.add_state(a.states[p].accepting && b.states[q].accepting);
            }
        }
        for p in 0..a.len() {
            for q in 0..n {
                for e1 in &a.states[p].edges {
                    for e2 in &b.states[q].edges {
                        let g1 = out.import_guard(&a.aut, e1.guard);
                        let g2 = out.import_guard(&b.aut, e2.guard);
                        let g = out.store.and(g1, g2);
                        out.add_edge(p * n + q, g, e1.to * n + e2.to);
                    }
                }
            }
        }
        out.initial = a.initial * n + b.initial;
        out
    }

    #[test]
    fn minimize_product_of_equal_components() {
        let ab = Alphabet::new(["a"]);
        let x = comp(Quant::Exists, "F a", &ab);
        let unmin = Dwa::new(full_product(&x, &x));
        assert_eq!(unmin.len(), 4);
        let m = minimize_dwa(&unmin);
        assert_eq!(m.len(), 2);
        for l in all_lassos(2, 3, 3) {
            assert_eq!(dwa_accepts_lasso(&m, &l), dwa_accepts_lasso(&x, &l));
        }
        // No single-state automaton (accept all / accept none) is equivalent.
        let verdicts: Vec<bool> = all_lassos(2, 1, 1).iter().map(|l| dwa_accepts_lasso(&m, l)).collect();
        assert!(verdicts.contains(&true) && verdicts.contains(&false));
        let m2 = minimize_dwa(&m);
        let (mut u, mut v) = (m.aut.clone(), m2.aut.clone());
        assert_eq!(u.canonical_string(), v.canonical_string());
    }

    #[test]
    fn minimize_merges_product_sinks() {
        let ab = Alphabet::new(["a", "b"]);
        let x = comp(Quant::Exists, "F a", &ab);
        let y = comp(Quant::Exists, "F b", &ab);
        let p = dwa_or(&x, &y);
        assert_eq!(p.len(), 4);
        assert_eq!(minimize_dwa(&p).len(), 2);
    }

    #[test]
    fn lasso_examples() {
        let ab = Alphabet::new(["a"]);
        let e = comp(Quant::Exists, "F a", &ab);
        assert!(dwa_accepts_lasso(&e, &Lasso::new(vec![0], vec![1])));
        let g = comp(Quant::Forall, "G a", &ab);
        assert!(!dwa_accepts_lasso(&g, &Lasso::new(vec![1], vec![0])));
        assert!(dwa_accepts_lasso(&dwa_not(&g), &Lasso::new(vec![1], vec![0])));
    }

    #[test]
    fn weakness_violation_has_witness() {
        let mut a = Automaton::new(Alphabet::new(["a"]));
        let s = a.add_state(true);
        let t = a.add_state(false);
        a.add_edge(s, BddRef::TRUE, t);
        a.add_edge(t, BddRef::TRUE, s);
        assert_eq!(weakness_witness(&a), Some((0, 1)));
        assert!(!check_weak(&a));
    }

    #[test]
    fn sigma_partition_of_two_components() {
        let ab = Alphabet::new(["a", "b"]);
        let x = comp(Quant::Exists, "F a", &ab);
        let y = comp(Quant::Forall, "G b", &ab);
        let p = dwa_and(&x, &y);
        let part = check_sigma_partition(&p).unwrap();
        assert!(part.blocks.len() <= 4);
        for (sigma, sat) in &part.satisfying {
            assert_eq!(*sat, sigma[0] && sigma[1]);
        }
        assert!(check_sigma_partition(&minimize_dwa(&p)).is_err());
    }

    mod props {
        use super::*;
        use crate::automata::DfaClassifier;
        use crate::logic::semantics::eval_component_on_lasso;
        use crate::testutil::small_ltlf;
        use proptest::prelude::*;

        fn ab2() -> Alphabet {
            Alphabet::new(["p0", "p1"])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn component_matches_prefix_semantics(phi in small_ltlf(2, 6), exists in any::<bool>()) {
                let ab = ab2();
                let q = if exists { Quant::Exists } else { Quant::Forall };
                let dfa = compile_dfa(&phi, &ab).unwrap();
                let d = build_component(q, &dfa);
                prop_assert!(check_weak(&d));
                let c = DfaClassifier::new(std::slice::from_ref(&dfa));
                for l in all_lassos(4, 3, 3) {
                    prop_assert_eq!(
                        dwa_accepts_lasso(&d, &l),
                        eval_component_on_lasso(&c, 0, q, &l),
                        "{} on {}", phi, l.show(&ab)
                    );
                }
            }

            #[test]
            fn closure_is_compositional(
                f1 in small_ltlf(2, 5), f2 in small_ltlf(2, 5), e1 in any::<bool>(), e2 in any::<bool>()
            ) {
                let ab = ab2();
                let q = |e: bool| if e { Quant::Exists } else { Quant::Forall };
                let x = build_component(q(e1), &compile_dfa(&f1, &ab).unwrap());
                let y = build_component(q(e2), &compile_dfa(&f2, &ab).unwrap());
                let and = dwa_and(&x, &y);
                let or = dwa_or(&x, &y);
                let not = dwa_not(&x);
                for d in [&and, &or, &not] {
                    prop_assert!(check_weak(d));
                }
                prop_assert!(check_sigma_partition(&and).is_ok());
                prop_assert!(check_sigma_partition(&or).is_ok());
                for l in all_lassos(4, 3, 3) {
                    let (a, b) = (dwa_accepts_lasso(&x, &l), dwa_accepts_lasso(&y, &l));
                    prop_assert_eq!(dwa_accepts_lasso(&and, &l), a && b);
                    prop_assert_eq!(dwa_accepts_lasso(&or, &l), a || b);
                    prop_assert_eq!(dwa_accepts_lasso(&not, &l), !a);
                }
                let ranked = compute_ranks(&or);
                let comp = ranked.scc.clone().unwrap();
                let rec = ranked.recurrent(&comp);
                for (s, r) in ranked.rank.clone().unwrap().iter().enumerate() {
                    if rec[s] {
                        prop_assert_eq!(r % 2 == 0, ranked.states[s].accepting);
                    }
                }
                let m = minimize_dwa(&or);
                prop_assert!(check_weak(&m));
                prop_assert!(m.len() <= or.len());
                for l in all_lassos(4, 3, 3) {
                    prop_assert_eq!(dwa_accepts_lasso(&m, &l), dwa_accepts_lasso(&or, &l));
                }
            }
        }
    }
}
