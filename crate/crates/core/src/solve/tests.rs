use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::arena::build_arena;
use crate::automata::{tarjan, Automaton, Dwa};
use crate::logic::{parse_ltlf, parse_obligation};
use crate::oracle::{random_weak_game, small_partition};

fn arena_of(a: Automaton, p: &VariablePartition) -> Arena {
    build_arena(&[Dwa::new(a)], &Combiner::Comp(0), p, &ArenaOptions::default()).unwrap()
}

fn spec_arena(formula: &str, inputs: &[&str], outputs: &[&str]) -> Arena {
    let p = VariablePartition::new(inputs.iter().copied(), outputs.iter().copied()).unwrap();
    let psi = parse_obligation(formula, None).unwrap();
    let c = crate::automata::compile_obligation(&psi, &p.alphabet(), &Default::default()).unwrap();
    Arena::from_compiled(&c, &p, &ArenaOptions::default()).unwrap()
}

/// Two states; the system moves 0 -> 1 by playing x, state 1 is a sink.
fn chain() -> Arena {
    let p = small_partition(1, 1);
    let mut a = Automaton::new(p.alphabet());
    a.add_state(false);
    a.add_state(true);
    let x = a.store.var(Var(0));
    let nx = a.store.not(x);
    a.add_edge(0, x, 1);
    a.add_edge(0, nx, 0);
    a.add_edge(1, BddRef::TRUE, 1);
    arena_of(a, &p)
}

#[test]
fn reach_and_safe_trivia() {
    let mut a = chain();
    assert!(reach(&mut a, BddRef::TRUE, BddRef::TRUE).is_true());
    assert!(reach(&mut a, BddRef::FALSE, BddRef::FALSE).is_false());
    assert!(safe(&mut a, BddRef::TRUE, BddRef::FALSE).is_true());
    assert!(safe(&mut a, BddRef::FALSE, BddRef::FALSE).is_false());
    let mut st = SolveStats::default();
    let all = reach_with(&mut a, BddRef::TRUE, BddRef::TRUE, &mut st, |_| {}).unwrap();
    assert!(all.is_true());
    // One changing evaluation and one confirming evaluation.
    assert_eq!(st.fixpoint_evals, 2);
}

#[test]
fn forced_chain_is_reached() {
    let mut a = chain();
    let sink = a.components[0].state_pred[1];
    assert!(reach(&mut a, BddRef::TRUE, sink).is_true());
    // Only the sink can stay inside the accepting set.
    let acc = a.acc;
    assert_eq!(safe(&mut a, acc, BddRef::FALSE), sink);
}

#[test]
fn constant_acceptance() {
    let p = small_partition(1, 1);
    for acc in [true, false] {
        let mut aut = Automaton::new(p.alphabet());
        aut.add_state(acc);
        aut.add_state(acc);
        let y = aut.store.var(Var(1));
        let ny = aut.store.not(y);
        aut.add_edge(0, y, 1);
        aut.add_edge(0, ny, 0);
        aut.add_edge(1, BddRef::TRUE, 0);
        let mut a = arena_of(aut, &p);
        for kind in SolverKind::ALL {
            let r = solve(&mut a, kind, &SolveOptions::default());
            let r = match r {
                Ok(r) => r,
                Err(e) => panic!("{kind}: {e}"),
            };
            assert_eq!(r.region.is_true(), acc, "{kind}");
            assert_eq!(r.region.is_false(), !acc, "{kind}");
        }
    }
}

#[test]
fn safereach_empty_acceptance_counts() {
    let p = small_partition(1, 1);
    let mut aut = Automaton::new(p.alphabet());
    aut.add_state(false);
    aut.add_edge(0, BddRef::TRUE, 0);
    let mut a = arena_of(aut, &p);
    let r = solve_safereach(&mut a).unwrap();
    assert!(r.region.is_false());
    assert_eq!(r.chain, vec![BddRef::FALSE; 3]);
    assert_eq!(r.stats.outer_iters, 1);
    assert_eq!(r.stats.guard_checks, 2);
}

#[test]
fn safereach_pure_safety_confirms_once() {
    // The system keeps `a` true forever.
    let mut a = spec_arena("forall(G a)", &["e"], &["a"]);
    let r = solve_safereach(&mut a).unwrap();
    assert!(r.realizable);
    assert_eq!(r.stats.outer_iters, 2);
    let b = solve_buchi(&mut a).unwrap();
    assert_eq!(b.region, r.region);
}

#[test]
fn safereach_chain_is_monotone() {
    let mut a = spec_arena("(exists(F(a & e)) | forall(G(a -> X e))) & exists(F a)", &["e"], &["a"]);
    let r = solve_safereach(&mut a).unwrap();
    for w in r.chain.windows(2) {
        assert!(a.store.diff(w[0], w[1]).is_false());
    }
}

fn explicit_sccs(a: &Arena, reachable_only: bool) -> usize {
    let n = 1usize << a.z.len();
    let succ: Vec<Vec<usize>> = (0..n as u64)
        .map(|q| {
            let mut s: Vec<usize> = Vec::new();
            for x in 0..1u64 << a.x.len() {
                for y in 0..1u64 << a.y.len() {
                    s.push(a.step_code(q, x, y) as usize);
                }
            }
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    if !reachable_only {
        return tarjan(&succ).1;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![a.init_code as usize];
    seen[a.init_code as usize] = true;
    while let Some(v) = stack.pop() {
        for &t in &succ[v] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let (comp, _) = tarjan(&succ);
    let mut ids: Vec<usize> = (0..n).filter(|&v| seen[v]).map(|v| comp[v]).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

#[test]
fn scc_examples() {
    let mut a = spec_arena("exists(F a)", &["e"], &["a"]);
    let s = sym_scc_decompose(&mut a, &SccOptions::default()).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.edges(&mut a).unwrap(), [(1, 0)]);

    let mut one = spec_arena("forall(true)", &["e"], &["a"]);
    assert_eq!(one.z.len(), 0);
    assert_eq!(sym_scc_decompose(&mut one, &SccOptions::default()).unwrap().len(), 1);

    let mut two = spec_arena("exists(F(a & X e)) & forall(G(e -> X a))", &["e"], &["a"]);
    assert_eq!(two.components.len(), 2);
    for image in [ImageMode::Compose, ImageMode::Relational] {
        for domain in [Domain::Reachable, Domain::All] {
            let s = sym_scc_decompose(&mut two, &SccOptions { image, domain }).unwrap();
            assert_eq!(s.len(), explicit_sccs(&two, domain == Domain::Reachable));
        }
    }
}

#[test]
fn relation_blowup_is_reported() {
    let mut a = spec_arena("exists(F(a & X e)) & forall(G(e -> X a))", &["e"], &["a"]);
    let mut tight = a.clone();
    tight.store.set_node_cap(tight.store.live_nodes() + 1);
    let rel = SccOptions { image: ImageMode::Relational, ..Default::default() };
    assert!(matches!(sym_scc_decompose(&mut tight, &rel), Err(Error::RelationCap { .. })));
    assert!(sym_scc_decompose(&mut a, &rel).is_ok());
}

#[test]
fn scc_solver_examples() {
    // Accepting sink where the system can stay: whole SCC won.
    let mut a = spec_arena("forall(G a)", &["e"], &["a"]);
    let s = sym_scc_decompose(&mut a, &SccOptions::default()).unwrap();
    let r = solve_weak_scc(&mut a, &s).unwrap();
    assert!(r.realizable);
    // Rejecting SCC without exits.
    let p = small_partition(1, 1);
    let mut aut = Automaton::new(p.alphabet());
    aut.add_state(false);
    aut.add_edge(0, BddRef::TRUE, 0);
    let mut a = arena_of(aut, &p);
    let s = sym_scc_decompose(&mut a, &SccOptions::default()).unwrap();
    assert!(solve_weak_scc(&mut a, &s).unwrap().region.is_false());
}

#[test]
fn scc_solver_rejects_mixed_scc() {
    let p = small_partition(1, 1);
    let mut aut = Automaton::new(p.alphabet());
    aut.add_state(true);
    aut.add_state(false);
    aut.add_edge(0, BddRef::TRUE, 1);
    aut.add_edge(1, BddRef::TRUE, 0);
    let mut a = arena_of(aut, &p);
    let s = sym_scc_decompose(&mut a, &SccOptions::default()).unwrap();
    assert!(matches!(solve_weak_scc(&mut a, &s), Err(Error::NotWeak(_))));
}

/// Runs every solver on one arena and compares with the oracle. Returns the
/// number of state codes.
fn cross_check(a: &mut Arena) -> usize {
    let n = 1usize << a.z.len();
    let g = to_explicit(a, DEFAULT_EXPLICIT_CAP).unwrap();
    let sol = explicit_oracle_solve(&g, Objective::Weak);
    for v in 0..g.len() {
        assert_ne!(sol.system[v], sol.environment[v], "node {v} not decided exactly once");
    }
    let co = explicit_oracle_solve(&g, Objective::CoBuchi);
    assert_eq!(co.system, sol.system, "Büchi and co-Büchi readings differ");
    let all_opts = SolveOptions {
        scc: SccOptions {
            domain: Domain::All,
            ..Default::default()
        },
        ..Default::default()
    };
    for kind in SolverKind::ALL {
        let r = solve(a, kind, &all_opts).unwrap();
        for q in 0..n as u64 {
            assert_eq!(a.contains(r.region, q), sol.system[q as usize], "{kind} on state {q}");
        }
        if let Some(last) = r.layers.last() {
            assert_eq!(last.set, r.region, "{kind}: layers must end at the region");
        } else {
            assert!(r.region.is_false());
        }
        for w in r.layers.windows(2) {
            assert!(a.store.diff(w[0].set, w[1].set).is_false(), "{kind}: layers not monotone");
        }
        if kind == SolverKind::Scc {
            assert!(r.stats.inner_iters as usize <= n, "linear bound violated");
        }
    }
    let mut img = a.clone();
    for mode in [ImageMode::Compose, ImageMode::Relational] {
        let s = sym_scc_decompose(&mut img, &SccOptions { image: mode, domain: Domain::All }).unwrap();
        let mut below = BddRef::FALSE;
        for &c in &s.sccs {
            below = img.store.or(below, c);
            let p = img.post_split(c);
            assert!(img.store.diff(p, below).is_false(), "SCC order is not bottom-up");
        }
        let r = solve_weak_scc(&mut img, &s).unwrap();
        for q in 0..n as u64 {
            assert_eq!(img.contains(r.region, q), sol.system[q as usize]);
        }
    }
    n
}

#[test]
fn random_weak_games_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = small_partition(1, 2);
    for _ in 0..150 {
        let (dwas, comb) = random_weak_game(&mut rng, &p, 6);
        let mut a = build_arena(&dwas, &comb, &p, &ArenaOptions::default()).unwrap();
        cross_check(&mut a);
    }
}

#[test]
fn explicit_trivial_self_loop() {
    let p = small_partition(0, 0);
    let mut aut = Automaton::new(p.alphabet());
    aut.add_state(true);
    aut.add_edge(0, BddRef::TRUE, 0);
    let a = arena_of(aut, &p);
    let g = to_explicit(&a, 16).unwrap();
    let sol = explicit_oracle_solve(&g, Objective::Buchi);
    assert!(sol.system.iter().all(|&b| b));
}

#[test]
fn ltlf_baseline() {
    let p = VariablePartition::new(["e0", "e1"], ["a0", "a1"]).unwrap();
    let phi = parse_ltlf("(a0 | e0) & (a1 | e1)", None).unwrap();
    assert!(synth_ltlf(&phi, &p).unwrap().1.realizable);
    let p = VariablePartition::new(["e"], ["a"]).unwrap();
    assert!(!synth_ltlf(&parse_ltlf("e", None).unwrap(), &p).unwrap().1.realizable);
    assert!(synth_ltlf(&LtlfFormula::True, &p).unwrap().1.realizable);
    // Agrees with the full pipeline on the same formula.
    for s in ["F(a & e)", "G(e -> a) & F a", "F(a & X false)", "e U a"] {
        let phi = parse_ltlf(s, None).unwrap();
        let base = synth_ltlf(&phi, &p).unwrap().1.realizable;
        let mut a = spec_arena(&format!("exists({s})"), &["e"], &["a"]);
        assert_eq!(solve_safereach(&mut a).unwrap().realizable, base, "{s}");
    }
}
