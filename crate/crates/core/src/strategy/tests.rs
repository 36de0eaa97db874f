use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::arena::{build_arena, ArenaOptions};
use crate::automata::{compile_obligation, Compiled};
use crate::logic::{parse_obligation, VariablePartition};
use crate::oracle::{random_weak_game, small_partition};
use crate::solve::{solve, SolveOptions, SolverKind};

fn compiled(formula: &str, inputs: &[&str], outputs: &[&str]) -> (Compiled, Arena) {
    let p = VariablePartition::new(inputs.iter().copied(), outputs.iter().copied()).unwrap();
    let psi = parse_obligation(formula, None).unwrap();
    let c = compile_obligation(&psi, &p.alphabet(), &Default::default()).unwrap();
    let a = Arena::from_compiled(&c, &p, &ArenaOptions::default()).unwrap();
    (c, a)
}

fn constant(inputs: &[&str], outputs: &[&str], output: u64) -> MooreStrategy {
    MooreStrategy {
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        states: vec![StrategyState {
            code: 0,
            output,
            layer: None,
            transitions: vec![Transition {
                guard: vec![Vec::new()],
                to: 0,
            }],
        }],
        initial: 0,
    }
}

#[test]
fn safety_gives_one_state() {
    let (c, mut a) = compiled("forall(G a)", &["e"], &["a"]);
    let r = solve(&mut a, SolverKind::SafeReach, &SolveOptions::default()).unwrap();
    let s = extract_strategy(&mut a, &r).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.states[0].output, 1);
    let v = verify_strategy(&c.dwas, &c.combiner, &s, &VerifyOptions::default());
    assert_eq!(v.verdict, Verdict::Verified);
}

#[test]
fn guarantee_plays_a_first() {
    let (c, mut a) = compiled("exists(F(a & X false))", &["e"], &["a"]);
    for kind in SolverKind::ALL {
        let r = solve(&mut a, kind, &SolveOptions::default()).unwrap();
        let s = extract_strategy(&mut a, &r).unwrap();
        assert_eq!(s.states[s.initial].output, 1, "{kind}");
        let o = s.simulate(&[0, 1]);
        let sink = o.states[1];
        assert!(a.contains(a.acc, s.states[sink].code));
        assert!(s.states[sink].transitions.iter().all(|t| t.to == sink));
        assert!(verify_strategy(&c.dwas, &c.combiner, &s, &VerifyOptions::default()).verdict.passed());
    }
}

#[test]
fn pattern_strategy_verifies() {
    let f = "exists(F((e1 | a1) & X false)) & exists(F((e2 | a2) & X false))";
    let (c, mut a) = compiled(f, &["e1", "e2"], &["a1", "a2"]);
    for kind in SolverKind::ALL {
        let r = solve(&mut a, kind, &SolveOptions::default()).unwrap();
        assert!(r.realizable);
        let s = extract_strategy(&mut a, &r).unwrap();
        s.check_total().unwrap();
        assert_eq!(
            verify_strategy(&c.dwas, &c.combiner, &s, &VerifyOptions::default()).verdict,
            Verdict::Verified,
            "{kind}"
        );
    }
}

#[test]
fn wrong_strategy_yields_lasso() {
    let (c, _) = compiled("forall(G a)", &["e"], &["a"]);
    let s = constant(&["e"], &["a"], 0);
    let v = verify_strategy(&c.dwas, &c.combiner, &s, &VerifyOptions::default());
    let Verdict::Failed { lasso } = v.verdict else {
        panic!("expected a counterexample");
    };
    assert!(lasso.stem.is_empty());
    assert_eq!(lasso.cycle.len(), 1);
    assert_eq!(lasso.cycle[0] & 1, 0);
    let right = constant(&["e"], &["a"], 1);
    assert_eq!(verify_strategy(&c.dwas, &c.combiner, &right, &VerifyOptions::default()).verdict, Verdict::Verified);
}

#[test]
fn simulation_basics() {
    let s = constant(&["e"], &["a"], 1);
    let o = s.simulate(&[0, 1, 0]);
    assert_eq!(o.letters.len(), 3);
    assert!(o.letters.iter().all(|&(x, _)| x == 1));
    assert_eq!(o, s.simulate(&[0, 1, 0]));
    assert_eq!(o.joined(1), vec![1, 3, 1]);
}

#[test]
fn single_state_export() {
    let s = constant(&["e"], &["a"], 1);
    let t = export_strategy(&s, &[]);
    assert_eq!(
        t,
        "strategy v1\ninputs: e\noutputs: a\ninitial: 0\nstate 0 code 0 layer none out: a\n  -> 0 : true\n"
    );
    assert_eq!(import_strategy(&t).unwrap(), s);
    assert!(strategy_to_dot(&s).contains("s0 -> s0 [label=\"true\"]"));
}

#[test]
fn import_rejects_garbage() {
    assert!(import_strategy("").is_err());
    assert!(import_strategy("strategy v2\n").is_err());
    let bad = "strategy v1\ninputs: e\noutputs: a\ninitial: 0\nstate 0 code 0 layer none out: b\n";
    assert!(import_strategy(bad).is_err());
    let bad = "strategy v1\ninputs: e\noutputs: a\ninitial: 0\nstate 0 code 0 layer none out: a\n  -> 3 : e\n";
    assert!(import_strategy(bad).is_err());
}

#[test]
fn roundtrip_behaves_identically() {
    let f = "exists(F((e1 | a1) & X false)) & forall(G(e2 -> X a2))";
    let (_, mut a) = compiled(f, &["e1", "e2"], &["a1", "a2"]);
    let r = solve(&mut a, SolverKind::Scc, &SolveOptions::default()).unwrap();
    let s = extract_strategy(&mut a, &r).unwrap();
    let text = export_strategy(&s, &["solver: scc".to_string()]);
    let back = import_strategy(&text).unwrap();
    assert_eq!(back, s);
    assert_eq!(export_strategy(&back, &["solver: scc".to_string()]), text);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let ys: Vec<u64> = (0..20).map(|_| rng.gen_range(0..4)).collect();
        assert_eq!(s.simulate(&ys), back.simulate(&ys));
    }
}

#[test]
fn extraction_is_deterministic() {
    let f = "(exists(F(a & e)) | forall(G(a -> X e))) & exists(F a)";
    let (_, mut a) = compiled(f, &["e"], &["a"]);
    let mut b = a.clone();
    let r1 = solve(&mut a, SolverKind::Buchi, &SolveOptions::default()).unwrap();
    let r2 = solve(&mut b, SolverKind::Buchi, &SolveOptions::default()).unwrap();
    if r1.realizable {
        assert_eq!(extract_strategy(&mut a, &r1).unwrap(), extract_strategy(&mut b, &r2).unwrap());
    }
}

#[test]
fn unrealizable_has_no_strategy() {
    let (_, mut a) = compiled("exists(F(e & X false))", &["e"], &["a"]);
    let r = solve(&mut a, SolverKind::SafeReach, &SolveOptions::default()).unwrap();
    assert!(!r.realizable);
    assert!(extract_strategy(&mut a, &r).is_err());
}

#[test]
fn fallback_is_labelled() {
    let (c, mut a) = compiled("forall(G a)", &["e"], &["a"]);
    let r = solve(&mut a, SolverKind::SafeReach, &SolveOptions::default()).unwrap();
    let s = extract_strategy(&mut a, &r).unwrap();
    let opts = VerifyOptions {
        cap: 0,
        rollouts: 20,
        rollout_len: 30,
        ..Default::default()
    };
    let v = verify_strategy(&c.dwas, &c.combiner, &s, &opts);
    assert_eq!(v.verdict, Verdict::BoundedVerified { rollouts: 20, length: 30 });
    let wrong = constant(&["e"], &["a"], 0);
    assert!(matches!(
        verify_strategy(&c.dwas, &c.combiner, &wrong, &opts).verdict,
        Verdict::Failed { .. }
    ));
}

/// Three-valued reading of the combiner: a component in an accepting sink is
/// settled true, one in a rejecting sink settled false.
fn settled(c: &Combiner, v: &[Option<bool>]) -> Option<bool> {
    match c {
        Combiner::Comp(i) => v[*i],
        Combiner::And(xs) => {
            let r: Vec<Option<bool>> = xs.iter().map(|x| settled(x, v)).collect();
            if r.contains(&Some(false)) {
                Some(false)
            } else if r.iter().all(|b| *b == Some(true)) {
                Some(true)
            } else {
                None
            }
        }
        Combiner::Or(xs) => {
            let r: Vec<Option<bool>> = xs.iter().map(|x| settled(x, v)).collect();
            if r.contains(&Some(true)) {
                Some(true)
            } else if r.iter().all(|b| *b == Some(false)) {
                Some(false)
            } else {
                None
            }
        }
    }
}

use crate::automata::{Combiner, Dwa};

fn sink_value(d: &Dwa, q: usize) -> Option<bool> {
    d.successors(q).all(|t| t == q).then(|| d.states[q].accepting)
}

#[test]
fn random_games_yield_sound_strategies() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = small_partition(1, 2);
    let mut checked = 0;
    for _ in 0..120 {
        let (dwas, comb) = random_weak_game(&mut rng, &p, 5);
        let mut a = build_arena(&dwas, &comb, &p, &ArenaOptions::default()).unwrap();
        for kind in SolverKind::ALL {
            let r = solve(&mut a, kind, &SolveOptions::default()).unwrap();
            if !r.realizable {
                continue;
            }
            checked += 1;
            let s = extract_strategy(&mut a, &r).unwrap();
            s.check_total().unwrap();
            for st in &s.states {
                assert!(a.contains(r.region, st.code), "{kind}: strategy leaves the region");
            }
            let v = verify_strategy(&dwas, &comb, &s, &VerifyOptions::default());
            assert_eq!(v.verdict, Verdict::Verified, "{kind}");
            for _ in 0..5 {
                let ys: Vec<u64> = (0..50).map(|_| rng.gen_range(0..4)).collect();
                let o = s.simulate(&ys);
                s.check_layer_progress(&o.states).unwrap();
                let mut qs: Vec<usize> = dwas.iter().map(|d| d.initial).collect();
                for l in o.joined(1) {
                    for (q, d) in qs.iter_mut().zip(&dwas) {
                        *q = d.step(*q, l);
                    }
                    let vals: Vec<Option<bool>> = qs.iter().zip(&dwas).map(|(&q, d)| sink_value(d, q)).collect();
                    assert_ne!(settled(&comb, &vals), Some(false), "{kind}: play already lost");
                }
            }
        }
    }
    assert!(checked > 50);
}
