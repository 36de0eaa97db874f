use oblsynth::arena::{build_arena, ArenaOptions};
use oblsynth::automata::pipeline::CompileOptions;
use oblsynth::automata::{compile_obligation, minimize_dwa, MinMode};
use oblsynth::logic::{parse_ltlf, parse_obligation, Alphabet};
use oblsynth::oracle::{check_game, random_ltlf, random_obligation, random_weak_dwa, random_weak_game, small_partition};
use oblsynth::strategy::{extract_strategy, verify_strategy, VerifyOptions};
use oblsynth::solve::{solve, SolveOptions, SolverKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn names() -> Vec<String> {
    vec!["p".into(), "q".into()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_ltlf(&mut rng, &names(), 10);
        prop_assert_eq!(parse_ltlf(&phi.to_string(), None).unwrap(), phi);
        let psi = random_obligation(&mut rng, &names(), 3, 4);
        prop_assert_eq!(parse_obligation(&psi.to_string(), None).unwrap(), psi);
    }

    #[test]
    fn minimization_is_idempotent(seed in any::<u64>(), states in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_weak_dwa(&mut rng, &Alphabet::new(names()), states);
        let mut once = minimize_dwa(&d);
        let mut twice = minimize_dwa(&once);
        prop_assert!(once.len() <= d.len());
        prop_assert_eq!(once.canonical_string(), twice.canonical_string());
    }

    #[test]
    fn pipeline_modes_are_isomorphic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_obligation(&mut rng, &names(), 3, 5);
        let ab = Alphabet::new(names());
        let mode = |mode| compile_obligation(&psi, &ab, &CompileOptions { mode, ..Default::default() }).unwrap().minimal();
        let mut a = mode(MinMode::Component);
        let mut b = mode(MinMode::Incremental);
        prop_assert_eq!(a.canonical_string(), b.canonical_string());
    }

    #[test]
    fn weak_games_agree_with_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = small_partition(1, 2);
        let (dwas, comb) = random_weak_game(&mut rng, &p, 8);
        let a = build_arena(&dwas, &comb, &p, &ArenaOptions::default()).unwrap();
        prop_assert_eq!(check_game(&a, &a), Ok(()));
    }

    #[test]
    fn extracted_strategies_win(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = small_partition(2, 1);
        let (dwas, comb) = random_weak_game(&mut rng, &p, 6);
        let mut a = build_arena(&dwas, &comb, &p, &ArenaOptions::default()).unwrap();
        for kind in [SolverKind::SafeReach, SolverKind::Scc] {
            let r = solve(&mut a, kind, &SolveOptions::default()).unwrap();
            if r.realizable {
                let s = extract_strategy(&mut a, &r).unwrap();
                let v = verify_strategy(&dwas, &comb, &s, &VerifyOptions::default());
                prop_assert!(v.verdict.passed(), "{kind}: {:?}", v.verdict);
            }
        }
    }
}
