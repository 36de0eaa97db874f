//! The whole pipeline: compile, build the arena, solve, extract and verify.

use std::time::{Duration, Instant};

use crate::arena::Arena;
use crate::automata::{compile_obligation, Compiled};
use crate::config::RunConfig;
use crate::error::Result;
use crate::logic::{ObligationFormula, VariablePartition};
use crate::solve::{solve, SolveResult};
use crate::strategy::{extract_strategy, verify_strategy, MooreStrategy, Verification};

#[derive(Clone, Copy, Debug, Default)]
pub struct Timings {
    pub compile: Duration,
    pub arena: Duration,
    pub solve: Duration,
    pub strategy: Duration,
}

impl Timings {
    pub fn total(&self) -> Duration {
        self.compile + self.arena + self.solve + self.strategy
    }
}

pub struct Synthesis {
    pub compiled: Compiled,
    pub arena: Arena,
    pub result: SolveResult,
    pub strategy: Option<MooreStrategy>,
    pub verification: Option<Verification>,
    pub timings: Timings,
}

/// Decides realizability of `psi` and, if realizable and `with_strategy`,
/// extracts a strategy. The strategy is verified when the config asks for
/// it; a failed verdict is returned, not raised.
pub fn synthesize(
    psi: &ObligationFormula,
    partition: &VariablePartition,
    cfg: &RunConfig,
    with_strategy: bool,
) -> Result<Synthesis> {
    partition.check_covers(&psi.atoms())?;
    let mut t = Timings::default();
    let clock = Instant::now();
    let compiled = compile_obligation(psi, &partition.alphabet(), &cfg.compile_options())?;
    t.compile = clock.elapsed();
    let clock = Instant::now();
    let mut arena = Arena::from_compiled(&compiled, partition, &cfg.arena_options())?;
    t.arena = clock.elapsed();
    let clock = Instant::now();
    let result = solve(&mut arena, cfg.solver, &cfg.solve_options())?;
    t.solve = clock.elapsed();
    let clock = Instant::now();
    let mut strategy = None;
    let mut verification = None;
    if with_strategy && result.realizable {
        let s = extract_strategy(&mut arena, &result)?;
        if cfg.verify {
            verification = Some(verify_strategy(&compiled.dwas, &compiled.combiner, &s, &cfg.verify_options()));
        }
        strategy = Some(s);
    }
    t.strategy = clock.elapsed();
    Ok(Synthesis {
        compiled,
        arena,
        result,
        strategy,
        verification,
        timings: t,
    })
}
