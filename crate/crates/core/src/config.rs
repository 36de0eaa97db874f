//! Run configuration shared by the command line and the benchmark runner.
//! Every artifact echoes it so results can be traced to their settings.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::arena::{ArenaOptions, Encoding, DEFAULT_EXPLICIT_CAP};
use crate::automata::{pipeline::CompileOptions, MinMode, DEFAULT_STATE_BUDGET};
use crate::bdd::DEFAULT_NODE_CAP;
use crate::solve::{Domain, ImageMode, SccOptions, SolveOptions, SolverKind};
use crate::strategy::VerifyOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub solver: SolverKind,
    pub min_mode: MinMode,
    /// Products are minimized while they have at most this many states.
    pub min_threshold: usize,
    pub simplify: bool,
    pub state_budget: usize,
    pub node_cap: usize,
    pub bit_budget: usize,
    pub encoding: Encoding,
    pub scc_image: ImageMode,
    pub scc_domain: Domain,
    pub explicit_cap: usize,
    /// Product size up to which strategies are verified exhaustively.
    pub verify_cap: usize,
    pub verify: bool,
    /// Seconds per benchmark cell.
    pub time_limit: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub verbosity: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            solver: SolverKind::Buchi,
            min_mode: MinMode::Component,
            min_threshold: crate::automata::pipeline::DEFAULT_TAU,
            simplify: true,
            state_budget: DEFAULT_STATE_BUDGET,
            node_cap: DEFAULT_NODE_CAP,
            bit_budget: ArenaOptions::default().bit_budget,
            encoding: Encoding::Binary,
            scc_image: ImageMode::Relational,
            scc_domain: Domain::Reachable,
            explicit_cap: DEFAULT_EXPLICIT_CAP,
            verify_cap: VerifyOptions::default().cap,
            verify: true,
            time_limit: 60.0,
            seed: 0,
            out: None,
            verbosity: 0,
        }
    }
}

impl RunConfig {
    pub fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            mode: self.min_mode,
            tau: self.min_threshold,
            simplify: self.simplify,
            state_budget: self.state_budget,
        }
    }

    pub fn arena_options(&self) -> ArenaOptions {
        ArenaOptions {
            encoding: self.encoding,
            bit_budget: self.bit_budget,
            node_cap: self.node_cap,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            scc: SccOptions {
                image: self.scc_image,
                domain: self.scc_domain,
            },
            explicit_cap: self.explicit_cap,
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            cap: self.verify_cap,
            seed: self.seed,
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// One comment line per field, for text artifacts.
    pub fn echo_lines(&self) -> Vec<String> {
        let v = serde_json::to_value(self).expect("config serializes");
        v.as_object()
            .expect("struct")
            .iter()
            .map(|(k, v)| format!("config {k} = {v}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_defaults() {
        let c = RunConfig {
            command: "synth".into(),
            solver: SolverKind::Scc,
            seed: 9,
            ..Default::default()
        };
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = serde_json::from_str(r#"{"solver":"cobuchi"}"#).unwrap();
        assert_eq!(partial.solver, SolverKind::CoBuchi);
        assert_eq!(partial.min_threshold, 256);
        assert!(c.echo_lines().iter().any(|l| l == "config solver = \"scc\""));
    }
}
