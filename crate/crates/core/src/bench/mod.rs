//! Benchmark families as specification files, the solver matrix and plots.

mod plot;
mod run;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::logic::VariablePartition;

pub use plot::{emit_plot, Plot};
pub use run::{
    cross_check, read_csv, run_job, run_matrix, write_csv, Job, Row, RunSettings, Status, CSV_HEADER,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "counter")]
    Counter,
    #[serde(rename = "conjE_forall")]
    ConjEForall,
    #[serde(rename = "conjE_exists")]
    ConjEExists,
    #[serde(rename = "disjA_forall")]
    DisjAForall,
    #[serde(rename = "disjA_exists")]
    DisjAExists,
    #[serde(rename = "implication")]
    Implication,
    /// `conjE_exists` with `e_i & a_i`; unrealizable.
    #[serde(rename = "conjE_exists_dual")]
    ConjEExistsDual,
}

impl Family {
    pub const MAIN: [Family; 6] = [
        Family::Counter,
        Family::ConjEForall,
        Family::ConjEExists,
        Family::DisjAForall,
        Family::DisjAExists,
        Family::Implication,
    ];

    pub const PATTERNS: [Family; 4] = [
        Family::ConjEForall,
        Family::ConjEExists,
        Family::DisjAForall,
        Family::DisjAExists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Counter => "counter",
            Family::ConjEForall => "conjE_forall",
            Family::ConjEExists => "conjE_exists",
            Family::DisjAForall => "disjA_forall",
            Family::DisjAExists => "disjA_exists",
            Family::Implication => "implication",
            Family::ConjEExistsDual => "conjE_exists_dual",
        }
    }

    /// Largest size run by default on a desk machine.
    pub fn desk_max(self) -> usize {
        match self {
            Family::Counter => 4,
            Family::Implication => 8,
            Family::ConjEExistsDual => 3,
            _ => 10,
        }
    }

    pub fn generate(self, n: usize) -> BenchmarkInstance {
        match self {
            Family::Counter => gen_counter(n),
            Family::Implication => gen_implication(n),
            Family::ConjEExistsDual => gen_dual(n),
            kind => gen_pattern(kind, n),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Family::MAIN
            .into_iter()
            .chain([Family::ConjEExistsDual])
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family '{s}'"))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchmarkInstance {
    pub family: Family,
    pub size: usize,
    pub formula: String,
    pub partition: VariablePartition,
    pub expected: bool,
    /// Comment lines written at the top of the files.
    pub notes: Vec<String>,
}

impl BenchmarkInstance {
    pub fn stem(&self) -> String {
        format!("{}_{}", self.family, self.size)
    }

    pub fn spec_text(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "# {} n={} expected={}", self.family, self.size, self.expected);
        for n in &self.notes {
            let _ = writeln!(t, "# {n}");
        }
        let _ = writeln!(t, "{}", self.formula);
        t
    }

    pub fn part_text(&self) -> String {
        let mut t = String::new();
        for n in &self.notes {
            let _ = writeln!(t, "# {n}");
        }
        t.push_str(&self.partition.to_text());
        t
    }

    /// Writes `<family>_<size>.spec` and `.part` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let spec = dir.join(format!("{}.spec", self.stem()));
        let part = dir.join(format!("{}.part", self.stem()));
        std::fs::write(&spec, self.spec_text())?;
        std::fs::write(&part, self.part_text())?;
        Ok((spec, part))
    }
}

fn join(items: impl IntoIterator<Item = String>, sep: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(sep)
}

fn counter_formula(n: usize, repaired: bool) -> String {
    let init = join(
        (0..n).map(|i| format!("!c{i}")).chain((0..n).map(|i| format!("!b{i}"))),
        " & ",
    );
    let inc = if repaired {
        "G(add -> X(c0))".to_string()
    } else {
        "G(add -> (X(c0) & X(X(c0)) & X(X(X(c0)))))".to_string()
    };
    let alw = "G(F(add & X false))";
    let trans = join(
        (0..n).map(|i| {
            let j = i + 1;
            format!(
                "((!c{i} & !b{i}) -> X(!b{i} & !c{j})) & ((!c{i} & b{i}) -> X(b{i} & !c{j})) & \
                 ((c{i} & !b{i}) -> X(b{i} & !c{j})) & ((c{i} & b{i}) -> X(!b{i} & c{j}))"
            )
        }),
        " & ",
    );
    let goal = join((0..n).map(|i| format!("b{i}")).chain(["X false".to_string()]), " & ");
    format!("forall(({init}) & {inc} & {alw} & G({trans})) -> exists(F({goal}))")
}

/// Binary counter with `n` bits that the system must drive to its maximum.
pub fn gen_counter(n: usize) -> BenchmarkInstance {
    counter_instance(n, false)
}

/// Counter variant whose increment clause uses a single next step.
/// Not in `Family::MAIN`.
pub fn gen_counter_repaired(n: usize) -> BenchmarkInstance {
    counter_instance(n, true)
}

fn counter_instance(n: usize, repaired: bool) -> BenchmarkInstance {
    assert!(n >= 1, "counter needs at least one bit");
    let inputs: Vec<String> = (0..n)
        .map(|i| format!("b{i}"))
        .chain((0..=n).map(|i| format!("c{i}")))
        .collect();
    let partition = VariablePartition::new(inputs, vec!["add".to_string()]).expect("disjoint");
    let mut notes = vec!["assumption: b_i and c_i are environment inputs, add is the only output".to_string()];
    if repaired {
        notes.push("variant: single-step increment clause".to_string());
    }
    BenchmarkInstance {
        family: Family::Counter,
        size: n,
        formula: counter_formula(n, repaired),
        partition,
        expected: true,
        notes,
    }
}

fn phi(i: usize, op: &str) -> String {
    format!("F((e{i} {op} a{i}) & X false)")
}

fn pattern_partition(n: usize) -> VariablePartition {
    VariablePartition::new((1..=n).map(|i| format!("e{i}")), (1..=n).map(|i| format!("a{i}"))).expect("disjoint")
}

/// One of the four Boolean patterns over `F((e_i | a_i) & X false)`.
pub fn gen_pattern(kind: Family, n: usize) -> BenchmarkInstance {
    assert!(n >= 1, "patterns need at least one component");
    let q = |i: usize, last: &str, other: &str| if i == n { last.to_string() } else { other.to_string() };
    let parts: Vec<String> = (1..=n)
        .map(|i| {
            let quant = match kind {
                Family::ConjEForall => q(i, "forall", "exists"),
                Family::ConjEExists => "exists".into(),
                Family::DisjAForall => "forall".into(),
                Family::DisjAExists => q(i, "exists", "forall"),
                other => panic!("{other} is not a pattern family"),
            };
            format!("{quant}({})", phi(i, "|"))
        })
        .collect();
    let sep = match kind {
        Family::ConjEForall | Family::ConjEExists => " & ",
        _ => " | ",
    };
    BenchmarkInstance {
        family: kind,
        size: n,
        formula: parts.join(sep),
        partition: pattern_partition(n),
        expected: true,
        notes: Vec::new(),
    }
}

/// `conjE_exists` with conjunctions inside; the environment can refuse.
pub fn gen_dual(n: usize) -> BenchmarkInstance {
    assert!(n >= 1);
    BenchmarkInstance {
        family: Family::ConjEExistsDual,
        size: n,
        formula: join((1..=n).map(|i| format!("exists({})", phi(i, "&"))), " & "),
        partition: pattern_partition(n),
        expected: false,
        notes: Vec::new(),
    }
}

/// `/\_{i<=j} (exists(F a_i) -> exists(F e_i))` with `a_i` inputs.
pub fn gen_implication(j: usize) -> BenchmarkInstance {
    assert!(j >= 1);
    let formula = join((1..=j).map(|i| format!("(exists(F a{i}) -> exists(F e{i}))")), " & ");
    let partition =
        VariablePartition::new((1..=j).map(|i| format!("a{i}")), (1..=j).map(|i| format!("e{i}"))).expect("disjoint");
    BenchmarkInstance {
        family: Family::Implication,
        size: j,
        formula,
        partition,
        expected: true,
        notes: Vec::new(),
    }
}

/// The plain LTLf formula `/\ (a_i | e_i)` that `conjE_exists` of size `n`
/// is equi-realizable with.
pub fn conj_exists_ltlf(n: usize) -> String {
    join((1..=n).map(|i| format!("(a{i} | e{i})")), " & ")
}
