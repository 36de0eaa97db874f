//! From an obligation formula to weak automata, in two minimization modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{simplify_obligation, to_pnf, Alphabet, LtlfFormula, ObligationFormula, Quant};
use crate::par;

use super::{build_component, compile_dfa_with_budget, dwa_and, dwa_or, minimize_dfa, minimize_dwa, Dwa};

pub const DEFAULT_TAU: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinMode {
    /// Minimized components, composed symbolically by the arena.
    Component,
    /// One explicit product over a balanced tree, minimized up to `tau` states.
    Incremental,
}

impl MinMode {
    pub fn name(self) -> &'static str {
        match self {
            MinMode::Component => "component",
            MinMode::Incremental => "incremental",
        }
    }
}

impl std::str::FromStr for MinMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "component" => Ok(MinMode::Component),
            "incremental" => Ok(MinMode::Incremental),
            other => Err(format!("unknown minimization mode '{other}'")),
        }
    }
}

/// Boolean structure over component indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Combiner {
    Comp(usize),
    And(Vec<Combiner>),
    Or(Vec<Combiner>),
}

impl Combiner {
    pub fn eval(&self, bits: &[bool]) -> bool {
        match self {
            Combiner::Comp(i) => bits[*i],
            Combiner::And(xs) => xs.iter().all(|x| x.eval(bits)),
            Combiner::Or(xs) => xs.iter().any(|x| x.eval(bits)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub mode: MinMode,
    pub tau: usize,
    pub simplify: bool,
    pub state_budget: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            mode: MinMode::Component,
            tau: DEFAULT_TAU,
            simplify: true,
            state_budget: super::DEFAULT_STATE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CompileStats {
    pub dfa_states: Vec<usize>,
    pub component_states: Vec<usize>,
    pub products: usize,
    pub minimized_products: usize,
    /// Set once a product exceeded `tau`; later products are not minimized.
    pub latched: bool,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub mode: MinMode,
    /// The formula actually compiled (positive normal form, maybe simplified).
    pub formula: ObligationFormula,
    pub alphabet: Alphabet,
    /// Quantified components in left-to-right order.
    pub components: Vec<(Quant, LtlfFormula)>,
    /// Component automata, or a single product in incremental mode.
    pub dwas: Vec<Dwa>,
    pub combiner: Combiner,
    pub stats: CompileStats,
}

impl Compiled {
    /// One explicit automaton for the whole formula (not minimized).
    pub fn explicit_product(&self) -> Dwa {
        fn go(c: &Combiner, dwas: &[Dwa]) -> Dwa {
            match c {
                Combiner::Comp(i) => dwas[*i].clone(),
                Combiner::And(xs) => balanced(xs.iter().map(|x| go(x, dwas)).collect(), &mut |a, b| {
                    Ok(dwa_and(&a, &b))
                })
                .unwrap(),
                Combiner::Or(xs) => balanced(xs.iter().map(|x| go(x, dwas)).collect(), &mut |a, b| {
                    Ok(dwa_or(&a, &b))
                })
                .unwrap(),
            }
        }
        go(&self.combiner, &self.dwas)
    }

    /// Minimal automaton for the whole formula.
    pub fn minimal(&self) -> Dwa {
        minimize_dwa(&self.explicit_product())
    }
}

fn balanced(mut items: Vec<Dwa>, op: &mut dyn FnMut(Dwa, Dwa) -> Result<Dwa>) -> Result<Dwa> {
    if items.len() == 1 {
        return Ok(items.pop().unwrap());
    }
    let right = items.split_off(items.len() / 2);
    let l = balanced(items, op)?;
    let r = balanced(right, op)?;
    op(l, r)
}

fn shape(psi: &ObligationFormula, comps: &mut Vec<(Quant, LtlfFormula)>) -> Combiner {
    match psi {
        ObligationFormula::Exists(p) => {
            comps.push((Quant::Exists, p.clone()));
            Combiner::Comp(comps.len() - 1)
        }
        ObligationFormula::Forall(p) => {
            comps.push((Quant::Forall, p.clone()));
            Combiner::Comp(comps.len() - 1)
        }
        ObligationFormula::And(xs) => Combiner::And(xs.iter().map(|x| shape(x, comps)).collect()),
        ObligationFormula::Or(xs) => Combiner::Or(xs.iter().map(|x| shape(x, comps)).collect()),
        ObligationFormula::Not(_) => unreachable!("formula is in positive normal form"),
    }
}

/// Steps 1 and 2 of the pipeline: normalize, compile every component to a
/// minimal DWA and, in incremental mode, compose them explicitly.
pub fn compile_obligation(psi: &ObligationFormula, alphabet: &Alphabet, opts: &CompileOptions) -> Result<Compiled> {
    let mut formula = to_pnf(psi);
    if opts.simplify {
        formula = simplify_obligation(&formula);
    }
    let mut components = Vec::new();
    let combiner = shape(&formula, &mut components);
    let budget = opts.state_budget;
    let built: Vec<Result<(usize, Dwa)>> = par::map(&components, |(q, phi)| {
        let dfa = minimize_dfa(&compile_dfa_with_budget(phi, alphabet, budget)?);
        Ok((dfa.len(), minimize_dwa(&build_component(*q, &dfa))))
    });
    let mut stats = CompileStats::default();
    let mut dwas = Vec::new();
    for r in built {
        let (n, d) = r?;
        stats.dfa_states.push(n);
        stats.component_states.push(d.len());
        dwas.push(d);
    }
    let mut out = Compiled {
        mode: opts.mode,
        formula,
        alphabet: alphabet.clone(),
        components,
        dwas,
        combiner,
        stats,
    };
    if opts.mode == MinMode::Incremental {
        let product = incremental(&out.combiner, &out.dwas, opts, &mut out.stats)?;
        out.dwas = vec![product];
        out.combiner = Combiner::Comp(0);
    }
    Ok(out)
}

fn incremental(c: &Combiner, dwas: &[Dwa], opts: &CompileOptions, stats: &mut CompileStats) -> Result<Dwa> {
    let (xs, is_and) = match c {
        Combiner::Comp(i) => return Ok(dwas[*i].clone()),
        Combiner::And(xs) => (xs, true),
        Combiner::Or(xs) => (xs, false),
    };
    let mut items = Vec::new();
    for x in xs {
        items.push(incremental(x, dwas, opts, stats)?);
    }
    balanced(items, &mut |a, b| {
        let p = if is_and { dwa_and(&a, &b) } else { dwa_or(&a, &b) };
        stats.products += 1;
        if p.len() > opts.state_budget {
            return Err(Error::StateBudget {
                budget: opts.state_budget,
                closure: p.len(),
            });
        }
        if !stats.latched && p.len() <= opts.tau {
            stats.minimized_products += 1;
            Ok(minimize_dwa(&p))
        } else {
            stats.latched = true;
            Ok(p)
        }
    })
}
