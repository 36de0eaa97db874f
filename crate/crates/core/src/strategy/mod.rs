//! Memoryless system strategies read off solver layers, packaged as Moore
//! machines over the reachable automaton states.

mod format;
mod verify;

use std::collections::VecDeque;

use rustc_hash::FxHashMap as HashMap;

use crate::arena::Arena;
use crate::bdd::{BddRef, Var};
use crate::error::{Error, Result};
use crate::solve::{LayerKind, SolveResult};

pub use format::{export_strategy, import_strategy, strategy_to_dot};
pub use verify::{verify_strategy, Verdict, Verification, VerifyOptions};

/// Conjunction of input literals; `(i, b)` requires input `i` to be `b`.
pub type Cube = Vec<(usize, bool)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// Disjoint cubes over the inputs.
    pub guard: Vec<Cube>,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyState {
    /// Arena state code this machine state stands for.
    pub code: u64,
    /// Output valuation, bit `i` is output `i`.
    pub output: u64,
    /// Index and kind of the smallest solver layer holding `code`.
    pub layer: Option<(usize, LayerKind)>,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MooreStrategy {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub states: Vec<StrategyState>,
    pub initial: usize,
}

/// A finite play: machine states `s_0 .. s_n` and the letters in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub states: Vec<usize>,
    /// `(output, input)` per step.
    pub letters: Vec<(u64, u64)>,
}

impl Outcome {
    /// Letters in the partition alphabet layout (outputs, then inputs).
    pub fn joined(&self, outputs: usize) -> Vec<u64> {
        self.letters.iter().map(|&(x, y)| x | y << outputs).collect()
    }
}

pub fn cube_holds(cube: &Cube, y: u64) -> bool {
    cube.iter().all(|&(i, b)| (y >> i & 1 == 1) == b)
}

impl MooreStrategy {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Successor of `s` on input valuation `y`.
    pub fn step(&self, s: usize, y: u64) -> Option<usize> {
        self.states[s]
            .transitions
            .iter()
            .find(|t| t.guard.iter().any(|c| cube_holds(c, y)))
            .map(|t| t.to)
    }

    /// The outcome on `inputs`; the output of a step is emitted before its
    /// input is read.
    pub fn simulate(&self, inputs: &[u64]) -> Outcome {
        let mut s = self.initial;
        let mut out = Outcome {
            states: vec![s],
            letters: Vec::with_capacity(inputs.len()),
        };
        for &y in inputs {
            out.letters.push((self.states[s].output, y));
            s = self.step(s, y).expect("strategy is total");
            out.states.push(s);
        }
        out
    }

    /// Every state has exactly one successor per input valuation.
    pub fn check_total(&self) -> Result<(), String> {
        if self.inputs.len() > 20 {
            return Err("too many inputs to enumerate".into());
        }
        for (s, st) in self.states.iter().enumerate() {
            for y in 0..1u64 << self.inputs.len() {
                let n = st
                    .transitions
                    .iter()
                    .filter(|t| t.guard.iter().any(|c| cube_holds(c, y)))
                    .count();
                if n != 1 {
                    return Err(format!("state {s} has {n} successors on input {y:#b}"));
                }
            }
        }
        Ok(())
    }

    /// Layer index never grows along `states`, and it drops on every step
    /// taken from a reachability layer.
    pub fn check_layer_progress(&self, states: &[usize]) -> Result<(), String> {
        for w in states.windows(2) {
            let (Some((i, kind)), Some((j, _))) = (self.states[w[0]].layer, self.states[w[1]].layer) else {
                return Err(format!("state {} or {} carries no layer", w[0], w[1]));
            };
            let ok = match kind {
                LayerKind::Reach => j < i,
                LayerKind::Safety => j <= i,
            };
            if !ok {
                return Err(format!("layer {i} ({kind:?}) -> {j} from state {} to {}", w[0], w[1]));
            }
        }
        Ok(())
    }
}

fn code_lits(z: &[Var], code: u64) -> Vec<(Var, bool)> {
    z.iter().enumerate().map(|(b, &v)| (v, code >> b & 1 == 1)).collect()
}

fn bits_to_mask(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |m, (i, &b)| m | (b as u64) << i)
}

/// Reads a memoryless strategy off the layers of a realizable result. In a
/// state whose smallest layer is `j`, a reachability layer forces the next
/// state into layer `j - 1`; a safety layer does so when it can and otherwise
/// stays inside layer `j`. Ties go to the smallest output valuation.
pub fn extract_strategy(a: &mut Arena, r: &SolveResult) -> Result<MooreStrategy> {
    if !r.realizable {
        return Err(Error::Internal("strategy requested for an unrealizable game".into()));
    }
    let z = a.z.clone();
    let x = a.x.clone();
    let y = a.y.clone();
    let mut forced: HashMap<usize, BddRef> = HashMap::default();
    let mut forced_into = |a: &mut Arena, j: usize| -> BddRef {
        *forced.entry(j).or_insert_with(|| {
            let pre = a.pre_image(r.layers[j].set);
            a.store.forall(&y, pre)
        })
    };
    let layer_of = |a: &Arena, code: u64| r.layers.iter().position(|l| a.contains(l.set, code));

    let mut index: HashMap<u64, usize> = HashMap::default();
    let mut states: Vec<StrategyState> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(a.init_code, 0);
    queue.push_back(a.init_code);
    states.push(StrategyState {
        code: a.init_code,
        output: 0,
        layer: None,
        transitions: Vec::new(),
    });
    while let Some(code) = queue.pop_front() {
        let s = index[&code];
        let j = layer_of(a, code)
            .ok_or_else(|| Error::Internal(format!("state {code:#x} lies outside every layer")))?;
        let kind = r.layers[j].kind;
        let lits = code_lits(&z, code);
        let mut targets = Vec::new();
        if j > 0 {
            targets.push(j - 1);
        }
        if kind == LayerKind::Safety {
            targets.push(j);
        }
        let mut choice = None;
        for t in targets {
            let f = forced_into(a, t);
            let here = a.store.restrict(f, &lits);
            if let Some(bits) = a.store.pick_min_witness(here, &x) {
                choice = Some(bits_to_mask(&bits));
                break;
            }
        }
        let out = choice.ok_or_else(|| {
            Error::Internal(format!("no output keeps state {code:#x} inside its layers"))
        })?;
        let mut assign = lits;
        assign.extend(x.iter().enumerate().map(|(i, &v)| (v, out >> i & 1 == 1)));
        let next: Vec<BddRef> = a.next.clone().into_iter().map(|f| a.store.restrict(f, &assign)).collect();
        let mut by_succ: Vec<(u64, BddRef)> = Vec::new();
        for leaf in a.store.split(&next, &y) {
            let succ = bits_to_mask(&leaf.values.iter().map(|v| v.is_true()).collect::<Vec<_>>());
            let c = a.store.cube(&leaf.cube);
            match by_succ.iter_mut().find(|(t, _)| *t == succ) {
                Some(e) => e.1 = a.store.or(e.1, c),
                None => by_succ.push((succ, c)),
            }
        }
        by_succ.sort_by_key(|&(t, _)| t);
        let mut transitions = Vec::new();
        for (succ, g) in by_succ {
            let to = *index.entry(succ).or_insert_with(|| {
                states.push(StrategyState {
                    code: succ,
                    output: 0,
                    layer: None,
                    transitions: Vec::new(),
                });
                queue.push_back(succ);
                states.len() - 1
            });
            let guard = a
                .store
                .cubes(g)
                .into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|(v, b)| (y.iter().position(|&w| w == v).expect("input variable"), b))
                        .collect()
                })
                .collect();
            transitions.push(Transition { guard, to });
        }
        states[s].output = out;
        states[s].layer = Some((j, kind));
        states[s].transitions = transitions;
        a.store.check()?;
    }
    Ok(MooreStrategy {
        inputs: a.inputs.clone(),
        outputs: a.outputs.clone(),
        states,
        initial: 0,
    })
}

#[cfg(test)]
mod tests;
