use std::collections::VecDeque;

use rustc_hash::FxHashMap as HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::MooreStrategy;
use crate::automata::{tarjan, Combiner, Dwa};
use crate::logic::{Alphabet, Lasso, Letter};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest product (states times input valuations) checked exhaustively.
    pub cap: usize,
    pub rollouts: usize,
    pub rollout_len: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cap: 1 << 22,
            rollouts: 500,
            rollout_len: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every outcome satisfies the specification.
    Verified,
    /// The product exceeded the cap; random rollouts found no violation.
    BoundedVerified { rollouts: usize, length: usize },
    /// An outcome violating the specification, over outputs then inputs.
    Failed { lasso: Lasso },
    /// A sampled play on which the layer index did not make progress.
    NoProgress { play: Vec<Letter> },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Verified | Verdict::BoundedVerified { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::BoundedVerified { .. } => "bounded-verified",
            Verdict::Failed { .. } => "failed",
            Verdict::NoProgress { .. } => "no-progress",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub verdict: Verdict,
    /// Product states explored (0 for the rollout fallback).
    pub product_states: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    verdict: &'a str,
    product_states: usize,
}

impl Verification {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Summary {
            verdict: self.verdict.name(),
            product_states: self.product_states,
        })
        .expect("plain struct")
    }
}

/// Product of the strategy with the component automata.
struct Product<'a> {
    s: &'a MooreStrategy,
    dwas: &'a [Dwa],
    combiner: &'a Combiner,
    letters: Vec<Alphabet>,
    joint: Alphabet,
}

type Node = (usize, Vec<usize>);

impl<'a> Product<'a> {
    fn new(s: &'a MooreStrategy, dwas: &'a [Dwa], combiner: &'a Combiner) -> Self {
        let joint = Alphabet::new(s.outputs.iter().chain(&s.inputs).cloned());
        Product {
            s,
            dwas,
            combiner,
            letters: dwas.iter().map(|d| d.alphabet.clone()).collect(),
            joint,
        }
    }

    fn root(&self) -> Node {
        (self.s.initial, self.dwas.iter().map(|d| d.initial).collect())
    }

    fn letter(&self, st: usize, y: u64) -> Letter {
        self.s.states[st].output | y << self.s.outputs.len()
    }

    fn step(&self, n: &Node, y: u64) -> (Node, Letter) {
        let l = self.letter(n.0, y);
        let t = self.s.step(n.0, y).expect("strategy is total");
        let qs = self
            .dwas
            .iter()
            .zip(&self.letters)
            .zip(&n.1)
            .map(|((d, ab), &q)| d.step(q, self.joint.translate(l, ab)))
            .collect();
        ((t, qs), l)
    }

    fn accepting(&self, n: &Node) -> bool {
        let bits: Vec<bool> = self.dwas.iter().zip(&n.1).map(|(d, &q)| d.states[q].accepting).collect();
        self.combiner.eval(&bits)
    }
}

/// Checks every outcome of `s` against the components combined by
/// `combiner`. Weakness makes it enough to look for a reachable cycle
/// through rejecting product states only.
pub fn verify_strategy(dwas: &[Dwa], combiner: &Combiner, s: &MooreStrategy, opts: &VerifyOptions) -> Verification {
    let p = Product::new(s, dwas, combiner);
    let ny = s.inputs.len();
    let fan = if ny >= 32 { usize::MAX } else { 1usize << ny };
    if fan == usize::MAX || s.len().saturating_mul(fan) > opts.cap {
        return rollouts(&p, opts);
    }
    let mut index: HashMap<Node, usize> = HashMap::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut succ: Vec<Vec<(usize, Letter)>> = Vec::new();
    let root = p.root();
    index.insert(root.clone(), 0);
    nodes.push(root);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        if nodes.len().saturating_mul(fan) > opts.cap {
            return rollouts(&p, opts);
        }
        let mut out = Vec::with_capacity(fan);
        for y in 0..fan as u64 {
            let (t, l) = p.step(&nodes[v], y);
            let w = match index.get(&t) {
                Some(&w) => w,
                None => {
                    nodes.push(t.clone());
                    index.insert(t, nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            out.push((w, l));
        }
        succ.push(out);
    }
    let acc: Vec<bool> = nodes.iter().map(|n| p.accepting(n)).collect();
    // Cycles avoiding accepting states.
    let rej: Vec<Vec<usize>> = (0..nodes.len())
        .map(|v| {
            if acc[v] {
                Vec::new()
            } else {
                succ[v].iter().map(|&(w, _)| w).filter(|&w| !acc[w]).collect()
            }
        })
        .collect();
    let (comp, ncomp) = tarjan(&rej);
    let mut size = vec![0usize; ncomp];
    for &c in &comp {
        size[c] += 1;
    }
    let bad = (0..nodes.len()).find(|&v| !acc[v] && (size[comp[v]] > 1 || rej[v].contains(&v)));
    let verdict = match bad {
        None => Verdict::Verified,
        Some(v) => {
            let stem = path(&succ, 0, |w| w == v, |_| true);
            let c = comp[v];
            let cycle = succ[v]
                .iter()
                .find(|&&(w, _)| !acc[w] && comp[w] == c)
                .map(|&(w, l)| {
                    let mut cyc = vec![l];
                    if w != v {
                        cyc.extend(path(&succ, w, |u| u == v, |u| comp[u] == c && !acc[u]));
                    }
                    cyc
                })
                .expect("nontrivial component");
            Verdict::Failed {
                lasso: shortest(stem, cycle),
            }
        }
    };
    Verification {
        verdict,
        product_states: nodes.len(),
    }
}

/// Rotates the cycle backwards over a matching stem suffix, then shortens a
/// cycle that repeats a shorter block.
fn shortest(mut stem: Vec<Letter>, mut cycle: Vec<Letter>) -> Lasso {
    while let (Some(&u), Some(&v)) = (stem.last(), cycle.last()) {
        if u != v {
            break;
        }
        stem.pop();
        cycle.rotate_right(1);
    }
    let n = cycle.len();
    if let Some(p) = (1..n).find(|&p| n % p == 0 && (p..n).all(|i| cycle[i] == cycle[i - p])) {
        cycle.truncate(p);
    }
    Lasso::new(stem, cycle)
}

/// Letters along a shortest path from `from` to a node satisfying `goal`,
/// moving only through nodes satisfying `keep`.
fn path(succ: &[Vec<(usize, Letter)>], from: usize, goal: impl Fn(usize) -> bool, keep: impl Fn(usize) -> bool) -> Vec<Letter> {
    let mut parent: HashMap<usize, (usize, Letter)> = HashMap::default();
    let mut queue = VecDeque::from([from]);
    let mut seen = vec![false; succ.len()];
    seen[from] = true;
    let mut end = None;
    if goal(from) {
        end = Some(from);
    }
    while end.is_none() {
        let Some(v) = queue.pop_front() else { break };
        for &(w, l) in &succ[v] {
            if seen[w] || !keep(w) {
                continue;
            }
            seen[w] = true;
            parent.insert(w, (v, l));
            if goal(w) {
                end = Some(w);
                break;
            }
            queue.push_back(w);
        }
    }
    let mut v = end.expect("goal reachable");
    let mut letters = Vec::new();
    while v != from {
        let (u, l) = parent[&v];
        letters.push(l);
        v = u;
    }
    letters.reverse();
    letters
}

/// Random plays checking layer progress; a repeated product node closes a
/// cycle, which must visit an accepting state.
fn rollouts(p: &Product<'_>, opts: &VerifyOptions) -> Verification {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ny = p.s.inputs.len();
    let mask = if ny >= 64 { u64::MAX } else { (1u64 << ny) - 1 };
    for _ in 0..opts.rollouts {
        let mut n = p.root();
        let mut seen: HashMap<Node, usize> = HashMap::default();
        let mut letters = Vec::new();
        let mut accs = Vec::new();
        let mut machine = vec![n.0];
        for i in 0..opts.rollout_len {
            if let Some(&k) = seen.get(&n) {
                if !accs[k..].iter().any(|&a| a) {
                    return Verification {
                        verdict: Verdict::Failed {
                            lasso: shortest(letters[..k].to_vec(), letters[k..].to_vec()),
                        },
                        product_states: 0,
                    };
                }
            }
            seen.entry(n.clone()).or_insert(i);
            accs.push(p.accepting(&n));
            let y = rng.gen::<u64>() & mask;
            let (t, l) = p.step(&n, y);
            letters.push(l);
            machine.push(t.0);
            n = t;
        }
        if p.s.check_layer_progress(&machine).is_err() && p.s.states.iter().all(|s| s.layer.is_some()) {
            return Verification {
                verdict: Verdict::NoProgress { play: letters },
                product_states: 0,
            };
        }
    }
    Verification {
        verdict: Verdict::BoundedVerified {
            rollouts: opts.rollouts,
            length: opts.rollout_len,
        },
        product_states: 0,
    }
}
