//! Explicit-state automata with propositional guards.
//!
//! [`Automaton`] is the shared carrier: a finite alphabet of atoms, a guard
//! store whose variable `i` is atom `i`, and states with guarded edges.
//! [`Dfa`] reads it over finite words, [`Dwa`] over infinite ones.

pub mod dfa;
pub mod dwa;
pub mod hoa;
pub mod pipeline;

use std::collections::{HashMap, VecDeque};
use std::ops::{Deref, DerefMut};

use crate::bdd::{BddRef, BddStore, Var, VarRole};
use crate::logic::{Alphabet, Letter};

pub use dfa::{compile_dfa, compile_dfa_with_budget, minimize_dfa, Progression, DEFAULT_STATE_BUDGET};
pub use dwa::{
    build_component, check_sigma_partition, check_weak, compute_ranks, dwa_accepts_lasso, dwa_and,
    dwa_not, dwa_or, minimize_dwa, weakness_witness, SigmaPartition,
};
pub use pipeline::{compile_obligation, Combiner, Compiled, MinMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub guard: BddRef,
    pub to: usize,
}

#[derive(Clone, Debug, Default)]
pub struct State {
    pub accepting: bool,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct Automaton {
    pub alphabet: Alphabet,
    pub store: BddStore,
    pub states: Vec<State>,
    pub initial: usize,
}

impl Automaton {
    pub fn new(alphabet: Alphabet) -> Self {
        let mut store = BddStore::new();
        for name in alphabet.names() {
            store.add_var(name.clone(), VarRole::Letter);
        }
        Automaton {
            alphabet,
            store,
            states: Vec::new(),
            initial: 0,
        }
    }

    /// Empty automaton sharing this one's alphabet.
    pub fn empty_like(&self) -> Self {
        Automaton::new(self.alphabet.clone())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn add_state(&mut self, accepting: bool) -> usize {
        self.states.push(State {
            accepting,
            edges: Vec::new(),
        });
        self.states.len() - 1
    }

    /// Adds `guard` towards `to`, merging with an existing edge to the same
    /// destination. Unsatisfiable guards are dropped.
    pub fn add_edge(&mut self, from: usize, guard: BddRef, to: usize) {
        if guard.is_false() {
            return;
        }
        if let Some(i) = self.states[from].edges.iter().position(|e| e.to == to) {
            let g = self.states[from].edges[i].guard;
            let merged = self.store.or(g, guard);
            self.states[from].edges[i].guard = merged;
        } else {
            self.states[from].edges.push(Edge { guard, to });
        }
    }

    pub fn atom_var(&self, i: usize) -> Var {
        Var(i as u32)
    }

    pub fn atom_vars(&self) -> Vec<Var> {
        (0..self.alphabet.len()).map(|i| Var(i as u32)).collect()
    }

    /// Guard satisfied by exactly one letter.
    pub fn letter_guard(&mut self, letter: Letter) -> BddRef {
        let lits: Vec<(Var, bool)> = (0..self.alphabet.len())
            .map(|i| (Var(i as u32), letter >> i & 1 == 1))
            .collect();
        self.store.cube(&lits)
    }

    pub fn guard_holds(&self, guard: BddRef, letter: Letter) -> bool {
        self.store.eval_bits(guard, letter)
    }

    /// Successor on a letter. Panics on an incomplete state.
    pub fn step(&self, q: usize, letter: Letter) -> usize {
        self.try_step(q, letter)
            .unwrap_or_else(|| panic!("state {q} has no edge for letter {letter}"))
    }

    pub fn try_step(&self, q: usize, letter: Letter) -> Option<usize> {
        self.states[q]
            .edges
            .iter()
            .find(|e| self.store.eval_bits(e.guard, letter))
            .map(|e| e.to)
    }

    pub fn run(&self, word: &[Letter]) -> usize {
        word.iter().fold(self.initial, |q, &a| self.step(q, a))
    }

    /// Dense transition table `[state][letter]`; only for small alphabets.
    pub fn table(&self) -> Vec<Vec<u32>> {
        assert!(self.alphabet.len() <= 16, "alphabet too large for a table");
        self.states
            .iter()
            .enumerate()
            .map(|(q, _)| {
                self.alphabet
                    .letters()
                    .map(|a| self.step(q, a) as u32)
                    .collect()
            })
            .collect()
    }

    /// Checks that guards of every state are pairwise disjoint and cover
    /// all letters; returns the first offending state.
    pub fn check_deterministic_complete(&mut self) -> Result<(), String> {
        for q in 0..self.states.len() {
            let guards: Vec<BddRef> = self.states[q].edges.iter().map(|e| e.guard).collect();
            for i in 0..guards.len() {
                for j in i + 1..guards.len() {
                    let both = self.store.and(guards[i], guards[j]);
                    if !both.is_false() {
                        return Err(format!("state {q}: overlapping guards"));
                    }
                }
            }
            let all = self.store.or_all(guards);
            if !all.is_true() {
                return Err(format!("state {q}: guards not exhaustive"));
            }
        }
        Ok(())
    }

    pub fn successors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        self.states[q].edges.iter().map(|e| e.to)
    }

    /// States in breadth-first order from the initial state.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for to in self.successors(q) {
                if !seen[to] {
                    seen[to] = true;
                    queue.push_back(to);
                }
            }
        }
        order
    }

    /// Copy restricted to `order` (which must contain the initial state and
    /// be closed under successors), renumbered by position in `order`.
    pub fn renumber(&self, order: &[usize]) -> Automaton {
        let mut index = vec![usize::MAX; self.states.len()];
        for (i, &q) in order.iter().enumerate() {
            index[q] = i;
        }
        let mut out = self.empty_like();
        out.store = self.store.clone();
        for &q in order {
            out.add_state(self.states[q].accepting);
        }
        for (i, &q) in order.iter().enumerate() {
            out.states[i].edges = self.states[q]
                .edges
                .iter()
                .map(|e| Edge {
                    guard: e.guard,
                    to: index[e.to],
                })
                .collect();
        }
        out.initial = index[self.initial];
        out
    }

    /// Drops unreachable states.
    pub fn trim(&self) -> Automaton {
        let mut order = self.bfs_order();
        order.sort_unstable();
        self.renumber(&order)
    }

    /// Coarsest partition refining `labels` that is stable under the
    /// transition structure (Moore-style signature refinement). Returns the
    /// block of every state; blocks are numbered by first occurrence.
    pub fn refine(&mut self, labels: &[u64]) -> Vec<usize> {
        let n = self.states.len();
        let mut block = number_by_first(labels);
        let mut count = block.iter().max().map_or(0, |m| m + 1);
        loop {
            let mut sigs: Vec<(usize, Vec<(usize, BddRef)>)> = Vec::with_capacity(n);
            for q in 0..n {
                let mut per_block: Vec<(usize, BddRef)> = Vec::new();
                for e in self.states[q].edges.clone() {
                    let b = block[e.to];
                    match per_block.iter_mut().find(|(bb, _)| *bb == b) {
                        Some(slot) => slot.1 = self.store.or(slot.1, e.guard),
                        None => per_block.push((b, e.guard)),
                    }
                }
                per_block.sort_unstable();
                sigs.push((block[q], per_block));
            }
            let next = number_by_first(&sigs);
            let next_count = next.iter().max().map_or(0, |m| m + 1);
            block = next;
            if next_count == count {
                return block;
            }
            count = next_count;
        }
    }

    /// Quotient by a partition; every block takes the acceptance given by
    /// `accepting` and the edges of its first member.
    pub fn quotient(&mut self, block: &[usize], accepting: &[bool]) -> Automaton {
        let nblocks = block.iter().max().map_or(0, |m| m + 1);
        let mut rep = vec![usize::MAX; nblocks];
        for (q, &b) in block.iter().enumerate() {
            if rep[b] == usize::MAX {
                rep[b] = q;
            }
        }
        let mut out = self.empty_like();
        out.store = self.store.clone();
        for &r in &rep {
            out.add_state(accepting[r]);
        }
        for (b, &r) in rep.iter().enumerate() {
            for e in self.states[r].edges.clone() {
                out.add_edge(b, e.guard, block[e.to]);
            }
        }
        out.initial = block[self.initial];
        out
    }

    /// Smallest letter (as a bit vector read from atom 0 upwards) in a guard.
    pub fn guard_key(&mut self, guard: BddRef) -> Vec<bool> {
        let vars = self.atom_vars();
        self.store
            .pick_min_witness(guard, &vars)
            .unwrap_or_default()
    }

    /// Breadth-first renumbering with edges visited in guard-key order,
    /// restricted to reachable states. Isomorphic automata map to identical
    /// canonical forms.
    pub fn canonical(&mut self) -> Automaton {
        for q in 0..self.states.len() {
            let mut keyed: Vec<(Vec<bool>, Edge)> = self.states[q]
                .edges
                .clone()
                .into_iter()
                .map(|e| (self.guard_key(e.guard), e))
                .collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            self.states[q].edges = keyed.into_iter().map(|(_, e)| e).collect();
        }
        let order = self.bfs_order();
        self.renumber(&order)
    }

    pub fn guard_string(&self, guard: BddRef) -> String {
        let names = self.alphabet.names().to_vec();
        self.store
            .to_formula(guard, &|v: Var| names[v.index()].clone())
    }

    /// Text form of [`Automaton::canonical`]; equal strings mean isomorphic
    /// automata over the same alphabet.
    pub fn canonical_string(&mut self) -> String {
        let c = self.canonical();
        let mut out = format!("atoms {}\n", c.alphabet.names().join(" "));
        for (q, s) in c.states.iter().enumerate() {
            out.push_str(&format!("{q}{}", if s.accepting { " acc" } else { "" }));
            for e in &s.edges {
                out.push_str(&format!(" [{}]->{}", c.guard_string(e.guard), e.to));
            }
            out.push('\n');
        }
        out
    }

    /// Tarjan's algorithm. Returns the component of every state; components
    /// are numbered in completion order, so successors never have larger ids.
    pub fn sccs(&self) -> (Vec<usize>, usize) {
        let succ: Vec<Vec<usize>> = (0..self.states.len())
            .map(|q| self.successors(q).collect())
            .collect();
        tarjan(&succ)
    }

    /// True when `q` lies on a cycle.
    pub fn recurrent(&self, comp: &[usize]) -> Vec<bool> {
        let mut size = HashMap::new();
        for &c in comp {
            *size.entry(c).or_insert(0usize) += 1;
        }
        (0..self.states.len())
            .map(|q| size[&comp[q]] > 1 || self.successors(q).any(|t| t == q))
            .collect()
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=LR;\n  init [shape=point];\n");
        for (q, s) in self.states.iter().enumerate() {
            let shape = if s.accepting { "doublecircle" } else { "circle" };
            out.push_str(&format!("  {q} [shape={shape}];\n"));
        }
        out.push_str(&format!("  init -> {};\n", self.initial));
        for (q, s) in self.states.iter().enumerate() {
            for e in &s.edges {
                out.push_str(&format!(
                    "  {q} -> {} [label=\"{}\"];\n",
                    e.to,
                    self.guard_string(e.guard).replace('"', "\\\"")
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Copies a guard of `other` into this store, matching atoms by name.
    pub fn import_guard(&mut self, other: &Automaton, guard: BddRef) -> BddRef {
        if other.alphabet == self.alphabet {
            return self.store.import(&other.store, guard, &|v| v);
        }
        let map: Vec<Var> = other
            .alphabet
            .names()
            .iter()
            .map(|n| {
                let i = self
                    .alphabet
                    .index(n)
                    .unwrap_or_else(|| panic!("atom {n} missing from target alphabet"));
                Var(i as u32)
            })
            .collect();
        self.store.import(&other.store, guard, &|v| map[v.index()])
    }
}

/// Renumbers values by order of first occurrence.
fn number_by_first<T: Eq + std::hash::Hash + Clone>(values: &[T]) -> Vec<usize> {
    let mut ids: HashMap<T, usize> = HashMap::new();
    values
        .iter()
        .map(|v| {
            let next = ids.len();
            *ids.entry(v.clone()).or_insert(next)
        })
        .collect()
}

/// Iterative Tarjan over an adjacency list.
pub fn tarjan(succ: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = succ.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp)
}

/// Deterministic complete automaton over finite words.
#[derive(Clone, Debug)]
pub struct Dfa(pub Automaton);

impl Deref for Dfa {
    type Target = Automaton;
    fn deref(&self) -> &Automaton {
        &self.0
    }
}

impl DerefMut for Dfa {
    fn deref_mut(&mut self) -> &mut Automaton {
        &mut self.0
    }
}

impl Dfa {
    pub fn accepts(&self, word: &[Letter]) -> bool {
        self.states[self.run(word)].accepting
    }
}

/// Deterministic weak automaton with optional analysis annotations.
#[derive(Clone, Debug)]
pub struct Dwa {
    pub aut: Automaton,
    /// Per state, acceptance of each original component (unminimized products only).
    pub provenance: Option<Vec<Vec<bool>>>,
    pub scc: Option<Vec<usize>>,
    pub rank: Option<Vec<u32>>,
}

impl Deref for Dwa {
    type Target = Automaton;
    fn deref(&self) -> &Automaton {
        &self.aut
    }
}

impl DerefMut for Dwa {
    fn deref_mut(&mut self) -> &mut Automaton {
        // Structural edits invalidate the annotations.
        self.scc = None;
        self.rank = None;
        &mut self.aut
    }
}

impl Dwa {
    pub fn new(aut: Automaton) -> Self {
        Dwa {
            aut,
            provenance: None,
            scc: None,
            rank: None,
        }
    }
}

/// Prefix classifier backed by transition tables of compiled DFAs, one per
/// component. Its horizon is the DFA size.
pub struct DfaClassifier {
    tables: Vec<Vec<Vec<u32>>>,
    accepting: Vec<Vec<bool>>,
    initial: Vec<u32>,
}

impl DfaClassifier {
    pub fn new(dfas: &[Dfa]) -> Self {
        DfaClassifier {
            tables: dfas.iter().map(|d| d.table()).collect(),
            accepting: dfas
                .iter()
                .map(|d| d.states.iter().map(|s| s.accepting).collect())
                .collect(),
            initial: dfas.iter().map(|d| d.initial as u32).collect(),
        }
    }
}

impl crate::logic::PrefixClassifier for DfaClassifier {
    type State = u32;

    fn start(&self, c: usize) -> u32 {
        self.initial[c]
    }

    fn step(&self, c: usize, q: &u32, letter: Letter) -> u32 {
        self.tables[c][*q as usize][letter as usize]
    }

    fn accepts(&self, c: usize, q: &u32) -> bool {
        self.accepting[c][*q as usize]
    }

    fn horizon(&self, c: usize) -> usize {
        self.tables[c].len()
    }
}
