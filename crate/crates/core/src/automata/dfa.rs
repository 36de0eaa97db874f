//! LTLf to DFA by formula progression.
//!
//! A state is a Boolean combination of obligation variables: one per atom
//! ("the next letter contains p"), one per temporal subformula, and `END`
//! ("the suffix is empty"). Keeping that combination as a BDD makes equal
//! obligations share one state. Letter variables sit above the obligation
//! variables, so the successor BDD of a state splits into guard and
//! destination at the letter boundary.

use rustc_hash::FxHashMap as HashMap;

use crate::bdd::{BddRef, BddStore, Var, VarRole};
use crate::error::{Error, Result};
use crate::logic::{Alphabet, Letter, LtlfFormula};

use super::{Automaton, Dfa};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// A compilation session: owns the store in which state formulas live.
pub struct Progression {
    store: BddStore,
    alphabet: Alphabet,
    letters: Vec<Var>,
    atom_obl: HashMap<String, Var>,
    temporal: HashMap<LtlfFormula, Var>,
    /// Progressed form of each temporal variable, over letters and obligations.
    prog: HashMap<Var, BddRef>,
    /// Value of each obligation variable on the empty suffix.
    eps: Vec<(Var, bool)>,
    end: Var,
    subst: HashMap<Var, BddRef>,
    closure: usize,
    root: BddRef,
}

/// Opaque state formula of a [`Progression`] session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateFormula(pub BddRef);

impl Progression {
    /// Prepares a session for `phi`. Atoms of `phi` must belong to `alphabet`.
    pub fn new(phi: &LtlfFormula, alphabet: &Alphabet) -> Result<Self> {
        let mut store = BddStore::new();
        let letters: Vec<Var> = alphabet
            .names()
            .iter()
            .map(|n| store.add_var(format!("L.{n}"), VarRole::Letter))
            .collect();
        let mut atom_obl = HashMap::default();
        for a in phi.atoms() {
            if alphabet.index(&a).is_none() {
                return Err(Error::Internal(format!("atom {a} not in the alphabet")));
            }
            let v = store.add_var(format!("A.{a}"), VarRole::Obligation);
            atom_obl.insert(a, v);
        }
        let mut s = Progression {
            store,
            alphabet: alphabet.clone(),
            letters,
            atom_obl,
            temporal: HashMap::default(),
            prog: HashMap::default(),
            eps: Vec::new(),
            end: Var(0),
            subst: HashMap::default(),
            closure: 0,
            root: BddRef::FALSE,
        };
        s.declare_temporal(phi);
        s.end = s.store.add_var("END", VarRole::Obligation);
        s.closure = s.atom_obl.len() + s.temporal.len() + 1;

        // Empty-suffix valuation of obligation variables.
        let mut eps: Vec<(Var, bool)> = s.atom_obl.values().map(|&v| (v, false)).collect();
        for (f, &v) in &s.temporal {
            let val = matches!(f, LtlfFormula::WeakNext(_) | LtlfFormula::Always(_));
            eps.push((v, val));
        }
        eps.push((s.end, true));
        s.eps = eps;

        let temporals: Vec<(LtlfFormula, Var)> =
            s.temporal.iter().map(|(f, v)| (f.clone(), *v)).collect();
        for (f, v) in temporals {
            let p = s.prog_sym(&f);
            s.prog.insert(v, p);
        }
        let mut subst = HashMap::default();
        for (a, &v) in &s.atom_obl {
            let i = s.alphabet.index(a).unwrap();
            let lit = s.store.var(s.letters[i]);
            subst.insert(v, lit);
        }
        for (&v, &p) in &s.prog {
            subst.insert(v, p);
        }
        subst.insert(s.end, BddRef::FALSE);
        s.subst = subst;
        s.root = s.enc(phi);
        s.store.check()?;
        Ok(s)
    }

    fn declare_temporal(&mut self, f: &LtlfFormula) {
        for c in f.children() {
            self.declare_temporal(c);
        }
        if f.is_temporal() && !self.temporal.contains_key(f) {
            let v = self.store.add_var(format!("T{}", self.temporal.len()), VarRole::Obligation);
            self.temporal.insert(f.clone(), v);
        }
    }

    /// Encoding of a formula as an obligation on the current suffix.
    fn enc(&mut self, f: &LtlfFormula) -> BddRef {
        match f {
            LtlfFormula::True => BddRef::TRUE,
            LtlfFormula::False => BddRef::FALSE,
            LtlfFormula::Atom(p) => {
                let v = self.atom_obl[p];
                self.store.var(v)
            }
            LtlfFormula::Not(a) => {
                let x = self.enc(a);
                self.store.not(x)
            }
            LtlfFormula::And(a, b) => {
                let (x, y) = (self.enc(a), self.enc(b));
                self.store.and(x, y)
            }
            LtlfFormula::Or(a, b) => {
                let (x, y) = (self.enc(a), self.enc(b));
                self.store.or(x, y)
            }
            t => {
                let v = self.temporal[t];
                self.store.var(v)
            }
        }
    }

    /// One-letter progression with the current letter left symbolic.
    fn prog_sym(&mut self, f: &LtlfFormula) -> BddRef {
        match f {
            LtlfFormula::True => BddRef::TRUE,
            LtlfFormula::False => BddRef::FALSE,
            LtlfFormula::Atom(p) => {
                let i = self.alphabet.index(p).unwrap();
                self.store.var(self.letters[i])
            }
            LtlfFormula::Not(a) => {
                let x = self.prog_sym(a);
                self.store.not(x)
            }
            LtlfFormula::And(a, b) => {
                let (x, y) = (self.prog_sym(a), self.prog_sym(b));
                self.store.and(x, y)
            }
            LtlfFormula::Or(a, b) => {
                let (x, y) = (self.prog_sym(a), self.prog_sym(b));
                self.store.or(x, y)
            }
            LtlfFormula::StrongNext(a) => {
                let end = self.store.nvar(self.end);
                let x = self.enc(a);
                self.store.and(end, x)
            }
            LtlfFormula::WeakNext(a) => {
                let end = self.store.var(self.end);
                let x = self.enc(a);
                self.store.or(end, x)
            }
            LtlfFormula::Until(a, b) => {
                let pb = self.prog_sym(b);
                let pa = self.prog_sym(a);
                let me = self.store.var(self.temporal[f]);
                let stay = self.store.and(pa, me);
                self.store.or(pb, stay)
            }
            LtlfFormula::Eventually(a) => {
                let pa = self.prog_sym(a);
                let me = self.store.var(self.temporal[f]);
                self.store.or(pa, me)
            }
            LtlfFormula::Always(a) => {
                let pa = self.prog_sym(a);
                let me = self.store.var(self.temporal[f]);
                self.store.and(pa, me)
            }
        }
    }

    /// Number of obligation variables (atoms, temporal subformulas, END).
    pub fn closure_size(&self) -> usize {
        self.closure
    }

    pub fn initial(&self) -> StateFormula {
        StateFormula(self.root)
    }

    pub fn end(&mut self) -> StateFormula {
        StateFormula(self.store.var(self.end))
    }

    /// State formula of a temporal subformula of the compiled formula.
    pub fn temporal_var(&mut self, f: &LtlfFormula) -> Option<StateFormula> {
        let v = *self.temporal.get(f)?;
        Some(StateFormula(self.store.var(v)))
    }

    pub fn or(&mut self, a: StateFormula, b: StateFormula) -> StateFormula {
        StateFormula(self.store.or(a.0, b.0))
    }

    pub fn and(&mut self, a: StateFormula, b: StateFormula) -> StateFormula {
        StateFormula(self.store.and(a.0, b.0))
    }

    pub fn not(&mut self, a: StateFormula) -> StateFormula {
        StateFormula(self.store.not(a.0))
    }

    fn successor_sym(&mut self, xi: BddRef) -> BddRef {
        let subst = self.subst.clone();
        self.store.compose(xi, &subst)
    }

    /// Obligation left after reading `letter`.
    pub fn progress(&mut self, xi: StateFormula, letter: Letter) -> StateFormula {
        let succ = self.successor_sym(xi.0);
        let assignment: Vec<(Var, bool)> = self
            .letters
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, letter >> i & 1 == 1))
            .collect();
        StateFormula(self.store.restrict(succ, &assignment))
    }

    /// Whether the empty suffix satisfies the obligation.
    pub fn eps_accepts(&mut self, xi: StateFormula) -> bool {
        let eps = self.eps.clone();
        self.store.restrict(xi.0, &eps).is_true()
    }

    /// Readable form of a state formula.
    pub fn render(&self, xi: StateFormula) -> String {
        let mut names: HashMap<Var, String> = HashMap::default();
        for (a, &v) in &self.atom_obl {
            names.insert(v, a.clone());
        }
        for (f, &v) in &self.temporal {
            names.insert(v, f.to_string());
        }
        names.insert(self.end, "END".into());
        for (i, &v) in self.letters.iter().enumerate() {
            names.insert(v, format!("@{}", self.alphabet.name(i)));
        }
        self.store.to_formula(xi.0, &|v| names[&v].clone())
    }

    /// Splits a successor BDD at the letter boundary into (guard, destination).
    fn split_letters(
        &mut self,
        f: BddRef,
        memo: &mut HashMap<BddRef, Vec<(BddRef, BddRef)>>,
    ) -> Vec<(BddRef, BddRef)> {
        let boundary = self.letters.len() as u32;
        match self.store.top_var(f) {
            Some(v) if v.0 < boundary => {}
            _ => return vec![(BddRef::TRUE, f)],
        }
        if let Some(r) = memo.get(&f) {
            return r.clone();
        }
        let v = self.store.top_var(f).unwrap();
        let lo = self.store.low(f);
        let hi = self.store.high(f);
        let mut out: Vec<(BddRef, BddRef)> = Vec::new();
        for (child, pos) in [(lo, false), (hi, true)] {
            let lit = self.store.literal(v, pos);
            for (g, d) in self.split_letters(child, memo) {
                let g = self.store.and(lit, g);
                match out.iter_mut().find(|(_, dd)| *dd == d) {
                    Some(slot) => slot.0 = self.store.or(slot.0, g),
                    None => out.push((g, d)),
                }
            }
        }
        memo.insert(f, out.clone());
        out
    }
}

pub fn compile_dfa(phi: &LtlfFormula, alphabet: &Alphabet) -> Result<Dfa> {
    compile_dfa_with_budget(phi, alphabet, DEFAULT_STATE_BUDGET)
}

/// Explores the progression states reachable from `phi`. The initial
/// state's acceptance is the empty word's membership.
pub fn compile_dfa_with_budget(phi: &LtlfFormula, alphabet: &Alphabet, budget: usize) -> Result<Dfa> {
    let mut s = Progression::new(phi, alphabet)?;
    let mut aut = Automaton::new(alphabet.clone());
    let mut ids: HashMap<BddRef, usize> = HashMap::default();
    let mut queue: Vec<BddRef> = Vec::new();
    let root = s.root;
    let acc = s.eps_accepts(StateFormula(root));
    ids.insert(root, aut.add_state(acc));
    queue.push(root);
    let mut head = 0;
    let mut memo = HashMap::default();
    while head < queue.len() {
        let xi = queue[head];
        let from = ids[&xi];
        head += 1;
        let succ = s.successor_sym(xi);
        memo.clear();
        let pieces = s.split_letters(succ, &mut memo);
        s.store.check()?;
        for (g, d) in pieces {
            let to = match ids.get(&d) {
                Some(&t) => t,
                None => {
                    if aut.len() >= budget {
                        return Err(Error::StateBudget {
                            budget,
                            closure: s.closure_size(),
                        });
                    }
                    let acc = s.eps_accepts(StateFormula(d));
                    let t = aut.add_state(acc);
                    ids.insert(d, t);
                    queue.push(d);
                    t
                }
            };
            let guard = aut.store.import(&s.store, g, &|v| v);
            aut.add_edge(from, guard, to);
        }
    }
    aut.initial = 0;
    Ok(Dfa(aut))
}

/// Minimal complete DFA for the same language (reachable part, refined).
pub fn minimize_dfa(dfa: &Dfa) -> Dfa {
    let mut a = dfa.0.trim();
    let labels: Vec<u64> = a.states.iter().map(|s| s.accepting as u64).collect();
    let block = a.refine(&labels);
    let acc: Vec<bool> = a.states.iter().map(|s| s.accepting).collect();
    let mut q = a.quotient(&block, &acc);
    Dfa(q.canonical())
}
