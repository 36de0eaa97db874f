//! Trace semantics: finite traces, lassos, LTLf evaluation and the
//! prefix-quantified reading of obligation formulas on lassos.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use super::ast::{LtlfFormula, ObligationFormula, Quant};

/// A valuation of an [`Alphabet`]: bit `i` is atom `i`.
pub type Letter = u64;

pub const MAX_ATOMS: usize = 64;

/// Ordered list of atom names; fixes the bit layout of [`Letter`]s.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert!(names.len() <= MAX_ATOMS, "at most {MAX_ATOMS} atoms supported");
        Alphabet { names }
    }

    pub fn from_formula(phi: &LtlfFormula) -> Self {
        Alphabet::new(phi.atoms())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Number of distinct letters, `2^len`.
    pub fn letter_count(&self) -> u64 {
        1u64 << self.names.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.letter_count()
    }

    /// Letter with exactly the named atoms set; unknown names are ignored.
    pub fn letter<'a>(&self, atoms: impl IntoIterator<Item = &'a str>) -> Letter {
        atoms
            .into_iter()
            .filter_map(|a| self.index(a))
            .fold(0, |acc, i| acc | 1 << i)
    }

    pub fn atoms_of(&self, letter: Letter) -> BTreeSet<String> {
        (0..self.len())
            .filter(|i| letter >> i & 1 == 1)
            .map(|i| self.names[i].clone())
            .collect()
    }

    /// `{a, b}` style rendering used in counterexamples.
    pub fn show(&self, letter: Letter) -> String {
        let parts: Vec<String> = self.atoms_of(letter).into_iter().collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Re-encodes a letter of `self` over `other` (atoms by name).
    pub fn translate(&self, letter: Letter, other: &Alphabet) -> Letter {
        let mut out = 0;
        for (i, n) in self.names.iter().enumerate() {
            if letter >> i & 1 == 1 {
                if let Some(j) = other.index(n) {
                    out |= 1 << j;
                }
            }
        }
        out
    }
}

pub type FiniteTrace = Vec<Letter>;

/// The ultimately periodic word `stem · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl Lasso {
    pub fn new(stem: Vec<Letter>, cycle: Vec<Letter>) -> Self {
        assert!(!cycle.is_empty(), "lasso loop must be nonempty");
        Lasso { stem, cycle }
    }

    /// Letter at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> Letter {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn show(&self, alphabet: &Alphabet) -> String {
        let f = |w: &[Letter]| {
            w.iter()
                .map(|&l| alphabet.show(l))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("u=[{}] v=[{}]", f(&self.stem), f(&self.cycle))
    }
}

/// Enumerates every word of length `len` over `letters` letters.
pub fn words(letters: u64, len: usize) -> impl Iterator<Item = Vec<Letter>> {
    let total = letters.checked_pow(len as u32).expect("word space too large");
    (0..total).map(move |mut code| {
        let mut w = Vec::with_capacity(len);
        for _ in 0..len {
            w.push(code % letters);
            code /= letters;
        }
        w
    })
}

/// All lassos with `|u| <= max_stem` and `1 <= |v| <= max_cycle`.
pub fn all_lassos(letters: u64, max_stem: usize, max_cycle: usize) -> Vec<Lasso> {
    let mut out = Vec::new();
    for su in 0..=max_stem {
        for u in words(letters, su) {
            for sv in 1..=max_cycle {
                for v in words(letters, sv) {
                    out.push(Lasso::new(u.clone(), v));
                }
            }
        }
    }
    out
}

// ---- LTLf evaluation --------------------------------------------------------

/// Subformulas in post-order with structural sharing; children precede parents.
pub(crate) struct Closure<'a> {
    pub nodes: Vec<&'a LtlfFormula>,
    pub kids: Vec<Vec<usize>>,
}

impl<'a> Closure<'a> {
    pub fn new(phi: &'a LtlfFormula) -> Self {
        let mut c = Closure {
            nodes: Vec::new(),
            kids: Vec::new(),
        };
        let mut index = HashMap::new();
        c.visit(phi, &mut index);
        c
    }

    fn visit(&mut self, f: &'a LtlfFormula, index: &mut HashMap<&'a LtlfFormula, usize>) -> usize {
        if let Some(&i) = index.get(f) {
            return i;
        }
        let kids: Vec<usize> = f.children().into_iter().map(|c| self.visit(c, index)).collect();
        self.nodes.push(f);
        self.kids.push(kids);
        let i = self.nodes.len() - 1;
        index.insert(f, i);
        i
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Truth values of every subformula at the empty suffix.
    pub fn eps_row(&self) -> Vec<bool> {
        let mut row = vec![false; self.nodes.len()];
        for (j, f) in self.nodes.iter().enumerate() {
            let k = &self.kids[j];
            row[j] = match f {
                LtlfFormula::True | LtlfFormula::WeakNext(_) | LtlfFormula::Always(_) => true,
                LtlfFormula::False
                | LtlfFormula::Atom(_)
                | LtlfFormula::StrongNext(_)
                | LtlfFormula::Until(..)
                | LtlfFormula::Eventually(_) => false,
                LtlfFormula::Not(_) => !row[k[0]],
                LtlfFormula::And(..) => row[k[0]] && row[k[1]],
                LtlfFormula::Or(..) => row[k[0]] || row[k[1]],
            };
        }
        row
    }

    /// Truth values at a nonempty suffix `letter · rest`, given the row for `rest`.
    pub fn step_row(
        &self,
        letter_has: impl Fn(&str) -> bool,
        rest: &[bool],
        rest_empty: bool,
    ) -> Vec<bool> {
        let mut row = vec![false; self.nodes.len()];
        for (j, f) in self.nodes.iter().enumerate() {
            let k = &self.kids[j];
            row[j] = match f {
                LtlfFormula::True => true,
                LtlfFormula::False => false,
                LtlfFormula::Atom(p) => letter_has(p),
                LtlfFormula::Not(_) => !row[k[0]],
                LtlfFormula::And(..) => row[k[0]] && row[k[1]],
                LtlfFormula::Or(..) => row[k[0]] || row[k[1]],
                LtlfFormula::StrongNext(_) => !rest_empty && rest[k[0]],
                LtlfFormula::WeakNext(_) => rest_empty || rest[k[0]],
                LtlfFormula::Until(..) => row[k[1]] || (row[k[0]] && rest[j]),
                LtlfFormula::Eventually(_) => row[k[0]] || rest[j],
                LtlfFormula::Always(_) => row[k[0]] && rest[j],
            };
        }
        row
    }
}

/// `trace, i ⊨ phi`. Position `i == trace.len()` is the empty suffix.
/// Atoms missing from `alphabet` are false everywhere.
pub fn eval_ltlf(phi: &LtlfFormula, alphabet: &Alphabet, trace: &[Letter], i: usize) -> bool {
    assert!(i <= trace.len(), "position {i} beyond trace of length {}", trace.len());
    let closure = Closure::new(phi);
    let mut row = closure.eps_row();
    for pos in (i..trace.len()).rev() {
        let letter = trace[pos];
        let has = |p: &str| alphabet.index(p).is_some_and(|b| letter >> b & 1 == 1);
        row = closure.step_row(has, &row, pos + 1 == trace.len());
    }
    row[closure.root()]
}

/// Truth of `phi` at position 0 of every prefix `trace[..n]`, `n = 0..=len`.
pub fn eval_ltlf_prefixes(phi: &LtlfFormula, alphabet: &Alphabet, trace: &[Letter]) -> Vec<bool> {
    (0..=trace.len())
        .map(|n| eval_ltlf(phi, alphabet, &trace[..n], 0))
        .collect()
}

// ---- obligation semantics on lassos ------------------------------------------

/// Incremental membership test for the finite-trace components of an
/// obligation formula, indexed by component position.
pub trait PrefixClassifier {
    type State: Clone + Eq + Hash;
    fn start(&self, component: usize) -> Self::State;
    fn step(&self, component: usize, state: &Self::State, letter: Letter) -> Self::State;
    fn accepts(&self, component: usize, state: &Self::State) -> bool;
    /// Upper bound on the number of distinct states the classifier can be in
    /// at loop boundaries; limits the unrolling when states never repeat.
    fn horizon(&self, component: usize) -> usize;
}

/// Decides `Q Φ_i` on `u·v^ω` from the classifier, over nonempty prefixes.
pub fn eval_component_on_lasso<C: PrefixClassifier>(
    classifier: &C,
    component: usize,
    quant: Quant,
    lasso: &Lasso,
) -> bool {
    // Exists looks for an accepted prefix, Forall for a rejected one.
    let target = quant == Quant::Exists;
    let mut state = classifier.start(component);
    for &a in &lasso.stem {
        state = classifier.step(component, &state, a);
        if classifier.accepts(component, &state) == target {
            return target;
        }
    }
    let mut seen = HashSet::new();
    let bound = classifier.horizon(component) + 1;
    for _ in 0..=bound {
        if !seen.insert(state.clone()) {
            break;
        }
        for &a in &lasso.cycle {
            state = classifier.step(component, &state, a);
            if classifier.accepts(component, &state) == target {
                return target;
            }
        }
    }
    !target
}

pub fn eval_obligation_on_lasso<C: PrefixClassifier>(
    psi: &ObligationFormula,
    lasso: &Lasso,
    classifier: &C,
) -> bool {
    fn go<C: PrefixClassifier>(
        psi: &ObligationFormula,
        lasso: &Lasso,
        c: &C,
        next: &mut usize,
    ) -> bool {
        match psi {
            ObligationFormula::Exists(_) | ObligationFormula::Forall(_) => {
                let q = if matches!(psi, ObligationFormula::Exists(_)) {
                    Quant::Exists
                } else {
                    Quant::Forall
                };
                let i = *next;
                *next += 1;
                eval_component_on_lasso(c, i, q, lasso)
            }
            ObligationFormula::Not(a) => !go(a, lasso, c, next),
            // Evaluate every child so component numbering stays aligned.
            ObligationFormula::And(xs) => xs
                .iter()
                .map(|x| go(x, lasso, c, next))
                .fold(true, |acc, b| acc && b),
            ObligationFormula::Or(xs) => xs
                .iter()
                .map(|x| go(x, lasso, c, next))
                .fold(false, |acc, b| acc || b),
        }
    }
    let mut next = 0;
    go(psi, lasso, classifier, &mut next)
}

/// Classifier that re-evaluates the LTLf payloads on the whole prefix. Its
/// state is the prefix itself, so `horizon` must be supplied externally.
pub struct DirectClassifier<'a> {
    pub payloads: Vec<&'a LtlfFormula>,
    pub alphabet: &'a Alphabet,
    pub horizons: Vec<usize>,
}

impl PrefixClassifier for DirectClassifier<'_> {
    type State = Vec<Letter>;

    fn start(&self, _: usize) -> Vec<Letter> {
        Vec::new()
    }

    fn step(&self, _: usize, state: &Vec<Letter>, letter: Letter) -> Vec<Letter> {
        let mut s = state.clone();
        s.push(letter);
        s
    }

    fn accepts(&self, component: usize, state: &Vec<Letter>) -> bool {
        eval_ltlf(self.payloads[component], self.alphabet, state, 0)
    }

    fn horizon(&self, component: usize) -> usize {
        self.horizons[component]
    }
}
