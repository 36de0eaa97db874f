use std::collections::BTreeSet;
use std::fmt;

/// Finite-trace temporal formula. Implication and biconditional are
/// desugared by the parser, so they never appear here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlfFormula {
    True,
    False,
    Atom(String),
    Not(Box<LtlfFormula>),
    And(Box<LtlfFormula>, Box<LtlfFormula>),
    Or(Box<LtlfFormula>, Box<LtlfFormula>),
    /// `X!`: a next position exists and satisfies the operand.
    StrongNext(Box<LtlfFormula>),
    /// `X`: if a next position exists, it satisfies the operand.
    WeakNext(Box<LtlfFormula>),
    Until(Box<LtlfFormula>, Box<LtlfFormula>),
    Eventually(Box<LtlfFormula>),
    Always(Box<LtlfFormula>),
}

impl LtlfFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        LtlfFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        LtlfFormula::Not(Box::new(f))
    }

    pub fn and(a: Self, b: Self) -> Self {
        LtlfFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        LtlfFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn strong_next(f: Self) -> Self {
        LtlfFormula::StrongNext(Box::new(f))
    }

    pub fn weak_next(f: Self) -> Self {
        LtlfFormula::WeakNext(Box::new(f))
    }

    pub fn until(a: Self, b: Self) -> Self {
        LtlfFormula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Self) -> Self {
        LtlfFormula::Eventually(Box::new(f))
    }

    pub fn always(f: Self) -> Self {
        LtlfFormula::Always(Box::new(f))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Self::or(Self::not(a), b)
    }

    pub fn iff(a: Self, b: Self) -> Self {
        Self::and(Self::implies(a.clone(), b.clone()), Self::implies(b, a))
    }

    /// Conjunction of a non-empty list, left-nested; `true` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Self>) -> Self {
        items
            .into_iter()
            .reduce(Self::and)
            .unwrap_or(LtlfFormula::True)
    }

    pub fn disjunction(items: impl IntoIterator<Item = Self>) -> Self {
        items
            .into_iter()
            .reduce(Self::or)
            .unwrap_or(LtlfFormula::False)
    }

    pub fn children(&self) -> Vec<&LtlfFormula> {
        use LtlfFormula::*;
        match self {
            True | False | Atom(_) => vec![],
            Not(a) | StrongNext(a) | WeakNext(a) | Eventually(a) | Always(a) => vec![a],
            And(a, b) | Or(a, b) | Until(a, b) => vec![a, b],
        }
    }

    /// The same operator over new operands, in the order of [`children`](Self::children).
    pub fn with_children(&self, mut kids: Vec<LtlfFormula>) -> LtlfFormula {
        use LtlfFormula::*;
        let mut next = || Box::new(kids.remove(0));
        match self {
            True | False | Atom(_) => self.clone(),
            Not(_) => Not(next()),
            StrongNext(_) => StrongNext(next()),
            WeakNext(_) => WeakNext(next()),
            Eventually(_) => Eventually(next()),
            Always(_) => Always(next()),
            And(..) => And(next(), next()),
            Or(..) => Or(next(), next()),
            Until(..) => Until(next(), next()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        if let LtlfFormula::Atom(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(
            self,
            LtlfFormula::StrongNext(_)
                | LtlfFormula::WeakNext(_)
                | LtlfFormula::Until(..)
                | LtlfFormula::Eventually(_)
                | LtlfFormula::Always(_)
        )
    }
}

fn is_simple(f: &LtlfFormula) -> bool {
    matches!(f, LtlfFormula::True | LtlfFormula::False | LtlfFormula::Atom(_))
}

impl fmt::Display for LtlfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LtlfFormula::*;
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(p) => write!(f, "{p}"),
            Not(a) if is_simple(a) => write!(f, "!{a}"),
            Not(a) => write!(f, "!({a})"),
            And(a, b) => write!(f, "({a} & {b})"),
            Or(a, b) => write!(f, "({a} | {b})"),
            Until(a, b) => write!(f, "({a} U {b})"),
            StrongNext(a) => write!(f, "X!({a})"),
            WeakNext(a) => write!(f, "X({a})"),
            Eventually(a) => write!(f, "F({a})"),
            Always(a) => write!(f, "G({a})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Quant {
    /// Some nonempty prefix satisfies the payload (guarantee).
    Exists,
    /// Every nonempty prefix satisfies the payload (safety).
    Forall,
}

impl Quant {
    pub fn dual(self) -> Quant {
        match self {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Quant::Exists => "exists",
            Quant::Forall => "forall",
        }
    }
}

/// Boolean combination of quantified finite-trace components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ObligationFormula {
    Exists(LtlfFormula),
    Forall(LtlfFormula),
    Not(Box<ObligationFormula>),
    And(Vec<ObligationFormula>),
    Or(Vec<ObligationFormula>),
}

impl ObligationFormula {
    pub fn quantified(q: Quant, phi: LtlfFormula) -> Self {
        match q {
            Quant::Exists => ObligationFormula::Exists(phi),
            Quant::Forall => ObligationFormula::Forall(phi),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        ObligationFormula::Not(Box::new(f))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        ObligationFormula::Or(vec![Self::not(a), b])
    }

    /// Quantified leaves in left-to-right order.
    pub fn components(&self) -> Vec<(Quant, &LtlfFormula)> {
        let mut out = Vec::new();
        self.collect_components(&mut out);
        out
    }

    fn collect_components<'a>(&'a self, out: &mut Vec<(Quant, &'a LtlfFormula)>) {
        match self {
            ObligationFormula::Exists(p) => out.push((Quant::Exists, p)),
            ObligationFormula::Forall(p) => out.push((Quant::Forall, p)),
            ObligationFormula::Not(a) => a.collect_components(out),
            ObligationFormula::And(xs) | ObligationFormula::Or(xs) => {
                for x in xs {
                    x.collect_components(out);
                }
            }
        }
    }

    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// Node count including the payload formulas.
    pub fn size(&self) -> usize {
        match self {
            ObligationFormula::Exists(p) | ObligationFormula::Forall(p) => 1 + p.size(),
            ObligationFormula::Not(a) => 1 + a.size(),
            ObligationFormula::And(xs) | ObligationFormula::Or(xs) => {
                1 + xs.iter().map(|x| x.size()).sum::<usize>()
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        self.components()
            .into_iter()
            .flat_map(|(_, p)| p.atoms())
            .collect()
    }

    pub fn is_positive(&self) -> bool {
        match self {
            ObligationFormula::Exists(_) | ObligationFormula::Forall(_) => true,
            ObligationFormula::Not(_) => false,
            ObligationFormula::And(xs) | ObligationFormula::Or(xs) => {
                xs.iter().all(|x| x.is_positive())
            }
        }
    }
}

impl fmt::Display for ObligationFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObligationFormula::Exists(p) => write!(f, "exists({p})"),
            ObligationFormula::Forall(p) => write!(f, "forall({p})"),
            ObligationFormula::Not(a) => write!(f, "!{a}"),
            ObligationFormula::And(xs) | ObligationFormula::Or(xs) => {
                let sep = if matches!(self, ObligationFormula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                match xs.len() {
                    0 => write!(
                        f,
                        "{}",
                        if sep == " & " { "forall(true)" } else { "!forall(true)" }
                    ),
                    1 => write!(f, "{}", xs[0]),
                    _ => {
                        let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                        write!(f, "({})", parts.join(sep))
                    }
                }
            }
        }
    }
}
