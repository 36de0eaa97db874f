//! Positive normal form and component merging for obligation formulas.

use super::ast::{LtlfFormula, ObligationFormula};

fn negate_payload(phi: &LtlfFormula) -> LtlfFormula {
    match phi {
        LtlfFormula::Not(inner) => (**inner).clone(),
        LtlfFormula::True => LtlfFormula::False,
        LtlfFormula::False => LtlfFormula::True,
        other => LtlfFormula::not(other.clone()),
    }
}

/// Pushes negations through the Boolean shell; a negated quantifier becomes
/// its dual over the negated payload.
pub fn to_pnf(psi: &ObligationFormula) -> ObligationFormula {
    fn go(psi: &ObligationFormula, negated: bool) -> ObligationFormula {
        use ObligationFormula::*;
        match (psi, negated) {
            (Exists(p), false) => Exists(p.clone()),
            (Forall(p), false) => Forall(p.clone()),
            (Exists(p), true) => Forall(negate_payload(p)),
            (Forall(p), true) => Exists(negate_payload(p)),
            (Not(a), n) => go(a, !n),
            (And(xs), false) => And(xs.iter().map(|x| go(x, false)).collect()),
            (Or(xs), false) => Or(xs.iter().map(|x| go(x, false)).collect()),
            (And(xs), true) => Or(xs.iter().map(|x| go(x, true)).collect()),
            (Or(xs), true) => And(xs.iter().map(|x| go(x, true)).collect()),
        }
    }
    go(psi, false)
}

/// Merges sibling safety components under conjunctions and sibling guarantee
/// components under disjunctions, until nothing changes. Expects PNF input.
pub fn simplify_obligation(psi: &ObligationFormula) -> ObligationFormula {
    let mut cur = psi.clone();
    loop {
        let next = simplify_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn simplify_once(psi: &ObligationFormula) -> ObligationFormula {
    use ObligationFormula::*;
    match psi {
        Exists(_) | Forall(_) => psi.clone(),
        Not(a) => Not(Box::new(simplify_once(a))),
        And(xs) | Or(xs) => {
            let is_and = matches!(psi, And(_));
            let mut flat = Vec::new();
            for x in xs {
                match (simplify_once(x), is_and) {
                    (And(ys), true) | (Or(ys), false) => flat.extend(ys),
                    (y, _) => flat.push(y),
                }
            }
            // Merge into the position of the first mergeable child.
            let mut merged: Vec<ObligationFormula> = Vec::new();
            let mut slot: Option<usize> = None;
            let mut payloads: Vec<LtlfFormula> = Vec::new();
            for y in flat {
                let payload = match (&y, is_and) {
                    (Forall(p), true) | (Exists(p), false) => Some(p.clone()),
                    _ => None,
                };
                match payload {
                    Some(p) => {
                        if slot.is_none() {
                            slot = Some(merged.len());
                            merged.push(y);
                        }
                        payloads.push(p);
                    }
                    None => merged.push(y),
                }
            }
            if let Some(i) = slot {
                if payloads.len() > 1 {
                    merged[i] = if is_and {
                        Forall(LtlfFormula::conjunction(payloads))
                    } else {
                        Exists(LtlfFormula::disjunction(payloads))
                    };
                }
            }
            match merged.len() {
                1 => merged.pop().unwrap(),
                _ if is_and => And(merged),
                _ => Or(merged),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::{parse_ltlf, parse_obligation};

    fn p(s: &str) -> LtlfFormula {
        parse_ltlf(s, None).unwrap()
    }

    fn o(s: &str) -> ObligationFormula {
        parse_obligation(s, None).unwrap()
    }

    #[test]
    fn negated_exists_becomes_forall() {
        assert_eq!(
            to_pnf(&o("!exists(F a)")),
            ObligationFormula::Forall(LtlfFormula::not(p("F a")))
        );
    }

    #[test]
    fn de_morgan_over_components() {
        let got = to_pnf(&o("!(exists(a) & forall(b))"));
        let want = ObligationFormula::Or(vec![
            ObligationFormula::Forall(LtlfFormula::not(p("a"))),
            ObligationFormula::Exists(LtlfFormula::not(p("b"))),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn positive_input_unchanged() {
        let psi = o("(exists(F a) & forall(G b)) | exists(c)");
        assert_eq!(to_pnf(&psi), psi);
    }

    #[test]
    fn merges_safety_conjuncts() {
        let got = simplify_obligation(&o("forall(a) & forall(b)"));
        assert_eq!(got, ObligationFormula::Forall(p("a & b")));
    }

    #[test]
    fn merges_guarantee_disjuncts() {
        let got = simplify_obligation(&o("exists(a) | exists(b) | forall(c)"));
        let want = ObligationFormula::Or(vec![
            ObligationFormula::Exists(p("a | b")),
            ObligationFormula::Forall(p("c")),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn mixed_quantifiers_untouched() {
        let psi = o("exists(a) & forall(b)");
        assert_eq!(simplify_obligation(&psi), psi);
    }

    #[test]
    fn nested_merge_reaches_fixpoint() {
        let got = simplify_obligation(&o("(forall(a) & (forall(b) & exists(c))) & forall(d)"));
        assert_eq!(got.component_count(), 2);
    }
}
