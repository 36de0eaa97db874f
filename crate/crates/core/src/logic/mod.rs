//! Formulas, parsing, normal forms and trace semantics.

pub mod ast;
pub mod normal;
pub mod parse;
pub mod semantics;

use std::collections::BTreeSet;

use thiserror::Error;

pub use ast::{LtlfFormula, ObligationFormula, Quant};
pub use normal::{simplify_obligation, to_pnf};
pub use parse::{parse_ltlf, parse_obligation};
pub use semantics::{
    eval_ltlf, eval_obligation_on_lasso, Alphabet, FiniteTrace, Lasso, Letter, PrefixClassifier,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared atom '{name}' at {line}:{col}")]
    UndeclaredAtom { name: String, line: usize, col: usize },
    #[error(
        "'{quantifier}' at {line}:{col} is outside the obligation fragment \
         (only exists(...) and forall(...) are supported)"
    )]
    Fragment { quantifier: String, line: usize, col: usize },
    #[error("partition file line {line}: {msg}")]
    PartitionFormat { line: usize, msg: String },
    #[error("atom '{0}' is declared both as input and as output")]
    PartitionOverlap(String),
    #[error("atoms not covered by the partition: {}", .0.join(", "))]
    PartitionCoverage(Vec<String>),
}

/// Environment-controlled inputs and system-controlled outputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct VariablePartition {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl VariablePartition {
    pub fn new<S: Into<String>>(
        inputs: impl IntoIterator<Item = S>,
        outputs: impl IntoIterator<Item = S>,
    ) -> Result<Self, LogicError> {
        let p = VariablePartition {
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
        };
        if let Some(dup) = p.inputs.iter().find(|i| p.outputs.contains(i)) {
            return Err(LogicError::PartitionOverlap(dup.clone()));
        }
        Ok(p)
    }

    pub fn declared(&self) -> BTreeSet<String> {
        self.inputs.iter().chain(&self.outputs).cloned().collect()
    }

    /// Alphabet with outputs first, then inputs.
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.outputs.iter().chain(&self.inputs).cloned())
    }

    pub fn is_output(&self, atom: &str) -> bool {
        self.outputs.iter().any(|o| o == atom)
    }

    pub fn check_covers(&self, atoms: &BTreeSet<String>) -> Result<(), LogicError> {
        let declared = self.declared();
        let missing: Vec<String> = atoms.difference(&declared).cloned().collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(LogicError::PartitionCoverage(missing))
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            ".inputs {}\n.outputs {}\n",
            self.inputs.join(" "),
            self.outputs.join(" ")
        )
    }
}

/// Reads `.inputs` / `.outputs` lines; `#` starts a comment.
pub fn parse_partition(text: &str) -> Result<VariablePartition, LogicError> {
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or("");
        let names: Vec<String> = words.map(str::to_string).collect();
        for name in &names {
            let ok = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(LogicError::PartitionFormat {
                    line: n + 1,
                    msg: format!("invalid atom name '{name}'"),
                });
            }
        }
        let slot = match head {
            ".inputs" => &mut inputs,
            ".outputs" => &mut outputs,
            other => {
                return Err(LogicError::PartitionFormat {
                    line: n + 1,
                    msg: format!("expected .inputs or .outputs, found '{other}'"),
                })
            }
        };
        if slot.is_some() {
            return Err(LogicError::PartitionFormat {
                line: n + 1,
                msg: format!("duplicate {head} line"),
            });
        }
        *slot = Some(names);
    }
    VariablePartition::new(inputs.unwrap_or_default(), outputs.unwrap_or_default())
}

/// Parses a specification and its partition and checks that they fit.
pub fn parse_spec(
    formula: &str,
    partition: &str,
) -> Result<(ObligationFormula, VariablePartition), LogicError> {
    let part = parse_partition(partition)?;
    let psi = parse_obligation(formula, None)?;
    part.check_covers(&psi.atoms())?;
    Ok((psi, part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::arb_ltlf;
    use proptest::prelude::*;

    #[test]
    fn grammar_examples() {
        use LtlfFormula as L;
        assert_eq!(
            parse_ltlf("F(a & X false)", None).unwrap(),
            L::eventually(L::and(L::atom("a"), L::weak_next(L::False)))
        );
        assert_eq!(
            parse_ltlf("a U (b | X! c)", None).unwrap(),
            L::until(L::atom("a"), L::or(L::atom("b"), L::strong_next(L::atom("c"))))
        );
        assert_eq!(
            parse_ltlf("G(add -> X(c0))", None).unwrap(),
            L::always(L::or(L::not(L::atom("add")), L::weak_next(L::atom("c0"))))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let a = |s| parse_ltlf(s, None).unwrap();
        assert_eq!(a("a | b & c"), a("a | (b & c)"));
        assert_eq!(a("a U b U c"), a("a U (b U c)"));
        assert_eq!(a("a -> b -> c"), a("a -> (b -> c)"));
        assert_eq!(a("a & b U c"), a("a & (b U c)"));
        assert_eq!(a("!a U b"), a("(!a) U b"));
        assert_eq!(a("X! X a"), LtlfFormula::strong_next(LtlfFormula::weak_next(LtlfFormula::atom("a"))));
        assert_eq!(a("a <-> b -> c"), a("a <-> (b -> c)"));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_ltlf("a &\n  (b |", None) {
            Err(LogicError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 7)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_ltlf("a $ b", None),
            Err(LogicError::Syntax { line: 1, col: 3, .. })
        ));
    }

    #[test]
    fn undeclared_atom() {
        let declared: BTreeSet<String> = ["a".to_string()].into();
        assert!(matches!(
            parse_ltlf("a & zz", Some(&declared)),
            Err(LogicError::UndeclaredAtom { ref name, line: 1, col: 5 }) if name == "zz"
        ));
    }

    #[test]
    fn spec_examples() {
        let (psi, part) = parse_spec("exists(F(a & X false))", ".inputs e\n.outputs a\n").unwrap();
        assert!(matches!(psi, ObligationFormula::Exists(_)));
        assert_eq!(part.inputs, vec!["e"]);
        assert_eq!(part.outputs, vec!["a"]);

        let psi = parse_obligation("forall(G a) -> exists(F b)", None).unwrap();
        assert_eq!(
            psi,
            ObligationFormula::Or(vec![
                ObligationFormula::not(ObligationFormula::Forall(LtlfFormula::always(LtlfFormula::atom("a")))),
                ObligationFormula::Exists(LtlfFormula::eventually(LtlfFormula::atom("b"))),
            ])
        );

        let err = parse_spec("forallexists(F a)", ".inputs\n.outputs a").unwrap_err();
        assert!(matches!(err, LogicError::Fragment { .. }));
        assert!(err.to_string().contains("obligation fragment"));
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(
            parse_spec("exists(a & b)", ".inputs a\n.outputs\n"),
            Err(LogicError::PartitionCoverage(ref m)) if m == &vec!["b".to_string()]
        ));
        assert!(matches!(
            parse_partition(".inputs a\n.outputs a"),
            Err(LogicError::PartitionOverlap(_))
        ));
        assert!(matches!(
            parse_partition(".in a"),
            Err(LogicError::PartitionFormat { line: 1, .. })
        ));
    }

    #[test]
    fn comments_are_skipped() {
        let psi = parse_obligation("# header\nexists(a) # trailing\n", None).unwrap();
        assert_eq!(psi, ObligationFormula::Exists(LtlfFormula::atom("a")));
    }

    fn arb_obligation() -> impl Strategy<Value = ObligationFormula> {
        let leaf = (any::<bool>(), arb_ltlf(2, 3)).prop_map(|(e, p)| {
            if e {
                ObligationFormula::Exists(p)
            } else {
                ObligationFormula::Forall(p)
            }
        });
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(ObligationFormula::not),
                prop::collection::vec(inner.clone(), 2..=3).prop_map(ObligationFormula::And),
                prop::collection::vec(inner, 2..=3).prop_map(ObligationFormula::Or),
            ]
        })
    }

    proptest! {
        #[test]
        fn ltlf_print_parse_round_trip(phi in arb_ltlf(3, 5)) {
            let text = phi.to_string();
            prop_assert_eq!(parse_ltlf(&text, None).unwrap(), phi);
        }

        #[test]
        fn obligation_print_parse_round_trip(psi in arb_obligation()) {
            let text = psi.to_string();
            let back = parse_obligation(&text, None).unwrap();
            // Printing flattens nothing, so the tree must match exactly.
            prop_assert_eq!(back, psi);
        }

        #[test]
        fn pnf_has_no_negation(psi in arb_obligation()) {
            prop_assert!(to_pnf(&psi).is_positive());
        }
    }
}
