//! Recursive-descent parser for LTLf payloads and obligation formulas.
//!
//! Precedence, loosest first: `<->`, `->` (right), `|`, `&`, `U` (right),
//! then the unary operators `!`, `X`, `X!`, `F`, `G`.

use std::collections::BTreeSet;

use super::ast::{LtlfFormula, ObligationFormula};
use super::LogicError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Bang,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    Next,
    StrongNext,
    Eventually,
    Always,
    Until,
    Exists,
    Forall,
    /// `forallexists` / `existsforall`: outside the obligation fragment.
    Recurrence(String),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, LogicError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: String| LogicError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '&' => {
                let len = if chars.get(i + 1) == Some(&'&') { 2 } else { 1 };
                push(Tok::And, len, &mut i, &mut col)
            }
            '|' => {
                let len = if chars.get(i + 1) == Some(&'|') { 2 } else { 1 };
                push(Tok::Or, len, &mut i, &mut col)
            }
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Imp, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Tok::Iff, 3, &mut i, &mut col)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[start..j].iter().collect();
                let len = j - start;
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" if chars.get(j) == Some(&'!') => {
                        push(Tok::StrongNext, 2, &mut i, &mut col);
                        continue;
                    }
                    "X" => Tok::Next,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    "U" => Tok::Until,
                    "exists" => Tok::Exists,
                    "forall" => Tok::Forall,
                    "forallexists" | "existsforall" => Tok::Recurrence(word.clone()),
                    _ => Tok::Ident(word),
                };
                push(tok, len, &mut i, &mut col);
            }
            other => return Err(syntax(line, col, format!("unexpected character '{other}'"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    declared: Option<&'a BTreeSet<String>>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, declared: Option<&'a BTreeSet<String>>) -> Result<Self, LogicError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            declared,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        let t = self.peek();
        Err(LogicError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(&self.peek().tok)))
        }
    }

    fn finish(&mut self) -> Result<(), LogicError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", describe(&self.peek().tok)))
        }
    }

    // ---- LTLf ------------------------------------------------------------

    fn ltlf(&mut self) -> Result<LtlfFormula, LogicError> {
        let mut lhs = self.ltlf_imp()?;
        while self.peek().tok == Tok::Iff {
            self.bump();
            let rhs = self.ltlf_imp()?;
            lhs = LtlfFormula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ltlf_imp(&mut self) -> Result<LtlfFormula, LogicError> {
        let lhs = self.ltlf_or()?;
        if self.peek().tok == Tok::Imp {
            self.bump();
            let rhs = self.ltlf_imp()?;
            return Ok(LtlfFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ltlf_or(&mut self) -> Result<LtlfFormula, LogicError> {
        let mut lhs = self.ltlf_and()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            let rhs = self.ltlf_and()?;
            lhs = LtlfFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ltlf_and(&mut self) -> Result<LtlfFormula, LogicError> {
        let mut lhs = self.ltlf_until()?;
        while self.peek().tok == Tok::And {
            self.bump();
            let rhs = self.ltlf_until()?;
            lhs = LtlfFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ltlf_until(&mut self) -> Result<LtlfFormula, LogicError> {
        let lhs = self.ltlf_unary()?;
        if self.peek().tok == Tok::Until {
            self.bump();
            let rhs = self.ltlf_until()?;
            return Ok(LtlfFormula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ltlf_unary(&mut self) -> Result<LtlfFormula, LogicError> {
        let ctor: fn(LtlfFormula) -> LtlfFormula = match self.peek().tok {
            Tok::Bang => LtlfFormula::not,
            Tok::Next => LtlfFormula::weak_next,
            Tok::StrongNext => LtlfFormula::strong_next,
            Tok::Eventually => LtlfFormula::eventually,
            Tok::Always => LtlfFormula::always,
            _ => return self.ltlf_primary(),
        };
        self.bump();
        let inner = self.ltlf_unary()?;
        Ok(ctor(inner))
    }

    fn ltlf_primary(&mut self) -> Result<LtlfFormula, LogicError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::True => {
                self.bump();
                Ok(LtlfFormula::True)
            }
            Tok::False => {
                self.bump();
                Ok(LtlfFormula::False)
            }
            Tok::Ident(name) => {
                if let Some(declared) = self.declared {
                    if !declared.contains(&name) {
                        return Err(LogicError::UndeclaredAtom {
                            name,
                            line: t.line,
                            col: t.col,
                        });
                    }
                }
                self.bump();
                Ok(LtlfFormula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.ltlf()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Exists | Tok::Forall | Tok::Recurrence(_) => {
                self.error("trace quantifiers cannot appear inside an LTLf formula")
            }
            ref other => self.error(format!("expected a formula, found {}", describe(other))),
        }
    }

    // ---- obligation layer --------------------------------------------------

    fn obligation(&mut self) -> Result<ObligationFormula, LogicError> {
        let mut lhs = self.obl_imp()?;
        while self.peek().tok == Tok::Iff {
            self.bump();
            let rhs = self.obl_imp()?;
            lhs = ObligationFormula::And(vec![
                ObligationFormula::implies(lhs.clone(), rhs.clone()),
                ObligationFormula::implies(rhs, lhs),
            ]);
        }
        Ok(lhs)
    }

    fn obl_imp(&mut self) -> Result<ObligationFormula, LogicError> {
        let lhs = self.obl_or()?;
        if self.peek().tok == Tok::Imp {
            self.bump();
            let rhs = self.obl_imp()?;
            return Ok(ObligationFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn obl_or(&mut self) -> Result<ObligationFormula, LogicError> {
        let first = self.obl_and()?;
        let mut items = vec![first];
        while self.peek().tok == Tok::Or {
            self.bump();
            items.push(self.obl_and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ObligationFormula::Or(items)
        })
    }

    fn obl_and(&mut self) -> Result<ObligationFormula, LogicError> {
        let first = self.obl_unary()?;
        let mut items = vec![first];
        while self.peek().tok == Tok::And {
            self.bump();
            items.push(self.obl_unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ObligationFormula::And(items)
        })
    }

    fn obl_unary(&mut self) -> Result<ObligationFormula, LogicError> {
        if self.peek().tok == Tok::Bang {
            self.bump();
            let inner = self.obl_unary()?;
            return Ok(ObligationFormula::not(inner));
        }
        self.obl_primary()
    }

    fn obl_primary(&mut self) -> Result<ObligationFormula, LogicError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Exists | Tok::Forall => {
                self.bump();
                self.expect(Tok::LParen, "'(' after trace quantifier")?;
                let payload = self.ltlf()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(if t.tok == Tok::Exists {
                    ObligationFormula::Exists(payload)
                } else {
                    ObligationFormula::Forall(payload)
                })
            }
            Tok::Recurrence(word) => Err(LogicError::Fragment {
                quantifier: word,
                line: t.line,
                col: t.col,
            }),
            Tok::LParen => {
                self.bump();
                let inner = self.obligation()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            ref other => self.error(format!(
                "expected exists(...) or forall(...), found {}",
                describe(other)
            )),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Eof => "end of input".to_string(),
        Tok::Recurrence(s) => format!("'{s}'"),
        other => format!("{other:?}"),
    }
}

/// Parses an LTLf formula. With `declared`, atoms outside that set are errors.
pub fn parse_ltlf(text: &str, declared: Option<&BTreeSet<String>>) -> Result<LtlfFormula, LogicError> {
    let mut p = Parser::new(text, declared)?;
    let f = p.ltlf()?;
    p.finish()?;
    Ok(f)
}

/// Parses an obligation formula (Boolean combination of `exists(..)` / `forall(..)`).
pub fn parse_obligation(
    text: &str,
    declared: Option<&BTreeSet<String>>,
) -> Result<ObligationFormula, LogicError> {
    let mut p = Parser::new(text, declared)?;
    let f = p.obligation()?;
    p.finish()?;
    Ok(f)
}
