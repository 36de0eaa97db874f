//! Line-oriented strategy documents:
//!
//! ```text
//! strategy v1
//! inputs: e0 e1
//! outputs: a0 a1
//! initial: 0
//! state 0 code 3 layer 2 safety out: a0 !a1
//!   -> 1 : e0 & !e1 | e1
//!   -> 0 : true
//! ```
//!
//! Lines starting with `#` are comments. `layer none` marks a state without
//! layer information. Guards are disjunctions of conjunctions of input
//! literals.

use std::fmt::Write as _;

use super::{Cube, MooreStrategy, StrategyState, Transition};
use crate::error::{Error, Result};
use crate::solve::LayerKind;

fn guard_text(guard: &[Cube], inputs: &[String]) -> String {
    if guard.is_empty() {
        return "false".into();
    }
    guard
        .iter()
        .map(|c| {
            if c.is_empty() {
                "true".to_string()
            } else {
                c.iter()
                    .map(|&(i, b)| if b { inputs[i].clone() } else { format!("!{}", inputs[i]) })
                    .collect::<Vec<_>>()
                    .join(" & ")
            }
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

fn output_text(out: u64, outputs: &[String]) -> String {
    outputs
        .iter()
        .enumerate()
        .map(|(i, n)| if out >> i & 1 == 1 { n.clone() } else { format!("!{n}") })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn export_strategy(s: &MooreStrategy, header: &[String]) -> String {
    let mut t = String::from("strategy v1\n");
    for h in header {
        for line in h.lines() {
            let _ = writeln!(t, "# {line}");
        }
    }
    let _ = writeln!(t, "inputs: {}", s.inputs.join(" "));
    let _ = writeln!(t, "outputs: {}", s.outputs.join(" "));
    let _ = writeln!(t, "initial: {}", s.initial);
    for (k, st) in s.states.iter().enumerate() {
        let layer = match st.layer {
            None => "none".to_string(),
            Some((j, LayerKind::Reach)) => format!("{j} reach"),
            Some((j, LayerKind::Safety)) => format!("{j} safety"),
        };
        let _ = writeln!(
            t,
            "state {k} code {} layer {layer} out: {}",
            st.code,
            output_text(st.output, &s.outputs)
        );
        for tr in &st.transitions {
            let _ = writeln!(t, "  -> {} : {}", tr.to, guard_text(&tr.guard, &s.inputs));
        }
    }
    t
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("strategy line {line}: {msg}"))
}

fn literal(text: &str, names: &[String], line: usize) -> Result<(usize, bool)> {
    let (name, pos) = match text.strip_prefix('!') {
        Some(n) => (n.trim(), false),
        None => (text, true),
    };
    let i = names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| bad(line, format!("unknown variable '{name}'")))?;
    Ok((i, pos))
}

fn parse_guard(text: &str, inputs: &[String], line: usize) -> Result<Vec<Cube>> {
    let text = text.trim();
    if text == "false" {
        return Ok(Vec::new());
    }
    text.split('|')
        .map(|c| {
            let c = c.trim();
            if c == "true" {
                return Ok(Vec::new());
            }
            c.split('&').map(|l| literal(l.trim(), inputs, line)).collect()
        })
        .collect()
}

fn names(rest: &str) -> Vec<String> {
    rest.split_whitespace().map(str::to_string).collect()
}

pub fn import_strategy(text: &str) -> Result<MooreStrategy> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, "strategy v1")) => {}
        Some((n, l)) => return Err(bad(n, format!("expected 'strategy v1', found '{l}'"))),
        None => return Err(Error::Format("empty strategy document".into())),
    }
    let mut field = |key: &str| -> Result<String> {
        let (n, l) = lines.next().ok_or_else(|| Error::Format(format!("missing '{key}'")))?;
        l.strip_prefix(key)
            .and_then(|r| r.strip_prefix(':'))
            .map(|r| r.trim().to_string())
            .ok_or_else(|| bad(n, format!("expected '{key}:'")))
    };
    let inputs = names(&field("inputs")?);
    let outputs = names(&field("outputs")?);
    let initial_text = field("initial")?;
    let initial: usize = initial_text
        .parse()
        .map_err(|_| Error::Format(format!("bad initial state '{initial_text}'")))?;
    let mut states: Vec<StrategyState> = Vec::new();
    for (n, l) in lines {
        if let Some(rest) = l.strip_prefix("->") {
            let (to, guard) = rest.split_once(':').ok_or_else(|| bad(n, "expected '-> <state> : <guard>'"))?;
            let to: usize = to.trim().parse().map_err(|_| bad(n, "bad successor"))?;
            let guard = parse_guard(guard, &inputs, n)?;
            let st = states.last_mut().ok_or_else(|| bad(n, "transition before any state"))?;
            st.transitions.push(Transition { guard, to });
            continue;
        }
        let (head, out) = l.split_once("out:").ok_or_else(|| bad(n, "expected 'out:'"))?;
        let words: Vec<&str> = head.split_whitespace().collect();
        let (k, code, layer) = match words.as_slice() {
            ["state", k, "code", c, "layer", "none"] => (*k, *c, None),
            ["state", k, "code", c, "layer", j, kind] => {
                let j: usize = j.parse().map_err(|_| bad(n, "bad layer index"))?;
                let kind = match *kind {
                    "reach" => LayerKind::Reach,
                    "safety" => LayerKind::Safety,
                    other => return Err(bad(n, format!("unknown layer kind '{other}'"))),
                };
                (*k, *c, Some((j, kind)))
            }
            _ => return Err(bad(n, "malformed state line")),
        };
        if k.parse::<usize>().ok() != Some(states.len()) {
            return Err(bad(n, "states must be numbered consecutively from 0"));
        }
        let code: u64 = code.parse().map_err(|_| bad(n, "bad code"))?;
        let mut output = 0u64;
        let lits: Vec<&str> = out.split_whitespace().collect();
        for lit in lits {
            let (i, b) = literal(lit, &outputs, n)?;
            if b {
                output |= 1 << i;
            }
        }
        states.push(StrategyState {
            code,
            output,
            layer,
            transitions: Vec::new(),
        });
    }
    if initial >= states.len().max(1) {
        return Err(Error::Format(format!("initial state {initial} out of range")));
    }
    if let Some(t) = states.iter().flat_map(|s| &s.transitions).find(|t| t.to >= states.len()) {
        return Err(Error::Format(format!("successor {} out of range", t.to)));
    }
    Ok(MooreStrategy {
        inputs,
        outputs,
        states,
        initial,
    })
}

pub fn strategy_to_dot(s: &MooreStrategy) -> String {
    let mut t = String::from("digraph strategy {\n  rankdir=LR;\n  init [shape=point];\n");
    let _ = writeln!(t, "  init -> s{};", s.initial);
    for (k, st) in s.states.iter().enumerate() {
        let _ = writeln!(t, "  s{k} [shape=box,label=\"{k}\\n{}\"];", output_text(st.output, &s.outputs));
        for tr in &st.transitions {
            let _ = writeln!(t, "  s{k} -> s{} [label=\"{}\"];", tr.to, guard_text(&tr.guard, &s.inputs));
        }
    }
    t.push_str("}\n");
    t
}
