//! HOA v1 export and a reader for the subset we write.
//!
//! Acceptance is transition-based: every edge leaving an accepting state
//! carries set `{0}`, so `Inf(0)` coincides with visiting accepting states
//! infinitely often.

use crate::bdd::{BddRef, Var};
use crate::error::{Error, Result};
use crate::logic::Alphabet;

use super::Automaton;

/// Writes `a` as a HOA document; `comment` goes into a header comment.
pub fn export_hoa(a: &Automaton, name: &str, comment: Option<&str>) -> String {
    let mut out = String::from("HOA: v1\n");
    if let Some(c) = comment {
        out.push_str(&format!("/* {} */\n", c.replace("*/", "* /")));
    }
    out.push_str(&format!("name: \"{}\"\n", name.replace('"', "'")));
    out.push_str(&format!("States: {}\nStart: {}\n", a.len(), a.initial));
    out.push_str(&format!("AP: {}", a.alphabet.len()));
    for n in a.alphabet.names() {
        out.push_str(&format!(" \"{n}\""));
    }
    out.push_str("\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n");
    out.push_str("properties: trans-labels explicit-labels trans-acc deterministic complete weak\n");
    out.push_str("--BODY--\n");
    for (q, s) in a.states.iter().enumerate() {
        out.push_str(&format!("State: {q}\n"));
        let mark = if s.accepting { " {0}" } else { "" };
        for e in &s.edges {
            let label = a
                .store
                .render(e.guard, &|v: Var| v.index().to_string(), "t", "f", " & ", " | ", "!");
            out.push_str(&format!("[{label}] {}{mark}\n", e.to));
        }
    }
    out.push_str("--END--\n");
    out
}

fn fmt_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("HOA line {line}: {msg}"))
}

/// Reads a deterministic automaton in the shape produced by [`export_hoa`].
/// State-based `{0}` marks are accepted as well.
pub fn parse_hoa(text: &str) -> Result<Automaton> {
    let text = strip_comments(text);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut states: Option<usize> = None;
    let mut start: Option<usize> = None;
    let mut aps: Option<Vec<String>> = None;
    let mut saw_version = false;
    for (n, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if line == "--BODY--" {
            break;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| fmt_err(n, "expected 'key: value'"))?;
        let rest = rest.trim();
        match key {
            "HOA" => {
                if rest != "v1" {
                    return Err(fmt_err(n, format!("unsupported version {rest}")));
                }
                saw_version = true;
            }
            "States" => states = Some(rest.parse().map_err(|_| fmt_err(n, "bad state count"))?),
            "Start" => start = Some(rest.parse().map_err(|_| fmt_err(n, "bad start state"))?),
            "AP" => aps = Some(parse_aps(rest).ok_or_else(|| fmt_err(n, "bad AP line"))?),
            "Acceptance" => {
                if rest.split_whitespace().collect::<Vec<_>>() != ["1", "Inf(0)"] {
                    return Err(fmt_err(n, "only 'Acceptance: 1 Inf(0)' is supported"));
                }
            }
            _ => {}
        }
    }
    if !saw_version {
        return Err(fmt_err(1, "missing 'HOA: v1'"));
    }
    let names = aps.ok_or_else(|| fmt_err(1, "missing AP line"))?;
    let nstates = states.ok_or_else(|| fmt_err(1, "missing States"))?;
    let mut a = Automaton::new(Alphabet::new(names));
    for _ in 0..nstates {
        a.add_state(false);
    }
    a.initial = start.ok_or_else(|| fmt_err(1, "missing Start"))?;
    if a.initial >= nstates {
        return Err(fmt_err(1, "start state out of range"));
    }
    let mut current: Option<usize> = None;
    let mut ended = false;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        if line == "--END--" {
            ended = true;
            break;
        }
        if let Some(rest) = line.strip_prefix("State:") {
            let rest = rest.trim();
            let id_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let q: usize = rest[..id_end].parse().map_err(|_| fmt_err(n, "bad state id"))?;
            if q >= nstates {
                return Err(fmt_err(n, "state id out of range"));
            }
            if rest[id_end..].contains("{0}") {
                a.states[q].accepting = true;
            }
            current = Some(q);
            continue;
        }
        let q = current.ok_or_else(|| fmt_err(n, "edge before any State line"))?;
        let close = line.find(']').ok_or_else(|| fmt_err(n, "expected '[label] target'"))?;
        if !line.starts_with('[') {
            return Err(fmt_err(n, "only explicit edge labels are supported"));
        }
        let label = &line[1..close];
        let rest = line[close + 1..].trim();
        let id_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let to: usize = rest[..id_end].parse().map_err(|_| fmt_err(n, "bad target"))?;
        if to >= nstates {
            return Err(fmt_err(n, "target out of range"));
        }
        if rest[id_end..].contains("{0}") {
            a.states[q].accepting = true;
        }
        let g = LabelParser { s: label.as_bytes(), pos: 0, line: n }.parse(&mut a)?;
        a.add_edge(q, g, to);
    }
    if !ended {
        return Err(fmt_err(text.lines().count(), "missing --END--"));
    }
    Ok(a)
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(i) = rest.find("/*") {
        out.push_str(&rest[..i]);
        match rest[i..].find("*/") {
            Some(j) => {
                // Keep line numbering stable.
                out.extend(rest[i..i + j].chars().filter(|&c| c == '\n'));
                rest = &rest[i + j + 2..];
            }
            None => {
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

fn parse_aps(rest: &str) -> Option<Vec<String>> {
    let (count, mut tail) = rest.split_once(' ').unwrap_or((rest, ""));
    let count: usize = count.trim().parse().ok()?;
    let mut names = Vec::new();
    for _ in 0..count {
        tail = tail.trim_start().strip_prefix('"')?;
        let end = tail.find('"')?;
        names.push(tail[..end].to_string());
        tail = &tail[end + 1..];
    }
    Some(names)
}

struct LabelParser<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl LabelParser<'_> {
    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self, a: &mut Automaton) -> Result<BddRef> {
        let g = self.disj(a)?;
        self.skip();
        if self.pos != self.s.len() {
            return Err(fmt_err(self.line, "trailing input in label"));
        }
        Ok(g)
    }

    fn disj(&mut self, a: &mut Automaton) -> Result<BddRef> {
        let mut g = self.conj(a)?;
        while self.eat(b'|') {
            let h = self.conj(a)?;
            g = a.store.or(g, h);
        }
        Ok(g)
    }

    fn conj(&mut self, a: &mut Automaton) -> Result<BddRef> {
        let mut g = self.unary(a)?;
        while self.eat(b'&') {
            let h = self.unary(a)?;
            g = a.store.and(g, h);
        }
        Ok(g)
    }

    fn unary(&mut self, a: &mut Automaton) -> Result<BddRef> {
        if self.eat(b'!') {
            let g = self.unary(a)?;
            return Ok(a.store.not(g));
        }
        if self.eat(b'(') {
            let g = self.disj(a)?;
            if !self.eat(b')') {
                return Err(fmt_err(self.line, "expected ')' in label"));
            }
            return Ok(g);
        }
        if self.eat(b't') {
            return Ok(BddRef::TRUE);
        }
        if self.eat(b'f') {
            return Ok(BddRef::FALSE);
        }
        self.skip();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let idx: usize = std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| fmt_err(self.line, "expected AP index in label"))?;
        if idx >= a.alphabet.len() {
            return Err(fmt_err(self.line, format!("AP index {idx} out of range")));
        }
        Ok(a.store.var(Var(idx as u32)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{build_component, compile_dfa, minimize_dwa};
    use crate::logic::{parse_ltlf, Quant};

    #[test]
    fn single_accepting_state() {
        let mut a = Automaton::new(Alphabet::new(["a"]));
        a.add_state(true);
        a.add_edge(0, BddRef::TRUE, 0);
        let text = export_hoa(&a, "all", None);
        assert!(text.contains("--BODY--\nState: 0\n[t] 0 {0}\n--END--"));
        assert!(text.contains("Acceptance: 1 Inf(0)"));
        assert!(text.contains("acc-name: Buchi"));
    }

    #[test]
    fn eventually_a_golden() {
        let ab = Alphabet::new(["a"]);
        let dfa = compile_dfa(&parse_ltlf("F a", None).unwrap(), &ab).unwrap();
        let d = minimize_dwa(&build_component(Quant::Exists, &dfa));
        let text = export_hoa(&d, "F a", Some("mode=component"));
        let want = "HOA: v1\n/* mode=component */\nname: \"F a\"\nStates: 2\nStart: 0\nAP: 1 \"a\"\n\
acc-name: Buchi\nAcceptance: 1 Inf(0)\n\
properties: trans-labels explicit-labels trans-acc deterministic complete weak\n\
--BODY--\nState: 0\n[!0] 0\n[0] 1\nState: 1\n[t] 1 {0}\n--END--\n";
        assert_eq!(text, want);
    }

    #[test]
    fn round_trip_is_isomorphic() {
        let ab = Alphabet::new(["a", "b"]);
        let dfa = compile_dfa(&parse_ltlf("G(a -> X b) | F(a & b)", None).unwrap(), &ab).unwrap();
        let d = build_component(Quant::Forall, &dfa);
        let mut back = parse_hoa(&export_hoa(&d, "x", Some("c"))).unwrap();
        let mut orig = d.aut.clone();
        assert_eq!(back.canonical_string(), orig.canonical_string());
    }

    #[test]
    fn reports_bad_input() {
        assert!(matches!(parse_hoa("HOA: v2\n--BODY--\n--END--"), Err(Error::Format(_))));
        let bad = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"a\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[3] 0\n--END--\n";
        assert!(parse_hoa(bad).is_err());
    }
}
