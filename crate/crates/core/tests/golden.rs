//! Golden artifacts. Set `UPDATE_GOLDEN=1` to rewrite the fixtures.

use std::path::PathBuf;

use oblsynth::automata::hoa::{export_hoa, parse_hoa};
use oblsynth::automata::{compile_obligation, minimize_dwa, Dwa};
use oblsynth::bench::emit_plot;
use oblsynth::logic::{parse_obligation, Alphabet};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing fixture {name}"));
    assert_eq!(actual, expected, "{name} differs from its fixture");
}

#[test]
fn guarantee_of_a_last_position() {
    let psi = parse_obligation("exists(F(a & X false))", None).unwrap();
    let ab = Alphabet::new(["a"]);
    let d = compile_obligation(&psi, &ab, &Default::default()).unwrap().minimal();
    assert_eq!(d.len(), 2);
    let text = export_hoa(&d.aut, "exists(F(a & X false))", None);
    golden("exists_last_a.hoa", &text);
    // Reading the automaton back and minimizing again changes nothing.
    let mut back = minimize_dwa(&Dwa::new(parse_hoa(&text).unwrap()));
    let mut orig = d.aut.clone();
    assert_eq!(back.canonical_string(), orig.canonical_string());
}

#[test]
fn runtime_plot() {
    let csv = std::fs::read_to_string(fixture("results.csv")).unwrap();
    let plot = emit_plot(&csv).unwrap();
    golden("results.svg", &plot.svg);
    golden("results_aggregated.csv", &plot.aggregated);
}
