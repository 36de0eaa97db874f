//! Generators shared by unit tests.

use proptest::prelude::*;

use crate::logic::LtlfFormula;

/// Random LTLf formulas over atoms `p0..p{atoms-1}`.
pub(crate) fn arb_ltlf(atoms: usize, depth: u32) -> impl Strategy<Value = LtlfFormula> {
    let leaf = prop_oneof![
        Just(LtlfFormula::True),
        Just(LtlfFormula::False),
        (0..atoms).prop_map(|i| LtlfFormula::atom(format!("p{i}"))),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LtlfFormula::not),
            inner.clone().prop_map(LtlfFormula::strong_next),
            inner.clone().prop_map(LtlfFormula::weak_next),
            inner.clone().prop_map(LtlfFormula::eventually),
            inner.clone().prop_map(LtlfFormula::always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlfFormula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| LtlfFormula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| LtlfFormula::until(a, b)),
        ]
    })
}

/// Random formulas of size at most `max_size`.
pub(crate) fn small_ltlf(atoms: usize, max_size: usize) -> impl Strategy<Value = LtlfFormula> {
    arb_ltlf(atoms, 4).prop_filter("size bound", move |f| f.size() <= max_size)
}
