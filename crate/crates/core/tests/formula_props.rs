mod common;

use proptest::prelude::*;

use chemalgebra::formula::{format_formula, parse_formula, AtomBag, FormulaError};

use common::{element, POOL};

fn bag() -> impl Strategy<Value = AtomBag> {
    (prop::collection::vec((0..POOL.len(), 1u64..40), 0..6), -3i64..=3)
        .prop_map(|(counts, charge)| AtomBag::from_counts(counts.into_iter().map(|(i, n)| (element(POOL[i]), n)), charge))
}

fn nonempty_bag() -> impl Strategy<Value = AtomBag> {
    bag().prop_filter("needs atoms", |b| !b.is_empty())
}

/// Element symbols of a formula string in written order.
fn symbols(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for ch in text.chars() {
        if ch.is_ascii_uppercase() {
            out.push(ch.to_string());
        } else if ch.is_ascii_lowercase() {
            out.last_mut().unwrap().push(ch);
        }
    }
    out
}

proptest! {
    #[test]
    fn addition_is_a_commutative_monoid(a in bag(), b in bag(), c in bag()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &AtomBag::new(), a.clone());
    }

    #[test]
    fn scaling_is_repeated_addition(a in bag(), k in 0u64..=10) {
        let repeated = (0..k).fold(AtomBag::new(), |acc, _| &acc + &a);
        prop_assert_eq!(a.scale(k).unwrap(), repeated);
    }

    #[test]
    fn format_then_parse_is_identity(a in nonempty_bag()) {
        let text = format_formula(&a).unwrap();
        prop_assert_eq!(parse_formula(&text).unwrap().into_bag(), a);
    }

    #[test]
    fn hill_order(a in nonempty_bag()) {
        let text = format_formula(&a).unwrap();
        let written = symbols(&text);
        let mut expected = written.clone();
        expected.sort_by_key(|s| match s.as_str() {
            "C" => (0, String::new()),
            "H" => (1, String::new()),
            other => (2, other.to_string()),
        });
        expected.dedup();
        prop_assert_eq!(written, expected, "{}", text);
    }

    #[test]
    fn difference_undoes_addition(a in bag(), b in bag()) {
        let sum = &a + &b;
        let d = sum.diff(&a);
        prop_assert!(d.negative_part().is_empty());
        prop_assert!(d.positive_part().same_atoms(&b));
    }
}

#[test]
fn scaling_reports_overflow() {
    let big = AtomBag::from_counts([(element("C"), u64::MAX / 2 + 1)], 0);
    assert_eq!(big.scale(2), Err(FormulaError::Overflow));
    let limit = AtomBag::from_counts([(element("H"), (1 << 31) - 1)], 0);
    assert_eq!(parse_formula(&format_formula(&limit).unwrap()).unwrap().into_bag(), limit);
}
