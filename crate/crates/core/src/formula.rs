//! Exact atom multisets and the plain chemical-formula dialect.
//!
//! An [`AtomBag`] is the unit of every balance computation in the crate: a
//! map from element to a strictly positive count, plus a net formal charge.
//! [`ChemicalFormula`] pairs a bag with its canonical text, written carbon
//! first, hydrogen second, then the remaining symbols alphabetically, with the
//! charge appended as repeated `+`/`-` signs (`CHO3-`, `Na+`).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use crate::element::{Element, UnknownElement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error(transparent)]
    UnknownElement(#[from] UnknownElement),
    #[error("malformed formula `{text}`: {reason}")]
    MalformedFormula { text: String, reason: &'static str },
    #[error("cannot format an empty atom bag")]
    EmptyBag,
    #[error("atom count overflow")]
    Overflow,
}

/// Multiset of elements plus a net charge. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomBag {
    counts: BTreeMap<Element, u64>,
    charge: i64,
}

impl AtomBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts<I>(counts: I, charge: i64) -> Self
    where
        I: IntoIterator<Item = (Element, u64)>,
    {
        let mut bag = AtomBag { counts: BTreeMap::new(), charge };
        for (e, n) in counts {
            bag.add_atoms(e, n);
        }
        bag
    }

    pub fn charge(&self) -> i64 {
        self.charge
    }

    pub fn set_charge(&mut self, charge: i64) {
        self.charge = charge;
    }

    pub fn count(&self, element: Element) -> u64 {
        self.counts.get(&element).copied().unwrap_or(0)
    }

    pub fn add_atoms(&mut self, element: Element, n: u64) {
        if n == 0 {
            return;
        }
        let slot = self.counts.entry(element).or_insert(0);
        *slot = slot.checked_add(n).expect("atom count overflow");
    }

    /// Elements in atomic-number order.
    pub fn iter(&self) -> impl Iterator<Item = (Element, u64)> + '_ {
        self.counts.iter().map(|(e, n)| (*e, *n))
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.counts.keys().copied()
    }

    /// True when the bag holds no atoms (the charge is ignored).
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total_atoms(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Equality of element counts only, charge ignored.
    pub fn same_atoms(&self, other: &AtomBag) -> bool {
        self.counts == other.counts
    }

    pub fn checked_add(&self, other: &AtomBag) -> Option<AtomBag> {
        let mut out = self.clone();
        for (e, n) in other.iter() {
            let slot = out.counts.entry(e).or_insert(0);
            *slot = slot.checked_add(n)?;
        }
        out.charge = out.charge.checked_add(other.charge)?;
        Some(out)
    }

    pub fn scale(&self, k: u64) -> Result<AtomBag, FormulaError> {
        if k == 0 {
            return Ok(AtomBag::new());
        }
        let mut counts = BTreeMap::new();
        for (e, n) in self.iter() {
            counts.insert(e, n.checked_mul(k).ok_or(FormulaError::Overflow)?);
        }
        let k = i64::try_from(k).map_err(|_| FormulaError::Overflow)?;
        let charge = self.charge.checked_mul(k).ok_or(FormulaError::Overflow)?;
        Ok(AtomBag { counts, charge })
    }

    /// Signed per-element difference `self - other`.
    pub fn diff(&self, other: &AtomBag) -> BagDelta {
        let mut counts = BTreeMap::new();
        for (e, n) in self.iter() {
            counts.insert(e, n as i128);
        }
        for (e, n) in other.iter() {
            *counts.entry(e).or_insert(0) -= n as i128;
        }
        counts.retain(|_, v| *v != 0);
        BagDelta {
            counts,
            charge: self.charge as i128 - other.charge as i128,
        }
    }

    /// Hill-ordered formula text.
    pub fn to_formula_string(&self) -> Result<String, FormulaError> {
        format_formula(self)
    }
}

impl Add for &AtomBag {
    type Output = AtomBag;

    fn add(self, rhs: &AtomBag) -> AtomBag {
        self.checked_add(rhs).expect("atom count overflow")
    }
}

impl Add for AtomBag {
    type Output = AtomBag;

    fn add(self, rhs: AtomBag) -> AtomBag {
        &self + &rhs
    }
}

impl<'a> std::iter::Sum<&'a AtomBag> for AtomBag {
    fn sum<I: Iterator<Item = &'a AtomBag>>(iter: I) -> AtomBag {
        iter.fold(AtomBag::new(), |acc, b| &acc + b)
    }
}

impl std::iter::Sum for AtomBag {
    fn sum<I: Iterator<Item = AtomBag>>(iter: I) -> AtomBag {
        iter.fold(AtomBag::new(), |acc, b| &acc + &b)
    }
}

/// Signed element counts, the result of subtracting two bags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagDelta {
    pub counts: BTreeMap<Element, i128>,
    pub charge: i128,
}

impl BagDelta {
    pub fn get(&self, element: Element) -> i128 {
        self.counts.get(&element).copied().unwrap_or(0)
    }

    /// No element differs. Charge is not considered.
    pub fn is_zero(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn positive_part(&self) -> AtomBag {
        AtomBag::from_counts(
            self.counts.iter().filter(|(_, v)| **v > 0).map(|(e, v)| (*e, *v as u64)),
            0,
        )
    }

    pub fn negative_part(&self) -> AtomBag {
        AtomBag::from_counts(
            self.counts.iter().filter(|(_, v)| **v < 0).map(|(e, v)| (*e, (-*v) as u64)),
            0,
        )
    }
}

impl fmt::Display for BagDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, v) in &self.counts {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{e}:{v:+}")?;
        }
        if self.charge != 0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "charge:{:+}", self.charge)?;
        }
        Ok(())
    }
}

/// A bag together with its canonical text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChemicalFormula {
    text: String,
    bag: AtomBag,
}

impl ChemicalFormula {
    pub fn from_bag(bag: AtomBag) -> Result<Self, FormulaError> {
        let text = format_formula(&bag)?;
        Ok(ChemicalFormula { text, bag })
    }

    pub fn bag(&self) -> &AtomBag {
        &self.bag
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_bag(self) -> AtomBag {
        self.bag
    }
}

impl fmt::Display for ChemicalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for ChemicalFormula {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Parse `(Symbol count?)+ [+|-]*`. Repeated symbols accumulate, so
/// `CH3COOH` is accepted and reformats to `C2H4O2`.
pub fn parse_formula(text: &str) -> Result<ChemicalFormula, FormulaError> {
    let malformed = |reason| FormulaError::MalformedFormula { text: text.to_string(), reason };
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err(malformed("empty formula"));
    }
    let mut bag = AtomBag::new();
    let mut i = 0;
    while i < bytes.len() && bytes[i].is_ascii_uppercase() {
        let start = i;
        i += 1;
        if i < bytes.len() && bytes[i].is_ascii_lowercase() {
            i += 1;
        }
        let element = Element::from_symbol(&text[start..i])?;
        let digits = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let count = if digits == i {
            1
        } else {
            if bytes[digits] == b'0' {
                return Err(malformed("count must be a positive integer without leading zeros"));
            }
            text[digits..i].parse::<u64>().map_err(|_| FormulaError::Overflow)?
        };
        bag.add_atoms(element, count);
    }
    if bag.is_empty() {
        return Err(malformed("expected an element symbol"));
    }
    let mut charge: i64 = 0;
    let sign_start = i;
    while i < bytes.len() && bytes[i] == bytes[sign_start] && matches!(bytes[i], b'+' | b'-') {
        charge += if bytes[i] == b'+' { 1 } else { -1 };
        i += 1;
    }
    if i != bytes.len() {
        return Err(malformed("unexpected character"));
    }
    bag.set_charge(charge);
    Ok(ChemicalFormula { text: format_formula(&bag)?, bag })
}

pub fn format_formula(bag: &AtomBag) -> Result<String, FormulaError> {
    if bag.is_empty() {
        return Err(FormulaError::EmptyBag);
    }
    let mut elements: Vec<(Element, u64)> = bag.iter().collect();
    elements.sort_by_key(|(e, _)| e.hill_key(true));
    let mut out = String::new();
    for (e, n) in elements {
        out.push_str(e.symbol());
        if n > 1 {
            out.push_str(&n.to_string());
        }
    }
    let sign = if bag.charge() > 0 { '+' } else { '-' };
    for _ in 0..bag.charge().unsigned_abs() {
        out.push(sign);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> Element {
        Element::from_symbol(s).unwrap()
    }

    fn bag(pairs: &[(&str, u64)], charge: i64) -> AtomBag {
        AtomBag::from_counts(pairs.iter().map(|(s, n)| (el(s), *n)), charge)
    }

    #[test]
    fn parses_table_formulas() {
        let f = parse_formula("C7H4ClNO4").unwrap();
        assert_eq!(f.bag(), &bag(&[("C", 7), ("H", 4), ("Cl", 1), ("N", 1), ("O", 4)], 0));
        assert_eq!(parse_formula("Cl-").unwrap().bag(), &bag(&[("Cl", 1)], -1));
        assert_eq!(parse_formula("H").unwrap().bag(), &bag(&[("H", 1)], 0));
        assert_eq!(
            parse_formula("CHO3-").unwrap().bag(),
            &bag(&[("C", 1), ("H", 1), ("O", 3)], -1)
        );
        assert_eq!(parse_formula("O3-").unwrap().bag(), &bag(&[("O", 3)], -1));
        assert_eq!(parse_formula("Na+").unwrap().bag().charge(), 1);
        assert_eq!(parse_formula("SO4--").unwrap().bag().charge(), -2);
    }

    #[test]
    fn repeated_symbols_accumulate() {
        let f = parse_formula("CH3COOH").unwrap();
        assert_eq!(f.as_str(), "C2H4O2");
        assert_eq!(parse_formula("CH3CH2OH").unwrap().as_str(), "C2H6O");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_formula(""), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("C0"), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("C02"), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("H2O "), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("+"), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("Na+-"), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("h2o"), Err(FormulaError::MalformedFormula { .. })));
        assert!(matches!(parse_formula("Xy2"), Err(FormulaError::UnknownElement(_))));
    }

    #[test]
    fn formats_in_hill_order() {
        assert_eq!(format_formula(&bag(&[("O", 2), ("C", 1)], 0)).unwrap(), "CO2");
        assert_eq!(format_formula(&bag(&[("H", 2), ("O", 1)], 0)).unwrap(), "H2O");
        assert_eq!(format_formula(&bag(&[("Na", 1)], 1)).unwrap(), "Na+");
        assert_eq!(format_formula(&bag(&[("Cl", 1), ("H", 1)], 0)).unwrap(), "HCl");
        assert_eq!(format_formula(&bag(&[("B", 1), ("H", 4)], -1)).unwrap(), "H4B-");
        assert_eq!(
            format_formula(&bag(&[("S", 1), ("O", 4), ("H", 2)], 0)).unwrap(),
            "H2O4S"
        );
        assert_eq!(
            format_formula(&bag(&[("N", 1), ("C", 1), ("H", 5)], 0)).unwrap(),
            "CH5N"
        );
        assert_eq!(format_formula(&AtomBag::new()), Err(FormulaError::EmptyBag));
    }

    #[test]
    fn bag_arithmetic() {
        let co2 = bag(&[("C", 1), ("O", 2)], 0);
        let h2 = bag(&[("H", 2)], 0);
        assert_eq!(&co2 + &h2, bag(&[("C", 1), ("H", 2), ("O", 2)], 0));
        assert_eq!(&AtomBag::new() + &h2, h2);
        let salt = &bag(&[("Cl", 1)], -1) + &bag(&[("Na", 1)], 1);
        assert_eq!(salt, bag(&[("Cl", 1), ("Na", 1)], 0));

        assert_eq!(co2.scale(2).unwrap(), bag(&[("C", 2), ("O", 4)], 0));
        assert_eq!(co2.scale(1).unwrap(), co2);
        assert_eq!(bag(&[("H", 1)], -1).scale(3).unwrap(), bag(&[("H", 3)], -3));
        assert_eq!(bag(&[("C", u64::MAX / 2 + 1)], 0).scale(2), Err(FormulaError::Overflow));
    }

    #[test]
    fn bag_difference() {
        let co2 = bag(&[("C", 1), ("O", 2)], 0);
        assert!(co2.diff(&co2).is_zero());
        let d = bag(&[("C", 14), ("H", 22), ("O", 1)], 0).diff(&bag(&[("C", 14), ("H", 20)], 0));
        assert_eq!(d.counts.len(), 2);
        assert_eq!(d.get(el("H")), 2);
        assert_eq!(d.get(el("O")), 1);
        assert_eq!(d.get(el("C")), 0);
        let d = bag(&[("H", 2)], 0).diff(&bag(&[("H", 3)], 0));
        assert_eq!(d.get(el("H")), -1);
        assert_eq!(d.negative_part(), bag(&[("H", 1)], 0));
        assert!(d.positive_part().is_empty());
    }

    #[test]
    fn large_counts_survive() {
        let big = (1u64 << 31) - 1;
        let f = parse_formula(&format!("C{big}")).unwrap();
        assert_eq!(f.bag().count(Element::C), big);
        assert_eq!(f.bag().scale(2).unwrap().count(Element::C), 2 * big);
    }
}
