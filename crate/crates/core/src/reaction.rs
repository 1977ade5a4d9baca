//! Reactions as coefficiented bags of molecules, and their two line dialects.
//!
//! A stoichiometric line is a `.`-separated list of `{k}MOL` items, where
//! `MOL` is a SMILES string or a chemical formula depending on the
//! [`Encoding`]. A reaction line is `R>G>P` with the same item syntax in each
//! segment; the `{k}` prefixes are optional and default to 1.
//!
//! Molecule identity is the canonical certificate for SMILES molecules and
//! the Hill string for formula molecules, so `C(=O)=O` and `O=C=O` merge.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::formula::{parse_formula, AtomBag, ChemicalFormula, FormulaError};
use crate::rng::StreamRng;
use crate::smiles::{assign_hydrogens, canonicalize, kekulize, parse_smiles, SmilesError};

/// Largest coefficient accepted on input.
pub const MAX_COEFFICIENT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReactionError {
    #[error("malformed reaction `{text}`: {reason}")]
    MalformedReaction { text: String, reason: &'static str },
    #[error("bad coefficient in `{item}`: {reason}")]
    BadCoefficient { item: String, reason: &'static str },
    #[error("empty molecule item in `{0}`")]
    EmptyItem(String),
    #[error("cannot print an empty bag")]
    EmptyBag,
    #[error("molecule `{0}` has no SMILES form")]
    NoSmiles(String),
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

pub type Result<T> = std::result::Result<T, ReactionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Smiles,
    Formula,
}

impl Encoding {
    /// One-letter tag used in variant names.
    pub fn tag(self) -> char {
        match self {
            Encoding::Smiles => 'S',
            Encoding::Formula => 'F',
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Smiles => "smiles",
            Encoding::Formula => "formula",
        })
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smiles" | "s" => Ok(Encoding::Smiles),
            "formula" | "f" => Ok(Encoding::Formula),
            _ => Err(format!("unknown encoding `{s}` (expected smiles or formula)")),
        }
    }
}

/// A molecule with its derived formula and identity key.
#[derive(Debug, Clone)]
pub struct Molecule {
    key: Vec<u8>,
    smiles: Option<String>,
    formula: ChemicalFormula,
}

impl Molecule {
    pub fn from_smiles(text: &str) -> std::result::Result<Molecule, SmilesError> {
        let g = assign_hydrogens(kekulize(parse_smiles(text)?)?)?;
        let canon = canonicalize(&g)?;
        let formula = g.formula().cloned().expect("formula set by assign_hydrogens");
        let mut key = vec![b'S'];
        key.extend_from_slice(&canon.certificate);
        Ok(Molecule { key, smiles: Some(canon.smiles), formula })
    }

    pub fn from_formula(text: &str) -> std::result::Result<Molecule, FormulaError> {
        Ok(Molecule::with_formula(parse_formula(text)?))
    }

    pub fn with_formula(formula: ChemicalFormula) -> Molecule {
        let mut key = vec![b'F'];
        key.extend_from_slice(formula.as_str().as_bytes());
        Molecule { key, smiles: None, formula }
    }

    pub fn parse(text: &str, encoding: Encoding) -> Result<Molecule> {
        Ok(match encoding {
            Encoding::Smiles => Molecule::from_smiles(text)?,
            Encoding::Formula => Molecule::from_formula(text)?,
        })
    }

    /// SMILES first, then a plain formula, so `CO2` and `[HH]` both work.
    pub fn parse_lenient(text: &str) -> Result<Molecule> {
        match Molecule::from_smiles(text) {
            Ok(m) => Ok(m),
            Err(smiles_err) => Molecule::from_formula(text).map_err(|_| smiles_err.into()),
        }
    }

    /// Identity key: canonical certificate or Hill string.
    pub fn key(&self) -> &[u8] {
        &self.key
    }

    pub fn smiles(&self) -> Option<&str> {
        self.smiles.as_deref()
    }

    pub fn formula(&self) -> &ChemicalFormula {
        &self.formula
    }

    pub fn bag(&self) -> &AtomBag {
        self.formula.bag()
    }

    /// The same molecule at formula level.
    pub fn to_formula_level(&self) -> Molecule {
        Molecule::with_formula(self.formula.clone())
    }

    pub fn render(&self, encoding: Encoding) -> Result<String> {
        match encoding {
            Encoding::Formula => Ok(self.formula.to_string()),
            Encoding::Smiles => {
                self.smiles.clone().ok_or_else(|| ReactionError::NoSmiles(self.formula.to_string()))
            }
        }
    }
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Molecule {}

impl std::hash::Hash for Molecule {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.smiles {
            Some(s) => f.write_str(s),
            None => write!(f, "{}", self.formula),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichEntry {
    pub coefficient: u64,
    pub molecule: Molecule,
}

/// Ordered list of coefficiented molecules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoichBag {
    entries: Vec<StoichEntry>,
}

impl StoichBag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends without merging; see [`normalize`](Self::normalize).
    pub fn push(&mut self, coefficient: u64, molecule: Molecule) {
        assert!(coefficient >= 1, "coefficients are positive");
        self.entries.push(StoichEntry { coefficient, molecule });
    }

    /// Appends, merging into an existing entry for the same molecule.
    pub fn add(&mut self, coefficient: u64, molecule: Molecule) {
        match self.entries.iter_mut().find(|e| e.molecule == molecule) {
            Some(e) => e.coefficient += coefficient,
            None => self.push(coefficient, molecule),
        }
    }

    /// Merge duplicate molecules, keeping first-occurrence order.
    pub fn normalize(&mut self) {
        let entries = std::mem::take(&mut self.entries);
        for e in entries {
            self.add(e.coefficient, e.molecule);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn entries(&self) -> &[StoichEntry] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &StoichEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coefficient_of(&self, molecule: &Molecule) -> u64 {
        self.entries.iter().filter(|e| e.molecule == *molecule).map(|e| e.coefficient).sum()
    }

    /// Σ coefficient × molecule bag.
    pub fn total_atoms(&self) -> AtomBag {
        self.entries
            .iter()
            .map(|e| e.molecule.bag().scale(e.coefficient).expect("atom count overflow"))
            .fold(AtomBag::new(), |acc, b| acc + b)
    }

    /// Sum of all coefficients.
    pub fn multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.coefficient).sum()
    }

    /// Molecule key → total coefficient.
    pub fn multiset(&self) -> BTreeMap<&[u8], u64> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.molecule.key()).or_insert(0) += e.coefficient;
        }
        m
    }

    /// Equality as multisets, ignoring order.
    pub fn same_multiset(&self, other: &StoichBag) -> bool {
        self.multiset() == other.multiset()
    }

    pub fn scaled(&self, k: u64) -> StoichBag {
        StoichBag {
            entries: self
                .entries
                .iter()
                .map(|e| StoichEntry {
                    coefficient: e.coefficient.checked_mul(k).expect("coefficient overflow"),
                    molecule: e.molecule.clone(),
                })
                .collect(),
        }
    }

    /// Every molecule reduced to its formula.
    pub fn to_formula_level(&self) -> StoichBag {
        let mut out = StoichBag::new();
        for e in &self.entries {
            out.push(e.coefficient, e.molecule.to_formula_level());
        }
        out.normalized()
    }

    pub fn extend(&mut self, other: &StoichBag) {
        self.entries.extend(other.entries.iter().cloned());
    }
}

impl FromIterator<StoichEntry> for StoichBag {
    fn from_iter<I: IntoIterator<Item = StoichEntry>>(iter: I) -> Self {
        StoichBag { entries: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichReaction {
    pub reactants: StoichBag,
    pub reagents: StoichBag,
    pub products: StoichBag,
    pub encoding: Encoding,
}

impl StoichReaction {
    /// Reactants followed by reagents.
    pub fn left_side(&self) -> StoichBag {
        let mut b = self.reactants.clone();
        b.extend(&self.reagents);
        b
    }

    /// Products followed by reagents.
    pub fn right_side(&self) -> StoichBag {
        let mut b = self.products.clone();
        b.extend(&self.reagents);
        b
    }

    /// Split two sides into roles: a molecule with the same coefficient on
    /// both sides is a reagent, everything else keeps its side.
    pub fn from_sides(left: &StoichBag, right: &StoichBag, encoding: Encoding) -> StoichReaction {
        let left = left.clone().normalized();
        let right = right.clone().normalized();
        let is_reagent = |e: &StoichEntry, other: &StoichBag| other.coefficient_of(&e.molecule) == e.coefficient;
        let mut reactants = StoichBag::new();
        let mut reagents = StoichBag::new();
        for e in left.iter() {
            if is_reagent(e, &right) {
                reagents.push(e.coefficient, e.molecule.clone());
            } else {
                reactants.push(e.coefficient, e.molecule.clone());
            }
        }
        let products = right.iter().filter(|e| !is_reagent(e, &left)).cloned().collect();
        StoichReaction { reactants, reagents, products, encoding }
    }

    /// All three bags reduced to formula level.
    pub fn to_formula_level(&self) -> StoichReaction {
        StoichReaction {
            reactants: self.reactants.to_formula_level(),
            reagents: self.reagents.to_formula_level(),
            products: self.products.to_formula_level(),
            encoding: Encoding::Formula,
        }
    }

    /// `R>G>P` with `{k}` prefixes.
    pub fn to_line(&self, encoding: Encoding) -> Result<String> {
        let seg = |b: &StoichBag| -> Result<String> {
            if b.is_empty() {
                Ok(String::new())
            } else {
                print_stoich_line(b, encoding, None)
            }
        };
        Ok(format!("{}>{}>{}", seg(&self.reactants)?, seg(&self.reagents)?, seg(&self.products)?))
    }
}

fn parse_item(item: &str) -> Result<(u64, &str)> {
    let bad = |reason| ReactionError::BadCoefficient { item: item.to_string(), reason };
    let Some(rest) = item.strip_prefix('{') else {
        return Ok((1, item));
    };
    let close = rest.find('}').ok_or_else(|| bad("missing `}`"))?;
    let digits = &rest[..close];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("not a positive integer"));
    }
    let k: u64 = digits.parse().map_err(|_| bad("too large"))?;
    if k == 0 {
        return Err(bad("must be at least 1"));
    }
    if k > MAX_COEFFICIENT {
        return Err(bad("exceeds the coefficient cap"));
    }
    Ok((k, &rest[close + 1..]))
}

fn parse_items(text: &str, mut mol: impl FnMut(&str) -> Result<Molecule>) -> Result<StoichBag> {
    let mut bag = StoichBag::new();
    if text.is_empty() {
        return Ok(bag);
    }
    for item in text.split('.') {
        if item.is_empty() {
            return Err(ReactionError::EmptyItem(text.to_string()));
        }
        let (k, body) = parse_item(item)?;
        if body.is_empty() {
            return Err(ReactionError::EmptyItem(text.to_string()));
        }
        bag.push(k, mol(body)?);
    }
    Ok(bag.normalized())
}

fn strip_whitespace(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Parse one stoichiometric line (`{k}MOL.{k}MOL…`).
pub fn parse_stoich_line(text: &str, encoding: Encoding) -> Result<StoichBag> {
    let text = strip_whitespace(text);
    if text.is_empty() {
        return Err(ReactionError::EmptyItem(text));
    }
    parse_items(&text, |m| Molecule::parse(m, encoding))
}

/// Like [`parse_stoich_line`] with [`Molecule::parse_lenient`] per item.
pub fn parse_stoich_line_lenient(text: &str) -> Result<StoichBag> {
    let text = strip_whitespace(text);
    if text.is_empty() {
        return Err(ReactionError::EmptyItem(text));
    }
    parse_items(&text, Molecule::parse_lenient)
}

/// Render a bag. With `order_seed`, molecules are shuffled by a stream
/// derived from the seed; otherwise they keep their order.
pub fn print_stoich_line(bag: &StoichBag, encoding: Encoding, order_seed: Option<u64>) -> Result<String> {
    if bag.is_empty() {
        return Err(ReactionError::EmptyBag);
    }
    let mut order: Vec<usize> = (0..bag.len()).collect();
    if let Some(seed) = order_seed {
        StreamRng::derive(&[b"print-order", &seed.to_le_bytes()]).shuffle(&mut order);
    }
    let mut out = String::new();
    for (n, i) in order.into_iter().enumerate() {
        let e = &bag.entries()[i];
        if n > 0 {
            out.push('.');
        }
        out.push_str(&format!("{{{}}}{}", e.coefficient, e.molecule.render(encoding)?));
    }
    Ok(out)
}

fn split_reaction(text: &str) -> Result<[String; 3]> {
    // drop a trailing extension block such as ` |f:1.2|`
    let core = match text.find(" |") {
        Some(i) if text.trim_end().ends_with('|') => &text[..i],
        _ => text,
    };
    let core = strip_whitespace(core);
    let parts: Vec<&str> = core.split('>').collect();
    if parts.len() != 3 {
        return Err(ReactionError::MalformedReaction {
            text: text.to_string(),
            reason: "expected exactly two `>` separators",
        });
    }
    Ok([parts[0].to_string(), parts[1].to_string(), parts[2].to_string()])
}

fn parse_reaction_with(text: &str, encoding: Encoding, mol: impl Fn(&str) -> Result<Molecule>) -> Result<StoichReaction> {
    let [r, g, p] = split_reaction(text)?;
    Ok(StoichReaction {
        reactants: parse_items(&r, &mol)?,
        reagents: parse_items(&g, &mol)?,
        products: parse_items(&p, &mol)?,
        encoding,
    })
}

/// Parse `R>G>P` reaction SMILES. Repeated molecules merge into one entry.
pub fn parse_reaction_smiles(text: &str) -> Result<StoichReaction> {
    parse_reaction(text, Encoding::Smiles)
}

pub fn parse_reaction(text: &str, encoding: Encoding) -> Result<StoichReaction> {
    parse_reaction_with(text, encoding, |m| Molecule::parse(m, encoding))
}

/// Reaction parse where each molecule may be SMILES or a formula.
pub fn parse_reaction_lenient(text: &str) -> Result<StoichReaction> {
    parse_reaction_with(text, Encoding::Smiles, Molecule::parse_lenient)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn formulas(b: &StoichBag) -> Vec<(String, u64)> {
        b.iter().map(|e| (e.molecule.formula().to_string(), e.coefficient)).collect()
    }

    fn pairs(v: &[(&str, u64)]) -> Vec<(String, u64)> {
        v.iter().map(|(s, k)| (s.to_string(), *k)).collect()
    }

    #[test]
    fn sabatier_reaction_smiles() {
        let r = parse_reaction_smiles("O=C=O.[HH].[HH].[HH].[HH]>[Ni]>C.O.O").unwrap();
        assert_eq!(formulas(&r.reactants), pairs(&[("CO2", 1), ("H2", 4)]));
        assert_eq!(formulas(&r.reagents), pairs(&[("Ni", 1)]));
        assert_eq!(formulas(&r.products), pairs(&[("CH4", 1), ("H2O", 2)]));
    }

    #[test]
    fn identity_and_separator_errors() {
        let r = parse_reaction_smiles("C>>C").unwrap();
        assert_eq!(r.reactants, r.products);
        assert!(r.reagents.is_empty());
        assert!(matches!(parse_reaction_smiles("A>B"), Err(ReactionError::MalformedReaction { .. })));
        assert!(matches!(parse_reaction_smiles("C>>>C"), Err(ReactionError::MalformedReaction { .. })));
    }

    #[test]
    fn whitespace_and_spaced_separator() {
        let a = parse_reaction_smiles("CCO . O=O > > CC=O . O").unwrap();
        let b = parse_reaction_smiles("CCO.O=O>>CC=O.O").unwrap();
        assert_eq!(a, b);
        let c = parse_reaction_smiles("CC(=O)O.OCC>>CCOC(C)=O.O |f:0.1|").unwrap();
        assert_eq!(c.products.len(), 2);
    }

    #[test]
    fn stoich_lines() {
        let s = parse_stoich_line("{1}O=C=O.{4}[HH].{1}[Ni]", Encoding::Smiles).unwrap();
        assert_eq!(formulas(&s), pairs(&[("CO2", 1), ("H2", 4), ("Ni", 1)]));
        let f = parse_stoich_line("{1}CO2.{4}H2.{1}Ni", Encoding::Formula).unwrap();
        assert!(s.to_formula_level().same_multiset(&f));
        let t2 = parse_stoich_line("{3}HCl.{4}Cl-.{1}C14H22O.{1}C6H12O.{2}C8H10", Encoding::Formula).unwrap();
        assert_eq!(t2.len(), 5);
        assert_eq!(parse_stoich_line("CO2.{2}H2", Encoding::Formula).unwrap().entries()[0].coefficient, 1);
    }

    #[test]
    fn bad_coefficients() {
        for line in ["{0}O", "{-1}O", "{1.5}O", "{}O", "{2O", "{1000001}O"] {
            assert!(
                matches!(parse_stoich_line(line, Encoding::Smiles), Err(ReactionError::BadCoefficient { .. })),
                "{line}"
            );
        }
        assert!(parse_stoich_line("{1000000}O", Encoding::Smiles).is_ok());
        assert!(matches!(parse_stoich_line("O..O", Encoding::Smiles), Err(ReactionError::EmptyItem(_))));
        assert!(matches!(parse_stoich_line("{2}", Encoding::Smiles), Err(ReactionError::EmptyItem(_))));
    }

    #[test]
    fn printing() {
        let f = parse_stoich_line("{1}CO2.{4}H2.{1}Ni", Encoding::Formula).unwrap();
        assert_eq!(print_stoich_line(&f, Encoding::Formula, None).unwrap(), "{1}CO2.{4}H2.{1}Ni");
        let w = parse_stoich_line("O.O", Encoding::Smiles).unwrap();
        assert_eq!(print_stoich_line(&w, Encoding::Smiles, None).unwrap(), "{2}O");
        assert_eq!(print_stoich_line(&StoichBag::new(), Encoding::Smiles, None), Err(ReactionError::EmptyBag));
        assert!(matches!(print_stoich_line(&f, Encoding::Smiles, None), Err(ReactionError::NoSmiles(_))));
    }

    #[test]
    fn seeded_order_is_a_stable_permutation() {
        let b = parse_stoich_line("{1}CO2.{4}H2.{1}Ni.{2}H2O.{3}CH4", Encoding::Formula).unwrap();
        let a = print_stoich_line(&b, Encoding::Formula, Some(9)).unwrap();
        assert_eq!(a, print_stoich_line(&b, Encoding::Formula, Some(9)).unwrap());
        assert!(parse_stoich_line(&a, Encoding::Formula).unwrap().same_multiset(&b));
    }

    #[test]
    fn duplicates_fold_by_certificate() {
        let a = parse_stoich_line("C(=O)=O.O=C=O.O=C=O", Encoding::Smiles).unwrap();
        let b = parse_stoich_line("{3}O=C=O", Encoding::Smiles).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sides_and_reagent_classification() {
        let left = parse_stoich_line("{3}HCl.{4}Cl-.{1}C14H22O.{1}C6H12O.{2}C8H10", Encoding::Formula).unwrap();
        let right = parse_stoich_line("{3}HCl.{4}Cl-.{3}C8H10.{2}C6H12O", Encoding::Formula).unwrap();
        let r = StoichReaction::from_sides(&left, &right, Encoding::Formula);
        assert_eq!(formulas(&r.reagents), pairs(&[("HCl", 3), ("Cl-", 4)]));
        assert_eq!(formulas(&r.reactants), pairs(&[("C14H22O", 1), ("C6H12O", 1), ("C8H10", 2)]));
        assert_eq!(formulas(&r.products), pairs(&[("C8H10", 3), ("C6H12O", 2)]));
        assert!(r.left_side().same_multiset(&left));
        assert!(r.right_side().same_multiset(&right));
    }

    #[test]
    fn lenient_molecules() {
        let r = parse_reaction_lenient("CO2.[HH]>[Ni]>C.O").unwrap();
        assert_eq!(r.reactants.entries()[0].molecule.formula().as_str(), "CO2");
        assert!(r.reactants.entries()[0].molecule.smiles().is_none());
        assert!(r.reactants.entries()[1].molecule.smiles().is_some());
        assert!(parse_reaction_lenient("Xx>>C").is_err());
    }

    #[test]
    fn reaction_line_round_trip() {
        let r = parse_reaction_smiles("{2}O=C=O.[HH]>[Ni]>C.{3}O").unwrap();
        let line = r.to_line(Encoding::Smiles).unwrap();
        assert_eq!(parse_reaction_smiles(&line).unwrap(), r);
    }
}
