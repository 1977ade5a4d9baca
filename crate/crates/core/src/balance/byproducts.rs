//! Restore balance by appending small byproduct molecules.
//!
//! The one-sided atom deficit is decomposed into multisets of lexicon
//! molecules. A completion is accepted only when exactly one multiset fits.

use std::collections::BTreeMap;

use crate::element::Element;
use crate::formula::{parse_formula, AtomBag, ChemicalFormula};
use crate::reaction::{Encoding, Molecule, ReactionError, StoichBag, StoichReaction};
use crate::smiles::formula_of;

use super::account;

/// Largest number of molecules in one completion.
pub const MAX_BYPRODUCT_MOLECULES: usize = 6;

const DEFAULT_LEXICON: &[(&str, &str)] = &[
    ("H2O", "O"),
    ("HCl", "Cl"),
    ("HBr", "Br"),
    ("HI", "I"),
    ("HF", "F"),
    ("NH3", "N"),
    ("CO2", "O=C=O"),
    ("N2", "N#N"),
    ("H2", "[H][H]"),
    ("O2", "O=O"),
    ("CH3OH", "CO"),
    ("CH3CH2OH", "CCO"),
    ("CO", "[C-]#[O+]"),
    ("H2S", "S"),
    ("SO2", "O=S=O"),
    ("NaCl", "[Na]Cl"),
    ("KCl", "[K]Cl"),
    ("LiCl", "[Li]Cl"),
    ("NaBr", "[Na]Br"),
    ("CH2O", "C=O"),
    ("CH3COOH", "CC(=O)O"),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ByproductError {
    #[error("no combination of lexicon molecules matches the deficit {deficit}")]
    NoCompletion { deficit: String },
    #[error("deficit {deficit} has more than one completion: {first} and {second}")]
    Ambiguous { deficit: String, first: String, second: String },
    #[error("both sides lack atoms ({delta}); a one-sided completion cannot fix it")]
    BothSidesDeficient { delta: String },
    #[error("lexicon molecule {0} has no SMILES form")]
    NoSmiles(String),
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error(transparent)]
    Reaction(#[from] ReactionError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub formula: ChemicalFormula,
    pub smiles: Option<String>,
}

/// Ordered candidate byproducts, unique by formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new(DEFAULT_LEXICON.iter().map(|(f, s)| LexiconEntry {
            formula: parse_formula(f).expect("valid default formula"),
            smiles: Some(s.to_string()),
        }))
    }
}

impl Lexicon {
    /// Later entries with an already-seen formula are dropped.
    pub fn new(entries: impl IntoIterator<Item = LexiconEntry>) -> Self {
        let mut out: Vec<LexiconEntry> = Vec::new();
        for e in entries {
            if !out.iter().any(|o| o.formula == e.formula) {
                out.push(e);
            }
        }
        Lexicon { entries: out }
    }

    /// One `FORMULA [SMILES]` per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, ByproductError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ByproductError::Lexicon { line: i + 1, reason };
            let mut parts = line.split_whitespace();
            let formula = parse_formula(parts.next().unwrap_or("")).map_err(|e| err(e.to_string()))?;
            let smiles = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(err("expected `FORMULA [SMILES]`".into()));
            }
            if let Some(s) = &smiles {
                let derived = formula_of(s).map_err(|e| err(e.to_string()))?;
                if derived.bag() != formula.bag() {
                    return Err(err(format!("SMILES {s} is {derived}, not {formula}")));
                }
            }
            entries.push(LexiconEntry { formula, smiles });
        }
        Ok(Lexicon::new(entries))
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    fn molecule(&self, index: usize, encoding: Encoding) -> Result<Molecule, ByproductError> {
        let e = &self.entries[index];
        match encoding {
            Encoding::Formula => Ok(Molecule::with_formula(e.formula.clone())),
            Encoding::Smiles => {
                let s = e.smiles.as_deref().ok_or_else(|| ByproductError::NoSmiles(e.formula.to_string()))?;
                Molecule::from_smiles(s).map_err(|err| ReactionError::from(err).into())
            }
        }
    }
}

fn show(bag: &AtomBag) -> String {
    bag.to_formula_string().unwrap_or_else(|_| "nothing".into())
}

fn show_multiset(lexicon: &Lexicon, picks: &[usize]) -> String {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for p in picks {
        *counts.entry(*p).or_insert(0) += 1;
    }
    counts
        .iter()
        .map(|(i, k)| {
            let f = &lexicon.entries[*i].formula;
            if *k == 1 { f.to_string() } else { format!("{k} {f}") }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Multisets of lexicon indices (non-decreasing) summing exactly to
/// `target`, stopping once `limit` are found.
fn completions(lexicon: &Lexicon, target: &AtomBag, limit: usize) -> Vec<Vec<usize>> {
    let usable: Vec<usize> = (0..lexicon.entries.len())
        .filter(|i| lexicon.entries[*i].formula.bag().elements().all(|e| target.count(e) > 0))
        .collect();
    let remaining: BTreeMap<Element, u64> = target.iter().collect();
    let mut found = Vec::new();
    let mut picks = Vec::new();
    walk(lexicon, &usable, 0, remaining, &mut picks, &mut found, limit);
    found
}

fn walk(
    lexicon: &Lexicon,
    usable: &[usize],
    start: usize,
    remaining: BTreeMap<Element, u64>,
    picks: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if remaining.values().all(|v| *v == 0) {
        found.push(picks.clone());
        return;
    }
    if picks.len() == MAX_BYPRODUCT_MOLECULES {
        return;
    }
    for (k, &i) in usable.iter().enumerate().skip(start) {
        let bag = lexicon.entries[i].formula.bag();
        if bag.iter().any(|(e, n)| remaining.get(&e).copied().unwrap_or(0) < n) {
            continue;
        }
        let mut next = remaining.clone();
        for (e, n) in bag.iter() {
            *next.get_mut(&e).expect("element present") -= n;
        }
        picks.push(i);
        walk(lexicon, usable, k, next, picks, found, limit);
        picks.pop();
        if found.len() >= limit {
            return;
        }
    }
}

/// Append the unique lexicon completion of a one-sided deficit. A balanced
/// reaction is returned unchanged.
pub fn infer_byproducts(reaction: &StoichReaction, lexicon: &Lexicon) -> Result<StoichReaction, ByproductError> {
    let delta = account(&reaction.left_side()).diff(&account(&reaction.right_side()));
    if delta.is_zero() {
        return Ok(reaction.clone());
    }
    let (lacking_right, lacking_left) = (delta.positive_part(), delta.negative_part());
    let (target, onto_products) = match (lacking_right.is_empty(), lacking_left.is_empty()) {
        (false, true) => (lacking_right, true),
        (true, false) => (lacking_left, false),
        _ => return Err(ByproductError::BothSidesDeficient { delta: delta.to_string() }),
    };
    let found = completions(lexicon, &target, 2);
    match found.as_slice() {
        [] => Err(ByproductError::NoCompletion { deficit: show(&target) }),
        [one] => {
            let mut out = reaction.clone();
            let side: &mut StoichBag = if onto_products { &mut out.products } else { &mut out.reactants };
            for i in one {
                side.add(1, lexicon.molecule(*i, reaction.encoding)?);
            }
            Ok(out)
        }
        [a, b, ..] => Err(ByproductError::Ambiguous {
            deficit: show(&target),
            first: show_multiset(lexicon, a),
            second: show_multiset(lexicon, b),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{check_balance, BalanceStatus};
    use crate::reaction::parse_reaction_smiles;

    #[test]
    fn default_lexicon_is_consistent() {
        let lex = Lexicon::default();
        assert_eq!(lex.entries().len(), 21);
        for e in lex.entries() {
            let s = e.smiles.as_deref().unwrap();
            assert_eq!(formula_of(s).unwrap().bag(), e.formula.bag(), "{s}");
        }
    }

    #[test]
    fn water_and_hcl() {
        let lex = Lexicon::default();
        let r = parse_reaction_smiles("CC(=O)O.OCC>>CCOC(C)=O").unwrap();
        let fixed = infer_byproducts(&r, &lex).unwrap();
        assert_eq!(check_balance(&fixed, false).status, BalanceStatus::Balanced);
        assert_eq!(fixed.products.entries()[1].molecule.smiles(), Some("O"));
        assert_eq!(&fixed.reactants, &r.reactants);

        let r = parse_reaction_smiles("CC(=O)Cl.NC>>CC(=O)NC").unwrap();
        let fixed = infer_byproducts(&r, &lex).unwrap();
        assert_eq!(fixed.products.entries()[1].molecule.formula().as_str(), "HCl");
    }

    #[test]
    fn reactant_side_completion() {
        let r = parse_reaction_smiles("CCOC(C)=O>>CC(=O)O.CCO").unwrap();
        let fixed = infer_byproducts(&r, &Lexicon::default()).unwrap();
        let added = &fixed.reactants.entries()[1];
        assert_eq!((added.coefficient, added.molecule.formula().as_str()), (1, "H2O"));
        // two waters split as 2 H2O or 2 H2 + O2
        let r = parse_reaction_smiles("CC#N>>CC(=O)O.N").unwrap();
        assert!(matches!(infer_byproducts(&r, &Lexicon::default()), Err(ByproductError::Ambiguous { .. })));
        let lex = Lexicon::parse("H2O O").unwrap();
        let two = infer_byproducts(&r, &lex).unwrap();
        let added = &two.reactants.entries()[1];
        assert_eq!((added.coefficient, added.molecule.formula().as_str()), (2, "H2O"));
        assert_eq!(check_balance(&fixed, false).status, BalanceStatus::Balanced);
    }

    #[test]
    fn failures() {
        let lex = Lexicon::default();
        let r = parse_reaction_smiles("C(=O)=O.[HH].[HH].[HH].[HH]>[Ni]>C").unwrap();
        assert!(matches!(infer_byproducts(&r, &lex), Err(ByproductError::Ambiguous { .. })));
        let r = parse_reaction_smiles("CS>>CO").unwrap();
        assert!(matches!(infer_byproducts(&r, &lex), Err(ByproductError::BothSidesDeficient { .. })));
        let r = parse_reaction_smiles("C[Si](C)(C)Cl.O>>C[Si](C)(C)O").unwrap();
        assert_eq!(infer_byproducts(&r, &lex).unwrap().products.len(), 2);
        let r = parse_reaction_smiles("C[Si](C)(C)C>>").unwrap();
        assert!(matches!(infer_byproducts(&r, &lex), Err(ByproductError::NoCompletion { .. })));
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let r = parse_reaction_smiles("O=C=O.[HH].[HH].[HH].[HH]>[Ni]>C.O.O").unwrap();
        assert_eq!(infer_byproducts(&r, &Lexicon::default()).unwrap(), r);
    }

    #[test]
    fn lexicon_file() {
        let lex = Lexicon::parse("# small\nH2O O\nH2\n\nO2 O=O\nH2O\n").unwrap();
        assert_eq!(lex.entries().len(), 3);
        assert_eq!(lex.entries()[1].smiles, None);
        assert!(matches!(Lexicon::parse("H2O C"), Err(ByproductError::Lexicon { line: 1, .. })));
        assert!(matches!(Lexicon::parse("Q2"), Err(ByproductError::Lexicon { .. })));
        // a formula-only entry cannot complete a SMILES reaction
        let r = parse_reaction_smiles("[HH].[HH]>>").unwrap();
        let lex = Lexicon::parse("H4").unwrap();
        assert!(matches!(infer_byproducts(&r, &lex), Err(ByproductError::NoSmiles(_))));
    }
}
