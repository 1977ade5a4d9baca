//! SMILES molecules: parsing, kekulization, hydrogen assignment and
//! canonical certificates.
//!
//! The pipeline for one molecule token is
//! [`parse_smiles`] → [`kekulize`] → [`assign_hydrogens`] → [`canonicalize`].
//! [`Molecule::from_smiles`](crate::reaction::Molecule::from_smiles) runs all
//! of it; the individual steps are public for callers that need the graph.
//!
//! Stereo marks (`@`, `@@`, `/`, `\`) are kept as opaque labels. They take part
//! in the certificate but are never interpreted geometrically, so two
//! spellings of the same stereoisomer may compare unequal; the converse never
//! happens.

mod canon;
mod kekule;
mod parser;

use std::fmt;

use crate::element::Element;
use crate::formula::{AtomBag, ChemicalFormula, FormulaError};

pub use canon::{canonicalize, Canonical};
pub use kekule::{assign_hydrogens, kekulize};
pub use parser::parse_smiles;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("unmatched ring closure {0} in `{1}`")]
    UnmatchedRingClosure(u16, String),
    #[error("ring closure {0} in `{1}` has conflicting bond symbols")]
    ConflictingRingBond(u16, String),
    #[error("unbalanced parenthesis at byte {0} of `{1}`")]
    UnbalancedParenthesis(usize, String),
    #[error("unknown atom token at byte {0} of `{1}`")]
    UnknownAtomToken(usize, String),
    #[error("dangling bond symbol at byte {0} of `{1}`")]
    DanglingBondSymbol(usize, String),
    #[error("separator `{0}` is not allowed inside a molecule (`{1}`)")]
    UnexpectedSeparator(char, String),
    #[error("duplicate bond between the same pair of atoms in `{0}`")]
    DuplicateBond(String),
    #[error("aromatic system of `{0}` has no Kekulé structure")]
    KekulizationFailure(String),
    #[error("atom {atom} ({element}) in `{smiles}` exceeds every allowed valence")]
    ValenceExceeded { atom: usize, element: Element, smiles: String },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

pub type Result<T> = std::result::Result<T, SmilesError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chirality {
    /// `@`
    CounterClockwise,
    /// `@@`
    Clockwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Quadruple,
    Aromatic,
}

impl BondOrder {
    /// Valence contribution, counting an aromatic bond as one.
    pub(crate) fn base_valence(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Quadruple => 4,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Quadruple => 4,
            BondOrder::Aromatic => 5,
        }
    }
}

/// `/` or `\`, read in the direction the bond was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondStereo {
    Up,
    Down,
}

impl BondStereo {
    pub(crate) fn flipped(self) -> BondStereo {
        match self {
            BondStereo::Up => BondStereo::Down,
            BondStereo::Down => BondStereo::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Hydrogen count written inside brackets; `Some` exactly for bracket atoms.
    pub explicit_h: Option<u8>,
    pub isotope: Option<u16>,
    pub chirality: Option<Chirality>,
    pub atom_class: Option<u32>,
    /// Total attached hydrogens, filled in by [`assign_hydrogens`].
    pub hydrogens: u8,
}

impl Atom {
    pub fn is_bracket(&self) -> bool {
        self.explicit_h.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    /// Endpoints in the order they were written.
    pub atoms: (usize, usize),
    pub order: BondOrder,
    /// Relative to `atoms.0 → atoms.1`.
    pub stereo: Option<BondStereo>,
    /// Localized order after kekulization (1..=4).
    pub kekule_order: Option<u8>,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.atoms.0 == atom {
            self.atoms.1
        } else {
            self.atoms.0
        }
    }

    /// Stereo mark as seen when walking the bond away from `from`.
    pub fn stereo_from(&self, from: usize) -> Option<BondStereo> {
        self.stereo.map(|s| if from == self.atoms.0 { s } else { s.flipped() })
    }

    pub(crate) fn valence(&self) -> u32 {
        self.kekule_order.map(u32::from).unwrap_or_else(|| self.order.base_valence())
    }
}

/// A parsed molecule. Always a single connected fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolGraph {
    source: String,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    kekulized: bool,
    formula: Option<ChemicalFormula>,
}

impl MolGraph {
    pub(crate) fn new(source: String, atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, b) in bonds.iter().enumerate() {
            adjacency[b.atoms.0].push((b.atoms.1, i));
            adjacency[b.atoms.1].push((b.atoms.0, i));
        }
        MolGraph { source, atoms, bonds, adjacency, kekulized: false, formula: None }
    }

    /// The text this graph was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// `(neighbor, bond index)` pairs of `atom`.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn is_kekulized(&self) -> bool {
        self.kekulized
    }

    /// Set once hydrogens have been assigned.
    pub fn formula(&self) -> Option<&ChemicalFormula> {
        self.formula.as_ref()
    }

    pub(crate) fn compute_formula(&self) -> Result<ChemicalFormula> {
        let mut bag = AtomBag::new();
        let mut charge = 0i64;
        let mut hydrogens = 0u64;
        for a in &self.atoms {
            bag.add_atoms(a.element, 1);
            hydrogens += u64::from(a.hydrogens);
            charge += i64::from(a.formal_charge);
        }
        bag.add_atoms(Element::H, hydrogens);
        bag.set_charge(charge);
        Ok(ChemicalFormula::from_bag(bag)?)
    }
}

impl fmt::Display for MolGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Parse, kekulize and hydrogenate `text`, returning its formula.
pub fn formula_of(text: &str) -> Result<ChemicalFormula> {
    let g = assign_hydrogens(kekulize(parse_smiles(text)?)?)?;
    Ok(g.formula().cloned().expect("formula set by assign_hydrogens"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sabatier_encodings() {
        assert_eq!(formula_of("O=C=O").unwrap().as_str(), "CO2");
        assert_eq!(formula_of("[HH]").unwrap().as_str(), "H2");
        assert_eq!(formula_of("C").unwrap().as_str(), "CH4");
        assert_eq!(formula_of("O").unwrap().as_str(), "H2O");
        assert_eq!(formula_of("[Ni]").unwrap().as_str(), "Ni");
    }

    #[test]
    fn cross_encoding_pairs() {
        assert_eq!(formula_of("Cc1cccc(C)c1").unwrap().as_str(), "C8H10");
        assert_eq!(formula_of("CCCCC1CO1").unwrap().as_str(), "C6H12O");
        assert_eq!(formula_of("CCCCC(CO)c1ccc(C)cc1C").unwrap().as_str(), "C14H22O");
        assert_eq!(formula_of("CCCCCC1CO1").unwrap().as_str(), "C7H14O");
        let f = formula_of("O=C(O)c1ccc(Cl)c([N+](=O)[O-])c1").unwrap();
        assert_eq!(f.as_str(), "C7H4ClNO4");
        assert_eq!(f.bag().charge(), 0);
    }

    #[test]
    fn ions_and_bracket_atoms() {
        assert_eq!(formula_of("[Na+]").unwrap().as_str(), "Na+");
        assert_eq!(formula_of("[Cl-]").unwrap().as_str(), "Cl-");
        assert_eq!(formula_of("[BH4-]").unwrap().as_str(), "H4B-");
        assert_eq!(formula_of("O=C([O-])O").unwrap().as_str(), "CHO3-");
        assert_eq!(formula_of("[O]O[O-]").unwrap().as_str(), "O3-");
        assert_eq!(formula_of("[C][N]").unwrap().as_str(), "CN");
        assert_eq!(formula_of("[H]").unwrap().as_str(), "H");
        assert_eq!(formula_of("O=S(=O)(O)O").unwrap().as_str(), "H2O4S");
        assert_eq!(formula_of("[CH3:1][OH:2]").unwrap().as_str(), "CH4O");
    }
}
