//! Mass-balance accounting, the stoichiometric linear system, its exact
//! minimum-norm solver, and byproduct inference.

mod byproducts;
mod solver;

use std::fmt;

use serde::Serialize;

use crate::element::Element;
use crate::formula::AtomBag;
use crate::reaction::{StoichBag, StoichReaction};

pub use byproducts::{infer_byproducts, ByproductError, Lexicon, LexiconEntry, MAX_BYPRODUCT_MOLECULES};
pub use solver::{solve_stoichiometry, verify, SolveError, StoichSolution, DEFAULT_MAX_COEFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BalanceStatus {
    Balanced,
    Deficitary,
    Exceeding,
    DeficitaryAndExceeding,
}

impl BalanceStatus {
    /// Short label: BAL, DEF, EXC or D+E.
    pub fn label(self) -> &'static str {
        match self {
            BalanceStatus::Balanced => "BAL",
            BalanceStatus::Deficitary => "DEF",
            BalanceStatus::Exceeding => "EXC",
            BalanceStatus::DeficitaryAndExceeding => "D+E",
        }
    }
}

impl fmt::Display for BalanceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub left_total: AtomBag,
    pub right_total: AtomBag,
    /// Atoms on the left that the right side lacks.
    pub deficit: AtomBag,
    /// Atoms on the right beyond what the left side holds.
    pub excess: AtomBag,
    /// Right charge minus left charge. Always reported.
    pub charge_delta: i64,
    pub status: BalanceStatus,
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        let show = |b: &AtomBag| -> String {
            b.iter().map(|(e, n)| format!("{e}:{n}")).collect::<Vec<_>>().join(" ")
        };
        if !self.deficit.is_empty() {
            write!(f, " missing [{}]", show(&self.deficit))?;
        }
        if !self.excess.is_empty() {
            write!(f, " extra [{}]", show(&self.excess))?;
        }
        if self.charge_delta != 0 {
            write!(f, " charge {:+}", self.charge_delta)?;
        }
        Ok(())
    }
}

/// Σ coefficient × molecule bag.
pub fn account(side: &StoichBag) -> AtomBag {
    side.total_atoms()
}

/// Compare two sides. With `include_charge`, a charge mismatch also counts:
/// a lower right-hand charge as a deficit, a higher one as an excess.
pub fn compare_sides(left: &StoichBag, right: &StoichBag, include_charge: bool) -> BalanceReport {
    compare_totals(account(left), account(right), include_charge)
}

pub fn compare_totals(left_total: AtomBag, right_total: AtomBag, include_charge: bool) -> BalanceReport {
    let delta = left_total.diff(&right_total);
    let deficit = delta.positive_part();
    let excess = delta.negative_part();
    let charge_delta = right_total.charge() - left_total.charge();
    let short = !deficit.is_empty() || (include_charge && charge_delta < 0);
    let over = !excess.is_empty() || (include_charge && charge_delta > 0);
    let status = match (short, over) {
        (false, false) => BalanceStatus::Balanced,
        (true, false) => BalanceStatus::Deficitary,
        (false, true) => BalanceStatus::Exceeding,
        (true, true) => BalanceStatus::DeficitaryAndExceeding,
    };
    BalanceReport { left_total, right_total, deficit, excess, charge_delta, status }
}

pub fn check_balance(reaction: &StoichReaction, include_charge: bool) -> BalanceReport {
    compare_sides(&reaction.left_side(), &reaction.right_side(), include_charge)
}

/// Element-by-molecule matrices of `A·r = B·p`, plus reagent ties `r_i = p_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichSystem {
    pub element_index: Vec<Element>,
    /// Rows follow `element_index`, columns the left molecules.
    pub lhs_matrix: Vec<Vec<u64>>,
    pub rhs_matrix: Vec<Vec<u64>>,
    /// `(lhs column, rhs column)` pairs forced equal.
    pub tie_constraints: Vec<(usize, usize)>,
}

impl StoichSystem {
    pub fn lhs_cols(&self) -> usize {
        self.lhs_matrix.first().map_or(0, Vec::len)
    }

    pub fn rhs_cols(&self) -> usize {
        self.rhs_matrix.first().map_or(0, Vec::len)
    }

    /// Build from per-molecule bags.
    pub fn from_bags(left: &[AtomBag], right: &[AtomBag], ties: Vec<(usize, usize)>) -> StoichSystem {
        let mut element_index: Vec<Element> =
            left.iter().chain(right).flat_map(|b| b.elements().collect::<Vec<_>>()).collect();
        element_index.sort_by_key(|e| e.hill_key(false));
        element_index.dedup();
        let matrix = |cols: &[AtomBag]| -> Vec<Vec<u64>> {
            element_index.iter().map(|e| cols.iter().map(|b| b.count(*e)).collect()).collect()
        };
        StoichSystem {
            lhs_matrix: matrix(left),
            rhs_matrix: matrix(right),
            element_index,
            tie_constraints: ties,
        }
    }
}

/// Left columns are reactants then reagents, right columns products then
/// reagents; every reagent contributes one tie.
pub fn build_system(reaction: &StoichReaction) -> StoichSystem {
    let bags = |b: &StoichBag| b.iter().map(|e| e.molecule.bag().clone()).collect::<Vec<_>>();
    let left = bags(&reaction.left_side());
    let right = bags(&reaction.right_side());
    let (nr, np) = (reaction.reactants.len(), reaction.products.len());
    let ties = (0..reaction.reagents.len()).map(|j| (nr + j, np + j)).collect();
    StoichSystem::from_bags(&left, &right, ties)
}
