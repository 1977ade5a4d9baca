//! Type-1 and Type-2 coefficient instantiation of a balanced reaction.
//!
//! Type 1 multiplies every coefficient by one factor. Type 2 draws a factor
//! `k_m` per distinct molecule; with `k̂ = min k_m`, the left side carries
//! reactants and reagents at `k_m`, plus each product at `k_m − k̂` when that
//! is positive, and the right side mirrors it. Draws multiply the base
//! coefficients, so a base with `4 H2` drawn at 3 contributes `12 H2`.

use crate::reaction::{Molecule, StoichBag, StoichReaction};
use crate::rng::StreamRng;

use super::Interval;

/// Every coefficient, reagents included, times `k`.
pub fn type1_instance(base: &StoichReaction, k: u64) -> StoichReaction {
    StoichReaction {
        reactants: base.reactants.scaled(k),
        reagents: base.reagents.scaled(k),
        products: base.products.scaled(k),
        encoding: base.encoding,
    }
}

/// Distinct molecules of a reaction: reactants, reagents, then products.
pub fn distinct_molecules(base: &StoichReaction) -> Vec<Molecule> {
    let mut out: Vec<Molecule> = Vec::new();
    for e in base.reactants.iter().chain(base.reagents.iter()).chain(base.products.iter()) {
        if !out.contains(&e.molecule) {
            out.push(e.molecule.clone());
        }
    }
    out
}

/// One draw per distinct molecule of a base reaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Type2Draws {
    pub molecules: Vec<Molecule>,
    pub draws: Vec<u64>,
}

impl Type2Draws {
    pub fn sample(base: &StoichReaction, rng: &mut StreamRng, interval: Interval) -> Self {
        let molecules = distinct_molecules(base);
        let draws = molecules.iter().map(|_| rng.in_range(interval.lo, interval.hi)).collect();
        Type2Draws { molecules, draws }
    }

    /// Draws from a function of each molecule.
    pub fn from_fn(base: &StoichReaction, mut f: impl FnMut(&Molecule) -> u64) -> Self {
        let molecules = distinct_molecules(base);
        let draws = molecules.iter().map(&mut f).collect();
        Type2Draws { molecules, draws }
    }

    pub fn k_of(&self, m: &Molecule) -> u64 {
        let i = self.molecules.iter().position(|x| x == m).expect("molecule was drawn");
        self.draws[i]
    }

    /// `k̂`, the smallest draw.
    pub fn k_hat(&self) -> u64 {
        self.draws.iter().copied().min().unwrap_or(0)
    }
}

pub fn type2_instance(base: &StoichReaction, draws: &Type2Draws) -> StoichReaction {
    let k_hat = draws.k_hat();
    let full = |b: &StoichBag| -> StoichBag {
        let mut out = StoichBag::new();
        for e in b.iter() {
            out.add(e.coefficient * draws.k_of(&e.molecule), e.molecule.clone());
        }
        out
    };
    let carry = |b: &StoichBag, out: &mut StoichBag| {
        for e in b.iter() {
            let k = draws.k_of(&e.molecule) - k_hat;
            if k > 0 {
                out.add(e.coefficient * k, e.molecule.clone());
            }
        }
    };
    let mut reactants = full(&base.reactants);
    carry(&base.products, &mut reactants);
    let mut products = full(&base.products);
    carry(&base.reactants, &mut products);
    StoichReaction { reactants, reagents: full(&base.reagents), products, encoding: base.encoding }
}
