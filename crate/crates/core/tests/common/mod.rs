#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chemalgebra::element::Element;
use chemalgebra::formula::{AtomBag, ChemicalFormula};
use chemalgebra::reaction::{Encoding, Molecule, StoichBag, StoichEntry, StoichReaction};
use chemalgebra::rng::StreamRng;

pub const POOL: [&str; 12] = ["C", "H", "N", "O", "S", "Cl", "Br", "F", "Na", "B", "Se", "Ni"];

pub fn desk_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/desk_corpus")
}

pub fn element(symbol: &str) -> Element {
    Element::from_symbol(symbol).unwrap()
}

fn random_bag(rng: &mut StreamRng, pool: &[&str], max_count: u64) -> AtomBag {
    let mut bag = AtomBag::new();
    let kinds = 1 + rng.below(3);
    for _ in 0..kinds {
        let e = element(pool[rng.below(pool.len() as u64) as usize]);
        bag.add_atoms(e, rng.in_range(1, max_count));
    }
    bag
}

pub fn formula_molecule(bag: AtomBag) -> Molecule {
    Molecule::with_formula(ChemicalFormula::from_bag(bag).unwrap())
}

/// Split `total` into `parts` non-empty bags with `Σ coef[j]·part[j] == total`.
/// Returns `None` when a random attempt does not divide evenly.
fn split_bag(rng: &mut StreamRng, total: &AtomBag, coefs: &[u64]) -> Option<Vec<AtomBag>> {
    let mut parts = vec![AtomBag::new(); coefs.len()];
    for (e, count) in total.iter() {
        let mut order: Vec<usize> = (0..coefs.len()).collect();
        rng.shuffle(&mut order);
        let mut rest = count;
        let (last, head) = order.split_last().unwrap();
        for &j in head {
            let x = rng.in_range(0, rest / coefs[j]);
            parts[j].add_atoms(e, x);
            rest -= x * coefs[j];
        }
        if rest % coefs[*last] != 0 {
            return None;
        }
        parts[*last].add_atoms(e, rest / coefs[*last]);
    }
    parts.iter().all(|p| !p.is_empty()).then_some(parts)
}

fn distinct(bags: &[AtomBag]) -> bool {
    bags.iter().enumerate().all(|(i, a)| bags[i + 1..].iter().all(|b| a != b))
}

/// A balanced formula-level reaction with 2 to 6 distinct molecules per side,
/// built from `pool`. Half of them carry one reagent.
pub fn random_balanced_reaction(rng: &mut StreamRng, pool: &[&str]) -> StoichReaction {
    loop {
        let nl = rng.in_range(2, 6) as usize;
        let nr = rng.in_range(2, 6) as usize;
        let has_reagent = rng.below(2) == 1;
        let n_react = nl - usize::from(has_reagent);
        let lefts: Vec<AtomBag> = (0..n_react).map(|_| random_bag(rng, pool, 4)).collect();
        let lcoef: Vec<u64> = (0..n_react).map(|_| rng.in_range(1, 3)).collect();
        let total: AtomBag = lefts.iter().zip(&lcoef).map(|(b, k)| b.scale(*k).unwrap()).sum::<AtomBag>();
        let n_prod = nr - usize::from(has_reagent);
        let rcoef: Vec<u64> = (0..n_prod).map(|_| rng.in_range(1, 2)).collect();
        let Some(rights) = split_bag(rng, &total, &rcoef) else { continue };
        let reagent = has_reagent.then(|| random_bag(rng, pool, 2));
        let mut all: Vec<AtomBag> = lefts.iter().chain(&rights).cloned().collect();
        all.extend(reagent.clone());
        if !distinct(&all) {
            continue;
        }
        let side = |bags: &[AtomBag], coefs: &[u64]| -> StoichBag {
            bags.iter()
                .zip(coefs)
                .map(|(b, k)| StoichEntry { coefficient: *k, molecule: formula_molecule(b.clone()) })
                .collect()
        };
        let mut reagents = StoichBag::new();
        if let Some(g) = reagent {
            reagents.push(rng.in_range(1, 2), formula_molecule(g));
        }
        return StoichReaction {
            reactants: side(&lefts, &lcoef),
            reagents,
            products: side(&rights, &rcoef),
            encoding: Encoding::Formula,
        };
    }
}

/// A random system `A·r = B·p` with at most four molecules per side that has a
/// positive solution with every coefficient at most 6.
pub fn random_solvable_system(rng: &mut StreamRng) -> (Vec<AtomBag>, Vec<AtomBag>) {
    let pool = ["C", "H", "O", "N"];
    loop {
        let a = rng.in_range(1, 4) as usize;
        let b = rng.in_range(1, 4) as usize;
        let lefts: Vec<AtomBag> = (0..a).map(|_| random_bag(rng, &pool, 3)).collect();
        let r: Vec<u64> = (0..a).map(|_| rng.in_range(1, 6)).collect();
        let total: AtomBag = lefts.iter().zip(&r).map(|(m, k)| m.scale(*k).unwrap()).sum::<AtomBag>();
        let p: Vec<u64> = (0..b).map(|_| rng.in_range(1, 6)).collect();
        if let Some(rights) = split_bag(rng, &total, &p) {
            return (lefts, rights);
        }
    }
}

/// Exhaustive minimum-norm search over `[1, max]^(a+b)`, meeting in the
/// middle on the element totals. Ties go to the lexicographically smaller
/// concatenated vector.
pub fn brute_force_min_norm(lefts: &[AtomBag], rights: &[AtomBag], max: u64) -> Option<(Vec<u64>, Vec<u64>)> {
    let mut elements: Vec<Element> = lefts.iter().chain(rights).flat_map(|b| b.elements()).collect();
    elements.sort();
    elements.dedup();
    let totals = |bags: &[AtomBag], v: &[u64]| -> Vec<u64> {
        elements.iter().map(|e| bags.iter().zip(v).map(|(b, k)| b.count(*e) * k).sum()).collect()
    };
    let vectors = |len: usize| -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out.into_iter().flat_map(|v| (1..=max).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        out
    };
    let mut by_total: HashMap<Vec<u64>, Vec<Vec<u64>>> = HashMap::new();
    for p in vectors(rights.len()) {
        by_total.entry(totals(rights, &p)).or_default().push(p);
    }
    let norm = |v: &[u64]| v.iter().map(|x| x * x).sum::<u64>();
    let mut best: Option<(u64, Vec<u64>, Vec<u64>)> = None;
    for r in vectors(lefts.len()) {
        let Some(ps) = by_total.get(&totals(lefts, &r)) else { continue };
        for p in ps {
            let n = norm(&r) + norm(p);
            let key = [r.clone(), p.clone()].concat();
            let better = match &best {
                None => true,
                Some((bn, br, bp)) => n < *bn || (n == *bn && key < [br.clone(), bp.clone()].concat()),
            };
            if better {
                best = Some((n, r.clone(), p.clone()));
            }
        }
    }
    best.map(|(_, r, p)| (r, p))
}
