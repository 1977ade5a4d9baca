use std::collections::VecDeque;

use super::{Atom, BondOrder, MolGraph, Result, SmilesError};
use crate::element::Element;

/// Valences an unbracketed organic-subset atom may take, smallest first.
pub(crate) fn bare_valences(element: Element) -> &'static [u32] {
    match element {
        Element::B => &[3],
        Element::C => &[4],
        Element::N | Element::P => &[3, 5],
        Element::O => &[2],
        Element::S => &[2, 4, 6],
        Element::F | Element::CL | Element::BR | Element::I => &[1],
        _ => &[],
    }
}

/// Valences for a bracket atom, by isoelectronic shift of the main-group rule.
/// Empty for elements outside the aromatic-capable groups.
fn bracket_valences(element: Element, charge: i8) -> Vec<u32> {
    let (electrons, expands) = match element {
        Element::B => (3, false),
        Element::C => (4, false),
        Element::N => (5, false),
        Element::O => (6, false),
        Element::P | Element::AS => (5, true),
        Element::S | Element::SE | Element::TE => (6, true),
        _ => return Vec::new(),
    };
    let shifted = electrons - i32::from(charge);
    let base = match shifted {
        1..=4 => shifted,
        5..=7 => 8 - shifted,
        _ => return Vec::new(),
    };
    let mut out = vec![base as u32];
    if expands && shifted >= 5 {
        out.extend([base as u32 + 2, base as u32 + 4].into_iter().filter(|v| *v <= 6));
    }
    out
}

fn smallest_at_least(valences: &[u32], sum: u32) -> Option<u32> {
    valences.iter().copied().find(|v| *v >= sum)
}

/// Valence sum with aromatic bonds counted as single.
fn base_sum(g: &MolGraph, atom: usize) -> u32 {
    g.neighbors(atom).iter().map(|(_, b)| g.bonds()[*b].order.base_valence()).sum()
}

/// Whether an aromatic atom must receive exactly one double bond, judged
/// as if it were written bare (`bracket == false`) or in brackets.
pub(crate) fn needs_pi_bond(g: &MolGraph, atom: usize, bracket: bool) -> bool {
    let a = &g.atoms()[atom];
    if !a.aromatic {
        return false;
    }
    let has_localized_multiple = g.neighbors(atom).iter().any(|(_, b)| {
        matches!(
            g.bonds()[*b].order,
            BondOrder::Double | BondOrder::Triple | BondOrder::Quadruple
        )
    });
    if has_localized_multiple {
        return false;
    }
    let sum = base_sum(g, atom);
    if bracket {
        let h = u32::from(a.explicit_h.unwrap_or(0));
        bracket_valences(a.element, a.formal_charge).contains(&(sum + h + 1))
    } else {
        smallest_at_least(bare_valences(a.element), sum).is_some_and(|v| v > sum)
    }
}

/// Hydrogens a bare atom would carry given the current (kekulized) bonds.
pub(crate) fn bare_hydrogens(g: &MolGraph, atom: usize) -> Option<u32> {
    let sum: u32 = g.neighbors(atom).iter().map(|(_, b)| g.bonds()[*b].valence()).sum();
    smallest_at_least(bare_valences(g.atoms()[atom].element), sum).map(|v| v - sum)
}

/// Rewrite aromatic bonds as alternating single/double bonds.
///
/// Every aromatic atom that needs a double bond gets exactly one, found as a
/// perfect matching on the subgraph of such atoms joined by aromatic bonds.
/// Aromatic flags are kept; [`Bond::kekule_order`](super::Bond) records the
/// localized order.
pub fn kekulize(mut g: MolGraph) -> Result<MolGraph> {
    if g.kekulized {
        return Ok(g);
    }
    let n = g.atom_count();
    let eligible: Vec<bool> =
        (0..n).map(|i| needs_pi_bond(&g, i, g.atoms()[i].is_bracket())).collect();
    let mut adj = vec![Vec::new(); n];
    for b in g.bonds() {
        let (u, v) = b.atoms;
        if b.order == BondOrder::Aromatic && eligible[u] && eligible[v] {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mate = maximum_matching(&adj);
    if (0..n).any(|i| eligible[i] && mate[i].is_none()) {
        return Err(SmilesError::KekulizationFailure(g.source.clone()));
    }
    for b in &mut g.bonds {
        b.kekule_order = Some(match b.order {
            BondOrder::Aromatic if mate[b.atoms.0] == Some(b.atoms.1) => 2,
            o => o.base_valence() as u8,
        });
    }
    g.kekulized = true;
    Ok(g)
}

/// Fill in implicit hydrogens and the derived formula. Kekulizes first if needed.
pub fn assign_hydrogens(g: MolGraph) -> Result<MolGraph> {
    let mut g = kekulize(g)?;
    for i in 0..g.atom_count() {
        let atom: &Atom = &g.atoms()[i];
        let h = match atom.explicit_h {
            Some(h) => h,
            None => {
                let h = bare_hydrogens(&g, i).ok_or_else(|| SmilesError::ValenceExceeded {
                    atom: i,
                    element: atom.element,
                    smiles: g.source.clone(),
                })?;
                h as u8
            }
        };
        g.atoms[i].hydrogens = h;
    }
    g.formula = Some(g.compute_formula()?);
    Ok(g)
}

/// Edmonds' blossom algorithm; returns each vertex's partner.
fn maximum_matching(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    // greedy start
    for v in 0..n {
        if mate[v].is_none() {
            if let Some(&u) = adj[v].iter().find(|u| mate[**u].is_none()) {
                mate[v] = Some(u);
                mate[u] = Some(v);
            }
        }
    }
    for root in 0..n {
        if mate[root].is_none() && !adj[root].is_empty() {
            let found = {
                let mut search = BlossomSearch::new(adj, &mate);
                search.find_path(root).map(|end| (end, search.parent))
            };
            if let Some((end, parent)) = found {
                let mut v = Some(end);
                while let Some(x) = v {
                    let pv = parent[x].expect("augmenting path parent");
                    let next = mate[pv];
                    mate[x] = Some(pv);
                    mate[pv] = Some(x);
                    v = next;
                }
            }
        }
    }
    mate
}

struct BlossomSearch<'a> {
    adj: &'a [Vec<usize>],
    mate: &'a [Option<usize>],
    parent: Vec<Option<usize>>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> BlossomSearch<'a> {
    fn new(adj: &'a [Vec<usize>], mate: &'a [Option<usize>]) -> Self {
        let n = adj.len();
        BlossomSearch {
            adj,
            mate,
            parent: vec![None; n],
            base: (0..n).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            match self.mate[a] {
                None => break,
                Some(m) => a = self.parent[m].expect("alternating tree"),
            }
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            let m = self.mate[b].expect("alternating tree");
            b = self.parent[m].expect("alternating tree");
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            let m = self.mate[v].expect("matched vertex in blossom");
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[m]] = true;
            self.parent[v] = Some(child);
            child = m;
            v = self.parent[m].expect("alternating tree");
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        self.used[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &self.adj[v] {
                if self.base[v] == self.base[to] || self.mate[v] == Some(to) {
                    continue;
                }
                let to_is_outer =
                    to == root || self.mate[to].is_some_and(|m| self.parent[m].is_some());
                if to_is_outer {
                    let cur = self.lca(v, to);
                    self.blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..self.adj.len() {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to].is_none() {
                    self.parent[to] = Some(v);
                    match self.mate[to] {
                        None => return Some(to),
                        Some(m) => {
                            self.used[m] = true;
                            self.queue.push_back(m);
                        }
                    }
                }
            }
        }
        None
    }
}
