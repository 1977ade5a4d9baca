//! Canonical atom labeling by partition refinement plus a search over tied
//! cells, keeping the lexicographically smallest certificate. Automorphisms
//! found along the way prune sibling branches that are known to lead to the
//! same leaves.

use super::kekule::{assign_hydrogens, bare_hydrogens, needs_pi_bond};
use super::{BondOrder, BondStereo, Chirality, MolGraph, Result};
use crate::element::Element;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Canonical {
    /// Opaque, byte-comparable encoding of the labeled graph.
    pub certificate: Vec<u8>,
    pub smiles: String,
}

/// Canonical certificate and SMILES. Hydrogens are assigned first when the
/// graph has not been through [`assign_hydrogens`] yet.
pub fn canonicalize(g: &MolGraph) -> Result<Canonical> {
    if g.formula().is_none() {
        let g = assign_hydrogens(g.clone())?;
        return canonicalize(&g);
    }
    let ranks = canonical_ranks(g);
    Ok(Canonical { certificate: certificate(g, &ranks), smiles: write_smiles(g, &ranks) })
}

const ATOM_LABEL_LEN: usize = 7;

fn atom_label(g: &MolGraph, i: usize) -> [u8; ATOM_LABEL_LEN] {
    let a = &g.atoms()[i];
    let iso = a.isotope.unwrap_or(0).to_be_bytes();
    let chir = match a.chirality {
        None => 0,
        Some(Chirality::CounterClockwise) => 1,
        Some(Chirality::Clockwise) => 2,
    };
    [
        a.element.atomic_number(),
        u8::from(a.aromatic),
        (i16::from(a.formal_charge) + 128) as u8,
        a.hydrogens,
        iso[0],
        iso[1],
        chir,
    ]
}

fn stereo_code(s: Option<BondStereo>) -> u8 {
    match s {
        None => 0,
        Some(BondStereo::Up) => 1,
        Some(BondStereo::Down) => 2,
    }
}

fn certificate(g: &MolGraph, ranks: &[usize]) -> Vec<u8> {
    let n = g.atom_count();
    let mut by_rank = vec![0; n];
    for (atom, r) in ranks.iter().enumerate() {
        by_rank[*r] = atom;
    }
    let mut out = Vec::with_capacity(4 + n * ATOM_LABEL_LEN + g.bonds().len() * 6);
    out.extend_from_slice(&(n as u16).to_be_bytes());
    for atom in &by_rank {
        out.extend_from_slice(&atom_label(g, *atom));
    }
    let mut edges: Vec<(usize, usize, u8, u8)> = g
        .bonds()
        .iter()
        .map(|b| {
            let (u, v) = b.atoms;
            let (lo, hi) = if ranks[u] < ranks[v] { (u, v) } else { (v, u) };
            (ranks[lo], ranks[hi], b.order.code(), stereo_code(b.stereo_from(lo)))
        })
        .collect();
    edges.sort_unstable();
    out.extend_from_slice(&(edges.len() as u16).to_be_bytes());
    for (lo, hi, order, stereo) in edges {
        out.extend_from_slice(&(lo as u16).to_be_bytes());
        out.extend_from_slice(&(hi as u16).to_be_bytes());
        out.push(order);
        out.push(stereo);
    }
    out
}

/// Atoms incident to at least one cycle edge.
fn ring_atoms(g: &MolGraph) -> Vec<bool> {
    let n = g.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut in_ring = vec![false; n];
    let mut timer = 0;
    // iterative DFS: (atom, parent bond, next neighbor index)
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![(start, usize::MAX, 0usize)];
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        while let Some(&mut (v, pb, ref mut next)) = stack.last_mut() {
            if *next < g.neighbors(v).len() {
                let (w, b) = g.neighbors(v)[*next];
                *next += 1;
                if b == pb {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, b, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] <= disc[parent] {
                        // edge parent–v is not a bridge
                        in_ring[parent] = true;
                        in_ring[v] = true;
                    }
                }
            }
        }
    }
    in_ring
}

/// Rank (0..n) of every atom under the minimal certificate.
fn canonical_ranks(g: &MolGraph) -> Vec<usize> {
    let n = g.atom_count();
    if n == 1 {
        return vec![0];
    }
    let in_ring = ring_atoms(g);
    let invariants: Vec<_> = (0..n)
        .map(|i| (g.neighbors(i).len(), atom_label(g, i), in_ring[i]))
        .collect();
    let colors = ranks_of(&invariants);
    let mut search = LabelSearch { g, best: None, automorphisms: Vec::new() };
    search.explore(colors, &mut Vec::new());
    search.best.expect("at least one leaf").1
}

fn ranks_of<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut sorted = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(k).unwrap()).collect()
}

fn distinct(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |m| m + 1)
}

struct LabelSearch<'g> {
    g: &'g MolGraph,
    best: Option<(Vec<u8>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
}

impl LabelSearch<'_> {
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let g = self.g;
        loop {
            let keys: Vec<_> = (0..g.atom_count())
                .map(|i| {
                    let mut nb: Vec<_> = g
                        .neighbors(i)
                        .iter()
                        .map(|(j, b)| {
                            let bond = &g.bonds()[*b];
                            (bond.order.code(), stereo_code(bond.stereo_from(i)), colors[*j])
                        })
                        .collect();
                    nb.sort_unstable();
                    (colors[i], nb)
                })
                .collect();
            let next = ranks_of(&keys);
            if distinct(&next) == distinct(&colors) {
                return next;
            }
            colors = next;
        }
    }

    fn explore(&mut self, colors: Vec<usize>, prefix: &mut Vec<usize>) {
        let colors = self.refine(colors);
        let n = colors.len();
        let k = distinct(&colors);
        if k == n {
            self.leaf(colors);
            return;
        }
        let mut sizes = vec![0usize; k];
        for c in &colors {
            sizes[*c] += 1;
        }
        let target = sizes.iter().position(|s| *s > 1).expect("non-discrete partition");
        let members: Vec<usize> = (0..n).filter(|i| colors[*i] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for v in members {
            if !tried.is_empty() {
                let mut orbits = self.orbits_fixing(prefix);
                let rv = orbits.find(v);
                if tried.iter().any(|u| orbits.find(*u) == rv) {
                    continue;
                }
            }
            tried.push(v);
            let split: Vec<(usize, bool)> =
                colors.iter().enumerate().map(|(i, c)| (*c, *c == target && i != v)).collect();
            prefix.push(v);
            self.explore(ranks_of(&split), prefix);
            prefix.pop();
        }
    }

    fn leaf(&mut self, ranks: Vec<usize>) {
        let cert = certificate(self.g, &ranks);
        match &self.best {
            None => self.best = Some((cert, ranks)),
            Some((best_cert, best_ranks)) => match cert.cmp(best_cert) {
                std::cmp::Ordering::Less => self.best = Some((cert, ranks)),
                std::cmp::Ordering::Equal => {
                    let mut atom_at = vec![0; ranks.len()];
                    for (atom, r) in best_ranks.iter().enumerate() {
                        atom_at[*r] = atom;
                    }
                    let gamma: Vec<usize> = ranks.iter().map(|r| atom_at[*r]).collect();
                    if gamma.iter().enumerate().any(|(i, x)| i != *x) {
                        self.automorphisms.push(gamma);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }

    fn orbits_fixing(&self, prefix: &[usize]) -> UnionFind {
        let mut uf = UnionFind::new(self.g.atom_count());
        for gamma in &self.automorphisms {
            if prefix.iter().all(|p| gamma[*p] == *p) {
                for (i, x) in gamma.iter().enumerate() {
                    uf.union(i, *x);
                }
            }
        }
        uf
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn organic_subset(e: Element, aromatic: bool) -> bool {
    if aromatic {
        matches!(e, Element::B | Element::C | Element::N | Element::O | Element::P | Element::S)
    } else {
        matches!(
            e,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::F
                | Element::CL
                | Element::BR
                | Element::I
        )
    }
}

fn has_pi_bond(g: &MolGraph, i: usize) -> bool {
    g.neighbors(i).iter().any(|(_, b)| {
        let bond = &g.bonds()[*b];
        bond.order == BondOrder::Aromatic && bond.kekule_order == Some(2)
    })
}

/// Whether re-parsing the bare symbol reproduces this atom exactly.
fn can_write_bare(g: &MolGraph, i: usize) -> bool {
    let a = &g.atoms()[i];
    a.formal_charge == 0
        && a.isotope.is_none()
        && a.chirality.is_none()
        && organic_subset(a.element, a.aromatic)
        && (!a.aromatic || needs_pi_bond(g, i, false) == has_pi_bond(g, i))
        && bare_hydrogens(g, i) == Some(u32::from(a.hydrogens))
}

fn write_atom(g: &MolGraph, i: usize, out: &mut String) {
    let a = &g.atoms()[i];
    let symbol = if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    if can_write_bare(g, i) {
        out.push_str(&symbol);
        return;
    }
    out.push('[');
    if let Some(iso) = a.isotope {
        out.push_str(&iso.to_string());
    }
    out.push_str(&symbol);
    match a.chirality {
        Some(Chirality::CounterClockwise) => out.push('@'),
        Some(Chirality::Clockwise) => out.push_str("@@"),
        None => {}
    }
    match a.hydrogens {
        0 => {}
        1 => out.push('H'),
        h => {
            out.push('H');
            out.push_str(&h.to_string());
        }
    }
    match a.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => out.push_str(&format!("+{q}")),
        q => out.push_str(&format!("-{}", -i16::from(q))),
    }
    out.push(']');
}

fn bond_symbol(g: &MolGraph, b: usize, from: usize) -> &'static str {
    let bond = &g.bonds()[b];
    let (u, v) = bond.atoms;
    let both_aromatic = g.atoms()[u].aromatic && g.atoms()[v].aromatic;
    match bond.order {
        BondOrder::Single => match bond.stereo_from(from) {
            Some(BondStereo::Up) => "/",
            Some(BondStereo::Down) => "\\",
            None if both_aromatic => "-",
            None => "",
        },
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Quadruple => "$",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

struct Writer<'g> {
    g: &'g MolGraph,
    ranks: &'g [usize],
    children: Vec<Vec<(usize, usize)>>,
    ring_bonds: Vec<Vec<usize>>,
    written: Vec<bool>,
    open_digit: Vec<Option<u16>>,
    free_digits: Vec<bool>,
    out: String,
}

fn write_smiles(g: &MolGraph, ranks: &[usize]) -> String {
    let n = g.atom_count();
    let root = ranks.iter().position(|r| *r == 0).expect("rank 0 exists");
    let mut w = Writer {
        g,
        ranks,
        children: vec![Vec::new(); n],
        ring_bonds: vec![Vec::new(); n],
        written: vec![false; n],
        open_digit: vec![None; g.bonds().len()],
        free_digits: vec![true; 100],
        out: String::new(),
    };
    let mut visited = vec![false; n];
    let mut ring_seen = vec![false; g.bonds().len()];
    w.spanning_tree(root, usize::MAX, &mut visited, &mut ring_seen);
    w.emit(root, None);
    w.out
}

impl Writer<'_> {
    fn sorted_neighbors(&self, v: usize) -> Vec<(usize, usize)> {
        let mut nb = self.g.neighbors(v).to_vec();
        nb.sort_by_key(|(j, _)| self.ranks[*j]);
        nb
    }

    fn spanning_tree(&mut self, v: usize, via: usize, visited: &mut [bool], ring_seen: &mut [bool]) {
        visited[v] = true;
        for (w, b) in self.sorted_neighbors(v) {
            if b == via {
                continue;
            }
            if visited[w] {
                if !ring_seen[b] {
                    ring_seen[b] = true;
                    self.ring_bonds[v].push(b);
                    self.ring_bonds[w].push(b);
                }
            } else {
                self.children[v].push((w, b));
                self.spanning_tree(w, b, visited, ring_seen);
            }
        }
    }

    fn emit(&mut self, v: usize, incoming: Option<(usize, usize)>) {
        if let Some((from, b)) = incoming {
            self.out.push_str(bond_symbol(self.g, b, from));
        }
        write_atom(self.g, v, &mut self.out);
        self.written[v] = true;

        let mut closing = Vec::new();
        let mut opening = Vec::new();
        for &b in &self.ring_bonds[v] {
            let other = self.g.bonds()[b].other(v);
            if self.written[other] && self.open_digit[b].is_some() {
                closing.push(b);
            } else {
                opening.push((self.ranks[other], b));
            }
        }
        closing.sort_by_key(|b| self.open_digit[*b]);
        for b in closing {
            let d = self.open_digit[b].take().expect("open ring digit");
            self.free_digits[d as usize] = true;
            push_digit(&mut self.out, d);
        }
        opening.sort_unstable();
        for (_, b) in opening {
            let d = (1..100u16).find(|d| self.free_digits[*d as usize]).expect("ring digits exhausted");
            self.free_digits[d as usize] = false;
            self.open_digit[b] = Some(d);
            self.out.push_str(bond_symbol(self.g, b, v));
            push_digit(&mut self.out, d);
        }

        let children = std::mem::take(&mut self.children[v]);
        let last = children.len().saturating_sub(1);
        for (k, (w, b)) in children.into_iter().enumerate() {
            if k < last {
                self.out.push('(');
                self.emit(w, Some((v, b)));
                self.out.push(')');
            } else {
                self.emit(w, Some((v, b)));
            }
        }
    }
}

fn push_digit(out: &mut String, d: u16) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}
