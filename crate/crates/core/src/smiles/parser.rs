use std::collections::BTreeMap;

use super::{Atom, Bond, BondOrder, BondStereo, Chirality, MolGraph, Result, SmilesError};
use crate::element::Element;

/// Aromatic symbols accepted inside brackets.
const BRACKET_AROMATIC: [(&str, Element); 8] = [
    ("se", Element::SE),
    ("as", Element::AS),
    ("b", Element::B),
    ("c", Element::C),
    ("n", Element::N),
    ("o", Element::O),
    ("p", Element::P),
    ("s", Element::S),
];

#[derive(Debug, Clone, Copy)]
struct BondSpec {
    order: BondOrder,
    stereo: Option<BondStereo>,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    rings: BTreeMap<u16, (usize, Option<BondSpec>)>,
}

/// Parse one molecule token. Hydrogens are not assigned yet.
pub fn parse_smiles(text: &str) -> Result<MolGraph> {
    let mut p = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        rings: BTreeMap::new(),
    };
    p.run()?;
    Ok(MolGraph::new(text.to_string(), p.atoms, p.bonds))
}

impl Parser<'_> {
    fn owned(&self) -> String {
        self.text.to_string()
    }

    fn run(&mut self) -> Result<()> {
        if self.bytes.is_empty() {
            return Err(SmilesError::Empty);
        }
        let mut prev: Option<usize> = None;
        let mut pending: Option<(usize, BondSpec)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();

        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            match c {
                b'(' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(SmilesError::UnbalancedParenthesis(self.pos, self.owned()));
                    }
                    branches.push((prev.unwrap(), self.pos));
                    self.pos += 1;
                }
                b')' => {
                    if let Some((at, _)) = pending {
                        return Err(SmilesError::DanglingBondSymbol(at, self.owned()));
                    }
                    let (atom, _) = branches
                        .pop()
                        .ok_or_else(|| SmilesError::UnbalancedParenthesis(self.pos, self.owned()))?;
                    prev = Some(atom);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b'$' | b':' | b'/' | b'\\' => {
                    if prev.is_none() || pending.is_some() {
                        return Err(SmilesError::DanglingBondSymbol(self.pos, self.owned()));
                    }
                    let spec = match c {
                        b'-' => BondSpec { order: BondOrder::Single, stereo: None },
                        b'=' => BondSpec { order: BondOrder::Double, stereo: None },
                        b'#' => BondSpec { order: BondOrder::Triple, stereo: None },
                        b'$' => BondSpec { order: BondOrder::Quadruple, stereo: None },
                        b':' => BondSpec { order: BondOrder::Aromatic, stereo: None },
                        b'/' => BondSpec { order: BondOrder::Single, stereo: Some(BondStereo::Up) },
                        _ => BondSpec { order: BondOrder::Single, stereo: Some(BondStereo::Down) },
                    };
                    pending = Some((self.pos, spec));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let label = self.ring_label()?;
                    let Some(atom) = prev else {
                        return Err(SmilesError::UnmatchedRingClosure(label, self.owned()));
                    };
                    self.ring_bond(label, atom, pending.take().map(|(_, s)| s))?;
                }
                b'.' | b'>' => {
                    return Err(SmilesError::UnexpectedSeparator(c as char, self.owned()));
                }
                _ => {
                    let atom = self.atom()?;
                    if let Some(p) = prev {
                        let spec = pending.take().map(|(_, s)| s);
                        self.add_bond(p, atom, spec)?;
                    } else if let Some((at, _)) = pending {
                        return Err(SmilesError::DanglingBondSymbol(at, self.owned()));
                    }
                    prev = Some(atom);
                }
            }
        }
        if let Some((at, _)) = pending {
            return Err(SmilesError::DanglingBondSymbol(at, self.owned()));
        }
        if let Some((_, at)) = branches.pop() {
            return Err(SmilesError::UnbalancedParenthesis(at, self.owned()));
        }
        if let Some((label, _)) = self.rings.iter().next() {
            return Err(SmilesError::UnmatchedRingClosure(*label, self.owned()));
        }
        Ok(())
    }

    fn ring_label(&mut self) -> Result<u16> {
        if self.bytes[self.pos] == b'%' {
            let digits = self.bytes.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(u16::from(d[0] - b'0') * 10 + u16::from(d[1] - b'0'))
                }
                _ => Err(SmilesError::UnknownAtomToken(self.pos, self.owned())),
            }
        } else {
            let d = self.bytes[self.pos] - b'0';
            self.pos += 1;
            Ok(u16::from(d))
        }
    }

    fn ring_bond(&mut self, label: u16, atom: usize, spec: Option<BondSpec>) -> Result<()> {
        match self.rings.remove(&label) {
            None => {
                self.rings.insert(label, (atom, spec));
                Ok(())
            }
            Some((open, open_spec)) => {
                let spec = match (open_spec, spec) {
                    (Some(a), Some(b)) => {
                        // '/' at one end reads as '\' from the other.
                        let stereo_clash = matches!((a.stereo, b.stereo), (Some(x), Some(y)) if x != y.flipped());
                        if a.order != b.order || stereo_clash {
                            return Err(SmilesError::ConflictingRingBond(label, self.owned()));
                        }
                        Some(BondSpec { order: a.order, stereo: a.stereo.or(b.stereo.map(BondStereo::flipped)) })
                    }
                    (Some(a), None) => Some(a),
                    (None, Some(b)) => Some(BondSpec { order: b.order, stereo: b.stereo.map(BondStereo::flipped) }),
                    (None, None) => None,
                };
                self.add_bond(open, atom, spec)
            }
        }
    }

    fn add_bond(&mut self, a: usize, b: usize, spec: Option<BondSpec>) -> Result<()> {
        if a == b
            || self.bonds.iter().any(|x| {
                (x.atoms.0 == a && x.atoms.1 == b) || (x.atoms.0 == b && x.atoms.1 == a)
            })
        {
            return Err(SmilesError::DuplicateBond(self.owned()));
        }
        let spec = spec.unwrap_or_else(|| {
            let order = if self.atoms[a].aromatic && self.atoms[b].aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            };
            BondSpec { order, stereo: None }
        });
        self.bonds.push(Bond {
            atoms: (a, b),
            order: spec.order,
            stereo: spec.stereo,
            kekule_order: None,
        });
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn atom(&mut self) -> Result<usize> {
        let start = self.pos;
        let rest = &self.bytes[self.pos..];
        if rest[0] == b'[' {
            return self.bracket_atom();
        }
        let organic: Option<(usize, Element, bool)> = match rest {
            [b'C', b'l', ..] => Some((2, Element::CL, false)),
            [b'B', b'r', ..] => Some((2, Element::BR, false)),
            [b'B', ..] => Some((1, Element::B, false)),
            [b'C', ..] => Some((1, Element::C, false)),
            [b'N', ..] => Some((1, Element::N, false)),
            [b'O', ..] => Some((1, Element::O, false)),
            [b'P', ..] => Some((1, Element::P, false)),
            [b'S', ..] => Some((1, Element::S, false)),
            [b'F', ..] => Some((1, Element::F, false)),
            [b'I', ..] => Some((1, Element::I, false)),
            [b'b', ..] => Some((1, Element::B, true)),
            [b'c', ..] => Some((1, Element::C, true)),
            [b'n', ..] => Some((1, Element::N, true)),
            [b'o', ..] => Some((1, Element::O, true)),
            [b'p', ..] => Some((1, Element::P, true)),
            [b's', ..] => Some((1, Element::S, true)),
            _ => None,
        };
        let (len, element, aromatic) =
            organic.ok_or_else(|| SmilesError::UnknownAtomToken(start, self.owned()))?;
        self.pos += len;
        Ok(self.push_atom(Atom {
            element,
            aromatic,
            formal_charge: 0,
            explicit_h: None,
            isotope: None,
            chirality: None,
            atom_class: None,
            hydrogens: 0,
        }))
    }

    fn digits(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            self.text[start..self.pos].parse().ok()
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bracket_atom(&mut self) -> Result<usize> {
        let start = self.pos;
        let bad = |p: &Self| SmilesError::UnknownAtomToken(start, p.owned());
        self.pos += 1;

        let isotope = match self.digits() {
            Some(0) => return Err(bad(self)),
            Some(n) => Some(u16::try_from(n).map_err(|_| bad(self))?),
            None => None,
        };

        let rest = &self.text[self.pos..];
        let (element, aromatic, len) = if let Some((sym, e)) =
            BRACKET_AROMATIC.iter().find(|(sym, _)| rest.starts_with(sym))
        {
            (*e, true, sym.len())
        } else {
            let b = rest.as_bytes();
            if b.is_empty() || !b[0].is_ascii_uppercase() {
                return Err(bad(self));
            }
            let two = (b.len() > 1 && b[1].is_ascii_lowercase())
                .then(|| Element::from_symbol(&rest[..2]).ok())
                .flatten();
            match two {
                Some(e) => (e, false, 2),
                None => (Element::from_symbol(&rest[..1]).map_err(|_| bad(self))?, false, 1),
            }
        };
        self.pos += len;

        let chirality = if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                Some(Chirality::Clockwise)
            } else {
                Some(Chirality::CounterClockwise)
            }
        } else {
            None
        };
        if chirality.is_some() && self.peek().is_some_and(|c| c.is_ascii_uppercase() && c != b'H') {
            // @TH1, @SP2 and friends are not supported
            return Err(bad(self));
        }

        let mut hcount = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = match self.digits() {
                Some(n) => u8::try_from(n).map_err(|_| bad(self))?,
                None => 1,
            };
        }

        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.digits() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }
        let formal_charge = i8::try_from(charge).map_err(|_| bad(self))?;

        let atom_class = if self.peek() == Some(b':') {
            self.pos += 1;
            Some(self.digits().ok_or_else(|| bad(self))?)
        } else {
            None
        };

        if self.peek() != Some(b']') {
            return Err(bad(self));
        }
        self.pos += 1;
        Ok(self.push_atom(Atom {
            element,
            aromatic,
            formal_charge,
            explicit_h: Some(hcount),
            isotope,
            chirality,
            atom_class,
            hydrogens: hcount,
        }))
    }
}
