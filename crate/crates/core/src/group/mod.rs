//! Exact arithmetic for the built-in catalog of polynomial-growth groups.
//!
//! Every element is stored in canonical coordinates, so equality of group
//! elements is equality of coordinates:
//!
//! * `FreeAbelian(d)`: an integer `d`-tuple.
//! * `Heisenberg3`: Mal'cev coordinates `(x, y, z)` with
//!   `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x·y')`.
//! * `DihedralInfinite`: `(n, ε)` standing for `rⁿ sᵋ`, with
//!   `(n,ε)(m,δ) = (n + (−1)^ε m, ε xor δ)`.
//! * `DirectProduct`: one component per factor.

mod ball;
mod subgroup;

pub use ball::{enumerate_ball, enumerate_ball_with_cap, word_length, BallIndex, DEFAULT_BALL_CAP};
pub use subgroup::{MarkedSubgroup, SubgroupKind};

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// One of the catalog groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDescriptor {
    FreeAbelian { d: usize },
    Heisenberg3,
    DihedralInfinite,
    DirectProduct { factors: Vec<GroupDescriptor> },
}

/// Canonical-form group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Free(SmallVec<[i64; 4]>),
    Heisenberg([i64; 3]),
    Dihedral { shift: i64, flip: bool },
    Product(Vec<Element>),
}

impl Element {
    pub fn free(coords: &[i64]) -> Self {
        Element::Free(SmallVec::from_slice(coords))
    }

    pub fn heisenberg(x: i64, y: i64, z: i64) -> Self {
        Element::Heisenberg([x, y, z])
    }

    pub fn dihedral(shift: i64, flip: bool) -> Self {
        Element::Dihedral { shift, flip }
    }

    /// Flat integer coordinates (product components concatenated).
    pub fn coords(&self) -> Vec<i64> {
        let mut out = Vec::new();
        self.push_coords(&mut out);
        out
    }

    fn push_coords(&self, out: &mut Vec<i64>) {
        match self {
            Element::Free(v) => out.extend_from_slice(v),
            Element::Heisenberg(c) => out.extend_from_slice(c),
            Element::Dihedral { shift, flip } => {
                out.push(*shift);
                out.push(*flip as i64);
            }
            Element::Product(parts) => parts.iter().for_each(|p| p.push_coords(out)),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::FreeAbelian { d } => write!(f, "Z^{d}"),
            GroupDescriptor::Heisenberg3 => write!(f, "H3(Z)"),
            GroupDescriptor::DihedralInfinite => write!(f, "D_inf"),
            GroupDescriptor::DirectProduct { factors } => {
                let names: Vec<String> = factors.iter().map(|g| g.to_string()).collect();
                write!(f, "{}", names.join(" x "))
            }
        }
    }
}

fn add(a: i64, b: i64, what: &str) -> Result<i64> {
    a.checked_add(b).ok_or_else(|| Error::Overflow(what.to_string()))
}

impl GroupDescriptor {
    pub fn free_abelian(d: usize) -> Self {
        GroupDescriptor::FreeAbelian { d }
    }

    pub fn product(factors: Vec<GroupDescriptor>) -> Self {
        GroupDescriptor::DirectProduct { factors }
    }

    /// Dimension `R_G` of `G_ab ⊗ ℝ`.
    pub fn rank(&self) -> usize {
        match self {
            GroupDescriptor::FreeAbelian { d } => *d,
            GroupDescriptor::Heisenberg3 => 2,
            GroupDescriptor::DihedralInfinite => 0,
            GroupDescriptor::DirectProduct { factors } => factors.iter().map(|g| g.rank()).sum(),
        }
    }

    /// Number of flat integer coordinates of an element.
    pub fn coord_len(&self) -> usize {
        match self {
            GroupDescriptor::FreeAbelian { d } => *d,
            GroupDescriptor::Heisenberg3 => 3,
            GroupDescriptor::DihedralInfinite => 2,
            GroupDescriptor::DirectProduct { factors } => factors.iter().map(|g| g.coord_len()).sum(),
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        match self {
            GroupDescriptor::DihedralInfinite => false,
            GroupDescriptor::DirectProduct { factors } => factors.iter().all(|g| g.is_nilpotent()),
            _ => true,
        }
    }

    pub fn is_free_abelian(&self) -> bool {
        matches!(self, GroupDescriptor::FreeAbelian { .. })
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupDescriptor::FreeAbelian { d } => Element::Free(SmallVec::from_elem(0, *d)),
            GroupDescriptor::Heisenberg3 => Element::Heisenberg([0; 3]),
            GroupDescriptor::DihedralInfinite => Element::dihedral(0, false),
            GroupDescriptor::DirectProduct { factors } => {
                Element::Product(factors.iter().map(|g| g.identity()).collect())
            }
        }
    }

    /// Checks that `g` is a well-formed element of this group.
    pub fn validate(&self, g: &Element) -> Result<()> {
        match (self, g) {
            (GroupDescriptor::FreeAbelian { d }, Element::Free(v)) if v.len() == *d => Ok(()),
            (GroupDescriptor::Heisenberg3, Element::Heisenberg(_)) => Ok(()),
            (GroupDescriptor::DihedralInfinite, Element::Dihedral { .. }) => Ok(()),
            (GroupDescriptor::DirectProduct { factors }, Element::Product(parts))
                if parts.len() == factors.len() =>
            {
                factors.iter().zip(parts).try_for_each(|(f, p)| f.validate(p))
            }
            _ => Err(Error::mismatch(self, format!("got {g:?}"))),
        }
    }

    /// Parses flat coordinates (the inverse of [`Element::coords`]).
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.coord_len() {
            return Err(Error::mismatch(
                self,
                format!("expected {} coordinates, got {}", self.coord_len(), coords.len()),
            ));
        }
        match self {
            GroupDescriptor::FreeAbelian { .. } => Ok(Element::free(coords)),
            GroupDescriptor::Heisenberg3 => Ok(Element::heisenberg(coords[0], coords[1], coords[2])),
            GroupDescriptor::DihedralInfinite => match coords[1] {
                0 | 1 => Ok(Element::dihedral(coords[0], coords[1] == 1)),
                other => Err(Error::mismatch(self, format!("flip bit must be 0 or 1, got {other}"))),
            },
            GroupDescriptor::DirectProduct { factors } => {
                let mut parts = Vec::with_capacity(factors.len());
                let mut offset = 0;
                for f in factors {
                    let n = f.coord_len();
                    parts.push(f.element(&coords[offset..offset + n])?);
                    offset += n;
                }
                Ok(Element::Product(parts))
            }
        }
    }

    /// Group product `g·h` in canonical form.
    pub fn mul(&self, g: &Element, h: &Element) -> Result<Element> {
        match (self, g, h) {
            (GroupDescriptor::FreeAbelian { d }, Element::Free(a), Element::Free(b))
                if a.len() == *d && b.len() == *d =>
            {
                let mut out = SmallVec::with_capacity(*d);
                for (x, y) in a.iter().zip(b) {
                    out.push(add(*x, *y, "free abelian product")?);
                }
                Ok(Element::Free(out))
            }
            (GroupDescriptor::Heisenberg3, Element::Heisenberg(a), Element::Heisenberg(b)) => {
                let cross = a[0]
                    .checked_mul(b[1])
                    .ok_or_else(|| Error::Overflow("Heisenberg product".into()))?;
                Ok(Element::Heisenberg([
                    add(a[0], b[0], "Heisenberg product")?,
                    add(a[1], b[1], "Heisenberg product")?,
                    add(add(a[2], b[2], "Heisenberg product")?, cross, "Heisenberg product")?,
                ]))
            }
            (
                GroupDescriptor::DihedralInfinite,
                Element::Dihedral { shift: n, flip: e },
                Element::Dihedral { shift: m, flip: f },
            ) => {
                let m = if *e { -m } else { *m };
                Ok(Element::dihedral(add(*n, m, "dihedral product")?, e ^ f))
            }
            (GroupDescriptor::DirectProduct { factors }, Element::Product(a), Element::Product(b))
                if a.len() == factors.len() && b.len() == factors.len() =>
            {
                factors
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(f, (x, y))| f.mul(x, y))
                    .collect::<Result<Vec<_>>>()
                    .map(Element::Product)
            }
            _ => Err(Error::mismatch(self, format!("cannot multiply {g:?} by {h:?}"))),
        }
    }

    pub fn inverse(&self, g: &Element) -> Result<Element> {
        let neg = |v: i64| v.checked_neg().ok_or_else(|| Error::Overflow("inverse".into()));
        match (self, g) {
            (GroupDescriptor::FreeAbelian { d }, Element::Free(a)) if a.len() == *d => a
                .iter()
                .map(|&x| neg(x))
                .collect::<Result<SmallVec<_>>>()
                .map(Element::Free),
            (GroupDescriptor::Heisenberg3, Element::Heisenberg([x, y, z])) => {
                let xy = x.checked_mul(*y).ok_or_else(|| Error::Overflow("inverse".into()))?;
                Ok(Element::heisenberg(neg(*x)?, neg(*y)?, add(xy, neg(*z)?, "inverse")?))
            }
            (GroupDescriptor::DihedralInfinite, Element::Dihedral { shift, flip }) => {
                // reflections are involutions
                if *flip {
                    Ok(g.clone())
                } else {
                    Ok(Element::dihedral(neg(*shift)?, false))
                }
            }
            (GroupDescriptor::DirectProduct { factors }, Element::Product(parts))
                if parts.len() == factors.len() =>
            {
                factors
                    .iter()
                    .zip(parts)
                    .map(|(f, p)| f.inverse(p))
                    .collect::<Result<Vec<_>>>()
                    .map(Element::Product)
            }
            _ => Err(Error::mismatch(self, format!("cannot invert {g:?}"))),
        }
    }

    /// `gⁿ` for any integer `n`, by repeated squaring with overflow checks.
    pub fn pow(&self, g: &Element, n: i64) -> Result<Element> {
        let base = if n < 0 { self.inverse(g)? } else { g.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq)?;
            }
        }
        Ok(acc)
    }

    /// Class of `g` in `G_ab ⊗ ℝ`, as an integer vector of length `rank()`.
    pub fn abelianize(&self, g: &Element) -> Result<Vec<i64>> {
        let mut out = Vec::with_capacity(self.rank());
        self.push_abelianized(g, &mut out)?;
        Ok(out)
    }

    fn push_abelianized(&self, g: &Element, out: &mut Vec<i64>) -> Result<()> {
        match (self, g) {
            (GroupDescriptor::FreeAbelian { d }, Element::Free(a)) if a.len() == *d => {
                out.extend_from_slice(a);
            }
            (GroupDescriptor::Heisenberg3, Element::Heisenberg([x, y, _])) => {
                out.push(*x);
                out.push(*y);
            }
            (GroupDescriptor::DihedralInfinite, Element::Dihedral { .. }) => {}
            (GroupDescriptor::DirectProduct { factors }, Element::Product(parts))
                if parts.len() == factors.len() =>
            {
                for (f, p) in factors.iter().zip(parts) {
                    f.push_abelianized(p, out)?;
                }
            }
            _ => return Err(Error::mismatch(self, format!("cannot abelianize {g:?}"))),
        }
        Ok(())
    }

    /// One element per basis direction of `G_ab ⊗ ℝ` mapping onto that
    /// standard basis vector.
    pub fn abelian_basis_lifts(&self) -> Vec<Element> {
        match self {
            GroupDescriptor::FreeAbelian { d } => (0..*d)
                .map(|i| {
                    let mut v = vec![0; *d];
                    v[i] = 1;
                    Element::free(&v)
                })
                .collect(),
            GroupDescriptor::Heisenberg3 => {
                vec![Element::heisenberg(1, 0, 0), Element::heisenberg(0, 1, 0)]
            }
            GroupDescriptor::DihedralInfinite => Vec::new(),
            GroupDescriptor::DirectProduct { factors } => {
                let mut out = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    for lift in f.abelian_basis_lifts() {
                        out.push(self.embed(i, lift));
                    }
                }
                out
            }
        }
    }

    /// Embeds an element of factor `i` into a direct product.
    fn embed(&self, i: usize, g: Element) -> Element {
        match self {
            GroupDescriptor::DirectProduct { factors } => {
                let mut parts: Vec<Element> = factors.iter().map(|f| f.identity()).collect();
                parts[i] = g;
                Element::Product(parts)
            }
            _ => g,
        }
    }

    /// The catalog's default symmetric generating set.
    pub fn default_generators(&self) -> GeneratingSet {
        let (elements, names) = match self {
            GroupDescriptor::FreeAbelian { d } => {
                let mut els = Vec::new();
                let mut names = Vec::new();
                for i in 0..*d {
                    for sign in [1, -1] {
                        let mut v = vec![0; *d];
                        v[i] = sign;
                        els.push(Element::free(&v));
                        names.push(format!("{}e{}", if sign > 0 { "+" } else { "-" }, i + 1));
                    }
                }
                (els, names)
            }
            GroupDescriptor::Heisenberg3 => (
                vec![
                    Element::heisenberg(1, 0, 0),
                    Element::heisenberg(-1, 0, 0),
                    Element::heisenberg(0, 1, 0),
                    Element::heisenberg(0, -1, 0),
                ],
                vec!["a".into(), "A".into(), "b".into(), "B".into()],
            ),
            GroupDescriptor::DihedralInfinite => (
                vec![
                    Element::dihedral(1, false),
                    Element::dihedral(-1, false),
                    Element::dihedral(0, true),
                ],
                vec!["r".into(), "R".into(), "s".into()],
            ),
            GroupDescriptor::DirectProduct { factors } => {
                let mut els = Vec::new();
                let mut names = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    let gens = f.default_generators();
                    for (g, n) in gens.elements.into_iter().zip(gens.names) {
                        els.push(self.embed(i, g));
                        names.push(format!("{n}[{i}]"));
                    }
                }
                (els, names)
            }
        };
        GeneratingSet { elements, names }
    }

    /// King-move generators of `ℤ^d`: every nonzero vector in `{−1,0,1}^d`.
    pub fn king_generators(&self) -> Result<GeneratingSet> {
        let GroupDescriptor::FreeAbelian { d } = self else {
            return Err(Error::mismatch(self, "king-move generators need a free abelian group"));
        };
        let total = 3usize.pow(*d as u32);
        let mut elements = Vec::new();
        for code in 0..total {
            let mut c = code;
            let v: Vec<i64> = (0..*d)
                .map(|_| {
                    let digit = (c % 3) as i64 - 1;
                    c /= 3;
                    digit
                })
                .collect();
            if v.iter().any(|&x| x != 0) {
                elements.push(Element::free(&v));
            }
        }
        GeneratingSet::new(self, elements, None)
    }

    /// The designated finite-index nilpotent core: the whole group when it is
    /// already nilpotent, the rotation subgroup for `D∞`.
    pub fn nilpotent_core(&self) -> MarkedSubgroup {
        match self {
            GroupDescriptor::DihedralInfinite => MarkedSubgroup::rotation(),
            GroupDescriptor::DirectProduct { factors } if !self.is_nilpotent() => {
                MarkedSubgroup::product(factors.iter().map(|f| f.nilpotent_core()).collect())
                    .expect("factor cores are well formed")
            }
            _ => MarkedSubgroup::whole(self.clone()),
        }
    }
}

/// Finite symmetric generating set, with printable labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingSet {
    elements: Vec<Element>,
    names: Vec<String>,
}

impl GeneratingSet {
    /// Validates membership, drops the identity and duplicates, and checks
    /// closure under inverses.
    pub fn new(group: &GroupDescriptor, elements: Vec<Element>, names: Option<Vec<String>>) -> Result<Self> {
        if let Some(n) = &names {
            if n.len() != elements.len() {
                return Err(Error::Invalid("generator names and elements differ in length".into()));
            }
        }
        let id = group.identity();
        let mut kept = Vec::new();
        let mut kept_names = Vec::new();
        for (i, g) in elements.into_iter().enumerate() {
            group.validate(&g)?;
            if g == id || kept.contains(&g) {
                continue;
            }
            kept_names.push(names.as_ref().map_or_else(|| g.to_string(), |n| n[i].clone()));
            kept.push(g);
        }
        for g in &kept {
            let inv = group.inverse(g)?;
            if !kept.contains(&inv) {
                return Err(Error::Invalid(format!("generating set is not symmetric: {g} lacks its inverse")));
            }
        }
        if kept.is_empty() && group.coord_len() > 0 {
            return Err(Error::Invalid("generating set is empty".into()));
        }
        Ok(Self {
            elements: kept,
            names: kept_names,
        })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}
