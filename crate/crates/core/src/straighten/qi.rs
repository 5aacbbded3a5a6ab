//! Pipelines of lattice primitives `Ψ: N → M` and their finite-index
//! extensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Element, GroupDescriptor, MarkedSubgroup};
use crate::scalar::Rational;

/// Perturbation `g` used by a shear `(…, b, …) ↦ (…, b + g(a), …)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShearKind {
    /// `g(n) = ⌊√|n|⌋`.
    SqrtFloor,
    /// `g(n) = n mod 2`.
    Mod2,
    Zero,
}

impl ShearKind {
    pub fn apply(self, n: i64) -> i64 {
        match self {
            ShearKind::SqrtFloor => n.unsigned_abs().isqrt() as i64,
            ShearKind::Mod2 => n.rem_euclid(2),
            ShearKind::Zero => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QiPrimitive {
    /// Integer matrix applied to Abelianized coordinates; lands in `ℤ^rows`.
    LatticeLinear { matrix: Vec<Vec<i64>> },
    /// Left multiplication by the element with flat coordinates `by`.
    Translate { by: Vec<i64> },
    /// Adds `kind(x_of)` to `x_axis`.
    Shear { axis: usize, of: usize, kind: ShearKind },
    /// `out[i] = in[perm[i]]`.
    Swap { perm: Vec<usize> },
}

/// Maps usable as `Ψ` in defect and straightening sweeps.
pub trait CoarseMap: Sync {
    fn source(&self) -> &GroupDescriptor;
    fn target(&self) -> &GroupDescriptor;
    fn eval(&self, x: &Element) -> Result<Element>;
}

/// A normalized pipeline `Ψ` with `Ψ(e) = e`.
#[derive(Clone, Debug, PartialEq)]
pub struct QiMapExpr {
    source: GroupDescriptor,
    target: GroupDescriptor,
    pipeline: Vec<QiPrimitive>,
}

impl QiMapExpr {
    pub fn new(source: GroupDescriptor, pipeline: Vec<QiPrimitive>) -> Result<Self> {
        if !source.is_nilpotent() {
            return Err(Error::mismatch(&source, "pipelines need a nilpotent source"));
        }
        let mut cur = source.clone();
        for p in &pipeline {
            cur = stage_target(&cur, p)?;
        }
        let mut map = Self {
            source,
            target: cur,
            pipeline,
        };
        let at_e = map.eval(&map.source.identity())?;
        if at_e != map.target.identity() {
            let back = map.target.inverse(&at_e)?;
            map.pipeline.push(QiPrimitive::Translate { by: back.coords() });
        }
        Ok(map)
    }

    pub fn identity(group: GroupDescriptor) -> Result<Self> {
        Self::new(group, Vec::new())
    }

    pub fn pipeline(&self) -> &[QiPrimitive] {
        &self.pipeline
    }

    /// `true` when no stage is a nonlinear shear, so that the normalized map
    /// induces a homomorphism of Abelianizations.
    pub fn is_lattice_linear(&self) -> bool {
        self.pipeline.iter().all(|p| match p {
            QiPrimitive::Shear { kind, .. } => *kind == ShearKind::Zero,
            _ => true,
        })
    }
}

fn projected(cur: &GroupDescriptor) -> Result<GroupDescriptor> {
    match cur {
        GroupDescriptor::FreeAbelian { .. } => Ok(cur.clone()),
        g if g.is_nilpotent() => Ok(GroupDescriptor::free_abelian(g.rank())),
        g => Err(Error::mismatch(g, "coordinate primitives need a nilpotent group")),
    }
}

fn stage_target(cur: &GroupDescriptor, p: &QiPrimitive) -> Result<GroupDescriptor> {
    match p {
        QiPrimitive::LatticeLinear { matrix } => {
            if !cur.is_nilpotent() {
                return Err(Error::mismatch(cur, "lattice_linear needs a nilpotent group"));
            }
            if matrix.is_empty() || matrix.iter().any(|r| r.len() != cur.rank()) {
                return Err(Error::Invalid(format!(
                    "lattice_linear matrix must have {} columns and at least one row",
                    cur.rank()
                )));
            }
            Ok(GroupDescriptor::free_abelian(matrix.len()))
        }
        QiPrimitive::Translate { by } => {
            cur.element(by)?;
            Ok(cur.clone())
        }
        QiPrimitive::Shear { axis, of, .. } => {
            let out = projected(cur)?;
            let d = out.rank();
            if *axis >= d || *of >= d || axis == of {
                return Err(Error::Invalid(format!("shear axes ({axis}, {of}) invalid in rank {d}")));
            }
            Ok(out)
        }
        QiPrimitive::Swap { perm } => {
            let out = projected(cur)?;
            let mut seen = vec![false; out.rank()];
            for &i in perm {
                if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Invalid(format!("swap {perm:?} is not a permutation")));
                }
            }
            if perm.len() != seen.len() {
                return Err(Error::Invalid(format!("swap {perm:?} is not a permutation")));
            }
            Ok(out)
        }
    }
}

fn apply(cur: &GroupDescriptor, p: &QiPrimitive, x: &Element) -> Result<(GroupDescriptor, Element)> {
    let next = stage_target(cur, p)?;
    let y = match p {
        QiPrimitive::LatticeLinear { matrix } => {
            let ab = cur.abelianize(x)?;
            let v = matrix
                .iter()
                .map(|row| {
                    row.iter().zip(&ab).try_fold(0i64, |acc, (&m, &a)| {
                        m.checked_mul(a).and_then(|t| acc.checked_add(t))
                    })
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Overflow("lattice_linear".into()))?;
            Element::free(&v)
        }
        QiPrimitive::Translate { by } => cur.mul(&cur.element(by)?, x)?,
        QiPrimitive::Shear { axis, of, kind } => {
            let mut v = cur.abelianize(x)?;
            v[*axis] = v[*axis]
                .checked_add(kind.apply(v[*of]))
                .ok_or_else(|| Error::Overflow("shear".into()))?;
            Element::free(&v)
        }
        QiPrimitive::Swap { perm } => {
            let v = cur.abelianize(x)?;
            Element::free(&perm.iter().map(|&i| v[i]).collect::<Vec<_>>())
        }
    };
    Ok((next, y))
}

impl CoarseMap for QiMapExpr {
    fn source(&self) -> &GroupDescriptor {
        &self.source
    }

    fn target(&self) -> &GroupDescriptor {
        &self.target
    }

    fn eval(&self, x: &Element) -> Result<Element> {
        self.source.validate(x)?;
        let mut cur = self.source.clone();
        let mut y = x.clone();
        for p in &self.pipeline {
            (cur, y) = apply(&cur, p, &y)?;
        }
        Ok(y)
    }
}

/// `Φ(from_model(n)·t_j) = from_model(Ψ(n))·t'_{j mod k'}` for a core map `Ψ`
/// between the models of two finite-index subgroups.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedMap {
    src: MarkedSubgroup,
    tgt: MarkedSubgroup,
    core: QiMapExpr,
}

impl ExtendedMap {
    pub fn new(src: MarkedSubgroup, tgt: MarkedSubgroup, core: QiMapExpr) -> Result<Self> {
        if core.source() != src.model() || core.target() != tgt.model() {
            return Err(Error::mismatch(
                core.source(),
                format!("core map {} -> {} does not match the subgroup models", core.source(), core.target()),
            ));
        }
        Ok(Self { src, tgt, core })
    }

    pub fn core(&self) -> &QiMapExpr {
        &self.core
    }

    pub fn source_subgroup(&self) -> &MarkedSubgroup {
        &self.src
    }

    pub fn target_subgroup(&self) -> &MarkedSubgroup {
        &self.tgt
    }
}

impl CoarseMap for ExtendedMap {
    fn source(&self) -> &GroupDescriptor {
        self.src.parent()
    }

    fn target(&self) -> &GroupDescriptor {
        self.tgt.parent()
    }

    fn eval(&self, x: &Element) -> Result<Element> {
        let (n, j) = self.src.coset_decompose(x)?;
        let y = self.tgt.from_model(&self.core.eval(&n)?)?;
        let t = &self.tgt.transversal()[j % self.tgt.index()];
        self.tgt.parent().mul(&y, t)
    }
}

/// Quasi-isometry constants observed on a source ball (not certified
/// beyond it).
#[derive(Clone, Debug, PartialEq)]
pub struct QiEnvelope {
    /// `max d(Ψ(x), Ψ(xs))` over the ball and the default generators.
    pub upper: u32,
    /// `min |Ψ(x)| / |x|` over nonidentity ball points.
    pub lower: Rational,
    pub radius: u32,
}

pub fn qi_envelope<M: CoarseMap + ?Sized>(psi: &M, radius: u32, target_radius: u32) -> Result<QiEnvelope> {
    let (src, tgt) = (psi.source(), psi.target());
    let s_src = src.default_generators();
    let ball = enumerate_ball(src, &s_src, radius)?;
    let tball = enumerate_ball(tgt, &tgt.default_generators(), target_radius)?;
    let len = |y: &Element| {
        tball
            .length(y)
            .ok_or_else(|| Error::Certification(format!("{y} outside the target ball of radius {target_radius}")))
    };
    let mut upper = 0;
    let mut lower: Option<Rational> = None;
    for (x, lx) in ball.elements() {
        let px = psi.eval(x)?;
        let pinv = tgt.inverse(&px)?;
        for s in s_src.elements() {
            let step = tgt.mul(&pinv, &psi.eval(&src.mul(x, s)?)?)?;
            upper = upper.max(len(&step)?);
        }
        if *lx > 0 {
            let r = Rational::new(len(&px)?.into(), (*lx).into());
            lower = Some(match lower {
                Some(l) if l <= r => l,
                _ => r,
            });
        }
    }
    Ok(QiEnvelope {
        upper,
        lower: lower.unwrap_or_else(|| Rational::from_integer(1.into())),
        radius,
    })
}
