use rayon::prelude::*;

use super::defect::{abelian_defect, DefectOptions, DefectWitness};
use super::linearize::Linearization;
use super::qi::CoarseMap;
use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Element, GroupDescriptor, MarkedSubgroup};
use crate::linalg::Matrix;
use crate::scalar::{sup_norm, Scalar};

/// Coordinates `x ↦ (φ_i([x]))_i`, optionally read through the coset
/// projection onto a finite-index subgroup.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicCoordinates<T> {
    group: GroupDescriptor,
    /// Rows are the functionals `φ_i` on the (model) Abelianization.
    basis: Matrix<T>,
    subgroup: Option<MarkedSubgroup>,
}

impl<T: Scalar> HarmonicCoordinates<T> {
    pub fn core(group: GroupDescriptor, basis: Matrix<T>) -> Result<Self> {
        check_basis(&basis, group.rank())?;
        Ok(Self {
            group,
            basis,
            subgroup: None,
        })
    }

    /// `F_G(x) = F_N(n)` where `x = n·t_j`.
    pub fn extended(sub: MarkedSubgroup, basis: Matrix<T>) -> Result<Self> {
        check_basis(&basis, sub.model().rank())?;
        Ok(Self {
            group: sub.parent().clone(),
            basis,
            subgroup: Some(sub),
        })
    }

    pub fn standard(group: GroupDescriptor) -> Result<Self> {
        let r = group.rank();
        Self::core(group, Matrix::identity(r))
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn subgroup(&self) -> Option<&MarkedSubgroup> {
        self.subgroup.as_ref()
    }

    pub fn coordinates(&self, x: &Element) -> Result<Vec<T>> {
        let ab = match &self.subgroup {
            None => self.group.abelianize(x)?,
            Some(sub) => {
                let (n, _) = sub.coset_decompose(x)?;
                sub.model().abelianize(&n)?
            }
        };
        Ok(self.basis.mul_int_vec(&ab))
    }

    /// Transported basis `ψ_i = φ_i ∘ L_ab⁻¹` (rows `P = Q·L_ab⁻¹`) on the
    /// target side of `lin`, with the same shape as `self`.
    pub fn transported(&self, lin: &Linearization<T>, target_sub: Option<MarkedSubgroup>) -> Result<Self> {
        let source = match &self.subgroup {
            None => &self.group,
            Some(sub) => sub.model(),
        };
        if source != &lin.source {
            return Err(Error::mismatch(source, "linearization has a different source"));
        }
        let p = self.basis.mul(&lin.l_inverse());
        match target_sub {
            None => Self::core(lin.target.clone(), p),
            Some(sub) if sub.model() == &lin.target => Self::extended(sub, p),
            Some(sub) => Err(Error::mismatch(sub.model(), "target subgroup model differs from the linearization target")),
        }
    }
}

fn check_basis<T: Scalar>(basis: &Matrix<T>, r: usize) -> Result<()> {
    if basis.rows() != r || basis.cols() != r || basis.inverse().is_none() {
        return Err(Error::Invalid(format!("coordinate basis must be an invertible {r}x{r} matrix")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport<T> {
    pub sup_dev: T,
    pub argmax: Element,
    pub points: usize,
}

/// `sup_{|x| ≤ radius} ‖F_tgt(Ψ(x)) − F_src(x)‖`.
pub fn straightening_deviation<T: Scalar, M: CoarseMap + ?Sized>(
    psi: &M,
    f_src: &HarmonicCoordinates<T>,
    f_tgt: &HarmonicCoordinates<T>,
    radius: u32,
) -> Result<DeviationReport<T>> {
    if f_src.group() != psi.source() || f_tgt.group() != psi.target() {
        return Err(Error::mismatch(psi.source(), "coordinates do not match the map's groups"));
    }
    let src = psi.source();
    let ball = enumerate_ball(src, &src.default_generators(), radius)?;
    let devs: Vec<T> = ball
        .elements()
        .par_iter()
        .map(|(x, _)| {
            let a = f_tgt.coordinates(&psi.eval(x)?)?;
            let b = f_src.coordinates(x)?;
            Ok(sup_norm(&a.into_iter().zip(b).map(|(a, b)| a - b).collect::<Vec<_>>()))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, d) in devs.iter().enumerate() {
        if *d > devs[best] {
            best = i;
        }
    }
    Ok(DeviationReport {
        sup_dev: devs[best].clone(),
        argmax: ball.elements()[best].0.clone(),
        points: devs.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseAffineReport<T> {
    /// `sup ‖A(x) − (L·[x] + v₀)‖` over the ball.
    pub c_hat: T,
    /// `3·c_hat + ‖v₀‖`.
    pub implied_bound: T,
    /// Largest defect over pairs with `x, y, xy` in the ball.
    pub measured_defect: i64,
    pub witness: Option<DefectWitness>,
    pub exhaustive: bool,
    pub holds: bool,
}

pub fn check_coarsely_affine<T: Scalar, M: CoarseMap + ?Sized>(
    psi: &M,
    l: &Matrix<T>,
    v0: &[T],
    radius: u32,
    pair_budget: u64,
    seed: u64,
) -> Result<CoarseAffineReport<T>> {
    let (src, tgt) = (psi.source(), psi.target());
    if l.rows() != tgt.rank() || l.cols() != src.rank() || v0.len() != tgt.rank() {
        return Err(Error::Invalid(format!(
            "L must be {}x{} and v0 of length {}",
            tgt.rank(),
            src.rank(),
            tgt.rank()
        )));
    }
    let ball = enumerate_ball(src, &src.default_generators(), radius)?;
    let mut c_hat = T::zero();
    for x in ball.iter() {
        let ax = tgt.abelianize(&psi.eval(x)?)?;
        let lx = l.mul_int_vec(&src.abelianize(x)?);
        let diff: Vec<T> = ax
            .iter()
            .zip(lx)
            .zip(v0)
            .map(|((&a, b), v)| T::from_i64(a) - b - v.clone())
            .collect();
        c_hat = c_hat.max_of(sup_norm(&diff));
    }
    let implied_bound = T::from_i64(3) * c_hat.clone() + sup_norm(v0);
    let mut opts = DefectOptions::ball(radius);
    opts.pair_budget = pair_budget;
    opts.seed = seed;
    opts.product_in_probe = true;
    let rep = abelian_defect(psi, &opts)?;
    Ok(CoarseAffineReport {
        holds: T::from_i64(rep.max_defect) <= implied_bound,
        c_hat,
        implied_bound,
        measured_defect: rep.max_defect,
        witness: rep.witness,
        exhaustive: rep.exhaustive,
    })
}
