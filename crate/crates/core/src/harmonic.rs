//! Affine harmonic functions `f(x) = c + φ([x])` and their exact checks.
//!
//! Values live in `T^k`; `k = 2` encodes complex-valued functions and any
//! finite `k` covers vector-valued targets. Norms of value vectors are
//! sup-norms.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Element, GeneratingSet, GroupDescriptor, MarkedSubgroup};
use crate::linalg::{solve, Matrix, SolveError};
use crate::measure::{drift_abelian, FiniteMeasure};
use crate::scalar::{sup_norm, Scalar};
use crate::walk::{enforce_censoring, hitting_measure, WalkConfig};

/// `f(x) = c + φ·abelianize(x)` with `c ∈ T^k` and `φ` a `k × R_G` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHarmonic<T> {
    group: GroupDescriptor,
    c: Vec<T>,
    phi: Matrix<T>,
}

impl<T: Scalar> AffineHarmonic<T> {
    pub fn new(group: GroupDescriptor, c: Vec<T>, phi: Matrix<T>) -> Result<Self> {
        if phi.rows() != c.len() || phi.cols() != group.rank() {
            return Err(Error::Invalid(format!(
                "phi must be {}x{} for values of dimension {} on {group}, got {}x{}",
                c.len(),
                group.rank(),
                c.len(),
                phi.rows(),
                phi.cols()
            )));
        }
        Ok(Self { group, c, phi })
    }

    /// Scalar-valued `c + Σ φ_i·[x]_i`.
    pub fn scalar(group: GroupDescriptor, c: T, phi: Vec<T>) -> Result<Self> {
        let cols = phi.len();
        Self::new(group, vec![c], Matrix::from_rows(vec![phi], cols))
    }

    pub fn constant(group: GroupDescriptor, c: Vec<T>) -> Self {
        let phi = Matrix::zeros(c.len(), group.rank());
        Self { group, c, phi }
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn phi(&self) -> &Matrix<T> {
        &self.phi
    }

    pub fn value_dim(&self) -> usize {
        self.c.len()
    }

    pub fn evaluate(&self, x: &Element) -> Result<Vec<T>> {
        let ab = self.group.abelianize(x)?;
        Ok(self
            .phi
            .mul_int_vec(&ab)
            .into_iter()
            .zip(&self.c)
            .map(|(v, c)| v + c.clone())
            .collect())
    }

    /// Left translate `(h·f)(x) = f(h⁻¹x)`, again affine.
    pub fn translate(&self, h: &Element) -> Result<Self> {
        let shift = self.phi.mul_int_vec(&self.group.abelianize(h)?);
        let c = self.c.iter().zip(shift).map(|(c, s)| c.clone() - s).collect();
        Ok(Self {
            group: self.group.clone(),
            c,
            phi: self.phi.clone(),
        })
    }

    /// `φ·m_ab(μ)`; harmonicity for `μ` holds iff this vanishes.
    pub fn drift_pairing(&self, mu: &FiniteMeasure) -> Result<Vec<T>> {
        let drift: Vec<T> = drift_abelian(mu)?.0.iter().map(T::from_rational).collect();
        Ok(self.phi.mul_vec(&drift))
    }

    pub fn is_constant(&self) -> bool {
        self.phi.max_abs().is_zero()
    }
}

/// Finite table of test functions, including deliberately non-harmonic ones
/// used to falsify the affine-only checks.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction<T> {
    Affine(AffineHarmonic<T>),
    /// `x ↦ ([x]_axis)²`.
    CoordinateSquare { group: GroupDescriptor, axis: usize },
}

impl<T: Scalar> TestFunction<T> {
    pub fn group(&self) -> &GroupDescriptor {
        match self {
            TestFunction::Affine(f) => f.group(),
            TestFunction::CoordinateSquare { group, .. } => group,
        }
    }

    pub fn evaluate(&self, x: &Element) -> Result<Vec<T>> {
        match self {
            TestFunction::Affine(f) => f.evaluate(x),
            TestFunction::CoordinateSquare { group, axis } => {
                let ab = group.abelianize(x)?;
                let v = *ab
                    .get(*axis)
                    .ok_or_else(|| Error::Invalid(format!("axis {axis} out of range for {group}")))?;
                Ok(vec![T::from_i64(v) * T::from_i64(v)])
            }
        }
    }
}

/// Residuals `Σ μ(g) f(kg) − f(k)` at each probed point.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicityReport<T> {
    pub residuals: Vec<(Element, Vec<T>)>,
    pub max_abs: T,
}

pub fn verify_harmonic<T: Scalar>(
    f: &AffineHarmonic<T>,
    mu: &FiniteMeasure,
    points: &[Element],
) -> Result<HarmonicityReport<T>> {
    if f.group() != mu.group() {
        return Err(Error::mismatch(f.group(), "measure lives on a different group"));
    }
    let g = f.group();
    let weights: Vec<(Element, T)> = mu
        .support()
        .iter()
        .map(|(x, w)| (x.clone(), T::from_rational(w)))
        .collect();
    let mut residuals = Vec::with_capacity(points.len());
    let mut max_abs = T::zero();
    for k in points {
        let mut acc = f.evaluate(k)?.into_iter().map(|v| -v).collect::<Vec<_>>();
        for (step, w) in &weights {
            let v = f.evaluate(&g.mul(k, step)?)?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a = a.clone() + w.clone() * x;
            }
        }
        max_abs = max_abs.max_of(sup_norm(&acc));
        residuals.push((k.clone(), acc));
    }
    Ok(HarmonicityReport { residuals, max_abs })
}

/// Closed-form and ball-enumerated values of `‖∇_S f‖_∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport<T> {
    /// `max_{s∈S} ‖φ([s])‖`.
    pub exact: T,
    /// `sup_{|x| ≤ radius, s ∈ S} ‖f(xs) − f(x)‖`.
    pub empirical: T,
    /// Empirical value for every radius `0..=radius`.
    pub per_radius: Vec<T>,
    pub radius: u32,
}

pub fn lipschitz_seminorm<T: Scalar>(
    f: &AffineHarmonic<T>,
    gens: &GeneratingSet,
    radius: u32,
) -> Result<LipschitzReport<T>> {
    if radius == 0 {
        return Err(Error::Invalid("radius must be at least 1".into()));
    }
    let g = f.group();
    let mut exact = T::zero();
    for s in gens.elements() {
        exact = exact.max_of(sup_norm(&f.phi.mul_int_vec(&g.abelianize(s)?)));
    }
    let ball = enumerate_ball(g, gens, radius)?;
    let mut per_radius = vec![T::zero(); radius as usize + 1];
    for (x, len) in ball.elements() {
        let fx = f.evaluate(x)?;
        for s in gens.elements() {
            let fxs = f.evaluate(&g.mul(x, s)?)?;
            let diff: Vec<T> = fxs.into_iter().zip(&fx).map(|(a, b)| a - b.clone()).collect();
            let slot = &mut per_radius[*len as usize];
            *slot = slot.clone().max_of(sup_norm(&diff));
        }
    }
    for r in 1..per_radius.len() {
        per_radius[r] = per_radius[r].clone().max_of(per_radius[r - 1].clone());
    }
    Ok(LipschitzReport {
        exact,
        empirical: per_radius[radius as usize].clone(),
        per_radius,
        radius,
    })
}

/// Recovers `φ` from the values of `f` on `S ∪ {e}` by an exact linear
/// solve of `φ·[s] = f(s) − f(e)`.
pub fn theta_gradient<T: Scalar>(
    values: &BTreeMap<Element, Vec<T>>,
    group: &GroupDescriptor,
    gens: &GeneratingSet,
) -> Result<Matrix<T>> {
    let id = group.identity();
    let fe = values
        .get(&id)
        .ok_or_else(|| Error::Invalid("missing value at the identity".into()))?;
    let k = fe.len();
    let r = group.rank();
    let mut a_rows = Vec::with_capacity(gens.len());
    let mut b_rows = Vec::with_capacity(gens.len());
    for s in gens.elements() {
        let fs = values
            .get(s)
            .ok_or_else(|| Error::Invalid(format!("missing value at generator {s}")))?;
        if fs.len() != k {
            return Err(Error::Invalid(format!("value at {s} has dimension {}, expected {k}", fs.len())));
        }
        a_rows.push(group.abelianize(s)?);
        b_rows.push(fs.iter().zip(fe).map(|(a, b)| a.clone() - b.clone()).collect());
    }
    let a = Matrix::<T>::from_i64_rows(&a_rows, r);
    let b = Matrix::from_rows(b_rows, k);
    match solve(&a, &b) {
        Ok(x) => Ok(x.transpose()),
        Err(SolveError::Inconsistent { .. }) => Err(Error::Inconsistent),
        Err(SolveError::RankDeficient { rank, missing }) => Err(Error::RankDeficient {
            rank,
            missing: missing
                .iter()
                .map(|v| format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
                .collect::<Vec<_>>()
                .join(" "),
        }),
    }
}

/// `sup_{|x| ≤ r} ‖(g·f − f)(x) − (g·f − f)(e)‖` over the default word ball.
pub fn translate_defect<T: Scalar>(f: &TestFunction<T>, g: &Element, r: u32) -> Result<T> {
    let group = f.group();
    let ginv = group.inverse(g)?;
    let diff = |x: &Element| -> Result<Vec<T>> {
        let a = f.evaluate(&group.mul(&ginv, x)?)?;
        let b = f.evaluate(x)?;
        Ok(a.into_iter().zip(b).map(|(a, b)| a - b).collect())
    };
    let at_e = diff(&group.identity())?;
    let ball = enumerate_ball(group, &group.default_generators(), r)?;
    let mut sup = T::zero();
    for x in ball.iter() {
        let d: Vec<T> = diff(x)?.into_iter().zip(&at_e).map(|(a, b)| a - b.clone()).collect();
        sup = sup.max_of(sup_norm(&d));
    }
    Ok(sup)
}

/// Restriction to `H`, expressed on the model group: `(c, φ·ι_ab)`.
pub fn restrict_affine<T: Scalar>(f: &AffineHarmonic<T>, sub: &MarkedSubgroup) -> Result<AffineHarmonic<T>> {
    if f.group() != sub.parent() {
        return Err(Error::mismatch(f.group(), "subgroup has a different parent"));
    }
    let inc = Matrix::<T>::from_i64_rows(sub.inclusion_ab(), sub.model().rank());
    AffineHarmonic::new(sub.model().clone(), f.c.clone(), f.phi.mul(&inc))
}

/// `‖f(gⁿ) − f(e)‖` for `n = 1..=n_max`.
pub fn liouville_growth<T: Scalar>(f: &AffineHarmonic<T>, g: &Element, n_max: u32) -> Result<Vec<T>> {
    if n_max == 0 {
        return Err(Error::Invalid("n_max must be at least 1".into()));
    }
    let group = f.group();
    let fe = f.evaluate(&group.identity())?;
    (1..=n_max as i64)
        .map(|n| {
            let v = f.evaluate(&group.pow(g, n)?)?;
            let d: Vec<T> = v.into_iter().zip(&fe).map(|(a, b)| a - b.clone()).collect();
            Ok(sup_norm(&d))
        })
        .collect()
}

/// Whether the hitting measure on the nilpotent core is centered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delta {
    Zero,
    One,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Exact(usize),
    Between(usize, usize),
}

/// `dim HF₁ = R + 1 − δ(μ_N)` together with the evidence used for `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hf1Report {
    /// Rank of the core's Abelianization.
    pub rank: usize,
    /// Rank of the ambient group's Abelianization (may be smaller).
    pub ambient_rank: usize,
    pub delta: Delta,
    pub dim: Dimension,
    /// Drift of `μ_N` in core coordinates (exact value when `exact`).
    pub drift: Vec<f64>,
    pub drift_stderr: Vec<f64>,
    pub exact: bool,
    pub samples: u64,
    pub censored: u64,
}

/// Sigma thresholds for accepting / rejecting a centered hitting drift.
pub const ACCEPT_SIGMA: f64 = 3.0;
pub const REJECT_SIGMA: f64 = 5.0;

/// Dimension of the degree-1 harmonic functions for `cfg.measure`.
///
/// When `core` is the whole group the drift is decided exactly; otherwise the
/// hitting measure on the core is sampled and each drift coordinate is
/// classified with the 3σ/5σ rule.
pub fn dim_hf1(core: &MarkedSubgroup, cfg: &WalkConfig) -> Result<Hf1Report> {
    let mu = &cfg.measure;
    if mu.group() != core.parent() {
        return Err(Error::mismatch(mu.group(), "core subgroup has a different parent"));
    }
    let rank = core.model().rank();
    let ambient_rank = core.parent().rank();
    let finish = |delta: Delta| match delta {
        Delta::Zero => Dimension::Exact(rank + 1),
        Delta::One => Dimension::Exact(rank),
        Delta::Inconclusive => Dimension::Between(rank, rank + 1),
    };
    if core.index() == 1 {
        let drift = drift_abelian(mu)?;
        let delta = if drift.is_zero() { Delta::Zero } else { Delta::One };
        return Ok(Hf1Report {
            rank,
            ambient_rank,
            delta,
            dim: finish(delta),
            drift: drift.0.iter().map(|q| q.as_f64()).collect(),
            drift_stderr: vec![0.0; rank],
            exact: true,
            samples: 0,
            censored: 0,
        });
    }
    let emp = hitting_measure(core, cfg)?;
    enforce_censoring(emp.censored, emp.total)?;
    let (mean, se) = emp.drift(core.model())?;
    let delta = classify_drift(&mean, &se);
    Ok(Hf1Report {
        rank,
        ambient_rank,
        delta,
        dim: finish(delta),
        drift: mean,
        drift_stderr: se,
        exact: false,
        samples: emp.total,
        censored: emp.censored,
    })
}

/// 3σ accept / 5σ reject / otherwise inconclusive.
pub fn classify_drift(mean: &[f64], stderr: &[f64]) -> Delta {
    let z = |m: f64, s: f64| {
        if s > 0.0 {
            m.abs() / s
        } else if m == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let zs: Vec<f64> = mean.iter().zip(stderr).map(|(&m, &s)| z(m, s)).collect();
    if zs.iter().any(|&v| v > REJECT_SIGMA) {
        Delta::One
    } else if zs.iter().all(|&v| v <= ACCEPT_SIGMA) {
        Delta::Zero
    } else {
        Delta::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use num_traits::Zero;

    fn z2() -> GroupDescriptor {
        GroupDescriptor::free_abelian(2)
    }

    fn q(n: i64) -> Rational {
        ratio(n, 1)
    }

    fn srw(g: &GroupDescriptor) -> FiniteMeasure {
        FiniteMeasure::simple_random_walk(g.clone(), &g.default_generators()).unwrap()
    }

    #[test]
    fn coordinate_function_is_harmonic_for_plane_walk() {
        let f = AffineHarmonic::scalar(z2(), q(0), vec![q(1), q(0)]).unwrap();
        let pts: Vec<Element> = enumerate_ball(&z2(), &z2().default_generators(), 3).unwrap().iter().cloned().collect();
        let rep = verify_harmonic(&f, &srw(&z2()), &pts).unwrap();
        assert!(rep.max_abs.is_zero());
    }

    #[test]
    fn biased_walk_leaves_constant_residual() {
        let z = GroupDescriptor::free_abelian(1);
        let mu = FiniteMeasure::new(
            z.clone(),
            vec![(Element::free(&[1]), ratio(2, 3)), (Element::free(&[-1]), ratio(1, 3))],
        )
        .unwrap();
        let f = AffineHarmonic::scalar(z, q(0), vec![q(1)]).unwrap();
        let pts: Vec<Element> = (-5..=5).map(|n| Element::free(&[n])).collect();
        let rep = verify_harmonic(&f, &mu, &pts).unwrap();
        assert!(rep.residuals.iter().all(|(_, r)| r == &vec![ratio(1, 3)]));
        assert_eq!(f.drift_pairing(&mu).unwrap(), vec![ratio(1, 3)]);
    }

    #[test]
    fn heisenberg_first_coordinate_is_harmonic() {
        let h = GroupDescriptor::Heisenberg3;
        let f = AffineHarmonic::scalar(h.clone(), q(0), vec![q(1), q(0)]).unwrap();
        let pts = vec![Element::heisenberg(3, -2, 7), Element::heisenberg(0, 0, 1)];
        assert!(verify_harmonic(&f, &srw(&h), &pts).unwrap().max_abs.is_zero());
    }

    #[test]
    fn seminorm_examples() {
        let s = z2().default_generators();
        let f = AffineHarmonic::scalar(z2(), q(0), vec![q(1), q(0)]).unwrap();
        let rep = lipschitz_seminorm(&f, &s, 2).unwrap();
        assert_eq!((rep.exact.clone(), rep.empirical.clone()), (q(1), q(1)));
        let f = AffineHarmonic::scalar(z2(), q(5), vec![q(3), q(-4)]).unwrap();
        assert_eq!(lipschitz_seminorm(&f, &s, 3).unwrap().exact, q(4));
        let f = AffineHarmonic::constant(z2(), vec![q(7)]);
        let rep = lipschitz_seminorm(&f, &s, 1).unwrap();
        assert!(rep.exact.is_zero() && rep.empirical.is_zero());
    }

    #[test]
    fn theta_reconstructs_the_functional() {
        let s = z2().default_generators();
        let f = AffineHarmonic::scalar(z2(), q(0), vec![q(1), q(0)]).unwrap();
        let mut values = BTreeMap::new();
        values.insert(z2().identity(), f.evaluate(&z2().identity()).unwrap());
        for g in s.elements() {
            values.insert(g.clone(), f.evaluate(g).unwrap());
        }
        assert_eq!(theta_gradient(&values, &z2(), &s).unwrap(), f.phi().clone());
    }

    #[test]
    fn theta_rejects_square_function() {
        let s = z2().default_generators();
        let sq = TestFunction::<Rational>::CoordinateSquare { group: z2(), axis: 0 };
        let mut values = BTreeMap::new();
        values.insert(z2().identity(), sq.evaluate(&z2().identity()).unwrap());
        for g in s.elements() {
            values.insert(g.clone(), sq.evaluate(g).unwrap());
        }
        assert_eq!(theta_gradient(&values, &z2(), &s), Err(Error::Inconsistent));
    }

    #[test]
    fn theta_reports_missing_directions() {
        let z = z2();
        let s = GeneratingSet::new(&z, vec![Element::free(&[1, 0]), Element::free(&[-1, 0])], None).unwrap();
        let mut values = BTreeMap::new();
        values.insert(z.identity(), vec![q(0)]);
        values.insert(Element::free(&[1, 0]), vec![q(1)]);
        values.insert(Element::free(&[-1, 0]), vec![q(-1)]);
        match theta_gradient(&values, &z, &s) {
            Err(Error::RankDeficient { rank, missing }) => {
                assert_eq!(rank, 1);
                assert_eq!(missing, "(0,1)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn translation_defect_vanishes_only_for_affine_inputs() {
        let f = TestFunction::Affine(AffineHarmonic::scalar(z2(), q(2), vec![q(3), q(-1)]).unwrap());
        assert!(translate_defect(&f, &Element::free(&[4, 1]), 4).unwrap().is_zero());
        assert!(translate_defect(&f, &z2().identity(), 4).unwrap().is_zero());
        let sq = TestFunction::<Rational>::CoordinateSquare { group: z2(), axis: 0 };
        assert!(translate_defect(&sq, &Element::free(&[1, 0]), 4).unwrap() > q(0));
    }

    #[test]
    fn restriction_examples() {
        let z = GroupDescriptor::free_abelian(1);
        let two = MarkedSubgroup::scaled(1, 0, 2).unwrap();
        let f = AffineHarmonic::scalar(z.clone(), q(0), vec![q(1)]).unwrap();
        let r = restrict_affine(&f, &two).unwrap();
        assert_eq!(r.evaluate(&Element::free(&[1])).unwrap(), vec![q(2)]);

        let c = AffineHarmonic::constant(z, vec![q(4)]);
        assert_eq!(restrict_affine(&c, &two).unwrap().c(), &[q(4)]);

        let d = GroupDescriptor::DihedralInfinite;
        let f = AffineHarmonic::constant(d, vec![q(3)]);
        let r = restrict_affine(&f, &MarkedSubgroup::rotation()).unwrap();
        assert!(r.is_constant());
        assert_eq!(r.phi().cols(), 1);
    }

    #[test]
    fn growth_examples() {
        let f = AffineHarmonic::scalar(z2(), q(0), vec![q(1), q(0)]).unwrap();
        assert_eq!(liouville_growth(&f, &Element::free(&[1, 0]), 3).unwrap(), vec![q(1), q(2), q(3)]);
        assert_eq!(liouville_growth(&f, &Element::free(&[1, 1]), 2).unwrap(), vec![q(1), q(2)]);
        let h = GroupDescriptor::Heisenberg3;
        let f = AffineHarmonic::scalar(h, q(0), vec![q(1), q(0)]).unwrap();
        let seq = liouville_growth(&f, &Element::heisenberg(0, 0, 1), 5).unwrap();
        assert!(seq.iter().all(Zero::is_zero));
    }

    #[test]
    fn complex_values_use_two_components() {
        // f = x₁ + i·x₂ on ℤ²
        let phi = Matrix::from_rows(vec![vec![q(1), q(0)], vec![q(0), q(1)]], 2);
        let f = AffineHarmonic::new(z2(), vec![q(0), q(0)], phi).unwrap();
        let rep = lipschitz_seminorm(&f, &z2().default_generators(), 2).unwrap();
        assert_eq!(rep.exact, q(1));
        assert!(AffineHarmonic::new(z2(), vec![q(0)], Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn translate_is_left_translation() {
        let f = AffineHarmonic::scalar(z2(), q(1), vec![q(2), q(5)]).unwrap();
        let h = Element::free(&[1, -1]);
        let hf = f.translate(&h).unwrap();
        let x = Element::free(&[4, 2]);
        let hinv_x = z2().mul(&z2().inverse(&h).unwrap(), &x).unwrap();
        assert_eq!(hf.evaluate(&x).unwrap(), f.evaluate(&hinv_x).unwrap());
    }

    #[test]
    fn drift_classification() {
        assert_eq!(classify_drift(&[0.001], &[0.01]), Delta::Zero);
        assert_eq!(classify_drift(&[0.1], &[0.01]), Delta::One);
        assert_eq!(classify_drift(&[0.04], &[0.01]), Delta::Inconclusive);
        assert_eq!(classify_drift(&[0.0], &[0.0]), Delta::Zero);
        assert_eq!(classify_drift(&[], &[]), Delta::Zero);
    }

    #[test]
    fn exact_dimension_on_nilpotent_groups() {
        let z = GroupDescriptor::free_abelian(1);
        let cfg = WalkConfig::new(srw(&z), 1, 1);
        let rep = dim_hf1(&MarkedSubgroup::whole(z.clone()), &cfg).unwrap();
        assert_eq!((rep.rank, rep.delta, rep.dim), (1, Delta::Zero, Dimension::Exact(2)));
        let biased = FiniteMeasure::new(
            z.clone(),
            vec![(Element::free(&[1]), ratio(2, 3)), (Element::free(&[-1]), ratio(1, 3))],
        )
        .unwrap();
        let rep = dim_hf1(&MarkedSubgroup::whole(z), &WalkConfig::new(biased, 1, 1)).unwrap();
        assert_eq!((rep.delta, rep.dim), (Delta::One, Dimension::Exact(1)));
    }
}
