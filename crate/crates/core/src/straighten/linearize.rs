use super::defect::{abelian_defect, DefectOptions};
use super::homogenize::{homogenize, DEFAULT_K_MAX, DEFAULT_TOLERANCE};
use super::qi::CoarseMap;
use crate::error::{Error, Result};
use crate::group::{enumerate_ball, GroupDescriptor};
use crate::linalg::Matrix;
use crate::scalar::{sup_norm, Scalar};

/// Rejects maps whose ray defect keeps growing: fails when
/// `d(large) > factor·d(small) + additive`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceGate {
    pub small: u32,
    pub large: u32,
    pub factor: f64,
    pub additive: i64,
}

impl Default for DivergenceGate {
    fn default() -> Self {
        Self {
            small: 4,
            large: 64,
            factor: 1.5,
            additive: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearizeOptions {
    pub k_max: u32,
    pub tolerance: f64,
    pub gate: DivergenceGate,
    /// Source ball radius for `residual_bound`.
    pub residual_radius: u32,
}

impl Default for LinearizeOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            tolerance: DEFAULT_TOLERANCE,
            gate: DivergenceGate::default(),
            residual_radius: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linearization<T> {
    pub source: GroupDescriptor,
    pub target: GroupDescriptor,
    pub l_ab: Matrix<T>,
    /// `(L_ab⁻¹)ᵀ`, acting on functionals written as column vectors.
    pub t_psi: Matrix<T>,
    /// `sup ‖A(x) − L_ab·[x]‖` over the residual ball.
    pub residual_bound: T,
    pub k_used: u32,
    pub converged: bool,
    /// Ray defect at the gate's small and large radii.
    pub gate_defects: (i64, i64),
}

impl<T: Scalar> Linearization<T> {
    /// `L_ab⁻¹`, read off from `T_psi`.
    pub fn l_inverse(&self) -> Matrix<T> {
        self.t_psi.transpose()
    }
}

/// Homogenizes `A = π_M∘Ψ` along each Abelian basis lift of the source to
/// obtain the linear part `L_ab`.
pub fn extract_linearization<T: Scalar, M: CoarseMap + ?Sized>(
    psi: &M,
    opts: &LinearizeOptions,
) -> Result<Linearization<T>> {
    let (src, tgt) = (psi.source(), psi.target());
    let gate = opts.gate;
    if gate.small == 0 || gate.large <= gate.small {
        return Err(Error::Invalid("divergence gate needs 0 < small < large".into()));
    }
    let rep = abelian_defect(psi, &DefectOptions::rays(gate.large))?;
    let (d_small, d_large) = (rep.at_radius(gate.small), rep.max_defect);
    if d_large as f64 > gate.factor * d_small as f64 + gate.additive as f64 {
        return Err(Error::Divergent(format!(
            "ray defect {d_small} at radius {} grows to {d_large} at radius {}",
            gate.small, gate.large
        )));
    }
    let r = src.rank();
    if tgt.rank() != r || r == 0 {
        return Err(Error::NotInvertible);
    }
    let d = T::from_i64(d_large);
    let tol = T::from_float(opts.tolerance);
    let mut l = Matrix::<T>::zeros(r, r);
    let (mut k_used, mut converged) = (0, true);
    for (i, lift) in src.abelian_basis_lifts().iter().enumerate() {
        for j in 0..r {
            let a = |x: &_| Ok(T::from_i64(tgt.abelianize(&psi.eval(x)?)?[j]));
            let h = homogenize(a, src, lift, opts.k_max, d.clone(), tol.clone())?;
            k_used = k_used.max(h.k_used);
            converged &= h.converged;
            l[(j, i)] = h.value;
        }
    }
    let inv = l.inverse().ok_or(Error::NotInvertible)?;

    let ball = enumerate_ball(src, &src.default_generators(), opts.residual_radius)?;
    let mut residual_bound = T::zero();
    for x in ball.iter() {
        let ax = tgt.abelianize(&psi.eval(x)?)?;
        let lx = l.mul_int_vec(&src.abelianize(x)?);
        let diff: Vec<T> = ax.iter().zip(lx).map(|(&a, b)| T::from_i64(a) - b).collect();
        residual_bound = residual_bound.max_of(sup_norm(&diff));
    }
    Ok(Linearization {
        source: src.clone(),
        target: tgt.clone(),
        t_psi: inv.transpose(),
        l_ab: l,
        residual_bound,
        k_used,
        converged,
        gate_defects: (d_small, d_large),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use crate::straighten::qi::{QiMapExpr, QiPrimitive, ShearKind};

    fn z2() -> GroupDescriptor {
        GroupDescriptor::free_abelian(2)
    }

    fn shear(kind: ShearKind) -> QiMapExpr {
        QiMapExpr::new(z2(), vec![QiPrimitive::Shear { axis: 1, of: 0, kind }]).unwrap()
    }

    #[test]
    fn mod2_shear_linearizes_to_identity() {
        let lin: Linearization<Rational> =
            extract_linearization(&shear(ShearKind::Mod2), &LinearizeOptions::default()).unwrap();
        assert_eq!(lin.l_ab, Matrix::identity(2));
        assert_eq!(lin.t_psi, Matrix::identity(2));
        assert_eq!(lin.residual_bound, ratio(1, 1));
    }

    #[test]
    fn lattice_maps_linearize_to_their_matrix() {
        let psi = QiMapExpr::new(
            z2(),
            vec![QiPrimitive::LatticeLinear { matrix: vec![vec![2, 1], vec![1, 1]] }],
        )
        .unwrap();
        let lin: Linearization<Rational> = extract_linearization(&psi, &LinearizeOptions::default()).unwrap();
        assert_eq!(lin.l_ab, Matrix::from_i64_rows(&[vec![2, 1], vec![1, 1]], 2));
        assert_eq!(lin.l_ab.mul(&lin.t_psi.transpose()), Matrix::identity(2));
        assert_eq!(lin.residual_bound, ratio(0, 1));
        assert_eq!(lin.k_used, 0);
    }

    #[test]
    fn sqrt_shear_is_gated() {
        let err = extract_linearization::<f64, _>(&shear(ShearKind::SqrtFloor), &LinearizeOptions::default());
        assert!(matches!(err, Err(Error::Divergent(_))));
    }

    #[test]
    fn degenerate_maps_are_not_invertible() {
        let psi = QiMapExpr::new(
            z2(),
            vec![QiPrimitive::LatticeLinear { matrix: vec![vec![1, 1], vec![1, 1]] }],
        )
        .unwrap();
        let err = extract_linearization::<Rational, _>(&psi, &LinearizeOptions::default());
        assert_eq!(err.unwrap_err(), Error::NotInvertible);
        let psi = QiMapExpr::new(z2(), vec![QiPrimitive::LatticeLinear { matrix: vec![vec![1, 0]] }]).unwrap();
        assert_eq!(
            extract_linearization::<Rational, _>(&psi, &LinearizeOptions::default()).unwrap_err(),
            Error::NotInvertible
        );
    }

    #[test]
    fn heisenberg_source_projects() {
        let psi = QiMapExpr::new(
            GroupDescriptor::Heisenberg3,
            vec![QiPrimitive::Shear { axis: 0, of: 1, kind: ShearKind::Mod2 }],
        )
        .unwrap();
        let lin: Linearization<f64> = extract_linearization(&psi, &LinearizeOptions::default()).unwrap();
        assert_eq!(lin.l_ab, Matrix::identity(2));
    }
}
