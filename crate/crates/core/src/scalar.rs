//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Exact routines (harmonicity residuals, seminorm identities, homogenization
//! certificates) run over [`Rational`]; the same code runs over `f64`/`f32`
//! when only approximate values are needed.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Shorthand constructor for a rational `num / den`.
///
/// Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Field-like scalar used for function values, matrices and estimates.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static {
    /// `true` when arithmetic is exact (comparisons against zero are meaningful).
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    /// Used for tolerances; exact types convert the binary value exactly.
    fn from_float(v: f64) -> Self;
    fn as_f64(&self) -> f64;

    /// Absolute threshold below which a value counts as zero in eliminations.
    fn tolerance() -> Self;

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    /// Larger of two values (first wins ties).
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn from_float(v: f64) -> Self {
        v
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn from_rational(q: &Rational) -> Self {
        ToPrimitive::to_f32(q).unwrap_or(f32::NAN)
    }

    fn from_float(v: f64) -> Self {
        v as f32
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }

    fn tolerance() -> Self {
        1e-4
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_float(v: f64) -> Self {
        <Rational as FromPrimitive>::from_f64(v).unwrap_or_else(Rational::zero)
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Sup-norm of a vector of scalars (zero for the empty vector).
pub fn sup_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max_of(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trips_through_f64_tolerances() {
        let tol = <Rational as Scalar>::from_float(0.5);
        assert_eq!(tol, ratio(1, 2));
        assert!(<Rational as Scalar>::tolerance().is_zero());
        assert!(ratio(0, 3).is_negligible());
        assert!(!ratio(1, 1_000_000_000).is_negligible());
    }

    #[test]
    fn float_tolerance_is_absolute() {
        assert!(1e-12f64.is_negligible());
        assert!(!1e-6f64.is_negligible());
    }

    #[test]
    fn sup_norm_picks_largest_magnitude() {
        let v = vec![ratio(1, 3), ratio(-4, 1), ratio(2, 1)];
        assert_eq!(sup_norm(&v), ratio(4, 1));
        assert_eq!(sup_norm::<f64>(&[]), 0.0);
    }
}
