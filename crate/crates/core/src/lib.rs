//! Random walks and Lipschitz harmonic functions on finitely generated
//! groups of polynomial growth.
//!
//! Numeric routines are generic over [`Scalar`]; the aliases below fix the
//! scalar to exact rationals (`Q`) or floats.

pub mod error;
pub mod group;
pub mod harmonic;
pub mod linalg;
pub mod measure;
pub mod scalar;
pub mod straighten;
pub mod walk;

pub use error::{Error, Result};
pub use group::{Element, GeneratingSet, GroupDescriptor, MarkedSubgroup};
pub use measure::FiniteMeasure;
pub use scalar::{ratio, Rational, Scalar};

pub type MatrixQ = linalg::Matrix<Rational>;
pub type MatrixF64 = linalg::Matrix<f64>;

pub type AffineHarmonicQ = harmonic::AffineHarmonic<Rational>;
pub type AffineHarmonicF64 = harmonic::AffineHarmonic<f64>;
pub type AffineHarmonicF32 = harmonic::AffineHarmonic<f32>;

pub type LinearizationQ = straighten::Linearization<Rational>;
pub type LinearizationF64 = straighten::Linearization<f64>;

pub type HarmonicCoordinatesQ = straighten::HarmonicCoordinates<Rational>;
pub type HarmonicCoordinatesF64 = straighten::HarmonicCoordinates<f64>;
