//! Coarse maps between lattices, their Abelian defect, homogenization, the
//! linearization `L_ab` and coarse harmonic coordinates.

mod coords;
mod defect;
mod homogenize;
mod linearize;
mod qi;

pub use coords::{
    check_coarsely_affine, straightening_deviation, CoarseAffineReport, DeviationReport, HarmonicCoordinates,
};
pub use defect::{abelian_defect, defect_at, DefectOptions, DefectReport, Probe, EXHAUSTIVE_PAIR_LIMIT};
pub use homogenize::{doubling_sequence, homogenize, Homogenized, DEFAULT_K_MAX, DEFAULT_TOLERANCE};
pub use linearize::{extract_linearization, DivergenceGate, LinearizeOptions, Linearization};
pub use qi::{qi_envelope, CoarseMap, ExtendedMap, QiEnvelope, QiMapExpr, QiPrimitive, ShearKind};
