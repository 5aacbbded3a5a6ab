use crate::error::{Error, Result};
use crate::group::{Element, GroupDescriptor};
use crate::scalar::Scalar;

pub const DEFAULT_K_MAX: u32 = 40;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_DOUBLINGS: u32 = 62;

#[derive(Clone, Debug, PartialEq)]
pub struct Homogenized<T> {
    pub value: T,
    /// `D / 2^k_used`.
    pub error_bound: T,
    pub k_used: u32,
    /// `a_0, a_1, …` as far as they were computed.
    pub sequence: Vec<T>,
    pub converged: bool,
}

fn power_of_two<T: Scalar>(k: u32) -> T {
    T::from_i64(1i64 << k)
}

/// `a_k = a(x^{2^k}) / 2^k` for `k = 0..=k_max`.
pub fn doubling_sequence<T, F>(a: F, group: &GroupDescriptor, x: &Element, k_max: u32) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&Element) -> Result<T>,
{
    if k_max > MAX_DOUBLINGS {
        return Err(Error::Invalid(format!("k_max must be at most {MAX_DOUBLINGS}")));
    }
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut p = x.clone();
    for k in 0..=k_max {
        if k > 0 {
            p = group.mul(&p, &p)?;
        }
        out.push(a(&p)? / power_of_two::<T>(k));
    }
    Ok(out)
}

/// Doubling homogenization `ā(x) ≈ a(x^{2^k})/2^k`.
///
/// Stops at the first `k` for which the next two increments are both within
/// `tol`; otherwise returns `a_{k_max}`.
pub fn homogenize<T, F>(a: F, group: &GroupDescriptor, x: &Element, k_max: u32, d: T, tol: T) -> Result<Homogenized<T>>
where
    T: Scalar,
    F: Fn(&Element) -> Result<T>,
{
    if k_max == 0 || k_max > MAX_DOUBLINGS {
        return Err(Error::Invalid(format!("k_max must lie in 1..={MAX_DOUBLINGS}")));
    }
    group.validate(x)?;
    let mut seq: Vec<T> = Vec::with_capacity(4);
    let mut p = x.clone();
    seq.push(a(&p)?);
    let close = |s: &[T], k: usize| (s[k + 1].clone() - s[k].clone()).abs() <= tol;
    let mut stop = None;
    for k in 1..=k_max {
        p = group.mul(&p, &p)?;
        seq.push(a(&p)? / power_of_two::<T>(k));
        let k = k as usize;
        if k >= 2 && close(&seq, k - 2) && close(&seq, k - 1) {
            stop = Some(k - 2);
            break;
        }
    }
    let (k_used, converged) = match stop {
        Some(k) => (k as u32, true),
        None => (k_max, false),
    };
    Ok(Homogenized {
        value: seq[k_used as usize].clone(),
        error_bound: d / power_of_two::<T>(k_used),
        k_used,
        sequence: seq,
        converged,
    })
}
