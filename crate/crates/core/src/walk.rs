//! Right random walks `X_{t+1} = X_t·ξ_{t+1}`, hitting times of finite-index
//! subgroups, Monte Carlo induction and the induction constants.
//!
//! Every sample draws from its own ChaCha stream derived from
//! `(seed, cell, sample index)`, and aggregation runs in index order, so
//! results do not depend on the rayon schedule.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, word_length, Element, GeneratingSet, GroupDescriptor, MarkedSubgroup};
use crate::harmonic::AffineHarmonic;
use crate::measure::{FiniteMeasure, Sampler};
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_MAX_STEPS: u64 = 10_000;
/// Censored fraction above which a result is flagged.
pub const CENSOR_WARN: f64 = 0.001;
/// Censored fraction above which a run fails.
pub const CENSOR_FAIL: f64 = 0.01;

/// RNG cells; each operation draws from its own family of streams.
pub const CELL_HITTING: u64 = 1;
pub const CELL_INDUCE: u64 = 2;
pub const CELL_TAU: u64 = 16;
const MAX_SAMPLE_INDEX: u64 = 1 << 40;
const RETRY_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub measure: FiniteMeasure,
    pub max_steps: u64,
    pub seed: u64,
    pub n_samples: u64,
}

impl WalkConfig {
    pub fn new(measure: FiniteMeasure, seed: u64, n_samples: u64) -> Self {
        Self {
            measure,
            max_steps: DEFAULT_MAX_STEPS,
            seed,
            n_samples,
        }
    }

    pub fn with_samples(&self, n_samples: u64) -> Self {
        Self {
            n_samples,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Invalid("max_steps must be at least 1".into()));
        }
        if self.n_samples == 0 || self.n_samples >= MAX_SAMPLE_INDEX {
            return Err(Error::Invalid(format!(
                "n_samples must lie in 1..2^40, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }
}

/// RNG for sample `index` of `cell`.
pub fn stream_rng(seed: u64, cell: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((cell << 40) | index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitMode {
    /// First `t ≥ 0` with `X_t ∈ H`.
    Tau,
    /// First `t ≥ 1` with `X_t ∈ H`.
    TauPlus,
}

/// One stopped walk. `None` means censored at `max_steps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSample {
    pub tau: Option<u64>,
    /// Landing point in model coordinates of `H`.
    pub landing: Option<Element>,
}

impl HittingSample {
    pub fn is_censored(&self) -> bool {
        self.tau.is_none()
    }
}

pub fn simulate_hit<R: rand::Rng + ?Sized>(
    start: &Element,
    sub: &MarkedSubgroup,
    cfg: &WalkConfig,
    mode: HitMode,
    rng: &mut R,
) -> Result<HittingSample> {
    check_pair(sub, cfg)?;
    sub.parent().validate(start)?;
    run_hit(start, sub, &cfg.measure.sampler(), cfg.max_steps, mode, rng)
}

fn run_hit<R: rand::Rng + ?Sized>(
    start: &Element,
    sub: &MarkedSubgroup,
    sampler: &Sampler,
    max_steps: u64,
    mode: HitMode,
    rng: &mut R,
) -> Result<HittingSample> {
    let g = sub.parent();
    if mode == HitMode::Tau && sub.label(start)? == 0 {
        return Ok(HittingSample {
            tau: Some(0),
            landing: Some(sub.to_model(start)?),
        });
    }
    let mut x = start.clone();
    for t in 1..=max_steps {
        x = g.mul(&x, sampler.sample(rng))?;
        if sub.label(&x)? == 0 {
            return Ok(HittingSample {
                tau: Some(t),
                landing: Some(sub.to_model(&x)?),
            });
        }
    }
    Ok(HittingSample { tau: None, landing: None })
}

fn check_pair(sub: &MarkedSubgroup, cfg: &WalkConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.measure.group() != sub.parent() {
        return Err(Error::mismatch(cfg.measure.group(), "subgroup has a different parent"));
    }
    Ok(())
}

fn run_batch(
    start: &Element,
    sub: &MarkedSubgroup,
    cfg: &WalkConfig,
    mode: HitMode,
    cell: u64,
) -> Result<Vec<HittingSample>> {
    check_pair(sub, cfg)?;
    sub.parent().validate(start)?;
    let sampler = cfg.measure.sampler();
    (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, cell, i);
            run_hit(start, sub, &sampler, cfg.max_steps, mode, &mut rng)
        })
        .collect()
}

/// Fails when more than [`CENSOR_FAIL`] of the runs were censored.
pub fn enforce_censoring(censored: u64, total: u64) -> Result<()> {
    let fraction = if total == 0 { 0.0 } else { censored as f64 / total as f64 };
    if fraction > CENSOR_FAIL {
        return Err(Error::Censoring {
            fraction,
            limit: CENSOR_FAIL,
        });
    }
    Ok(())
}

/// Landing counts of `n` first-return walks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    pub counts: BTreeMap<Element, u64>,
    pub total: u64,
    pub censored: u64,
}

impl EmpiricalMeasure {
    pub fn from_samples(samples: &[HittingSample]) -> Self {
        let mut counts = BTreeMap::new();
        let mut censored = 0;
        for s in samples {
            match &s.landing {
                Some(y) => *counts.entry(y.clone()).or_insert(0) += 1,
                None => censored += 1,
            }
        }
        Self {
            counts,
            total: samples.len() as u64,
            censored,
        }
    }

    pub fn frequency(&self, y: &Element) -> f64 {
        self.counts.get(y).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Binomial standard error of [`Self::frequency`].
    pub fn stderr(&self, y: &Element) -> f64 {
        let p = self.frequency(y);
        (p * (1.0 - p) / self.total as f64).sqrt()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.total as f64
    }

    /// Mean Abelianized landing and its standard error, over uncensored runs.
    pub fn drift(&self, model: &GroupDescriptor) -> Result<(Vec<f64>, Vec<f64>)> {
        let r = model.rank();
        let n = self.total - self.censored;
        if n == 0 {
            return Ok((vec![f64::NAN; r], vec![f64::NAN; r]));
        }
        let mut sum = vec![0.0; r];
        let mut sq = vec![0.0; r];
        for (y, &c) in &self.counts {
            for (i, v) in model.abelianize(y)?.into_iter().enumerate() {
                let v = v as f64;
                sum[i] += c as f64 * v;
                sq[i] += c as f64 * v * v;
            }
        }
        let nf = n as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let se = mean
            .iter()
            .zip(&sq)
            .map(|(m, s)| {
                let var = if n > 1 { (s - nf * m * m).max(0.0) / (nf - 1.0) } else { 0.0 };
                (var / nf).sqrt()
            })
            .collect();
        Ok((mean, se))
    }
}

/// Empirical law of the first return to `H` from the identity.
pub fn hitting_measure(sub: &MarkedSubgroup, cfg: &WalkConfig) -> Result<EmpiricalMeasure> {
    let id = sub.parent().identity();
    let samples = run_batch(&id, sub, cfg, HitMode::TauPlus, CELL_HITTING)?;
    Ok(EmpiricalMeasure::from_samples(&samples))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellEstimate {
    pub start: Element,
    pub mean: f64,
    pub stderr: f64,
    pub censored: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauEstimate {
    pub t_hat: f64,
    pub stderr: f64,
    /// Transversal index of the maximizing start.
    pub argmax: usize,
    pub cells: Vec<CellEstimate>,
    pub censored: u64,
    pub total: u64,
    pub censoring_warning: bool,
}

/// `max_j E_{t_j}[τ]` over the transversal, estimated from uncensored runs.
pub fn estimate_t(sub: &MarkedSubgroup, cfg: &WalkConfig) -> Result<TauEstimate> {
    let mut cells = Vec::with_capacity(sub.index());
    let (mut censored, mut total) = (0, 0);
    for (j, t) in sub.transversal().iter().enumerate() {
        let samples = run_batch(t, sub, cfg, HitMode::Tau, CELL_TAU + j as u64)?;
        let taus: Vec<f64> = samples.iter().filter_map(|s| s.tau.map(|v| v as f64)).collect();
        let c = samples.len() as u64 - taus.len() as u64;
        let (mean, stderr) = mean_stderr(&taus);
        censored += c;
        total += samples.len() as u64;
        cells.push(CellEstimate {
            start: t.clone(),
            mean,
            stderr,
            censored: c,
        });
    }
    let argmax = (0..cells.len())
        .max_by(|&a, &b| cells[a].mean.total_cmp(&cells[b].mean).then(b.cmp(&a)))
        .unwrap_or(0);
    Ok(TauEstimate {
        t_hat: cells[argmax].mean,
        stderr: cells[argmax].stderr,
        argmax,
        cells,
        censored,
        total,
        censoring_warning: censored as f64 > CENSOR_WARN * total as f64,
    })
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo value of `E_x[f(X_τ)]` (one entry per value component).
#[derive(Clone, Debug, PartialEq)]
pub struct InducedValue {
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `true` when `x ∈ H` and the value was read off directly.
    pub exact: bool,
    pub used: u64,
    pub censored: u64,
    pub censoring_warning: bool,
    /// Censored fraction times the largest observed `‖f‖` at landings.
    pub bias_bound: f64,
}

impl InducedValue {
    /// Scalar accessor for one-dimensional values.
    pub fn scalar(&self) -> (f64, f64) {
        (self.value[0], self.stderr[0])
    }
}

/// `E_x[f(X_τ)]` for an arbitrary function on the model group of `H`.
pub fn induce_with<F>(f: F, x: &Element, sub: &MarkedSubgroup, cfg: &WalkConfig) -> Result<InducedValue>
where
    F: Fn(&Element) -> Result<Vec<f64>> + Sync,
{
    check_pair(sub, cfg)?;
    sub.parent().validate(x)?;
    if sub.label(x)? == 0 {
        let value = f(&sub.to_model(x)?)?;
        let k = value.len();
        return Ok(InducedValue {
            value,
            stderr: vec![0.0; k],
            exact: true,
            used: 0,
            censored: 0,
            censoring_warning: false,
            bias_bound: 0.0,
        });
    }
    let samples = run_batch(x, sub, cfg, HitMode::Tau, CELL_INDUCE)?;
    let values: Vec<Option<Vec<f64>>> = samples
        .par_iter()
        .map(|s| s.landing.as_ref().map(&f).transpose())
        .collect::<Result<_>>()?;
    let kept: Vec<&Vec<f64>> = values.iter().flatten().collect();
    let censored = (values.len() - kept.len()) as u64;
    let k = kept.first().map_or(0, |v| v.len());
    let mut value = Vec::with_capacity(k);
    let mut stderr = Vec::with_capacity(k);
    for i in 0..k {
        let col: Vec<f64> = kept.iter().map(|v| v[i]).collect();
        let (m, s) = mean_stderr(&col);
        value.push(m);
        stderr.push(s);
    }
    let sup = kept
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let fraction = censored as f64 / cfg.n_samples as f64;
    Ok(InducedValue {
        value,
        stderr,
        exact: false,
        used: kept.len() as u64,
        censored,
        censoring_warning: fraction > CENSOR_WARN,
        bias_bound: fraction * sup,
    })
}

pub fn induce_harmonic<T: Scalar>(
    f_h: &AffineHarmonic<T>,
    x: &Element,
    sub: &MarkedSubgroup,
    cfg: &WalkConfig,
) -> Result<InducedValue> {
    if f_h.group() != sub.model() {
        return Err(Error::mismatch(f_h.group(), "function must live on the subgroup's model"));
    }
    induce_with(
        |y| Ok(f_h.evaluate(y)?.iter().map(Scalar::as_f64).collect()),
        x,
        sub,
        cfg,
    )
}

/// Constants entering `‖∇_{S_G} Ind f‖ ≤ C_*·‖∇_{S_H} f‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct InductionConstants {
    /// Upper envelope of `|h|_{S_H} / |h|_{S_G}` over the certification ball.
    pub a: Rational,
    pub a_radius: u32,
    pub d: u32,
    pub m1: Rational,
    pub t_hat: f64,
    pub t_stderr: f64,
    pub c_star: f64,
    pub c_hg: u32,
    pub censoring_warning: bool,
}

impl InductionConstants {
    pub fn formula(a: &Rational, d: u32, m1: &Rational, t: f64) -> f64 {
        a.as_f64() * ((4 * d + 1) as f64 + 2.0 * m1.as_f64() * t)
    }
}

pub fn induction_constants(
    sub: &MarkedSubgroup,
    s_g: &GeneratingSet,
    s_h: &GeneratingSet,
    cfg: &WalkConfig,
    cert_radius: u32,
) -> Result<InductionConstants> {
    check_pair(sub, cfg)?;
    if cert_radius == 0 {
        return Err(Error::Invalid("certification radius must be at least 1".into()));
    }
    let g = sub.parent();
    for s in s_h.elements() {
        sub.model().validate(s)?;
    }
    let len_g = |x: &Element, cap: u32| -> Result<u32> {
        word_length(g, x, s_g, cap)?
            .ok_or_else(|| Error::Certification(format!("{x} not reached within word length {cap}")))
    };

    let mut c_hg = 0;
    for s in s_h.elements() {
        c_hg = c_hg.max(len_g(&sub.from_model(s)?, 64)?);
    }
    let mut d = 0;
    for t in sub.transversal() {
        d = d.max(len_g(t, 64)?);
    }
    let mut m1 = Rational::zero();
    for (x, w) in cfg.measure.support() {
        m1 += w * Rational::from_integer(len_g(x, 64)?.into());
    }

    let h_ball = enumerate_ball(sub.model(), s_h, cert_radius)?;
    let g_ball = enumerate_ball(g, s_g, cert_radius * c_hg)?;
    let mut a = Rational::zero();
    for (h, lh) in h_ball.elements() {
        if *lh == 0 {
            continue;
        }
        let x = sub.from_model(h)?;
        let lg = g_ball
            .length(&x)
            .ok_or_else(|| Error::Certification(format!("{x} outside the comparison ball")))?;
        a = a.max(Rational::new((*lh).into(), lg.into()));
    }

    let t = estimate_t(sub, cfg)?;
    enforce_censoring(t.censored, t.total)?;
    Ok(InductionConstants {
        c_star: InductionConstants::formula(&a, d, &m1, t.t_hat),
        a,
        a_radius: cert_radius,
        d,
        m1,
        t_hat: t.t_hat,
        t_stderr: t.stderr,
        c_hg,
        censoring_warning: t.censoring_warning,
    })
}

/// Largest induced increment `‖Ind f(xs) − Ind f(x)‖` over a word ball.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzSweep {
    pub max_increment: f64,
    /// Combined stderr at the maximizing pair.
    pub stderr: f64,
    /// Largest value of `increment − 6·stderr` over all pairs.
    pub max_excess: f64,
    pub witness: (Element, Element),
    pub pairs: usize,
}

pub fn induced_lipschitz_sweep<T: Scalar>(
    f_h: &AffineHarmonic<T>,
    sub: &MarkedSubgroup,
    s_g: &GeneratingSet,
    radius: u32,
    cfg: &WalkConfig,
) -> Result<LipschitzSweep> {
    let g = sub.parent();
    let ball = enumerate_ball(g, s_g, radius + 1)?;
    let mut values: HashMap<Element, InducedValue> = HashMap::with_capacity(ball.len());
    for x in ball.iter() {
        values.insert(x.clone(), induce_harmonic(f_h, x, sub, cfg)?);
    }
    let mut best = LipschitzSweep {
        max_increment: 0.0,
        stderr: 0.0,
        max_excess: f64::NEG_INFINITY,
        witness: (g.identity(), g.identity()),
        pairs: 0,
    };
    for (x, _) in ball.within(radius) {
        let vx = &values[x];
        for s in s_g.elements() {
            let vy = &values[&g.mul(x, s)?];
            for i in 0..vx.value.len() {
                let inc = (vy.value[i] - vx.value[i]).abs();
                let se = vx.stderr[i].hypot(vy.stderr[i]);
                best.max_excess = best.max_excess.max(inc - 6.0 * se);
                if inc > best.max_increment {
                    best.max_increment = inc;
                    best.stderr = se;
                    best.witness = (x.clone(), s.clone());
                }
            }
            best.pairs += 1;
        }
    }
    Ok(best)
}

/// Runs a statistical check; on a miss reruns once with four times the
/// samples on a fresh seed. Returns the final outcome and whether it retried.
pub fn retry_once<R>(cfg: &WalkConfig, run: impl Fn(&WalkConfig) -> Result<(R, bool)>) -> Result<(R, bool, bool)> {
    let (r, ok) = run(cfg)?;
    if ok {
        return Ok((r, true, false));
    }
    let mut again = cfg.with_samples(cfg.n_samples.saturating_mul(4));
    again.seed ^= RETRY_SALT;
    let (r, ok) = run(&again)?;
    Ok((r, ok, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn z() -> GroupDescriptor {
        GroupDescriptor::free_abelian(1)
    }

    fn srw_z() -> FiniteMeasure {
        FiniteMeasure::simple_random_walk(z(), &z().default_generators()).unwrap()
    }

    fn two_z() -> MarkedSubgroup {
        MarkedSubgroup::scaled(1, 0, 2).unwrap()
    }

    fn dinf(weights: [(i64, i64); 3]) -> FiniteMeasure {
        let d = GroupDescriptor::DihedralInfinite;
        FiniteMeasure::new(
            d,
            vec![
                (Element::dihedral(1, false), ratio(weights[0].0, weights[0].1)),
                (Element::dihedral(-1, false), ratio(weights[1].0, weights[1].1)),
                (Element::dihedral(0, true), ratio(weights[2].0, weights[2].1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn start_in_subgroup_stops_immediately() {
        let cfg = WalkConfig::new(srw_z(), 3, 1);
        let mut rng = stream_rng(3, 0, 0);
        let s = simulate_hit(&Element::free(&[4]), &two_z(), &cfg, HitMode::Tau, &mut rng).unwrap();
        assert_eq!(s.tau, Some(0));
        assert_eq!(s.landing, Some(Element::free(&[2])));
    }

    #[test]
    fn parity_forces_return_time_two() {
        let cfg = WalkConfig::new(srw_z(), 5, 1);
        for i in 0..200 {
            let mut rng = stream_rng(5, 0, i);
            let s = simulate_hit(&z().identity(), &two_z(), &cfg, HitMode::TauPlus, &mut rng).unwrap();
            assert_eq!(s.tau, Some(2));
        }
    }

    #[test]
    fn censoring_is_a_value() {
        // index 2 subgroup but the walk only moves by even steps from an odd start
        let mu = FiniteMeasure::point_mass(z(), Element::free(&[2])).unwrap();
        let mut cfg = WalkConfig::new(mu, 1, 1);
        cfg.max_steps = 5;
        let mut rng = stream_rng(1, 0, 0);
        let s = simulate_hit(&Element::free(&[1]), &two_z(), &cfg, HitMode::Tau, &mut rng).unwrap();
        assert!(s.is_censored() && s.landing.is_none());
        assert!(enforce_censoring(2, 100).is_err());
        assert!(enforce_censoring(1, 100).is_ok());
    }

    #[test]
    fn hitting_measure_accounts_for_every_run() {
        let cfg = WalkConfig::new(srw_z(), 11, 20_000);
        let emp = hitting_measure(&two_z(), &cfg).unwrap();
        assert_eq!(emp.counts.values().sum::<u64>() + emp.censored, emp.total);
        for (k, p) in [(-1, 0.25), (0, 0.5), (1, 0.25)] {
            let y = Element::free(&[k]);
            assert!((emp.frequency(&y) - p).abs() <= 4.0 * emp.stderr(&y).max(1e-3));
        }
    }

    #[test]
    fn whole_group_hitting_measure_is_the_step_law() {
        let cfg = WalkConfig::new(srw_z(), 2, 10_000);
        let emp = hitting_measure(&MarkedSubgroup::whole(z()), &cfg).unwrap();
        assert_eq!(emp.counts.len(), 2);
        let f = emp.frequency(&Element::free(&[1]));
        assert!((f - 0.5).abs() < 0.03);
    }

    #[test]
    fn same_seed_same_measure() {
        let cfg = WalkConfig::new(dinf([(1, 2), (1, 4), (1, 4)]), 99, 5_000);
        let a = hitting_measure(&MarkedSubgroup::rotation(), &cfg).unwrap();
        let b = hitting_measure(&MarkedSubgroup::rotation(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tau_from_flip_is_geometric() {
        let cfg = WalkConfig::new(dinf([(1, 3), (1, 3), (1, 3)]), 7, 40_000);
        let t = estimate_t(&MarkedSubgroup::rotation(), &cfg).unwrap();
        assert_eq!(t.argmax, 1);
        assert_eq!(t.cells[0].mean, 0.0);
        assert!((t.t_hat - 3.0).abs() < 4.0 * t.stderr + 0.01);
        assert!(!t.censoring_warning);
    }

    #[test]
    fn tau_estimates_for_parity() {
        let cfg = WalkConfig::new(srw_z(), 1, 1_000);
        let t = estimate_t(&two_z(), &cfg).unwrap();
        assert_eq!((t.t_hat, t.stderr), (1.0, 0.0));
        let t = estimate_t(&MarkedSubgroup::whole(z()), &cfg).unwrap();
        assert_eq!(t.t_hat, 0.0);
    }

    #[test]
    fn constants_induce_to_constants() {
        let cfg = WalkConfig::new(srw_z(), 4, 500);
        let f = AffineHarmonic::constant(z(), vec![ratio(7, 2)]);
        for x in -3..=3 {
            let v = induce_harmonic(&f, &Element::free(&[x]), &two_z(), &cfg).unwrap();
            assert_eq!(v.value, vec![3.5]);
        }
    }

    #[test]
    fn induction_matches_optional_stopping() {
        let cfg = WalkConfig::new(srw_z(), 8, 20_000);
        let f = AffineHarmonic::scalar(z(), ratio(0, 1), vec![ratio(2, 1)]).unwrap();
        let v = induce_harmonic(&f, &Element::free(&[1]), &two_z(), &cfg).unwrap();
        let (m, se) = v.scalar();
        assert!((m - 1.0).abs() <= 3.0 * se, "{m} ± {se}");
        let v = induce_harmonic(&f, &Element::free(&[4]), &two_z(), &cfg).unwrap();
        assert!(v.exact && v.value == vec![4.0]);
    }

    #[test]
    fn constants_for_even_integers() {
        let cfg = WalkConfig::new(srw_z(), 6, 2_000);
        let s_h = GeneratingSet::new(&z(), vec![Element::free(&[1]), Element::free(&[-1])], None).unwrap();
        let c = induction_constants(&two_z(), &z().default_generators(), &s_h, &cfg, 8).unwrap();
        assert_eq!((c.a.clone(), c.d, c.m1.clone(), c.c_hg), (ratio(1, 2), 1, ratio(1, 1), 2));
        assert_eq!(c.t_hat, 1.0);
        assert!((c.c_star - 3.5).abs() < 1e-12);
    }

    #[test]
    fn constants_for_trivial_pair() {
        let cfg = WalkConfig::new(srw_z(), 6, 100);
        let s = z().default_generators();
        let c = induction_constants(&MarkedSubgroup::whole(z()), &s, &s, &cfg, 5).unwrap();
        assert_eq!((c.c_hg, c.d, c.t_hat, c.c_star), (1, 0, 0.0, 1.0));
    }

    #[test]
    fn constants_for_rotation_subgroup() {
        let d = GroupDescriptor::DihedralInfinite;
        let cfg = WalkConfig::new(dinf([(1, 3), (1, 3), (1, 3)]), 6, 100);
        let s_n = GeneratingSet::new(&z(), vec![Element::free(&[1]), Element::free(&[-1])], None).unwrap();
        let c = induction_constants(&MarkedSubgroup::rotation(), &d.default_generators(), &s_n, &cfg, 5).unwrap();
        assert_eq!((c.c_hg, c.d), (1, 1));
    }

    #[test]
    fn retry_reruns_with_more_samples() {
        let cfg = WalkConfig::new(srw_z(), 1, 10);
        let (n, ok, retried) = retry_once(&cfg, |c| Ok((c.n_samples, c.n_samples > 10))).unwrap();
        assert_eq!((n, ok, retried), (40, true, true));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = WalkConfig::new(srw_z(), 1, 0);
        assert!(hitting_measure(&two_z(), &cfg).is_err());
        cfg.n_samples = 1;
        cfg.max_steps = 0;
        assert!(hitting_measure(&two_z(), &cfg).is_err());
        let cfg = WalkConfig::new(srw_z(), 1, 1);
        assert!(hitting_measure(&MarkedSubgroup::rotation(), &cfg).is_err());
    }
}
