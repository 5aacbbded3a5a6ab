//! The twelve acceptance criteria as runnable checks (`check-all`).

use std::time::Instant;

use harmonic_groups_core::group::enumerate_ball;
use harmonic_groups_core::harmonic::{
    dim_hf1, lipschitz_seminorm, liouville_growth, verify_harmonic, AffineHarmonic, Delta, Dimension,
};
use harmonic_groups_core::linalg::Matrix;
use harmonic_groups_core::straighten::{
    abelian_defect, check_coarsely_affine, defect_at, doubling_sequence, extract_linearization, homogenize,
    straightening_deviation, CoarseMap, DefectOptions, HarmonicCoordinates, LinearizeOptions, QiMapExpr,
    QiPrimitive, ShearKind,
};
use harmonic_groups_core::walk::{
    hitting_measure, induce_harmonic, induced_lipschitz_sweep, induction_constants, retry_once, stream_rng,
    WalkConfig,
};
use harmonic_groups_core::{
    ratio, Element, FiniteMeasure, GroupDescriptor, MarkedSubgroup, Rational, Result, Scalar,
};
use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::json;

use crate::report::{digest, join, CheckStatus, Outcome, Table};

/// Stream cell for drawing random test functions.
const CELL_PHI: u64 = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Digest of the CSV a stochastic criterion produced.
    pub digest: Option<String>,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<34} {}  ({:.2}s of {}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

struct Partial {
    passed: bool,
    detail: String,
    digest: Option<String>,
}

fn timed(id: u32, name: &'static str, limit: f64, f: impl FnOnce() -> Result<Partial>) -> Criterion {
    let start = Instant::now();
    let r = f();
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail, digest) = match r {
        Ok(p) => (p.passed && seconds < limit, p.detail, p.digest),
        Err(e) => (false, format!("error: {e}"), None),
    };
    Criterion {
        id,
        name,
        passed,
        detail,
        digest,
        seconds,
        limit_seconds: limit,
    }
}

fn z(d: usize) -> GroupDescriptor {
    GroupDescriptor::free_abelian(d)
}

fn srw(g: &GroupDescriptor) -> Result<FiniteMeasure> {
    FiniteMeasure::simple_random_walk(g.clone(), &g.default_generators())
}

fn biased_z() -> Result<FiniteMeasure> {
    FiniteMeasure::new(z(1), vec![(Element::free(&[1]), ratio(2, 3)), (Element::free(&[-1]), ratio(1, 3))])
}

pub fn dihedral_measure() -> Result<FiniteMeasure> {
    FiniteMeasure::new(
        GroupDescriptor::DihedralInfinite,
        vec![
            (Element::dihedral(1, false), ratio(1, 2)),
            (Element::dihedral(-1, false), ratio(1, 4)),
            (Element::dihedral(0, true), ratio(1, 4)),
        ],
    )
}

/// Random scalar characters with entries `p/q`, `|p| ≤ 9`, `1 ≤ q ≤ 6`.
pub fn random_phis(group: &GroupDescriptor, count: usize, seed: u64, nonzero: bool) -> Vec<AffineHarmonic<Rational>> {
    let mut rng = stream_rng(seed, CELL_PHI, group.rank() as u64);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let phi: Vec<Rational> = (0..group.rank())
            .map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=6)))
            .collect();
        if nonzero && phi.iter().all(Zero::is_zero) {
            continue;
        }
        let c = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=6));
        out.push(AffineHarmonic::scalar(group.clone(), c, phi).expect("rank matches"));
    }
    out
}

/// The first `n` points of the smallest default-generator ball holding `n`.
pub fn ball_points(group: &GroupDescriptor, n: usize) -> Result<Vec<Element>> {
    let gens = group.default_generators();
    let mut r = 1;
    loop {
        let ball = enumerate_ball(group, &gens, r)?;
        if ball.len() >= n {
            return Ok(ball.iter().take(n).cloned().collect());
        }
        r += 1;
    }
}

fn ac1(seed: u64) -> Criterion {
    timed(1, "exact affine harmonicity", 5.0, || {
        let mut worst = Rational::zero();
        let mut n = 0;
        for g in [z(2), GroupDescriptor::Heisenberg3, z(1)] {
            let mu = srw(&g)?;
            let pts = ball_points(&g, 50)?;
            for f in random_phis(&g, 100, seed, false) {
                worst = worst.max(verify_harmonic(&f, &mu, &pts)?.max_abs);
                n += pts.len();
            }
        }
        Ok(Partial {
            passed: worst.is_zero(),
            detail: format!("max residual {worst} over {n} evaluations"),
            digest: None,
        })
    })
}

fn ac2() -> Criterion {
    timed(2, "drift obstruction", 1.0, || {
        let f = AffineHarmonic::scalar(z(1), ratio(0, 1), vec![ratio(1, 1)])?;
        let pts: Vec<Element> = (-10..=10).map(|k| Element::free(&[k])).collect();
        let rep = verify_harmonic(&f, &biased_z()?, &pts)?;
        let ok = rep.residuals.iter().all(|(_, r)| r == &[ratio(1, 3)]);
        Ok(Partial {
            passed: ok,
            detail: format!("residual {} at all {} points: {ok}", ratio(1, 3), pts.len()),
            digest: None,
        })
    })
}

fn ac3(seed: u64) -> Criterion {
    timed(3, "seminorm identity", 30.0, || {
        let mut ok = true;
        let mut n = 0;
        for g in [z(2), GroupDescriptor::Heisenberg3] {
            let gens = g.default_generators();
            for f in random_phis(&g, 100, seed, false) {
                let rep = lipschitz_seminorm(&f, &gens, 6)?;
                ok &= rep.per_radius[1..].iter().all(|v| *v == rep.exact);
                n += 1;
            }
        }
        Ok(Partial {
            passed: ok,
            detail: format!("empirical equals exact at radii 1..6 for {n} characters: {ok}"),
            digest: None,
        })
    })
}

fn hitting_table(sub: &MarkedSubgroup, cfg: &WalkConfig) -> Result<(Table, Vec<(i64, f64)>)> {
    let emp = hitting_measure(sub, cfg)?;
    let mut t = Table::new(&["landing", "count", "frequency"]);
    let mut freqs = Vec::new();
    for (m, c) in &emp.counts {
        let g = sub.from_model(m)?;
        t.push(vec![g.to_string(), c.to_string(), emp.frequency(m).to_string()]);
        freqs.push((g.coords()[0], emp.frequency(m)));
    }
    t.push(vec!["censored".into(), emp.censored.to_string(), emp.censored_fraction().to_string()]);
    Ok((t, freqs))
}

fn ac4(seed: u64) -> Criterion {
    timed(4, "hitting measure", 60.0, || {
        let sub = MarkedSubgroup::scaled(1, 0, 2)?;
        let cases = [
            (srw(&z(1))?, [(-2, 0.25), (0, 0.5), (2, 0.25)]),
            (biased_z()?, [(-2, 1.0 / 9.0), (0, 4.0 / 9.0), (2, 4.0 / 9.0)]),
        ];
        let mut ok = true;
        let mut worst: f64 = 0.0;
        let mut csv = Vec::new();
        for (mu, expected) in cases {
            let (t, freqs) = hitting_table(&sub, &WalkConfig::new(mu, seed, 1_000_000))?;
            csv.extend(t.to_csv());
            ok &= freqs.len() == expected.len();
            for (x, p) in expected {
                let got = freqs.iter().find(|(y, _)| *y == x).map_or(0.0, |(_, f)| *f);
                worst = worst.max((got - p).abs());
            }
        }
        ok &= worst <= 0.005;
        Ok(Partial {
            passed: ok,
            detail: format!("max atom error {worst:.5} (tolerance 0.005)"),
            digest: Some(digest(&csv)),
        })
    })
}

fn ac5(seed: u64) -> Criterion {
    timed(5, "induction-restriction", 120.0, || {
        let sub = MarkedSubgroup::scaled(1, 0, 2)?;
        let f_h = AffineHarmonic::scalar(z(1), ratio(0, 1), vec![ratio(2, 1)])?;
        let cfg = WalkConfig::new(srw(&z(1))?, seed, 100_000);
        let mut t = Table::new(&["x", "value", "stderr"]);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for x in -5..=5i64 {
            let (v, hit, _) = retry_once(&cfg, |c| {
                let v = induce_harmonic(&f_h, &Element::free(&[x]), &sub, c)?;
                let (m, s) = v.scalar();
                let hit = (m - x as f64).abs() <= 3.0 * s || (v.exact && m == x as f64);
                Ok((v, hit))
            })?;
            let (m, s) = v.scalar();
            worst = worst.max(if s > 0.0 { (m - x as f64).abs() / s } else { 0.0 });
            ok &= hit;
            t.push(vec![x.to_string(), m.to_string(), s.to_string()]);
        }
        Ok(Partial {
            passed: ok,
            detail: format!("largest deviation {worst:.2} stderr"),
            digest: Some(digest(&t.to_csv())),
        })
    })
}

fn ac6(seed: u64) -> Criterion {
    timed(6, "induction constants", 60.0, || {
        let sub = MarkedSubgroup::scaled(1, 0, 2)?;
        let s_g = z(1).default_generators();
        let s_h = sub.model().default_generators();
        let cfg = WalkConfig::new(srw(&z(1))?, seed, 10_000);
        let c = induction_constants(&sub, &s_g, &s_h, &cfg, 8)?;
        let exact = c.a == ratio(1, 2) && c.d == 1 && c.m1 == ratio(1, 1) && c.c_hg == 2;
        let t_ok = (c.t_hat - 1.0).abs() <= 0.01;
        let f_h = AffineHarmonic::scalar(sub.model().clone(), ratio(0, 1), vec![ratio(2, 1)])?;
        let l_h = lipschitz_seminorm(&f_h, &s_h, 1)?.exact;
        let sweep = induced_lipschitz_sweep(&f_h, &sub, &s_g, 20, &cfg)?;
        let lip_ok = sweep.max_excess <= c.c_star * l_h.as_f64();
        let mut t = Table::new(&["A", "D", "m1", "C_HG", "T_hat", "C_star", "max_increment"]);
        t.push(vec![
            c.a.to_string(),
            c.d.to_string(),
            c.m1.to_string(),
            c.c_hg.to_string(),
            c.t_hat.to_string(),
            c.c_star.to_string(),
            sweep.max_increment.to_string(),
        ]);
        Ok(Partial {
            passed: exact && t_ok && lip_ok,
            detail: format!(
                "A={} D={} m1={} C_HG={} T_hat={} C_star={}; max induced increment {} vs C_star·L_H = {}",
                c.a,
                c.d,
                c.m1,
                c.c_hg,
                c.t_hat,
                c.c_star,
                sweep.max_increment,
                c.c_star * l_h.as_f64()
            ),
            digest: Some(digest(&t.to_csv())),
        })
    })
}

fn ac7(seed: u64) -> Criterion {
    timed(7, "false-centering table", 300.0, || {
        let legs: Vec<(&str, FiniteMeasure, usize)> = vec![
            ("Z symmetric", srw(&z(1))?, 2),
            ("Z biased", biased_z()?, 1),
            ("Z^2 SRW", srw(&z(2))?, 3),
            ("H3 SRW", srw(&GroupDescriptor::Heisenberg3)?, 3),
            ("D_inf", dihedral_measure()?, 2),
        ];
        let mut ok = true;
        let mut parts = Vec::new();
        let mut t = Table::new(&["leg", "dim", "delta", "drift", "stderr"]);
        for (name, mu, want) in legs {
            let core = mu.group().nilpotent_core();
            let cfg = WalkConfig::new(mu, seed, 100_000);
            let (rep, hit, _) = retry_once(&cfg, |c| {
                let r = dim_hf1(&core, c)?;
                let hit = r.dim == Dimension::Exact(want) && r.delta != Delta::Inconclusive;
                Ok((r, hit))
            })?;
            let dim = match rep.dim {
                Dimension::Exact(d) => d.to_string(),
                Dimension::Between(a, b) => format!("{a}..{b}"),
            };
            ok &= hit;
            if name == "D_inf" {
                ok &= rep.delta == Delta::Zero;
            }
            parts.push(format!("{name}: {dim}"));
            t.push(vec![name.into(), dim, format!("{:?}", rep.delta), join(&rep.drift), join(&rep.drift_stderr)]);
        }
        Ok(Partial {
            passed: ok,
            detail: parts.join(", "),
            digest: Some(digest(&t.to_csv())),
        })
    })
}

fn ac8(seed: u64) -> Criterion {
    timed(8, "sublinear Liouville", 5.0, || {
        let mut ok = true;
        for g in [z(2), GroupDescriptor::Heisenberg3] {
            let gens = g.default_generators();
            for f in random_phis(&g, 20, seed, true) {
                let mut linear = false;
                for s in gens.elements() {
                    let seq = liouville_growth(&f, s, 10)?;
                    let slope = seq[0].clone();
                    linear |= slope.is_positive()
                        && seq.iter().enumerate().all(|(i, v)| *v == &slope * ratio(i as i64 + 1, 1));
                }
                ok &= linear;
            }
            let zero = AffineHarmonic::scalar(g.clone(), ratio(3, 1), vec![ratio(0, 1); g.rank()])?;
            for s in gens.elements() {
                ok &= liouville_growth(&zero, s, 10)?.iter().all(Zero::is_zero);
            }
        }
        Ok(Partial {
            passed: ok,
            detail: format!("every nonzero character grows linearly along a generator, zero stays flat: {ok}"),
            digest: None,
        })
    })
}

pub fn sqrt_shear() -> Result<QiMapExpr> {
    QiMapExpr::new(
        z(2),
        vec![QiPrimitive::Shear {
            axis: 1,
            of: 0,
            kind: ShearKind::SqrtFloor,
        }],
    )
}

pub fn mod2_shear() -> Result<QiMapExpr> {
    QiMapExpr::new(
        z(2),
        vec![QiPrimitive::Shear {
            axis: 1,
            of: 0,
            kind: ShearKind::Mod2,
        }],
    )
}

fn ac9(seed: u64) -> Criterion {
    timed(9, "counterexample defect growth", 60.0, || {
        let psi = sqrt_shear()?;
        let mut ok = true;
        let mut parts = Vec::new();
        for n in [100u32, 1000, 10_000] {
            let mut opts = DefectOptions::rays(n);
            opts.seed = seed;
            let rep = abelian_defect(&psi, &opts)?;
            let floor = 0.5 * (n as f64).sqrt();
            ok &= rep.max_defect as f64 >= floor;
            if let Some(w) = &rep.witness {
                ok &= defect_at(&psi, &w.x, &w.y)? == w.delta;
                ok &= w.delta.iter().map(|v| v.abs()).max() == Some(rep.max_defect);
            }
            parts.push(format!("N={n}: {} >= {floor:.1}", rep.max_defect));
        }
        let p = Element::free(&[100, 0]);
        let d = defect_at(&psi, &p, &p)?;
        ok &= d == vec![0, -6];
        parts.push(format!("g(200)-2g(100) = {}", d[1]));
        Ok(Partial {
            passed: ok,
            detail: parts.join(", "),
            digest: None,
        })
    })
}

/// `a(n) = n + (n mod 2)` on `ℤ`, a quasimorphism of defect 2.
pub fn mod2_quasimorphism(x: &Element) -> Result<Rational> {
    let n = x.coords()[0];
    Ok(ratio(n + n.rem_euclid(2), 1))
}

fn ac10() -> Criterion {
    timed(10, "homogenization certificate", 1.0, || {
        let one = Element::free(&[1]);
        let d = ratio(2, 1);
        let seq = doubling_sequence(mod2_quasimorphism, &z(1), &one, 21)?;
        let cauchy = (0..=20).all(|k| (&seq[k + 1] - &seq[k]).abs() <= &d / ratio(1 << (k + 1), 1));
        let h = homogenize(mod2_quasimorphism, &z(1), &one, 40, d, ratio(0, 1))?;
        let settled = h.value == ratio(1, 1) && h.k_used == 1 && seq[1] == ratio(1, 1);
        Ok(Partial {
            passed: cauchy && settled,
            detail: format!("Cauchy bound for k <= 20: {cauchy}; a_1 = {}, k_used = {}", seq[1], h.k_used),
            digest: None,
        })
    })
}

struct Straightened {
    l_ab: Matrix<Rational>,
    residual: Rational,
    pl_q: Rational,
    deviation: Rational,
}

fn straighten_core<M: CoarseMap>(psi: &M, radius: u32) -> Result<Straightened> {
    let lin = extract_linearization::<Rational, _>(psi, &LinearizeOptions::default())?;
    let f = HarmonicCoordinates::standard(psi.source().clone())?;
    let g = f.transported(&lin, None)?;
    let pl_q = g.basis().mul(&lin.l_ab).sub(f.basis()).max_abs();
    let deviation = straightening_deviation(psi, &f, &g, radius)?.sup_dev;
    Ok(Straightened {
        l_ab: lin.l_ab,
        residual: lin.residual_bound,
        pl_q,
        deviation,
    })
}

fn ac11(seed: u64) -> Criterion {
    timed(11, "linearization and straightening", 60.0, || {
        let psi = mod2_shear()?;
        let s = straighten_core(&psi, 100)?;
        let mut ok = s.l_ab == Matrix::identity(2)
            && s.residual <= ratio(1, 1)
            && s.pl_q.as_f64() <= 1e-9
            && s.deviation <= ratio(1, 1);
        let mut parts = vec![format!(
            "mod2-shear: residual {}, |PL-Q| {}, deviation {}",
            s.residual, s.pl_q, s.deviation
        )];
        for m in [vec![vec![2, 1], vec![1, 1]], vec![vec![0, -1], vec![1, 0]], vec![vec![1, 3], vec![0, 1]]] {
            let lin = QiMapExpr::new(z(2), vec![QiPrimitive::LatticeLinear { matrix: m.clone() }])?;
            let s = straighten_core(&lin, 30)?;
            ok &= s.l_ab == Matrix::from_i64_rows(&m, 2) && s.residual.is_zero() && s.pl_q.is_zero() && s.deviation.is_zero();
        }
        let aff = check_coarsely_affine(&psi, &Matrix::<Rational>::identity(2), &[ratio(0, 1), ratio(0, 1)], 20, 1_000_000, seed)?;
        ok &= aff.implied_bound == ratio(3, 1) && aff.measured_defect == 2 && aff.holds;
        parts.push(format!("implied bound {} vs measured defect {}", aff.implied_bound, aff.measured_defect));
        Ok(Partial {
            passed: ok,
            detail: parts.join("; "),
            digest: None,
        })
    })
}

fn ac12(seed: u64, first: &[&Criterion]) -> Criterion {
    timed(12, "reproducibility", f64::INFINITY, || {
        let again = [ac4(seed), ac5(seed), ac6(seed), ac7(seed)];
        let mut ok = true;
        let mut parts = Vec::new();
        for (a, b) in first.iter().zip(&again) {
            let same = a.digest.is_some() && a.digest == b.digest;
            ok &= same;
            parts.push(format!("{}: {}", a.id, if same { "identical" } else { "differs" }));
        }
        Ok(Partial {
            passed: ok,
            detail: parts.join(", "),
            digest: None,
        })
    })
}

pub fn check_all(seed: u64) -> Vec<Criterion> {
    let c4 = ac4(seed);
    let c5 = ac5(seed);
    let c6 = ac6(seed);
    let c7 = ac7(seed);
    let c12 = ac12(seed, &[&c4, &c5, &c6, &c7]);
    vec![ac1(seed), ac2(), ac3(seed), c4, c5, c6, c7, ac8(seed), ac9(seed), ac10(), ac11(seed), c12]
}

pub fn check_all_outcome(seed: u64) -> Outcome {
    let all = check_all(seed);
    let mut t = Table::new(&["criterion", "name", "passed", "detail"]);
    for c in &all {
        t.push(vec![c.id.to_string(), c.name.into(), c.passed.to_string(), c.detail.clone()]);
    }
    let seconds: Vec<f64> = all.iter().map(|c| c.seconds).collect();
    let failed: Vec<u32> = all.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let mut out = Outcome::new(
        t,
        json!({ "passed": all.len() - failed.len(), "failed": failed, "seconds": seconds }),
    );
    out.check = Some(CheckStatus {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            "all criteria passed".into()
        } else {
            format!("failed criteria: {failed:?}")
        },
    });
    out
}
