//! One function per subcommand; each returns a table plus a JSON summary.

use harmonic_groups_core::group::enumerate_ball;
use harmonic_groups_core::harmonic::{
    dim_hf1, lipschitz_seminorm, liouville_growth, restrict_affine, verify_harmonic, Delta, Dimension,
};
use harmonic_groups_core::linalg::Matrix;
use harmonic_groups_core::straighten::{
    abelian_defect, check_coarsely_affine, defect_at, doubling_sequence, extract_linearization, homogenize,
    straightening_deviation, CoarseMap, DefectOptions, ExtendedMap, HarmonicCoordinates, LinearizeOptions,
    Probe, QiMapExpr, DEFAULT_K_MAX, DEFAULT_TOLERANCE,
};
use harmonic_groups_core::walk::{
    estimate_t, hitting_measure, induce_harmonic, induced_lipschitz_sweep, induction_constants, retry_once,
    WalkConfig, CELL_HITTING, CELL_INDUCE, CELL_TAU,
};
use harmonic_groups_core::{Element, Error, Rational, Scalar};
use serde_json::json;

use crate::config::{self, parse_rational, ConfigError, RunConfig};
use crate::report::{join, Censoring, CheckStatus, Outcome, RngAccount, Table};
use crate::{CliError, Context, Operation};

type OpResult = Result<Outcome, CliError>;

pub fn run(op: Operation, cfg: &RunConfig, ctx: &Context) -> OpResult {
    match op {
        Operation::Verify => verify(cfg, ctx),
        Operation::Lipnorm => lipnorm(cfg, ctx),
        Operation::Dimension => dimension(cfg, ctx),
        Operation::Liouville => liouville(cfg, ctx),
        Operation::HittingMeasure => hitting(cfg, ctx),
        Operation::Induce => induce(cfg, ctx),
        Operation::Constants => constants(cfg, ctx),
        Operation::Defect => defect(cfg, ctx),
        Operation::Homogenize => match scalar_kind(cfg)? {
            ScalarKind::Exact => homogenize_as::<Rational>(cfg, ctx),
            ScalarKind::F64 => homogenize_as::<f64>(cfg, ctx),
        },
        Operation::Linearize => match scalar_kind(cfg)? {
            ScalarKind::Exact => linearize_as::<Rational>(cfg, ctx),
            ScalarKind::F64 => linearize_as::<f64>(cfg, ctx),
        },
        Operation::Straighten => match scalar_kind(cfg)? {
            ScalarKind::Exact => straighten_as::<Rational>(cfg, ctx),
            ScalarKind::F64 => straighten_as::<f64>(cfg, ctx),
        },
        Operation::CheckAll => Err(CliError::validation("check-all takes no configuration")),
    }
}

enum ScalarKind {
    Exact,
    F64,
}

fn scalar_kind(cfg: &RunConfig) -> Result<ScalarKind, CliError> {
    match cfg.params.scalar.as_deref() {
        None | Some("exact") => Ok(ScalarKind::Exact),
        Some("f64") => Ok(ScalarKind::F64),
        Some(other) => Err(ConfigError::at("/params/scalar", format!("expected \"exact\" or \"f64\", got {other:?}")).into()),
    }
}

fn check(passed: bool, detail: impl Into<String>) -> Option<CheckStatus> {
    Some(CheckStatus {
        passed,
        detail: detail.into(),
    })
}

fn walk_config(cfg: &RunConfig, seed: u64, default_samples: u64) -> Result<WalkConfig, CliError> {
    let mut w = WalkConfig::new(cfg.measure()?, seed, cfg.params.n_samples.unwrap_or(default_samples));
    if let Some(m) = cfg.params.max_steps {
        w.max_steps = m;
    }
    w.validate()?;
    Ok(w)
}

fn points_or_ball(cfg: &RunConfig, default_radius: u32) -> Result<Vec<Element>, CliError> {
    if let Some(p) = cfg.points(&cfg.group)? {
        return Ok(p);
    }
    let ball = enumerate_ball(&cfg.group, &cfg.generating_set()?, cfg.params.radius.unwrap_or(default_radius))?;
    Ok(ball.iter().cloned().collect())
}

fn verify(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let f = cfg.function_on::<Rational>(&cfg.group)?;
    let mu = cfg.measure()?;
    let pts = points_or_ball(cfg, 3)?;
    let rep = verify_harmonic(&f, &mu, &pts)?;
    let mut t = Table::new(&["point", "residual", "marker"]);
    for (x, r) in &rep.residuals {
        t.push(vec![x.to_string(), join(r), "exact".into()]);
    }
    let pairing = f.drift_pairing(&mu)?;
    let mut out = Outcome::new(
        t,
        json!({ "max_abs_residual": rep.max_abs.to_string(), "drift_pairing": join(&pairing), "points": pts.len() }),
    );
    if ctx.check {
        let ok = rep.max_abs == Rational::from_integer(0.into());
        out.check = check(ok, format!("max residual {}", rep.max_abs));
    }
    Ok(out)
}

fn lipnorm(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let f = cfg.function_on::<Rational>(&cfg.group)?;
    let rep = lipschitz_seminorm(&f, &cfg.generating_set()?, cfg.params.radius.unwrap_or(6))?;
    let mut t = Table::new(&["radius", "empirical", "exact", "equal"]);
    let mut all = true;
    for (r, v) in rep.per_radius.iter().enumerate().skip(1) {
        let eq = *v == rep.exact;
        all &= eq;
        t.push(vec![r.to_string(), v.to_string(), rep.exact.to_string(), eq.to_string()]);
    }
    let mut out = Outcome::new(t, json!({ "exact": rep.exact.to_string(), "empirical": rep.empirical.to_string() }));
    if ctx.check {
        out.check = check(all, if all { "empirical equals exact at every radius" } else { "empirical differs from exact" });
    }
    Ok(out)
}

fn dimension(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let core = cfg.subgroup_or_core()?;
    let stochastic = core.index() > 1;
    let seed = if stochastic { ctx.require_seed(Operation::Dimension)? } else { ctx.seed.unwrap_or(0) };
    let wcfg = walk_config(cfg, seed, 100_000)?;
    let expected = cfg.params.expected_dim;
    let accept = |rep: &harmonic_groups_core::harmonic::Hf1Report| {
        rep.delta != Delta::Inconclusive && expected.is_none_or(|e| rep.dim == Dimension::Exact(e))
    };
    let (rep, passed, retried) = if ctx.check && stochastic {
        retry_once(&wcfg, |c| {
            let r = dim_hf1(&core, c)?;
            let ok = accept(&r);
            Ok((r, ok))
        })?
    } else {
        let r = dim_hf1(&core, &wcfg)?;
        let ok = accept(&r);
        (r, ok, false)
    };
    let marker = if rep.exact { "exact" } else { "estimate" };
    let (dim_s, lo, hi) = match rep.dim {
        Dimension::Exact(d) => (d.to_string(), d, d),
        Dimension::Between(a, b) => (format!("{a}..{b}"), a, b),
    };
    let delta_s = match rep.delta {
        Delta::Zero => "0",
        Delta::One => "1",
        Delta::Inconclusive => "inconclusive",
    };
    let mut t = Table::new(&["quantity", "value", "stderr", "marker"]);
    t.push(vec!["rank".into(), rep.rank.to_string(), String::new(), "exact".into()]);
    t.push(vec!["ambient_rank".into(), rep.ambient_rank.to_string(), String::new(), "exact".into()]);
    for (i, (m, s)) in rep.drift.iter().zip(&rep.drift_stderr).enumerate() {
        t.push(vec![format!("drift_{i}"), m.to_string(), s.to_string(), marker.into()]);
    }
    t.push(vec!["delta".into(), delta_s.into(), String::new(), marker.into()]);
    t.push(vec!["dim".into(), dim_s.clone(), String::new(), marker.into()]);
    let mut out = Outcome::new(
        t,
        json!({ "dim": dim_s, "dim_low": lo, "dim_high": hi, "delta": delta_s, "rank": rep.rank,
                "core_index": core.index(), "samples": rep.samples, "retried": retried }),
    );
    if stochastic {
        out.censoring = Some(Censoring::new(rep.censored, rep.samples));
        out.rng = Some(RngAccount {
            seed: if retried { seed ^ 0x9e37_79b9_7f4a_7c15 } else { seed },
            cells: vec![CELL_HITTING],
            samples_per_cell: rep.samples,
            runs: rep.samples,
        });
    }
    if ctx.check {
        out.check = check(passed, format!("dim {dim_s}, delta {delta_s}"));
    }
    Ok(out)
}

fn liouville(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let f = cfg.function_on::<Rational>(&cfg.group)?;
    let n_max = cfg.params.n_max.unwrap_or(10);
    let dirs: Vec<(String, Element)> = match &cfg.params.element {
        Some(c) => vec![("element".into(), config::element(&cfg.group, c, "/params/element")?)],
        None => {
            let s = cfg.generating_set()?;
            s.names().iter().cloned().zip(s.elements().iter().cloned()).collect()
        }
    };
    let mut t = Table::new(&["direction", "element", "n", "growth"]);
    let (mut linear_everywhere, mut some_positive) = (true, false);
    for (name, g) in &dirs {
        let seq = liouville_growth(&f, g, n_max)?;
        for (i, v) in seq.iter().enumerate() {
            t.push(vec![name.clone(), g.to_string(), (i + 1).to_string(), v.to_string()]);
            linear_everywhere &= *v == &seq[0] * Rational::from_integer((i as i64 + 1).into());
        }
        some_positive |= seq[0] > Rational::from_integer(0.into());
    }
    let constant = f.is_constant();
    let mut out = Outcome::new(t, json!({ "constant": constant, "linear_direction_found": some_positive }));
    if ctx.check {
        let ok = linear_everywhere && (constant != some_positive || (cfg.params.element.is_some() && !some_positive));
        out.check = check(ok, format!("linear sequences: {linear_everywhere}, positive slope found: {some_positive}"));
    }
    Ok(out)
}

fn hitting(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let seed = ctx.require_seed(Operation::HittingMeasure)?;
    let sub = cfg.subgroup()?;
    let wcfg = walk_config(cfg, seed, 100_000)?;
    let expected = match &cfg.params.expected {
        Some(atoms) => Some(config::atoms_of(&cfg.group, atoms, "/params/expected")?),
        None => None,
    };
    let within = |emp: &harmonic_groups_core::walk::EmpiricalMeasure| -> Result<bool, Error> {
        let Some(exp) = &expected else { return Ok(true) };
        let n = emp.total as f64;
        for (g, p) in exp {
            let p = p.as_f64();
            let m = sub.to_model(g)?;
            if (emp.frequency(&m) - p).abs() > 3.0 * (p * (1.0 - p) / n).sqrt() {
                return Ok(false);
            }
        }
        let listed: usize = exp.len();
        Ok(emp.counts.len() <= listed)
    };
    let (emp, passed, retried, used) = if ctx.check {
        let (r, ok, retried) = retry_once(&wcfg, |c| {
            let e = hitting_measure(&sub, c)?;
            let ok = within(&e)?;
            Ok(((e, c.seed), ok))
        })?;
        (r.0, ok, retried, r.1)
    } else {
        (hitting_measure(&sub, &wcfg)?, true, false, seed)
    };
    let mut t = Table::new(&["landing", "model", "count", "frequency", "stderr", "marker"]);
    for (m, c) in &emp.counts {
        t.push(vec![
            sub.from_model(m)?.to_string(),
            m.to_string(),
            c.to_string(),
            emp.frequency(m).to_string(),
            emp.stderr(m).to_string(),
            "estimate".into(),
        ]);
    }
    t.push(vec!["censored".into(), String::new(), emp.censored.to_string(), emp.censored_fraction().to_string(), String::new(), "estimate".into()]);
    let accounted = emp.counts.values().sum::<u64>() + emp.censored == emp.total;
    let mut out = Outcome::new(t, json!({ "atoms": emp.counts.len(), "total": emp.total, "retried": retried }));
    out.censoring = Some(Censoring::new(emp.censored, emp.total));
    out.rng = Some(RngAccount { seed: used, cells: vec![CELL_HITTING], samples_per_cell: emp.total, runs: emp.total });
    if ctx.check {
        out.check = check(accounted && passed, format!("accounted: {accounted}, within 3 sigma of expected: {passed}"));
    }
    Ok(out)
}

fn induce(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let seed = ctx.require_seed(Operation::Induce)?;
    let sub = cfg.subgroup()?;
    let wcfg = walk_config(cfg, seed, 10_000)?;
    let f = cfg.function_on::<Rational>(&cfg.group)?;
    let f_h = restrict_affine(&f, &sub)?;
    let pts = points_or_ball(cfg, 5)?;
    let run_all = |c: &WalkConfig| -> Result<(Vec<_>, bool), Error> {
        let mut vals = Vec::with_capacity(pts.len());
        let mut ok = true;
        for x in &pts {
            let v = induce_harmonic(&f_h, x, &sub, c)?;
            let fx: Vec<f64> = f.evaluate(x)?.iter().map(Scalar::as_f64).collect();
            for ((m, s), e) in v.value.iter().zip(&v.stderr).zip(&fx) {
                ok &= if v.exact { m == e } else { (m - e).abs() <= 3.0 * s };
            }
            vals.push((v, fx));
        }
        Ok((vals, ok))
    };
    let ((vals, used), passed, retried) = if ctx.check {
        let (r, ok, retried) = retry_once(&wcfg, |c| {
            let (v, ok) = run_all(c)?;
            Ok(((v, c.clone()), ok))
        })?;
        (r, ok, retried)
    } else {
        let (v, ok) = run_all(&wcfg)?;
        ((v, wcfg.clone()), ok, false)
    };
    let mut t = Table::new(&["point", "value", "stderr", "censored", "restricted_extension", "marker"]);
    let mut cens = Censoring::default();
    for (x, (v, fx)) in pts.iter().zip(&vals) {
        cens.add(v.censored, if v.exact { 0 } else { used.n_samples });
        t.push(vec![
            x.to_string(),
            join(&v.value),
            join(&v.stderr),
            v.censored.to_string(),
            join(fx),
            if v.exact { "exact" } else { "estimate" }.into(),
        ]);
    }
    let bias = vals.iter().map(|(v, _)| v.bias_bound).fold(0.0, f64::max);
    let mut out = Outcome::new(t, json!({ "points": pts.len(), "bias_bound": bias, "retried": retried }));
    out.censoring = Some(cens);
    out.rng = Some(RngAccount {
        seed: used.seed,
        cells: vec![CELL_INDUCE],
        samples_per_cell: used.n_samples,
        runs: used.n_samples * vals.iter().filter(|(v, _)| !v.exact).count() as u64,
    });
    if ctx.check {
        out.check = check(passed, "induced values within 3 stderr of the function they restrict from");
    }
    Ok(out)
}

fn constants(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let seed = ctx.require_seed(Operation::Constants)?;
    let sub = cfg.subgroup()?;
    let wcfg = walk_config(cfg, seed, 10_000)?;
    let s_g = cfg.generating_set()?;
    let s_h = config::generators(sub.model(), &cfg.subgroup_generators, "/subgroup_generators")?;
    let c = induction_constants(&sub, &s_g, &s_h, &wcfg, cfg.params.cert_radius.unwrap_or(8))?;
    let c_star_se = c.a.as_f64() * 2.0 * c.m1.as_f64() * c.t_stderr;
    let mut t = Table::new(&["constant", "value", "stderr", "marker"]);
    t.push(vec!["A".into(), c.a.to_string(), String::new(), format!("certified up to radius {}", c.a_radius)]);
    t.push(vec!["D".into(), c.d.to_string(), String::new(), "exact".into()]);
    t.push(vec!["m1".into(), c.m1.to_string(), String::new(), "exact".into()]);
    t.push(vec!["C_HG".into(), c.c_hg.to_string(), String::new(), "exact".into()]);
    t.push(vec!["T_hat".into(), c.t_hat.to_string(), c.t_stderr.to_string(), "estimate".into()]);
    t.push(vec!["C_star".into(), c.c_star.to_string(), c_star_se.to_string(), "estimate".into()]);
    let mut result = json!({ "A": c.a.to_string(), "D": c.d, "m1": c.m1.to_string(), "C_HG": c.c_hg,
                             "T_hat": c.t_hat, "C_star": c.c_star, "censoring_warning": c.censoring_warning });
    let t_runs = wcfg.n_samples * sub.index() as u64;
    let mut cens = Censoring::new(0, 0);
    let t_est = estimate_t(&sub, &wcfg)?;
    cens.add(t_est.censored, t_est.total);
    let mut cells: Vec<u64> = (0..sub.index() as u64).map(|j| CELL_TAU + j).collect();
    let mut runs = t_runs;
    let mut status = None;
    if ctx.check {
        let formula_ok = (c.c_star - harmonic_groups_core::walk::InductionConstants::formula(&c.a, c.d, &c.m1, c.t_hat)).abs() < 1e-12;
        let mut ok = formula_ok;
        let mut detail = format!("C_star formula holds: {formula_ok}");
        if cfg.function.is_some() {
            let f = cfg.function_on::<Rational>(&cfg.group)?;
            let f_h = restrict_affine(&f, &sub)?;
            let l_h = lipschitz_seminorm(&f_h, &s_h, 1)?.exact.as_f64();
            let radius = cfg.params.radius.unwrap_or(10);
            let sweep = induced_lipschitz_sweep(&f_h, &sub, &s_g, radius, &wcfg)?;
            let bound = c.c_star * l_h;
            ok &= sweep.max_excess <= bound;
            detail += &format!(
                "; max induced increment {} (stderr {}) against C_star·L_H = {bound} on ball({radius})",
                sweep.max_increment, sweep.stderr
            );
            result["max_induced_increment"] = json!(sweep.max_increment);
            cells.push(CELL_INDUCE);
            runs += wcfg.n_samples * sweep.pairs as u64;
        }
        status = check(ok, detail);
    }
    let mut out = Outcome::new(t, result);
    out.censoring = Some(cens);
    out.rng = Some(RngAccount { seed, cells, samples_per_cell: wcfg.n_samples, runs });
    out.check = status;
    Ok(out)
}

fn qi_map(cfg: &RunConfig) -> Result<QiMapExpr, CliError> {
    QiMapExpr::new(cfg.group.clone(), cfg.pipeline()?).map_err(|e| ConfigError::at("/pipeline", e.to_string()).into())
}

fn defect(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let psi = qi_map(cfg)?;
    let radius = cfg.params.radius.unwrap_or(10);
    let probe = match cfg.params.probe.as_deref() {
        None | Some("ball") => Probe::Ball { radius },
        Some("rays") => Probe::Rays { radius },
        Some(o) => return Err(ConfigError::at("/params/probe", format!("unknown probe {o:?}")).into()),
    };
    let opts = DefectOptions {
        probe,
        pair_budget: cfg.params.pair_budget.unwrap_or(1_000_000),
        seed: ctx.seed.unwrap_or(0),
        product_in_probe: false,
    };
    let rep = abelian_defect(&psi, &opts)?;
    if !rep.exhaustive {
        ctx.require_seed(Operation::Defect)?;
    }
    let marker = if rep.exhaustive { "exhaustive" } else { "sampled lower bound" };
    let mut t = Table::new(&["radius", "max_defect", "marker"]);
    for (r, d) in &rep.growth_curve {
        t.push(vec![r.to_string(), d.to_string(), marker.into()]);
    }
    let witness = rep.witness.as_ref().map(|w| json!({ "x": w.x.to_string(), "y": w.y.to_string(), "delta": w.delta }));
    let mut out = Outcome::new(
        t,
        json!({ "max_defect": rep.max_defect, "witness": witness, "pairs": rep.pairs, "exhaustive": rep.exhaustive }),
    );
    if ctx.check {
        let ok = match &rep.witness {
            Some(w) => defect_at(&psi, &w.x, &w.y)? == w.delta,
            None => rep.max_defect == 0,
        };
        out.check = check(ok, "witness pair re-evaluates to the reported defect");
    }
    Ok(out)
}

fn homogenize_as<T: Scalar>(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let psi = qi_map(cfg)?;
    let src = psi.source().clone();
    let x = match &cfg.params.element {
        Some(c) => config::element(&src, c, "/params/element")?,
        None => src
            .abelian_basis_lifts()
            .into_iter()
            .next()
            .ok_or_else(|| CliError::validation("source has no Abelian directions"))?,
    };
    let j = cfg.params.coordinate.unwrap_or(0);
    if j >= psi.target().rank() {
        return Err(ConfigError::at("/params/coordinate", "coordinate out of range").into());
    }
    let (d, d_marker) = match &cfg.params.defect_bound {
        Some(v) => (parse_rational(v).map_err(|e| ConfigError::at("/params/defect_bound", e))?, "given"),
        None => (
            Rational::from_integer(abelian_defect(&psi, &DefectOptions::rays(64))?.max_defect.into()),
            "measured on rays of radius 64",
        ),
    };
    let k_max = cfg.params.k_max.unwrap_or(DEFAULT_K_MAX);
    let tol = T::from_float(cfg.params.tolerance.unwrap_or(DEFAULT_TOLERANCE));
    let tgt = psi.target().clone();
    let a = |y: &Element| Ok(T::from_i64(tgt.abelianize(&psi.eval(y)?)?[j]));
    let h = homogenize(a, &src, &x, k_max, T::from_rational(&d), tol)?;
    let seq = match doubling_sequence(a, &src, &x, k_max) {
        Ok(s) => s,
        Err(e) if e.is_resource() => h.sequence.clone(),
        Err(e) => return Err(e.into()),
    };
    let d_t = T::from_rational(&d);
    let mut t = Table::new(&["k", "a_k", "increment", "cauchy_bound"]);
    let mut cauchy = true;
    for (k, v) in seq.iter().enumerate() {
        let (inc, bound) = match seq.get(k + 1) {
            Some(next) => {
                let inc = (next.clone() - v.clone()).abs();
                let bound = d_t.clone() / T::from_i64(1i64 << (k + 1));
                cauchy &= inc <= bound;
                (inc.to_string(), bound.to_string())
            }
            None => (String::new(), String::new()),
        };
        t.push(vec![k.to_string(), v.to_string(), inc, bound]);
    }
    let mut out = Outcome::new(
        t,
        json!({ "value": h.value.to_string(), "error_bound": h.error_bound.to_string(), "k_used": h.k_used,
                "converged": h.converged, "defect_bound": d.to_string(), "defect_bound_source": d_marker,
                "element": x.to_string(), "coordinate": j }),
    );
    if ctx.check {
        out.check = check(cauchy, "increments obey |a_{k+1} - a_k| <= D/2^{k+1}");
    }
    Ok(out)
}

fn linearize_opts(cfg: &RunConfig) -> LinearizeOptions {
    let mut o = LinearizeOptions::default();
    if let Some(k) = cfg.params.k_max {
        o.k_max = k;
    }
    if let Some(t) = cfg.params.tolerance {
        o.tolerance = t;
    }
    if let Some(r) = cfg.params.residual_radius {
        o.residual_radius = r;
    }
    o
}

fn matrix_rows<T: Scalar>(t: &mut Table, name: &str, m: &Matrix<T>) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            t.push(vec![name.into(), i.to_string(), j.to_string(), m[(i, j)].to_string()]);
        }
    }
}

fn near_identity<T: Scalar>(m: &Matrix<T>) -> T {
    m.sub(&Matrix::identity(m.rows())).max_abs()
}

fn linearize_as<T: Scalar>(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let psi = qi_map(cfg)?;
    let lin = extract_linearization::<T, _>(&psi, &linearize_opts(cfg))?;
    let mut t = Table::new(&["matrix", "i", "j", "value"]);
    matrix_rows(&mut t, "L_ab", &lin.l_ab);
    matrix_rows(&mut t, "T_psi", &lin.t_psi);
    let err = near_identity(&lin.l_ab.mul(&lin.t_psi.transpose()));
    let mut out = Outcome::new(
        t,
        json!({ "residual_bound": lin.residual_bound.to_string(), "k_used": lin.k_used, "converged": lin.converged,
                "gate_defects": [lin.gate_defects.0, lin.gate_defects.1], "l_t_identity_error": err.to_string() }),
    );
    if ctx.check {
        out.check = check(err.as_f64() <= 1e-9, format!("max |L_ab·T_psiᵀ - I| = {err}"));
    }
    Ok(out)
}

fn straighten_as<T: Scalar>(cfg: &RunConfig, ctx: &Context) -> OpResult {
    let extended = cfg.subgroup.is_some() || cfg.target_subgroup.is_some();
    let (src_sub, tgt_sub) = if extended {
        let src = cfg.subgroup()?;
        let tgt_spec = cfg
            .target_subgroup
            .as_ref()
            .ok_or_else(|| ConfigError::at("/target_subgroup", "extended straightening needs a target subgroup"))?;
        let tgt = RunConfig { subgroup: Some(tgt_spec.clone()), ..cfg.clone() }.subgroup()?;
        (Some(src), Some(tgt))
    } else {
        (None, None)
    };
    let core_src = src_sub.as_ref().map_or(&cfg.group, |s| s.model()).clone();
    let core = QiMapExpr::new(core_src.clone(), cfg.pipeline()?).map_err(|e| ConfigError::at("/pipeline", e.to_string()))?;
    let lin = extract_linearization::<T, _>(&core, &linearize_opts(cfg))?;
    let r = core_src.rank();
    let q = match &cfg.params.basis {
        Some(rows) => RunConfig::matrix::<T>(rows, "/params/basis")?,
        None => Matrix::identity(r),
    };
    let f_src = match &src_sub {
        Some(s) => HarmonicCoordinates::extended(s.clone(), q.clone()),
        None => HarmonicCoordinates::core(core_src.clone(), q.clone()),
    }
    .map_err(|e| ConfigError::at("/params/basis", e.to_string()))?;
    let f_tgt = f_src.transported(&lin, tgt_sub.clone())?;
    let pl_q = f_tgt.basis().mul(&lin.l_ab).sub(&q).max_abs();
    let p_norm = f_tgt.basis().inf_norm();
    let radius = cfg.params.radius.unwrap_or(100);
    let dev = match (&src_sub, &tgt_sub) {
        (Some(s), Some(tg)) => {
            let phi = ExtendedMap::new(s.clone(), tg.clone(), core.clone())?;
            straightening_deviation(&phi, &f_src, &f_tgt, radius)?
        }
        _ => straightening_deviation(&core, &f_src, &f_tgt, radius)?,
    };
    let l = match &cfg.params.l {
        Some(rows) => RunConfig::matrix::<T>(rows, "/params/l")?,
        None => lin.l_ab.clone(),
    };
    let v0: Vec<T> = match &cfg.params.v0 {
        Some(v) => v
            .iter()
            .enumerate()
            .map(|(i, x)| config::scalar_of(x, &format!("/params/v0/{i}")))
            .collect::<Result<_, _>>()?,
        None => vec![T::zero(); core.target().rank()],
    };
    let affine_radius = cfg.params.affine_radius.unwrap_or(20);
    let aff = check_coarsely_affine(
        &core,
        &l,
        &v0,
        affine_radius,
        cfg.params.pair_budget.unwrap_or(1_000_000),
        ctx.seed.unwrap_or(0),
    )?;
    if !aff.exhaustive {
        ctx.require_seed(Operation::Straighten)?;
    }
    let delta = T::from_i64(aff.measured_defect);
    let dev_bound = p_norm.clone() * delta;
    let mut t = Table::new(&["quantity", "value", "marker"]);
    let mut row = |k: &str, v: String, m: &str| t.push(vec![k.into(), v, m.into()]);
    row("pl_minus_q_max", pl_q.to_string(), "exact on matrices");
    row("p_inf_norm", p_norm.to_string(), "exact on matrices");
    row("residual_bound", lin.residual_bound.to_string(), &format!("ball({})", linearize_opts(cfg).residual_radius));
    row("sup_deviation", dev.sup_dev.to_string(), &format!("ball({radius})"));
    row("deviation_argmax", dev.argmax.to_string(), &format!("ball({radius})"));
    row("deviation_bound", dev_bound.to_string(), "p_inf_norm times measured defect");
    row("c_hat", aff.c_hat.to_string(), &format!("ball({affine_radius})"));
    row("implied_defect_bound", aff.implied_bound.to_string(), "3 c_hat + |v0|");
    row(
        "measured_defect",
        aff.measured_defect.to_string(),
        if aff.exhaustive { "exhaustive" } else { "sampled lower bound" },
    );
    row("coarsely_affine_bound_holds", aff.holds.to_string(), "");
    let mut out = Outcome::new(
        t,
        json!({ "sup_deviation": dev.sup_dev.to_string(), "pl_minus_q_max": pl_q.to_string(),
                "implied_defect_bound": aff.implied_bound.to_string(), "measured_defect": aff.measured_defect,
                "extended": extended, "qi": format!("empirical on ball({radius})") }),
    );
    if ctx.check {
        let ok = pl_q.as_f64() <= 1e-9 && dev.sup_dev <= dev_bound && aff.holds;
        out.check = check(ok, "P·L_ab = Q, deviation within ‖P‖·Δ and coarse-affine bound");
    }
    Ok(out)
}
