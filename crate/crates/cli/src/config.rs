//! JSON run configuration and its resolution into core objects.

use std::str::FromStr;

use harmonic_groups_core::harmonic::AffineHarmonic;
use harmonic_groups_core::linalg::Matrix;
use harmonic_groups_core::straighten::QiPrimitive;
use harmonic_groups_core::{Element, FiniteMeasure, GeneratingSet, GroupDescriptor, MarkedSubgroup, Rational, Scalar};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::Value;

/// A configuration problem, reported with a JSON-pointer style location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config {}: {}", self.pointer, self.message)
    }
}

type CResult<T> = Result<T, ConfigError>;

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    /// `"default"` or `"king"`.
    Named(String),
    List(Vec<Vec<i64>>),
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec::Named("default".into())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub at: Vec<i64>,
    pub weight: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    /// `"srw"`: uniform on the generating set.
    Named(String),
    Atoms(Vec<AtomSpec>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubgroupSpec {
    Whole,
    Scaled { axis: usize, modulus: i64 },
    EvenSum,
    Rotation,
    NilpotentCore,
    Product { parts: Vec<SubgroupSpec> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    /// A rational or a list of rationals (one per value component).
    pub c: Value,
    /// A row (scalar functions) or a list of rows.
    pub phi: Value,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub radius: Option<u32>,
    pub n_samples: Option<u64>,
    pub max_steps: Option<u64>,
    pub k_max: Option<u32>,
    pub tolerance: Option<f64>,
    pub points: Option<Vec<Vec<i64>>>,
    pub element: Option<Vec<i64>>,
    pub n_max: Option<u32>,
    pub pair_budget: Option<u64>,
    pub probe: Option<String>,
    pub cert_radius: Option<u32>,
    pub target_radius: Option<u32>,
    pub residual_radius: Option<u32>,
    pub affine_radius: Option<u32>,
    pub coordinate: Option<usize>,
    pub defect_bound: Option<Value>,
    pub basis: Option<Vec<Vec<Value>>>,
    pub l: Option<Vec<Vec<Value>>>,
    pub v0: Option<Vec<Value>>,
    pub scalar: Option<String>,
    pub expected_dim: Option<usize>,
    pub expected: Option<Vec<AtomSpec>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupDescriptor,
    #[serde(default)]
    pub generators: GeneratorSpec,
    pub measure: Option<MeasureSpec>,
    pub subgroup: Option<SubgroupSpec>,
    #[serde(default)]
    pub subgroup_generators: GeneratorSpec,
    pub target_subgroup: Option<SubgroupSpec>,
    pub function: Option<FunctionSpec>,
    pub pipeline: Option<Vec<QiPrimitive>>,
    #[serde(default)]
    pub params: Params,
}

/// Parses and validates the raw JSON text.
pub fn parse(text: &str) -> CResult<(RunConfig, Value)> {
    let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError::at("", format!("invalid JSON: {e}")))?;
    let cfg: RunConfig =
        serde_json::from_value(raw.clone()).map_err(|e| ConfigError::at("", format!("schema violation: {e}")))?;
    cfg.group.validate(&cfg.group.identity()).map_err(|e| ConfigError::at("/group", e.to_string()))?;
    if let GroupDescriptor::FreeAbelian { d: 0 } = cfg.group {
        return Err(ConfigError::at("/group/d", "rank must be at least 1"));
    }
    Ok((cfg, raw))
}

/// Exact rational from a JSON number or a string like `"-3/4"`, `"0.25"`, `"1e-3"`.
pub fn parse_rational(v: &Value) -> Result<Rational, String> {
    let s = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        other => return Err(format!("expected a rational, got {other}")),
    };
    if s.contains('/') {
        return Rational::from_str(&s).map_err(|_| format!("cannot parse {s:?} as a fraction"));
    }
    parse_decimal(&s).ok_or_else(|| format!("cannot parse {s:?} as a number"))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(digits);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -q } else { q })
}

pub fn scalar_of<T: Scalar>(v: &Value, pointer: &str) -> CResult<T> {
    parse_rational(v)
        .map(|q| T::from_rational(&q))
        .map_err(|e| ConfigError::at(pointer, e))
}

pub fn element(group: &GroupDescriptor, coords: &[i64], pointer: &str) -> CResult<Element> {
    group.element(coords).map_err(|e| ConfigError::at(pointer, e.to_string()))
}

pub fn generators(group: &GroupDescriptor, spec: &GeneratorSpec, pointer: &str) -> CResult<GeneratingSet> {
    match spec {
        GeneratorSpec::Named(n) if n == "default" => Ok(group.default_generators()),
        GeneratorSpec::Named(n) if n == "king" => group.king_generators().map_err(|e| ConfigError::at(pointer, e.to_string())),
        GeneratorSpec::Named(n) => Err(ConfigError::at(pointer, format!("unknown generating set {n:?}"))),
        GeneratorSpec::List(list) => {
            let elems = list
                .iter()
                .enumerate()
                .map(|(i, c)| element(group, c, &format!("{pointer}/{i}")))
                .collect::<CResult<Vec<_>>>()?;
            GeneratingSet::new(group, elems, None).map_err(|e| ConfigError::at(pointer, e.to_string()))
        }
    }
}

impl RunConfig {
    pub fn generating_set(&self) -> CResult<GeneratingSet> {
        generators(&self.group, &self.generators, "/generators")
    }

    pub fn measure(&self) -> CResult<FiniteMeasure> {
        let spec = self
            .measure
            .as_ref()
            .ok_or_else(|| ConfigError::at("/measure", "this operation needs a measure"))?;
        match spec {
            MeasureSpec::Named(n) if n == "srw" => {
                FiniteMeasure::simple_random_walk(self.group.clone(), &self.generating_set()?)
                    .map_err(|e| ConfigError::at("/measure", e.to_string()))
            }
            MeasureSpec::Named(n) => Err(ConfigError::at("/measure", format!("unknown measure {n:?}"))),
            MeasureSpec::Atoms(atoms) => {
                let entries = atoms_of(&self.group, atoms, "/measure")?;
                FiniteMeasure::new(self.group.clone(), entries).map_err(|e| {
                    let msg = e.to_string();
                    // point at the entry the core complained about, if any
                    let ptr = msg
                        .split("measure entry ")
                        .nth(1)
                        .and_then(|rest| rest.split(':').next())
                        .and_then(|i| i.parse::<usize>().ok())
                        .map_or_else(|| "/measure".to_string(), |i| format!("/measure/{i}"));
                    ConfigError::at(ptr, msg)
                })
            }
        }
    }

    pub fn subgroup(&self) -> CResult<MarkedSubgroup> {
        let spec = self
            .subgroup
            .as_ref()
            .ok_or_else(|| ConfigError::at("/subgroup", "this operation needs a subgroup"))?;
        resolve_subgroup(&self.group, spec, "/subgroup")
    }

    pub fn subgroup_or_core(&self) -> CResult<MarkedSubgroup> {
        match &self.subgroup {
            Some(spec) => resolve_subgroup(&self.group, spec, "/subgroup"),
            None => Ok(self.group.nilpotent_core()),
        }
    }

    /// The affine function on `group` described by `/function`.
    pub fn function_on<T: Scalar>(&self, group: &GroupDescriptor) -> CResult<AffineHarmonic<T>> {
        let spec = self
            .function
            .as_ref()
            .ok_or_else(|| ConfigError::at("/function", "this operation needs a function"))?;
        let c: Vec<T> = match &spec.c {
            Value::Array(xs) => xs
                .iter()
                .enumerate()
                .map(|(i, v)| scalar_of(v, &format!("/function/c/{i}")))
                .collect::<CResult<_>>()?,
            v => vec![scalar_of(v, "/function/c")?],
        };
        let rows: Vec<Vec<T>> = match &spec.phi {
            Value::Array(xs) if xs.iter().all(|x| x.is_array()) && !xs.is_empty() => xs
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    row.as_array()
                        .into_iter()
                        .flatten()
                        .enumerate()
                        .map(|(j, v)| scalar_of(v, &format!("/function/phi/{i}/{j}")))
                        .collect::<CResult<Vec<T>>>()
                })
                .collect::<CResult<_>>()?,
            Value::Array(xs) => vec![xs
                .iter()
                .enumerate()
                .map(|(j, v)| scalar_of(v, &format!("/function/phi/{j}")))
                .collect::<CResult<Vec<T>>>()?],
            _ => return Err(ConfigError::at("/function/phi", "expected an array")),
        };
        let r = group.rank();
        if rows.iter().any(|row| row.len() != r) {
            return Err(ConfigError::at("/function/phi", format!("rows must have length {r} (rank of {group})")));
        }
        AffineHarmonic::new(group.clone(), c, Matrix::from_rows(rows, r))
            .map_err(|e| ConfigError::at("/function", e.to_string()))
    }

    pub fn pipeline(&self) -> CResult<Vec<QiPrimitive>> {
        self.pipeline
            .clone()
            .ok_or_else(|| ConfigError::at("/pipeline", "this operation needs a pipeline"))
    }

    pub fn points(&self, group: &GroupDescriptor) -> CResult<Option<Vec<Element>>> {
        self.params
            .points
            .as_ref()
            .map(|pts| {
                pts.iter()
                    .enumerate()
                    .map(|(i, c)| element(group, c, &format!("/params/points/{i}")))
                    .collect()
            })
            .transpose()
    }

    pub fn matrix<T: Scalar>(rows: &[Vec<Value>], pointer: &str) -> CResult<Matrix<T>> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ConfigError::at(pointer, "ragged matrix"));
        }
        let data = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| scalar_of(v, &format!("{pointer}/{i}/{j}")))
                    .collect::<CResult<Vec<T>>>()
            })
            .collect::<CResult<_>>()?;
        Ok(Matrix::from_rows(data, cols))
    }
}

pub fn atoms_of(group: &GroupDescriptor, atoms: &[AtomSpec], pointer: &str) -> CResult<Vec<(Element, Rational)>> {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let g = element(group, &a.at, &format!("{pointer}/{i}/at"))?;
            let w = parse_rational(&a.weight).map_err(|e| ConfigError::at(format!("{pointer}/{i}/weight"), e))?;
            Ok((g, w))
        })
        .collect()
}

fn resolve_subgroup(group: &GroupDescriptor, spec: &SubgroupSpec, pointer: &str) -> CResult<MarkedSubgroup> {
    let err = |e: harmonic_groups_core::Error| ConfigError::at(pointer, e.to_string());
    match (spec, group) {
        (SubgroupSpec::Whole, g) => Ok(MarkedSubgroup::whole(g.clone())),
        (SubgroupSpec::NilpotentCore, g) => Ok(g.nilpotent_core()),
        (SubgroupSpec::Scaled { axis, modulus }, GroupDescriptor::FreeAbelian { d }) => {
            MarkedSubgroup::scaled(*d, *axis, *modulus).map_err(err)
        }
        (SubgroupSpec::EvenSum, GroupDescriptor::FreeAbelian { d }) => MarkedSubgroup::even_sum(*d).map_err(err),
        (SubgroupSpec::Rotation, GroupDescriptor::DihedralInfinite) => Ok(MarkedSubgroup::rotation()),
        (SubgroupSpec::Product { parts }, GroupDescriptor::DirectProduct { factors }) if parts.len() == factors.len() => {
            let subs = parts
                .iter()
                .zip(factors)
                .enumerate()
                .map(|(i, (p, f))| resolve_subgroup(f, p, &format!("{pointer}/parts/{i}")))
                .collect::<CResult<Vec<_>>>()?;
            MarkedSubgroup::product(subs).map_err(err)
        }
        (spec, g) => Err(ConfigError::at(pointer, format!("{spec:?} is not available in {g}"))),
    }
}
