//! Library side of the `harmonic-groups` command: configuration, operations,
//! report emission and the acceptance checks.

pub mod checks;
pub mod config;
pub mod ops;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use harmonic_groups_core::Error;

use crate::config::ConfigError;
use crate::report::{digest, Manifest};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_CENSORING: i32 = 4;
pub const EXIT_CHECK: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Verify,
    Lipnorm,
    Dimension,
    Liouville,
    HittingMeasure,
    Induce,
    Constants,
    Defect,
    Homogenize,
    Linearize,
    Straighten,
    CheckAll,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Verify => "verify",
            Operation::Lipnorm => "lipnorm",
            Operation::Dimension => "dimension",
            Operation::Liouville => "liouville",
            Operation::HittingMeasure => "hitting-measure",
            Operation::Induce => "induce",
            Operation::Constants => "constants",
            Operation::Defect => "defect",
            Operation::Homogenize => "homogenize",
            Operation::Linearize => "linearize",
            Operation::Straighten => "straighten",
            Operation::CheckAll => "check-all",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::TypeMismatch { .. } | Error::Invalid(_) => EXIT_VALIDATION,
            e if e.is_resource() => EXIT_RESOURCE,
            Error::Censoring { .. } => EXIT_CENSORING,
            _ => EXIT_OTHER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Run-wide options coming from flags.
#[derive(Clone, Debug, Default)]
pub struct Context {
    pub seed: Option<u64>,
    pub check: bool,
}

impl Context {
    pub fn require_seed(&self, op: Operation) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::validation(format!("{} is stochastic and needs --seed", op.name())))
    }
}

/// What a finished run wrote.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub sha256: String,
    /// `Some(false)` when a `--check` failed; files are written regardless.
    pub check_passed: Option<bool>,
}

/// Parses the configuration (if any), runs `op` and writes
/// `<op>.csv` and `<op>.manifest.json` into `out`.
pub fn execute(op: Operation, config_text: Option<&str>, ctx: &Context, out: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let (outcome, echo) = match (op, config_text) {
        (Operation::CheckAll, _) => {
            let seed = ctx.require_seed(op)?;
            (checks::check_all_outcome(seed), serde_json::json!({ "seed": seed }))
        }
        (_, None) => return Err(CliError::validation(format!("{} needs --config", op.name()))),
        (_, Some(text)) => {
            let (cfg, raw) = config::parse(text)?;
            (ops::run(op, &cfg, ctx)?, raw)
        }
    };
    if let Some(c) = &outcome.censoring {
        harmonic_groups_core::walk::enforce_censoring(c.censored, c.total)?;
    }
    let csv = outcome.table.to_csv();
    let sha256 = digest(&csv);
    std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let csv_path = out.join(format!("{}.csv", op.name()));
    let manifest_path = out.join(format!("{}.manifest.json", op.name()));
    std::fs::write(&csv_path, &csv).map_err(|e| io_error(&csv_path, e))?;
    let manifest = Manifest {
        tool: "harmonic-groups",
        version: env!("CARGO_PKG_VERSION"),
        operation: op.name().to_string(),
        config: echo,
        seed: ctx.seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        censoring: outcome.censoring.clone(),
        rng: outcome.rng.clone(),
        csv: csv_path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        sha256: sha256.clone(),
        result: outcome.result,
        check: outcome.check.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, text + "\n").map_err(|e| io_error(&manifest_path, e))?;
    Ok(RunSummary {
        csv_path,
        manifest_path,
        sha256,
        check_passed: outcome.check.map(|c| c.passed),
    })
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_OTHER,
        message: format!("{}: {e}", path.display()),
    }
}
