//! CSV tables, digests and run manifests.

use std::fmt::Display;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Space-separated components.
pub fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Censoring {
    pub censored: u64,
    pub total: u64,
    pub fraction: f64,
    pub warning: bool,
}

impl Censoring {
    pub fn new(censored: u64, total: u64) -> Self {
        let fraction = if total == 0 { 0.0 } else { censored as f64 / total as f64 };
        Self {
            censored,
            total,
            fraction,
            warning: fraction > harmonic_groups_core::walk::CENSOR_WARN,
        }
    }

    pub fn add(&mut self, censored: u64, total: u64) {
        *self = Self::new(self.censored + censored, self.total + total);
    }
}

/// Which RNG streams a run consumed: stream `cell << 40 | i` for every
/// listed cell and `i < samples_per_cell`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RngAccount {
    pub seed: u64,
    pub cells: Vec<u64>,
    pub samples_per_cell: u64,
    pub runs: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckStatus {
    pub passed: bool,
    pub detail: String,
}

/// Result of one operation before it is written out.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub result: Value,
    pub censoring: Option<Censoring>,
    pub rng: Option<RngAccount>,
    pub check: Option<CheckStatus>,
}

impl Outcome {
    pub fn new(table: Table, result: Value) -> Self {
        Self {
            table,
            result,
            censoring: None,
            rng: None,
            check: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub operation: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub wall_time_seconds: f64,
    pub censoring: Option<Censoring>,
    pub rng: Option<RngAccount>,
    pub csv: String,
    pub sha256: String,
    pub result: Value,
    pub check: Option<CheckStatus>,
}
