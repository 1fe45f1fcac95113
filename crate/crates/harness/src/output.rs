//! CSV tables with shortest round-trip floats and the JSON run sidecar.

use crate::error::HarnessError;
use serde::Serialize;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest decimal string that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(path, e))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub balancelab: &'static str,
    pub balancelab_core: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a, C: Serialize> {
    pub schema_version: u32,
    pub subcommand: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub versions: Versions,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn write_sidecar<C: Serialize>(path: &Path, sidecar: &Sidecar<'_, C>) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(sidecar)
        .map_err(|e| HarnessError::io(path, std::io::Error::other(e.to_string())))?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn versions() -> Versions {
    Versions { balancelab: env!("CARGO_PKG_VERSION"), balancelab_core: balancelab_core::VERSION }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, 1e-7, 2.0 / 3.0, -1234.5e100] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.1), "0.1");
    }
}
