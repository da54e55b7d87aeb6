//! Report emission: JSON with full precision, human tables with six
//! significant digits, and a metadata block carrying the config hash and
//! seed so every run can be replayed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::AppError;

/// Provenance block attached to every emitted artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    /// SHA-256 of the configuration bytes that produced the run (or of a
    /// canonical description when no config file was involved).
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(config_bytes: &[u8], seed: Option<u64>) -> Self {
        let digest = Sha256::digest(config_bytes);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        Self { config_sha256: hex, seed }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| AppError::Io(format!("serializing {}: {e}", path.display())))?;
    out.push(b'\n');
    std::fs::write(path, out).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Formats with six significant digits for human tables.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-4..=9).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Simple aligned table printer.
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

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn print(&self) {
        let cols = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for c in 0..cols {
                if let Some(cell) = row.get(c) {
                    widths[c] = widths[c].max(cell.len());
                }
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for c in 0..cols {
                let cell = cells.get(c).map(String::as_str).unwrap_or("");
                if c > 0 {
                    s.push_str("  ");
                }
                s.push_str(&format!("{cell:>width$}", width = widths[c]));
            }
            println!("{s}");
        };
        line(&self.header);
        let total: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
        println!("{}", "-".repeat(total));
        for row in &self.rows {
            line(row);
        }
    }
}
