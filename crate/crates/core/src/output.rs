//! CSV result tables, plot-data files and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::ResultTable;

pub const CSV_HEADER: &str =
    "architecture,rho_db,sum_se_bits_s_hz,se_stderr,ee_bits_per_joule,realizations,seed";
pub const RESULTS_FILE: &str = "results.csv";
pub const SE_PLOT_FILE: &str = "se_vs_rho.csv";
pub const EE_PLOT_FILE: &str = "ee_vs_rho.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

pub fn results_csv(table: &ResultTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.architecture,
            num(r.rho_db),
            num(r.sum_se),
            num(r.se_stderr),
            num(r.ee_bits_per_joule),
            r.realizations,
            r.seed
        );
    }
    out
}

/// Wide table: one row per rho, one column per architecture.
pub fn plot_csv(table: &ResultTable, value: impl Fn(&crate::harness::PointResult) -> f64) -> String {
    let labels = table.labels();
    let mut out = String::from("rho_db");
    for l in &labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    let mut rhos: Vec<f64> = Vec::new();
    for r in &table.rows {
        if !rhos.contains(&r.rho_db) {
            rhos.push(r.rho_db);
        }
    }
    for rho in rhos {
        out.push_str(&num(rho));
        for l in &labels {
            out.push(',');
            if let Some(r) = table
                .rows
                .iter()
                .find(|r| r.architecture == *l && r.rho_db == rho)
            {
                out.push_str(&num(value(r)));
            }
        }
        out.push('\n');
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `results.csv`, `se_vs_rho.csv` and `ee_vs_rho.csv` into `out_dir`.
pub fn emit_results(table: &ResultTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    Ok(vec![
        write(out_dir.join(RESULTS_FILE), &results_csv(table))?,
        write(out_dir.join(SE_PLOT_FILE), &plot_csv(table, |r| r.sum_se))?,
        write(out_dir.join(EE_PLOT_FILE), &plot_csv(table, |r| r.ee_bits_per_joule))?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub output_dir: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// Resolved scenario (defaults and command-line overrides applied).
    pub resolved_config: String,
}

impl RunManifest {
    pub fn new(config_path: &Path, output_dir: &Path, resolved_config: String) -> Self {
        RunManifest {
            config_path: config_path.display().to_string(),
            output_dir: output_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            resolved_config,
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir).map_err(|source| Error::Io {
            path: out_dir.to_path_buf(),
            source,
        })?;
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write(out_dir.join(MANIFEST_FILE), &json)
    }
}
