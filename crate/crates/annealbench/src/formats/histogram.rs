//! Histogram CSVs: `delta_omega,probability` for `P(Δω)` and
//! `abs_omega_renorm,probability` for the renormalized `|ω_f|` marginal.

use std::path::Path;

use annealbench_core::tpm::{Axis, DistributionMeta, WorkDistribution};

use super::{csv_error, read_text, write_text};
use crate::error::{AppError, Result};

pub const DELTA_OMEGA_HEADER: &str = "delta_omega,probability";
pub const ABS_RENORM_HEADER: &str = "abs_omega_renorm,probability";

pub fn distribution_csv(p: &WorkDistribution) -> String {
    let mut out = format!("{DELTA_OMEGA_HEADER}\n");
    for (k, w) in p.iter() {
        out.push_str(&format!("{k},{w:e}\n"));
    }
    out
}

/// `|ω_f| / (L − 1)` against probability.
pub fn renormalized_csv(p: &WorkDistribution) -> String {
    let mut out = format!("{ABS_RENORM_HEADER}\n");
    for (x, w) in p.renormalized() {
        out.push_str(&format!("{x},{w:e}\n"));
    }
    out
}

pub fn write_distribution(path: &Path, p: &WorkDistribution) -> Result<()> {
    write_text(path, &distribution_csv(p))
}

pub fn write_renormalized(path: &Path, p: &WorkDistribution) -> Result<()> {
    write_text(path, &renormalized_csv(p))
}

/// Reads a `delta_omega,probability` table back into a distribution.
pub fn read_distribution(path: &Path, meta: DistributionMeta) -> Result<WorkDistribution> {
    let text = read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    if header.join(",") != DELTA_OMEGA_HEADER {
        return Err(AppError::format(path, Some(1), format!("expected header `{DELTA_OMEGA_HEADER}`")));
    }
    let mut probabilities = std::collections::BTreeMap::new();
    for row in reader.deserialize::<(i64, f64)>() {
        let (k, w) = row.map_err(|e| csv_error(path, e))?;
        probabilities.insert(k, w);
    }
    WorkDistribution::new(Axis::DeltaOmega, meta, probabilities).map_err(|e| AppError::format(path, None, e.to_string()))
}
