//! Schedule CSV: header `s,g_ghz,delta_ghz`, one knot per row.

use std::path::Path;

use annealbench_core::model::{AnnealSchedule, Knot};
use serde::{Deserialize, Serialize};

use super::{csv_error, read_text, write_text};
use crate::error::{AppError, Result};

pub const HEADER: [&str; 3] = ["s", "g_ghz", "delta_ghz"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    s: f64,
    g_ghz: f64,
    delta_ghz: f64,
}

/// Knots from CSV text; `path` only labels errors.
pub fn parse_knots(text: &str, path: &Path) -> Result<Vec<Knot>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(AppError::format(
            path,
            Some(1),
            format!("expected header `{}`, found `{}`", HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut knots = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        knots.push(Knot::new(row.s, row.g_ghz, row.delta_ghz));
    }
    Ok(knots)
}

pub fn read_schedule(path: &Path, tau_us: f64) -> Result<AnnealSchedule> {
    let knots = parse_knots(&read_text(path)?, path)?;
    AnnealSchedule::from_knots(tau_us, knots).map_err(|e| AppError::format(path, None, e.to_string()))
}

pub fn schedule_csv(schedule: &AnnealSchedule) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for k in schedule.knots() {
        out.push_str(&format!("{},{},{}\n", k.s, k.g, k.delta));
    }
    out
}

pub fn write_schedule(path: &Path, schedule: &AnnealSchedule) -> Result<()> {
    write_text(path, &schedule_csv(schedule))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = AnnealSchedule::from_knots(
            2.0,
            vec![Knot::new(0.0, 4.0, 0.0), Knot::new(0.3, 2.5, 1.25), Knot::new(1.0, 0.0, 4.0)],
        )
        .unwrap();
        let knots = parse_knots(&schedule_csv(&s), Path::new("x.csv")).unwrap();
        assert_eq!(AnnealSchedule::from_knots(2.0, knots).unwrap(), s);
    }

    #[test]
    fn bad_rows_are_located() {
        let err = parse_knots("s,g_ghz,delta_ghz\n0,1,0\n0.5,oops,1\n", Path::new("sched.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("sched.csv:3:"), "{msg}");
        let err = parse_knots("s,g,delta\n", Path::new("sched.csv")).unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }
}
