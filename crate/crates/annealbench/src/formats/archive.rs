//! Shot archives as JSON (`{"meta": …, "samples": [{"spins", "count"}]}`)
//! or as CSV (`s1,…,sL,count`) with metadata in a `<stem>.meta.json`
//! sidecar.

use std::path::{Path, PathBuf};

use annealbench_core::archive::{check_sample, ArchiveMeta, ShotArchive, SpinSample};

use super::{csv_error, read_text, write_json, write_text};
use crate::error::{AppError, Result};

/// Reads either layout, chosen by extension (`.csv` or anything else as
/// JSON).
pub fn read_archive(path: &Path) -> Result<ShotArchive> {
    if is_csv(path) {
        read_archive_csv(path)
    } else {
        read_archive_json(path)
    }
}

pub fn write_archive(path: &Path, archive: &ShotArchive) -> Result<()> {
    if is_csv(path) {
        write_archive_csv(path, archive)
    } else {
        write_json(path, archive)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

pub fn read_archive_json(path: &Path) -> Result<ShotArchive> {
    parse_archive_json(&read_text(path)?, path)
}

/// Parses archive JSON; `path` only labels errors, which carry the line of
/// the offending token or sample.
pub fn parse_archive_json(text: &str, path: &Path) -> Result<ShotArchive> {
    let archive: ShotArchive =
        serde_json::from_str(text).map_err(|e| AppError::format(path, Some(e.line()), e.to_string()))?;
    check_meta(&archive.meta, path, Some(1))?;
    for (i, sample) in archive.samples.iter().enumerate() {
        check_sample(sample, archive.meta.length)
            .map_err(|detail| AppError::format(path, spins_line(text, i), format!("sample {i}: {detail}")))?;
    }
    Ok(archive)
}

/// Line of the `i`-th `"spins"` key, counting from 1.
fn spins_line(text: &str, i: usize) -> Option<usize> {
    let offset = text.match_indices("\"spins\"").nth(i)?.0;
    Some(text[..offset].matches('\n').count() + 1)
}

fn check_meta(meta: &ArchiveMeta, path: &Path, line: Option<usize>) -> Result<()> {
    ShotArchive::new(meta.clone(), Vec::new())
        .map(|_| ())
        .map_err(|e| AppError::format(path, line, e.to_string()))
}

pub fn read_archive_csv(path: &Path) -> Result<ShotArchive> {
    let meta_path = sidecar_path(path);
    let meta: ArchiveMeta = serde_json::from_str(&read_text(&meta_path)?)
        .map_err(|e| AppError::format(&meta_path, Some(e.line()), e.to_string()))?;
    check_meta(&meta, &meta_path, None)?;
    let samples = parse_samples_csv(&read_text(path)?, path, meta.length)?;
    Ok(ShotArchive { meta, samples })
}

/// Rows of `s1,…,sL,count`; errors name the file line.
pub fn parse_samples_csv(text: &str, path: &Path, length: usize) -> Result<Vec<SpinSample>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    let expected = csv_header(length);
    if header != expected {
        return Err(AppError::format(
            path,
            Some(1),
            format!("expected header `{}` for L = {length}", expected.join(",")),
        ));
    }
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize);
        let field = |k: usize| record.get(k).unwrap_or_default();
        let mut spins = Vec::with_capacity(length);
        for k in 0..length {
            let spin = field(k)
                .parse::<i8>()
                .map_err(|_| AppError::format(path, line, format!("sample {i}: s{} = {:?} is not ±1", k + 1, field(k))))?;
            spins.push(spin);
        }
        let count = field(length)
            .parse::<u64>()
            .map_err(|_| AppError::format(path, line, format!("sample {i}: count {:?} is not a whole number", field(length))))?;
        let sample = SpinSample { spins, count };
        check_sample(&sample, length).map_err(|detail| AppError::format(path, line, format!("sample {i}: {detail}")))?;
        samples.push(sample);
    }
    Ok(samples)
}

fn csv_header(length: usize) -> Vec<String> {
    (1..=length).map(|k| format!("s{k}")).chain([String::from("count")]).collect()
}

pub fn samples_csv(archive: &ShotArchive) -> String {
    let mut out = csv_header(archive.meta.length).join(",");
    out.push('\n');
    for s in &archive.samples {
        for spin in &s.spins {
            out.push_str(&spin.to_string());
            out.push(',');
        }
        out.push_str(&s.count.to_string());
        out.push('\n');
    }
    out
}

pub fn write_archive_csv(path: &Path, archive: &ShotArchive) -> Result<()> {
    write_text(path, &samples_csv(archive))?;
    write_json(&sidecar_path(path), &archive.meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use annealbench_core::archive::Couplings;

    fn archive() -> ShotArchive {
        let meta = ArchiveMeta {
            length: 3,
            couplings: Couplings::PerBond(vec![1.0, -0.5]),
            tau_us: 20.0,
            machine: "DW2X".into(),
            seed: None,
            note: None,
        };
        ShotArchive::new(
            meta,
            vec![
                SpinSample { spins: vec![1, 1, 1], count: 90 },
                SpinSample { spins: vec![1, -1, 1], count: 10 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("runs/a.csv")), Path::new("runs/a.meta.json"));
    }

    #[test]
    fn json_round_trip() {
        let a = archive();
        let text = serde_json::to_string_pretty(&a).unwrap();
        assert_eq!(parse_archive_json(&text, Path::new("a.json")).unwrap(), a);
    }

    #[test]
    fn uniform_coupling_number_accepted() {
        let text = r#"{"meta": {"L": 2, "J": -1, "tau_us": 5, "machine": "x"},
            "samples": [{"spins": [1, -1], "count": 3}]}"#;
        let a = parse_archive_json(text, Path::new("a.json")).unwrap();
        assert_eq!(a.meta.couplings, Couplings::Uniform(-1.0));
        assert_eq!(a.total(), 3);
    }

    #[test]
    fn json_sample_errors_name_the_line() {
        let text = "{\"meta\": {\"L\": 2, \"J\": 1, \"tau_us\": 5, \"machine\": \"x\"},\n \"samples\": [\n  {\"spins\": [1, 1], \"count\": 1},\n  {\"spins\": [1, 0], \"count\": 1}\n]}";
        let msg = parse_archive_json(text, Path::new("a.json")).unwrap_err().to_string();
        assert!(msg.starts_with("a.json:4: sample 1"), "{msg}");
        let msg = parse_archive_json("{\"meta\": 3}", Path::new("a.json")).unwrap_err().to_string();
        assert!(msg.starts_with("a.json:1:"), "{msg}");
    }

    #[test]
    fn csv_rows_round_trip_and_errors_name_the_line() {
        let a = archive();
        let rows = parse_samples_csv(&samples_csv(&a), Path::new("a.csv"), 3).unwrap();
        assert_eq!(rows, a.samples);
        let msg = parse_samples_csv("s1,s2,count\n1,1,4\n1,2,4\n", Path::new("a.csv"), 2)
            .unwrap_err()
            .to_string();
        assert!(msg.starts_with("a.csv:3: sample 1"), "{msg}");
        let msg = parse_samples_csv("s1,s2,count\n1,1,-4\n", Path::new("a.csv"), 2).unwrap_err().to_string();
        assert!(msg.starts_with("a.csv:2:"), "{msg}");
        assert!(parse_samples_csv("s1,count\n", Path::new("a.csv"), 2).is_err());
    }
}
