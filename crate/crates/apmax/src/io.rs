//! File formats for experiment outputs.
//!
//! CSV schemas (one header row each):
//!
//! * records: `trial,n,stat,value,s,p,seed_hex` — one row per
//!   `(trial, n, stat)`; `s`/`p` are empty when the value is 0 (no witness).
//! * cdf report: `n,stat,threshold,empirical,predicted,stderr,trials`.
//!
//! JSON holds the same data structured, with the config echoed into every
//! experiment document. Floats are written in shortest round-trip form, so
//! write-then-read is lossless and byte-deterministic.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiments::{DistributionReport, RunRecord, StatOutcome};
use crate::limitlaw::{CdfComparison, CdfRow, Stat};
use crate::{Error, Result};

const RECORD_HEADER: [&str; 7] = ["trial", "n", "stat", "value", "s", "p", "seed_hex"];
const CDF_HEADER: [&str; 7] = [
    "n",
    "stat",
    "threshold",
    "empirical",
    "predicted",
    "stderr",
    "trials",
];

/// Renders records to the CSV schema.
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::new();
    out.push_str(&RECORD_HEADER.join(","));
    out.push('\n');
    for rec in records {
        for (stat, outcome) in [(Stat::W, &rec.w), (Stat::U, &rec.u)] {
            if let Some(o) = outcome {
                let (s, p) = match o.witness {
                    Some(w) => (w.s.to_string(), w.p.to_string()),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{:016x}",
                    rec.trial, rec.n, stat, o.value, s, p, rec.seed
                );
            }
        }
    }
    out
}

/// Renders CDF comparisons to the CSV schema.
pub fn comparisons_to_csv(comparisons: &[CdfComparison]) -> String {
    let mut out = String::new();
    out.push_str(&CDF_HEADER.join(","));
    out.push('\n');
    for cmp in comparisons {
        for row in &cmp.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                cmp.n, cmp.stat, row.threshold, row.empirical, row.predicted, row.stderr, row.trials
            );
        }
    }
    out
}

struct FieldReader<'a> {
    headers: Vec<String>,
    line: usize,
    row: &'a csv::StringRecord,
}

impl<'a> FieldReader<'a> {
    fn get(&self, field: &str) -> Result<&'a str> {
        let idx = self
            .headers
            .iter()
            .position(|h| h == field)
            .ok_or_else(|| Error::Parse {
                line: 1,
                field: field.into(),
                msg: "missing column".into(),
            })?;
        self.row.get(idx).ok_or_else(|| Error::Parse {
            line: self.line,
            field: field.into(),
            msg: "row too short".into(),
        })
    }

    fn parse<T: std::str::FromStr>(&self, field: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(field)?;
        raw.parse().map_err(|e: T::Err| Error::Parse {
            line: self.line,
            field: field.into(),
            msg: format!("{e} (got {raw:?})"),
        })
    }

    fn parse_opt<T: std::str::FromStr>(&self, field: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(field)?;
        if raw.is_empty() {
            Ok(None)
        } else {
            self.parse(field).map(Some)
        }
    }
}

fn check_headers(found: &csv::StringRecord, expected: &[&str]) -> Result<Vec<String>> {
    let headers: Vec<String> = found.iter().map(str::to_string).collect();
    for want in expected {
        if !headers.iter().any(|h| h == want) {
            return Err(Error::Parse {
                line: 1,
                field: (*want).into(),
                msg: "missing column".into(),
            });
        }
    }
    Ok(headers)
}

/// Parses the records CSV, reassembling per-stat rows into [`RunRecord`]s
/// in first-appearance order.
pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = check_headers(
        reader
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                field: "header".into(),
                msg: e.to_string(),
            })?,
        &RECORD_HEADER,
    )?;

    let mut records: Vec<RunRecord> = Vec::new();
    let mut index: std::collections::HashMap<(u64, usize), usize> = std::collections::HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            field: "row".into(),
            msg: e.to_string(),
        })?;
        let f = FieldReader {
            headers: headers.clone(),
            line,
            row: &row,
        };
        let trial: u64 = f.parse("trial")?;
        let n: usize = f.parse("n")?;
        let stat: Stat = f.parse("stat")?;
        let value: u64 = f.parse("value")?;
        let s: Option<usize> = f.parse_opt("s")?;
        let p: Option<usize> = f.parse_opt("p")?;
        let seed_hex = f.get("seed_hex")?;
        let seed = u64::from_str_radix(seed_hex, 16).map_err(|e| Error::Parse {
            line,
            field: "seed_hex".into(),
            msg: e.to_string(),
        })?;
        let witness = match (s, p) {
            (Some(s), Some(p)) => Some(crate::apscan::ApWitness {
                s,
                p,
                k: value as usize,
            }),
            _ => None,
        };
        let outcome = StatOutcome { value, witness };

        let key = (trial, n);
        let idx = *index.entry(key).or_insert_with(|| {
            records.push(RunRecord {
                trial,
                n,
                w: None,
                u: None,
                seed,
            });
            records.len() - 1
        });
        match stat {
            Stat::W => records[idx].w = Some(outcome),
            Stat::U => records[idx].u = Some(outcome),
        }
    }
    Ok(records)
}

/// Parses the CDF CSV, grouping rows into comparisons by `(n, stat)` in
/// first-appearance order; the max deviation is recomputed from the rows.
pub fn comparisons_from_csv(text: &str) -> Result<Vec<CdfComparison>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = check_headers(
        reader
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                field: "header".into(),
                msg: e.to_string(),
            })?,
        &CDF_HEADER,
    )?;

    let mut out: Vec<CdfComparison> = Vec::new();
    let mut index: std::collections::HashMap<(usize, String), usize> =
        std::collections::HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            field: "row".into(),
            msg: e.to_string(),
        })?;
        let f = FieldReader {
            headers: headers.clone(),
            line,
            row: &row,
        };
        let n: usize = f.parse("n")?;
        let stat: Stat = f.parse("stat")?;
        let cdf_row = CdfRow {
            threshold: f.parse("threshold")?,
            empirical: f.parse("empirical")?,
            predicted: f.parse("predicted")?,
            stderr: f.parse("stderr")?,
            trials: f.parse("trials")?,
        };
        let key = (n, stat.to_string());
        let idx = *index.entry(key).or_insert_with(|| {
            out.push(CdfComparison {
                n,
                stat,
                rows: Vec::new(),
                ks: 0.0,
            });
            out.len() - 1
        });
        out[idx].rows.push(cdf_row);
    }
    for cmp in &mut out {
        cmp.ks = CdfComparison::max_deviation(&cmp.rows);
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes records to `path`; the extension picks the format
/// (`.json` structured, anything else the CSV schema).
pub fn persist_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let contents = if is_json(path) {
        let mut s = serde_json::to_string_pretty(records).expect("records serialize");
        s.push('\n');
        s
    } else {
        records_to_csv(records)
    };
    write_file(path, &contents)
}

/// Reads records back from `path` (format by extension).
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = read_file(path)?;
    if is_json(path) {
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            field: "json".into(),
            msg: e.to_string(),
        })
    } else {
        records_from_csv(&text)
    }
}

/// Serializes a full distribution report (config echo included).
pub fn report_to_json(report: &DistributionReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialize");
    s.push('\n');
    s
}

pub fn report_from_json(text: &str) -> Result<DistributionReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        field: "json".into(),
        msg: e.to_string(),
    })
}

pub fn write_report_json(report: &DistributionReport, path: &Path) -> Result<()> {
    write_file(path, &report_to_json(report))
}

pub fn write_records_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    write_file(path, &records_to_csv(records))
}

pub fn write_comparisons_csv(comparisons: &[CdfComparison], path: &Path) -> Result<()> {
    write_file(path, &comparisons_to_csv(comparisons))
}

pub fn load_comparisons_csv(path: &Path) -> Result<Vec<CdfComparison>> {
    comparisons_from_csv(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_distribution, ExperimentConfig};

    fn sample_report() -> DistributionReport {
        let cfg = ExperimentConfig {
            ns: vec![32, 48],
            trials: 6,
            master: 11,
            ..Default::default()
        };
        run_distribution(&cfg).unwrap()
    }

    #[test]
    fn records_csv_round_trip() {
        let report = sample_report();
        let text = records_to_csv(&report.records);
        let back = records_from_csv(&text).unwrap();
        assert_eq!(back, report.records);
    }

    #[test]
    fn comparisons_csv_round_trip() {
        let report = sample_report();
        let text = comparisons_to_csv(&report.comparisons);
        let back = comparisons_from_csv(&text).unwrap();
        assert_eq!(back, report.comparisons);
    }

    #[test]
    fn report_json_round_trip() {
        let report = sample_report();
        let back = report_from_json(&report_to_json(&report)).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "trial,n,stat,value,s,seed_hex\n0,8,W,1,1,00000000000000aa\n";
        match records_from_csv(text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "p"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_value_names_line_and_field() {
        let text = "trial,n,stat,value,s,p,seed_hex\n0,8,W,xyz,,,00000000000000aa\n";
        match records_from_csv(text) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "value");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn file_round_trip_both_formats() {
        let report = sample_report();
        let dir = tempfile::tempdir().unwrap();
        for name in ["records.csv", "records.json"] {
            let path = dir.path().join(name);
            persist_records(&report.records, &path).unwrap();
            assert_eq!(load_records(&path).unwrap(), report.records);
        }
    }

    #[test]
    fn io_error_carries_path() {
        let err = load_records(Path::new("/nonexistent/apmax-test.csv")).unwrap_err();
        match err {
            Error::Io { path, .. } => {
                assert!(path.to_string_lossy().contains("apmax-test.csv"))
            }
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
