//! Report rows and their CSV/JSON encodings.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::Format;
use crate::inequalities::search::SearchResult;
use crate::inequalities::IneqReport;

/// One verification row; the field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub check_name: String,
    pub paper_ref: String,
    pub n: usize,
    pub i: Option<f64>,
    pub j: Option<usize>,
    pub r: Option<usize>,
    pub alpha: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub rel_slack: f64,
    pub tol: f64,
    pub equality_expected: bool,
    pub verdict: String,
    pub outer_res: usize,
    pub inner_res: usize,
    pub seed: u64,
}

pub const COLUMNS: [&str; 17] = [
    "check_name",
    "paper_ref",
    "n",
    "i",
    "j",
    "r",
    "alpha",
    "lhs",
    "rhs",
    "slack",
    "rel_slack",
    "tol",
    "equality_expected",
    "verdict",
    "outer_res",
    "inner_res",
    "seed",
];

impl ReportRow {
    pub fn from_report(rep: &IneqReport, seed: u64) -> Self {
        ReportRow {
            check_name: rep.check.id().to_string(),
            paper_ref: rep.check.statement().to_string(),
            n: rep.n,
            i: rep.i,
            j: rep.j,
            r: rep.r,
            alpha: rep.alpha,
            lhs: rep.lhs,
            rhs: rep.rhs,
            slack: rep.slack,
            rel_slack: rep.rel_slack,
            tol: rep.tol,
            equality_expected: rep.equality_expected,
            verdict: rep.verdict.as_str().to_string(),
            outer_res: rep.outer_res,
            inner_res: rep.inner_res,
            seed,
        }
    }
}

/// One rung of a convergence ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub outer_res: usize,
    pub inner_res: usize,
    pub value: f64,
    /// `|value − previous value|`; empty on the first rung.
    pub abs_diff: Option<f64>,
    pub rel_diff: Option<f64>,
}

#[derive(Serialize)]
struct TraceRow {
    evaluation: usize,
    restart: usize,
    params: String,
    rel_slack: f64,
    tol: f64,
    best_rel_slack: f64,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(std::io::Error::other)?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> std::io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    command: &'a str,
    rows: &'a [T],
}

pub fn encode_rows<T: Serialize>(command: &str, rows: &[T], format: Format) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            if rows.is_empty() && command == "verify" {
                return Ok(format!("{}\n", COLUMNS.join(",")).into_bytes());
            }
            csv_bytes(rows)
        }
        Format::Json => json_bytes(&Document { command, rows }),
    }
}

pub fn encode_search(result: &SearchResult, format: Format) -> std::io::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let rows: Vec<TraceRow> = result
                .trace
                .iter()
                .map(|e| TraceRow {
                    evaluation: e.evaluation,
                    restart: e.restart,
                    params: e
                        .params
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                    rel_slack: e.rel_slack,
                    tol: e.tol,
                    best_rel_slack: e.best_rel_slack,
                })
                .collect();
            csv_bytes(&rows)
        }
        Format::Json => json_bytes(result),
    }
}

/// Writes `bytes` to `<dir>/<stem>.<ext>` and the run timestamp to
/// `<dir>/<stem>.meta.json`, keeping the report itself reproducible.
pub fn write_report(dir: &Path, stem: &str, format: Format, bytes: &[u8]) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = dir.join(format!("{stem}.{ext}"));
    fs::write(&path, bytes)?;
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "report": path.file_name().and_then(|s| s.to_str()),
        "generated_unix_secs": secs,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    fs::write(dir.join(format!("{stem}.meta.json")), json_bytes(&meta)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{check_lemma_c, LemmaCInput};

    #[test]
    fn csv_header_matches_schema() {
        let rep = check_lemma_c(&LemmaCInput { a: 1.0, b: 2.0, c: 3.0, d: 6.0, p: 0.4 }).unwrap();
        let bytes = encode_rows("verify", &[ReportRow::from_report(&rep, 5)], Format::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, COLUMNS.join(","));
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("lemma_c,"));
        assert!(row.ends_with(",equality-confirmed,0,0,5"), "{row}");
        let empty = encode_rows::<ReportRow>("verify", &[], Format::Csv).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim_end(), COLUMNS.join(","));
    }

    #[test]
    fn json_rows_use_the_same_fields() {
        let rep = check_lemma_c(&LemmaCInput { a: 1.0, b: 2.0, c: 3.0, d: 5.0, p: 0.4 }).unwrap();
        let bytes = encode_rows("verify", &[ReportRow::from_report(&rep, 5)], Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let row = v["rows"][0].as_object().unwrap();
        let keys: Vec<&str> = row.keys().map(String::as_str).collect();
        let mut expected = COLUMNS.to_vec();
        expected.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(row["verdict"], "pass");
    }
}
