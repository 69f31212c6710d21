//! Machine-readable renderings.
//!
//! JSON mirrors the report structs field for field. CSV has one row per
//! outcome label with the fixed column order of [`CsvRecord`]; columns that do
//! not apply to a row are left empty.

use serde::Serialize;

use crate::stats::ComparisonRow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRecord {
    pub label: String,
    pub analytic: f64,
    pub count: Option<u64>,
    pub n: Option<u64>,
    pub p_hat: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub pass: Option<bool>,
}

impl CsvRecord {
    /// A row carrying only an analytic value.
    pub fn analytic(label: impl Into<String>, analytic: f64) -> Self {
        CsvRecord {
            label: label.into(),
            analytic,
            count: None,
            n: None,
            p_hat: None,
            ci_half_width: None,
            pass: None,
        }
    }
}

impl From<&ComparisonRow> for CsvRecord {
    fn from(row: &ComparisonRow) -> Self {
        CsvRecord {
            label: row.label.clone(),
            analytic: row.analytic,
            count: Some(row.estimate.count),
            n: Some(row.estimate.n),
            p_hat: Some(row.estimate.p_hat),
            ci_half_width: Some(row.estimate.ci_half_width),
            pass: Some(row.pass),
        }
    }
}

pub const CSV_HEADER: &str = "label,analytic,count,n,p_hat,ci_half_width,pass";

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types always serialize")
}

pub fn to_csv(records: &[CsvRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer.serialize(r).expect("in-memory csv write");
    }
    let bytes = writer.into_inner().expect("in-memory csv flush");
    let out = String::from_utf8(bytes).expect("csv output is utf-8");
    if out.is_empty() {
        format!("{CSV_HEADER}\n")
    } else {
        out
    }
}
