use quantum_dice::harness::RunConfig;
use quantum_dice::report::{to_csv, to_json, CsvRecord};
use quantum_dice::stats::ComparisonRow;
use serde::Serialize;

use crate::SeedSource;

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = to_json(value);
    s.push('\n');
    s
}

/// CSV preceded by a `# config` comment line carrying the run configuration.
pub fn csv_with_config(config: &RunConfig, records: &[CsvRecord]) -> String {
    let config = serde_json::to_string(config).expect("config serializes");
    format!("# config {config}\n{}", to_csv(records))
}

pub fn seed_line(config: &RunConfig, source: SeedSource) -> String {
    let origin = match source {
        SeedSource::Flag => "--seed".to_string(),
        SeedSource::Env => format!("from {}", crate::SEED_ENV),
        SeedSource::Default => "default".to_string(),
    };
    format!(
        "seed {} ({origin}), trials {}, sigma level {}\n",
        config.seed, config.trials, config.sigma_level
    )
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(headers.to_vec());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                format!("{:.6}", r.analytic),
                r.estimate.count.to_string(),
                format!("{:.6}", r.estimate.p_hat),
                format!("±{:.6}", r.estimate.ci_half_width),
                verdict(r.pass).to_string(),
            ]
        })
        .collect();
    table(&["outcome", "analytic", "count", "p_hat", "interval", "check"], &body)
}
