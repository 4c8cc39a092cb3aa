//! Graph generators, experiment runs with oracle checks, metric records and
//! scaling fits.

mod experiment;
mod fit;
mod gen;

use std::io::Write;

use thiserror::Error;

pub use experiment::{
    load_graph, read_records, run_experiment, Algorithm, Check, CongestSummary, ExperimentConfig, MetricsRecord, ReachSummary,
};
pub use fit::{fit_records, fit_scaling, record_field, Fit};
pub use gen::{generate, Family, GeneratorSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, c) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, c, out);
            }
        }
        serde_json::Value::Null => out.push((prefix.to_string(), String::new())),
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Writes records as CSV with one column per flattened JSON field
/// (`depth.logical_depth`, ...). Arrays are kept as JSON text.
pub fn write_csv<W: Write>(records: &[MetricsRecord], w: W) -> Result<(), HarnessError> {
    let rows: Vec<Vec<(String, String)>> = records
        .iter()
        .map(|r| {
            let mut row = Vec::new();
            flatten("", &serde_json::to_value(r)?, &mut row);
            Ok(row)
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut columns: Vec<String> = Vec::new();
    for row in &rows {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&columns)?;
    for row in rows {
        let line: Vec<&str> = columns
            .iter()
            .map(|c| row.iter().find(|(k, _)| k == c).map_or("", |(_, v)| v.as_str()))
            .collect();
        out.write_record(&line)?;
    }
    out.flush()?;
    Ok(())
}
