//! Discretizes a continuous target column into three ordered classes.

use std::path::Path;

use crate::error::{BenchError, Result};

/// Class of `v` for thresholds `lo < hi`: 0 when `v <= lo`, 1 when
/// `lo < v <= hi`, 2 when `v > hi`.
pub fn three_way_class(v: f64, lo: f64, hi: f64) -> usize {
    if v <= lo {
        0
    } else if v <= hi {
        1
    } else {
        2
    }
}

pub fn parse_thresholds(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [lo, hi] = parts[..] else {
        return Err(BenchError::Input(format!(
            "thresholds {text:?}: expected lo,hi"
        )));
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| BenchError::Input(format!("bad threshold {s:?}")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo >= hi {
        return Err(BenchError::Input(format!(
            "thresholds must increase, got {lo} and {hi}"
        )));
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrepSummary {
    pub rows: usize,
    pub class_counts: [usize; 3],
}

/// Copies `input` to `output`, replacing the target column (default: last)
/// with its class and moving it to the end. A header line, if present, is
/// kept with the target renamed to `class`.
pub fn discretize_target(
    input: &Path,
    output: &Path,
    thresholds: (f64, f64),
    target_column: Option<usize>,
) -> Result<PrepSummary> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(input)?;
    let mut writer = csv::Writer::from_path(output)?;
    let mut summary = PrepSummary {
        rows: 0,
        class_counts: [0; 3],
    };
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let target = target_column.unwrap_or(rec.len().saturating_sub(1));
        let cell = rec
            .get(target)
            .ok_or_else(|| BenchError::Input(format!("row {}: no column {target}", i + 1)))?;
        let others = rec
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != target)
            .map(|(_, c)| c);
        match cell.parse::<f64>() {
            Ok(v) => {
                let class = three_way_class(v, thresholds.0, thresholds.1);
                summary.class_counts[class] += 1;
                summary.rows += 1;
                let class = class.to_string();
                writer.write_record(others.chain(std::iter::once(class.as_str())))?;
            }
            Err(_) if i == 0 => writer.write_record(others.chain(std::iter::once("class")))?,
            Err(_) => {
                return Err(BenchError::Input(format!(
                    "row {}: target {cell:?} is not numeric",
                    i + 1
                )))
            }
        }
    }
    writer.flush().map_err(|source| BenchError::Io {
        path: output.to_path_buf(),
        source,
    })?;
    Ok(summary)
}
