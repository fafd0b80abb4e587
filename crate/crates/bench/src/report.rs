//! Report serialization, Table-style markdown rows and paired comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use eel_core::{mean_std, paired_ttest, MeanStd};
use serde::{Deserialize, Serialize};

use crate::config::parse_enum;
use crate::error::{BenchError, Result};
use crate::experiment::{ExperimentReport, RunRecord, TelemetryRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        parse_enum(s)
    }
}

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn from_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    from_json(&read_text(path)?)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One line per record plus a header.
pub fn to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "fold",
        "run",
        "seed",
        "train_error",
        "test_error",
        "ensemble_size",
        "wall_time_secs",
    ])?;
    for r in &report.records {
        w.write_record([
            r.fold.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            r.train_error.to_string(),
            r.test_error.to_string(),
            r.ensemble_size.map(|s| s.to_string()).unwrap_or_default(),
            r.wall_time_secs.to_string(),
        ])?;
    }
    finish_csv(w)
}

/// Long-format telemetry: `fold,run,step,metric,value`.
pub fn telemetry_csv(rows: &[TelemetryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fold", "run", "step", "metric", "value"])?;
    for r in rows {
        w.write_record([
            r.fold.to_string(),
            r.run.to_string(),
            r.step.to_string(),
            r.metric.clone(),
            r.value.to_string(),
        ])?;
    }
    finish_csv(w)
}

fn finish_csv(mut w: csv::Writer<Vec<u8>>) -> Result<String> {
    w.flush().map_err(|source| BenchError::Io {
        path: "<memory>".into(),
        source,
    })?;
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| BenchError::Input(e.to_string()))
}

pub const MARKDOWN_HEADER: &str =
    "| dataset | method | train error | test error | p-value | ensemble size |\n|---|---|---|---|---|---|\n";

fn pct(s: &MeanStd) -> String {
    format!("{:.1}% ({:.1}%)", 100.0 * s.mean, 100.0 * s.std)
}

fn dataset_name(report: &ExperimentReport) -> String {
    Path::new(&report.dataset)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| report.dataset.clone())
}

/// One table row: train error (sd), test error (sd), p-value of the paired
/// test-error t-test against `reference`, ensemble size (sd).
pub fn markdown_row(
    report: &ExperimentReport,
    reference: Option<&ExperimentReport>,
) -> Result<String> {
    let p = match reference {
        Some(r) => format!(
            "{:.3}",
            compare_reports(report, r, Pairing::PerRun)?
                .test_error()
                .p_value
        ),
        None => "n/a".into(),
    };
    let size = report
        .summary
        .ensemble_size
        .map_or_else(|| "n/a".into(), |s| format!("{:.1} ({:.1})", s.mean, s.std));
    Ok(format!(
        "| {} | {} | {} | {} | {} | {} |\n",
        dataset_name(report),
        report.method,
        pct(&report.summary.train_error),
        pct(&report.summary.test_error),
        p,
        size
    ))
}

pub fn to_markdown(
    report: &ExperimentReport,
    reference: Option<&ExperimentReport>,
) -> Result<String> {
    Ok(format!(
        "{MARKDOWN_HEADER}{}",
        markdown_row(report, reference)?
    ))
}

pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    reference: Option<&ExperimentReport>,
) -> Result<String> {
    match format {
        ReportFormat::Json => to_json(report),
        ReportFormat::Csv => to_csv(report),
        ReportFormat::Markdown => to_markdown(report, reference),
    }
}

/// Writes `report` to `path` in `format`.
pub fn write_report(
    report: &ExperimentReport,
    format: ReportFormat,
    reference: Option<&ExperimentReport>,
    path: &Path,
) -> Result<()> {
    let text = emit_report(report, format, reference)?;
    let mut f = std::fs::File::create(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes())
        .map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// How records of two reports are matched for the t-test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// One pair per `(fold, run)` cell.
    PerRun,
    /// Runs are averaged within each fold first; one pair per fold.
    PerFold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub measure: String,
    pub a: MeanStd,
    pub b: MeanStd,
    pub t: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub pairing: Pairing,
    pub pairs: usize,
    pub measures: Vec<MeasureComparison>,
}

impl ReportComparison {
    pub fn measure(&self, name: &str) -> Option<&MeasureComparison> {
        self.measures.iter().find(|m| m.measure == name)
    }

    pub fn test_error(&self) -> &MeasureComparison {
        self.measure("test_error")
            .expect("test error is always compared")
    }
}

/// Paired t-tests of `a` against `b` on every measure both reports carry.
///
/// The reports must share a fold plan and cover the same `(fold, run)`
/// cells; otherwise the pairing would be meaningless.
pub fn compare_reports(
    a: &ExperimentReport,
    b: &ExperimentReport,
    pairing: Pairing,
) -> Result<ReportComparison> {
    if a.fold_plan.assignments != b.fold_plan.assignments {
        return Err(BenchError::Pairing("fold plans differ".into()));
    }
    let keys = |r: &ExperimentReport| {
        r.records
            .iter()
            .map(|x| (x.fold, x.run))
            .collect::<Vec<_>>()
    };
    let (ka, kb) = (keys(a), keys(b));
    let index = |r: &ExperimentReport| -> BTreeMap<(usize, usize), RunRecord> {
        r.records
            .iter()
            .map(|x| ((x.fold, x.run), x.clone()))
            .collect()
    };
    let (ia, ib) = (index(a), index(b));
    if ia.len() != ka.len() || ib.len() != kb.len() {
        return Err(BenchError::Pairing("duplicate (fold, run) records".into()));
    }
    if ia.keys().ne(ib.keys()) {
        return Err(BenchError::Pairing(
            "reports cover different (fold, run) cells".into(),
        ));
    }

    type Getter = fn(&RunRecord) -> Option<f64>;
    let measures: [(&str, Getter); 3] = [
        ("train_error", |r| Some(r.train_error)),
        ("test_error", |r| Some(r.test_error)),
        ("ensemble_size", |r| r.ensemble_size.map(|s| s as f64)),
    ];
    let mut out = Vec::new();
    let mut pairs = 0;
    for (name, get) in measures {
        let column = |idx: &BTreeMap<(usize, usize), RunRecord>| -> Option<Vec<f64>> {
            let per_cell: Option<Vec<((usize, usize), f64)>> =
                idx.iter().map(|(&k, r)| get(r).map(|v| (k, v))).collect();
            let per_cell = per_cell?;
            Some(match pairing {
                Pairing::PerRun => per_cell.into_iter().map(|(_, v)| v).collect(),
                Pairing::PerFold => {
                    let mut by_fold: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
                    for ((fold, _), v) in per_cell {
                        let e = by_fold.entry(fold).or_insert((0.0, 0));
                        e.0 += v;
                        e.1 += 1;
                    }
                    by_fold.values().map(|(s, n)| s / *n as f64).collect()
                }
            })
        };
        let (Some(xa), Some(xb)) = (column(&ia), column(&ib)) else {
            continue;
        };
        let test = paired_ttest(&xa, &xb)?;
        pairs = xa.len();
        out.push(MeasureComparison {
            measure: name.to_string(),
            a: mean_std(&xa)?,
            b: mean_std(&xb)?,
            t: test.t,
            p_value: test.p_value,
        });
    }
    Ok(ReportComparison {
        pairing,
        pairs,
        measures: out,
    })
}

/// Human-readable comparison table.
pub fn comparison_text(
    a: &ExperimentReport,
    b: &ExperimentReport,
    cmp: &ReportComparison,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "a = {} on {}, b = {} on {} ({} pairs, {})",
        a.method,
        dataset_name(a),
        b.method,
        dataset_name(b),
        cmp.pairs,
        match cmp.pairing {
            Pairing::PerRun => "per-run pairing",
            Pairing::PerFold => "per-fold pairing",
        }
    );
    let _ = writeln!(
        s,
        "| measure | a | b | t | p-value |\n|---|---|---|---|---|"
    );
    for m in &cmp.measures {
        let _ = writeln!(
            s,
            "| {} | {:.4} ({:.4}) | {:.4} ({:.4}) | {:.3} | {:.4} |",
            m.measure, m.a.mean, m.a.std, m.b.mean, m.b.std, m.t, m.p_value
        );
    }
    s
}
