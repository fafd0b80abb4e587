//! Stratified cross-validation runs of one method on one dataset.

use std::time::Instant;

use eel_core::fitness::error_rate_of;
use eel_core::strategies::GenerationStats;
use eel_core::{
    adaboost_train, ga_single, lms_train, load_csv, mean_std, off_eel, on_eel, stratified_kfold,
    CsvOptions, Dataset, EelConfig, Float, FoldPlan, MeanStd, NormParams, Normalization, Strategy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, Precision};
use crate::error::{BenchError, Result};

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of cell `(fold, run)`. Depends only on its three inputs, so adding
/// folds or runs leaves existing cells untouched.
pub fn cell_seed(master: u64, fold: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ fold as u64) ^ run as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub fold: usize,
    pub run: usize,
    pub seed: u64,
    pub train_error: f64,
    pub test_error: f64,
    pub ensemble_size: Option<usize>,
    pub wall_time_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub train_error: MeanStd,
    pub test_error: MeanStd,
    pub ensemble_size: Option<MeanStd>,
}

impl Summary {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        let column = |f: fn(&RunRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
        let sizes: Option<Vec<f64>> = records
            .iter()
            .map(|r| r.ensemble_size.map(|s| s as f64))
            .collect();
        Ok(Summary {
            train_error: mean_std(&column(|r| r.train_error))?,
            test_error: mean_std(&column(|r| r.test_error))?,
            ensemble_size: sizes.map(|s| mean_std(&s)).transpose()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub dataset: String,
    pub n_examples: usize,
    pub n_features: usize,
    /// Original label of each class index.
    pub class_names: Vec<String>,
    pub config: ExperimentConfig,
    pub fold_plan: FoldPlan,
    /// Sorted by `(fold, run)`.
    pub records: Vec<RunRecord>,
    pub summary: Summary,
    /// Interpretive choices in effect for this run.
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    /// Copy with wall times zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> Self {
        let mut r = self.clone();
        r.records
            .iter_mut()
            .for_each(|rec| rec.wall_time_secs = 0.0);
        r
    }
}

/// One long-format telemetry row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub fold: usize,
    pub run: usize,
    pub step: usize,
    pub metric: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellModel {
    pub fold: usize,
    pub run: usize,
    pub model: serde_json::Value,
}

/// A report plus the per-cell side outputs.
#[derive(Clone, Debug)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub telemetry: Vec<TelemetryRow>,
    pub models: Vec<CellModel>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Print one line per finished cell to stderr.
    pub progress: bool,
}

struct CellOutput {
    record: RunRecord,
    telemetry: Vec<TelemetryRow>,
    model: serde_json::Value,
    warnings: Vec<String>,
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentRun> {
    cfg.validate()?;
    let csv = CsvOptions {
        label_column: cfg.label_column,
        ..CsvOptions::default()
    };
    match cfg.precision {
        Precision::F64 => run_on::<f64>(cfg, load_csv(&cfg.dataset, &csv)?, opts),
        Precision::F32 => run_on::<f32>(cfg, load_csv(&cfg.dataset, &csv)?, opts),
    }
}

/// Runs the experiment on an already loaded dataset.
pub fn run_on<F: Float>(
    cfg: &ExperimentConfig,
    data: Dataset<F>,
    opts: &RunOptions,
) -> Result<ExperimentRun> {
    cfg.validate()?;
    let plan = stratified_kfold(&data, cfg.folds, cfg.seed)?;
    let data = match cfg.normalization {
        Normalization::Global => NormParams::fit(&data)?.apply(&data)?,
        Normalization::PerFold => data,
    };
    let cells: Vec<(usize, usize)> = (0..cfg.folds)
        .flat_map(|f| (0..cfg.runs).map(move |r| (f, r)))
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(fold, run)| {
                let out = run_cell(cfg, &data, &plan, fold, run)
                    .map_err(|source| BenchError::Cell { fold, run, source })?;
                if opts.progress {
                    eprintln!(
                        "{} fold {fold} run {run}: train {:.4} test {:.4}",
                        cfg.method, out.record.train_error, out.record.test_error
                    );
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    };
    let mut outputs = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(work)?,
        None => work()?,
    };
    outputs.sort_by_key(|o| (o.record.fold, o.record.run));

    let mut records = Vec::with_capacity(outputs.len());
    let mut telemetry = Vec::new();
    let mut models = Vec::with_capacity(outputs.len());
    let mut warnings = Vec::new();
    for o in outputs {
        let (fold, run) = (o.record.fold, o.record.run);
        warnings.extend(
            o.warnings
                .into_iter()
                .map(|w| format!("fold {fold} run {run}: {w}")),
        );
        telemetry.extend(o.telemetry);
        models.push(CellModel {
            fold,
            run,
            model: o.model,
        });
        records.push(o.record);
    }
    let report = ExperimentReport {
        method: cfg.method,
        dataset: cfg.dataset.display().to_string(),
        n_examples: data.len(),
        n_features: data.n_features(),
        class_names: data.class_names().to_vec(),
        config: cfg.clone(),
        fold_plan: plan,
        summary: Summary::from_records(&records)?,
        records,
        assumptions: assumptions(cfg, data.n_classes()),
        warnings,
    };
    Ok(ExperimentRun {
        report,
        telemetry,
        models,
    })
}

fn assumptions(cfg: &ExperimentConfig, n_classes: usize) -> Vec<String> {
    let mut a = vec![
        format!(
            "normalization={}",
            match cfg.normalization {
                Normalization::PerFold => "per-fold-min-max",
                Normalization::Global => "global-min-max",
            }
        ),
        "cell-seed=splitmix64(master,fold,run)".to_string(),
        "fold-plan=shared-across-runs-and-methods".to_string(),
    ];
    let evolved = matches!(cfg.method, Method::Ga | Method::OffEel | Method::OnEel);
    if evolved {
        a.push("ga-initial-population=generation-1".into());
        a.push("ga-elitism=none".into());
        a.push(format!(
            "ga-mutation-scope={}",
            serde_json::to_value(cfg.ga.mutation_scope)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default()
        ));
    }
    match cfg.method {
        Method::Lms => {
            a.push(format!(
                "lms-sign={}",
                match cfg.lms.sign {
                    eel_core::LmsSign::Corrected => "corrected",
                    eel_core::LmsSign::Verbatim => "verbatim",
                }
            ));
            if n_classes == 3 {
                a.push("lms-three-class=two-one-vs-rest-planes".into());
            }
        }
        Method::Ga => a.push("ga-result=best-of-run".into()),
        Method::Boost => {
            a.push("boost-size=raw-round-count".into());
            if n_classes == 3 {
                a.push("boost-three-class=adaboost-m1-class-pair-stumps".into());
            }
        }
        Method::OffEel => a.push("off-eel-seed-member=lowest-train-error".into()),
        Method::OnEel => {
            a.push("on-eel-budget=shared-across-generations".into());
            a.push("on-eel-parent-rescoring=uncharged".into());
        }
    }
    a
}

fn push_generation_stats(
    rows: &mut Vec<TelemetryRow>,
    fold: usize,
    run: usize,
    stats: &[GenerationStats],
) {
    for s in stats {
        let mut push = |metric: &str, value: f64| {
            rows.push(TelemetryRow {
                fold,
                run,
                step: s.generation,
                metric: metric.to_string(),
                value,
            })
        };
        push("best_fitness", s.best_fitness);
        push("best_train_error", s.best_train_error);
        if let Some(size) = s.ensemble_size {
            push("ensemble_size", size as f64);
        }
        if let Some(e) = s.ensemble_train_error {
            push("ensemble_train_error", e);
        }
    }
}

fn to_json<T: Serialize>(model: &T) -> serde_json::Value {
    serde_json::to_value(model).unwrap_or(serde_json::Value::Null)
}

fn run_cell<F: Float>(
    cfg: &ExperimentConfig,
    data: &Dataset<F>,
    plan: &FoldPlan,
    fold: usize,
    run: usize,
) -> eel_core::Result<CellOutput> {
    let start = Instant::now();
    let seed = cell_seed(cfg.seed, fold, run);
    let (train_idx, test_idx) = plan.split(fold);
    let mut train = data.subset(&train_idx);
    let mut test = data.subset(&test_idx);
    if cfg.normalization == Normalization::PerFold {
        let norm = NormParams::fit(&train)?;
        train = norm.apply(&train)?;
        test = norm.apply(&test)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut telemetry = Vec::new();
    let mut warnings = Vec::new();

    let eel = |strategy| EelConfig {
        ga: cfg.ga.clone(),
        fitness: cfg.fitness,
        strategy,
        dedup: cfg.dedup,
    };
    let (train_error, test_error, ensemble_size, model): (F, F, Option<usize>, serde_json::Value) =
        match cfg.method {
            Method::Lms => {
                let out = lms_train(&train, &cfg.lms, &mut rng)?;
                for (p, trace) in out.traces.iter().enumerate() {
                    for (epoch, &v) in trace.rms.iter().enumerate() {
                        telemetry.push(TelemetryRow {
                            fold,
                            run,
                            step: epoch,
                            metric: format!("rms_plane{p}"),
                            value: v,
                        });
                    }
                }
                let c = &out.classifier;
                (
                    error_rate_of(c, &train)?,
                    error_rate_of(c, &test)?,
                    None,
                    to_json(c),
                )
            }
            Method::Ga => {
                let out = ga_single(&train, &cfg.ga, &mut rng)?;
                push_generation_stats(&mut telemetry, fold, run, &out.telemetry);
                let c = &out.classifier;
                (
                    error_rate_of(c, &train)?,
                    error_rate_of(c, &test)?,
                    None,
                    to_json(c),
                )
            }
            Method::Boost => {
                let out = adaboost_train(&train, &cfg.boost)?;
                for (round, &e) in out.round_errors.iter().enumerate() {
                    telemetry.push(TelemetryRow {
                        fold,
                        run,
                        step: round + 1,
                        metric: "round_error".into(),
                        value: e,
                    });
                }
                warnings.extend(out.warnings);
                let e = &out.ensemble;
                (
                    error_rate_of(e, &train)?,
                    error_rate_of(e, &test)?,
                    Some(e.len()),
                    to_json(e),
                )
            }
            Method::OffEel | Method::OnEel => {
                let out = if cfg.method == Method::OffEel {
                    off_eel(&train, &eel(Strategy::Off), &mut rng)?
                } else {
                    on_eel(&train, &eel(Strategy::On), &mut rng)?
                };
                push_generation_stats(&mut telemetry, fold, run, &out.telemetry);
                let e = &out.ensemble;
                (
                    error_rate_of(e, &train)?,
                    error_rate_of(e, &test)?,
                    Some(e.len()),
                    to_json(e),
                )
            }
        };
    Ok(CellOutput {
        record: RunRecord {
            fold,
            run,
            seed,
            train_error: train_error.as_f64(),
            test_error: test_error.as_f64(),
            ensemble_size,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
        telemetry,
        model,
        warnings,
    })
}
