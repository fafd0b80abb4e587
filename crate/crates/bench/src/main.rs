use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use eel_bench::config::{load_config, ExperimentConfig, Method, Profile};
use eel_bench::experiment::{run_experiment, RunOptions};
use eel_bench::prep::{discretize_target, parse_thresholds};
use eel_bench::report::{
    compare_reports, comparison_text, emit_report, read_report, telemetry_csv, write_report,
    write_text, Pairing, ReportFormat,
};

#[derive(Parser)]
#[command(
    name = "eel",
    version,
    about = "Evolutionary ensemble learning benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method over the cross-validation grid and write a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// lms, ga, boost, off-eel or on-eel; overrides the config file.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Master seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Settings applied before the config file (desk or paper).
        #[arg(long, value_parser = parse_profile)]
        profile: Option<Profile>,
        /// Also write the per-run records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write a markdown table row.
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// Report the markdown p-value is computed against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Per-generation (or per-epoch, per-round) telemetry CSV.
        #[arg(long)]
        telemetry: Option<PathBuf>,
        /// Directory for one JSON model file per (fold, run).
        #[arg(long)]
        models: Option<PathBuf>,
        /// Progress on stderr; writes telemetry next to the report unless
        /// --telemetry is given.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Paired t-tests between two reports.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Average runs within each fold before pairing.
        #[arg(long)]
        per_fold: bool,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Convert a JSON report to another format.
    Emit {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_parser = parse_format)]
        format: ReportFormat,
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a continuous target into three classes by two thresholds.
    PrepBos {
        #[arg(long, default_value = "data/boston.csv")]
        input: PathBuf,
        #[arg(long, default_value = "data/bos.csv")]
        output: PathBuf,
        #[arg(long, default_value = "18.77,23.74")]
        thresholds: String,
        /// Zero-based target column; defaults to the last one.
        #[arg(long)]
        target_column: Option<usize>,
    },
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    match s {
        "desk" => Ok(Profile::Desk),
        "paper" => Ok(Profile::Paper),
        _ => Err(format!("unknown profile {s:?} (desk or paper)")),
    }
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            method,
            out,
            workers,
            seed,
            profile,
            csv,
            markdown,
            reference,
            telemetry,
            models,
            verbose,
        } => {
            let base =
                profile.map_or_else(ExperimentConfig::default, ExperimentConfig::with_profile);
            let parsed = load_config(&config, base)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = parsed.config;
            match (method, parsed.method_given) {
                (Some(m), _) => cfg.method = m,
                (None, true) => {}
                (None, false) => bail!("no method: pass --method or set `method` in the config"),
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let run = run_experiment(
                &cfg,
                &RunOptions {
                    workers,
                    progress: verbose,
                },
            )?;
            let report = &run.report;
            write_report(report, ReportFormat::Json, None, &out)?;
            if let Some(path) = csv {
                write_report(report, ReportFormat::Csv, None, &path)?;
            }
            if let Some(path) = markdown {
                let reference = reference.as_deref().map(read_report).transpose()?;
                write_report(report, ReportFormat::Markdown, reference.as_ref(), &path)?;
            }
            let telemetry = telemetry.or_else(|| verbose.then(|| sibling(&out, "telemetry.csv")));
            if let Some(path) = telemetry {
                write_text(&path, &telemetry_csv(&run.telemetry)?)?;
            }
            if let Some(dir) = models {
                std::fs::create_dir_all(&dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                for m in &run.models {
                    let path = dir.join(format!("fold{}_run{}.json", m.fold, m.run));
                    write_text(&path, &serde_json::to_string_pretty(&m.model)?)?;
                }
            }
            let s = &report.summary;
            println!(
                "{} on {}: train {:.4} ({:.4}), test {:.4} ({:.4}){}",
                report.method,
                report.dataset,
                s.train_error.mean,
                s.train_error.std,
                s.test_error.mean,
                s.test_error.std,
                s.ensemble_size
                    .map(|e| format!(", size {:.1} ({:.1})", e.mean, e.std))
                    .unwrap_or_default()
            );
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Compare {
            a,
            b,
            per_fold,
            json,
        } => {
            let (ra, rb) = (read_report(&a)?, read_report(&b)?);
            let pairing = if per_fold {
                Pairing::PerFold
            } else {
                Pairing::PerRun
            };
            let cmp = compare_reports(&ra, &rb, pairing)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&cmp)?);
            } else {
                print!("{}", comparison_text(&ra, &rb, &cmp));
            }
        }
        Command::Emit {
            report,
            format,
            reference,
            out,
        } => {
            let r = read_report(&report)?;
            let reference = reference.as_deref().map(read_report).transpose()?;
            match out {
                Some(path) => write_report(&r, format, reference.as_ref(), &path)?,
                None => print!("{}", emit_report(&r, format, reference.as_ref())?),
            }
        }
        Command::PrepBos {
            input,
            output,
            thresholds,
            target_column,
        } => {
            let t = parse_thresholds(&thresholds)?;
            let s = discretize_target(&input, &output, t, target_column)?;
            println!(
                "wrote {} rows to {} (class counts {:?})",
                s.rows,
                output.display(),
                s.class_counts
            );
        }
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
