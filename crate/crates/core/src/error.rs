use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} columns, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("label column {column} out of range for {columns} columns")]
    LabelColumnOutOfRange { column: usize, columns: usize },
    #[error("no usable rows")]
    NoUsableRows,
    #[error("data has a single class; at least two are required")]
    SingleClass,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("genome length {found} does not match {expected} for {classes} classes")]
    GenomeLength {
        expected: usize,
        found: usize,
        classes: usize,
    },
    #[error("unsupported class count {0}; linear classifiers handle 2 or 3 classes")]
    UnsupportedClassCount(usize),
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("empty reference set")]
    EmptyReferenceSet,
    #[error("empty population")]
    EmptyPopulation,
    #[error("class {class} has {count} examples, fewer than {folds} folds")]
    ClassTooSmall {
        class: usize,
        count: usize,
        folds: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("histograms describe ensembles of size {left} and {right}")]
    HistogramMismatch { left: usize, right: usize },
    #[error("need at least {required} paired samples, got {found}")]
    TooFewSamples { required: usize, found: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
