//! Evolutionary ensemble learning over evolved separating hyperplanes.
//!
//! The crate evolves a population of linear classifiers under a
//! diversity-enforcing fitness (the cumulated hardness of the examples a
//! classifier gets right) and extracts a majority-vote ensemble from it with a
//! greedy margin-histogram criterion. Two strategies are provided:
//!
//! * [`strategies::off_eel`] evolves with the whole population as the
//!   reference set and selects the ensemble once from the final population.
//! * [`strategies::on_eel`] grows the ensemble at every generation and uses it
//!   as the reference set for the next one.
//!
//! Baselines for comparison live in [`baselines`] (least-mean-squares
//! hyperplanes, AdaBoost.M1 over decision stumps) and
//! [`strategies::ga_single`] (plain error-minimising GA).
//!
//! All numeric code is generic over [`Float`]; the `*64` and `*32` aliases
//! below fix the scalar type for callers that do not care.

pub mod baselines;
pub mod classifiers;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod fitness;
pub mod ga;
mod scalar;
pub mod stats;
pub mod strategies;

pub use crate::error::{Error, Result};
pub use crate::scalar::Float;

pub use crate::baselines::{
    adaboost_train, lms_train, weighted_vote, BoostConfig, BoostOutcome, BoostStop, LmsConfig,
    LmsOutcome, LmsSign, RmsTrace, WeightedEnsemble,
};
pub use crate::classifiers::{
    decode, train_stump, Comparison, DecisionStump, Genome, Hyperplane, LinearClassifier, Predict,
    StumpTrainer,
};
pub use crate::dataset::{
    load_csv, read_csv, stratified_kfold, CsvOptions, Dataset, FoldPlan, NormParams, Normalization,
};
pub use crate::ensemble::{
    compare_ensembles, compute_margins, ensemble_selection, majority_vote, margin_histogram,
    Candidate, DedupMode, Ensemble, MarginHistogram, MarginRecord, SelectionOutcome,
};
pub use crate::fitness::{
    diversity_fitness, error_count, error_rate, example_weights, FitnessParams, LossFn,
    WeightVector,
};
pub use crate::ga::{
    gaussian_mutation, init_population, sbx_crossover, tournament_select, Evaluator, GaConfig,
    Individual, MutationScope, Population,
};
pub use crate::stats::{mean_std, paired_ttest, MeanStd, TTest};
pub use crate::strategies::{
    ga_single, off_eel, on_eel, EelConfig, EelOutcome, GaSingleOutcome, GenerationStats, Strategy,
};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type NormParams64 = NormParams<f64>;
pub type Hyperplane64 = Hyperplane<f64>;
pub type LinearClassifier64 = LinearClassifier<f64>;
pub type LinearClassifier32 = LinearClassifier<f32>;
pub type Genome64 = Genome<f64>;
pub type DecisionStump64 = DecisionStump<f64>;
pub type WeightedEnsemble64 = WeightedEnsemble<f64>;
pub type LinearEnsemble64 = Ensemble<LinearClassifier<f64>>;
pub type LinearEnsemble32 = Ensemble<LinearClassifier<f32>>;
pub type WeightVector64 = WeightVector<f64>;
pub type Individual64 = Individual<f64>;
pub type Population64 = Population<f64>;
pub type EelOutcome64 = EelOutcome<f64>;
