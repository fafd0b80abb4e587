//! Evolutionary ensemble learning strategies and the single-hypothesis GA.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{decode, genome_len, LinearClassifier, Predict};
use crate::dataset::Dataset;
use crate::ensemble::{
    select_ensemble, vote_errors, Candidate, DedupMode, Ensemble, SelectionOutcome,
};
use crate::error::{Error, Result};
use crate::fitness::{correct_sum, error_count, example_weights, FitnessParams};
use crate::ga::{evolve_generation, init_population, Evaluator, GaConfig, Individual, Population};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Select once from the final population.
    #[default]
    Off,
    /// Grow the ensemble every generation.
    On,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EelConfig {
    pub ga: GaConfig,
    pub fitness: FitnessParams,
    pub strategy: Strategy,
    pub dedup: DedupMode,
}

/// One row of per-generation telemetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    /// Lowest training error of a single population member.
    pub best_train_error: f64,
    pub ensemble_size: Option<usize>,
    pub ensemble_train_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct EelOutcome<F: Float> {
    pub ensemble: Ensemble<LinearClassifier<F>>,
    /// Lowest-training-error member of the population the ensemble was seeded from.
    pub best_single: LinearClassifier<F>,
    /// Outcome of the last selection pass.
    pub selection: SelectionOutcome,
    pub train_error: f64,
    pub generations: usize,
    pub evaluations: usize,
    pub telemetry: Vec<GenerationStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct GaSingleOutcome<F: Float> {
    /// Best individual seen in any generation.
    pub classifier: LinearClassifier<F>,
    pub train_error: f64,
    /// Best individual of the final generation.
    pub last_generation_best: LinearClassifier<F>,
    pub generations: usize,
    pub evaluations: usize,
    pub telemetry: Vec<GenerationStats>,
}

fn check_training_set<F: Float>(train: &Dataset<F>, ga: &GaConfig) -> Result<usize> {
    ga.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    train.ensure_multiclass()?;
    genome_len(train.n_classes(), train.n_features())
}

/// Decodes genomes and caches training-set predictions for individuals that lack them.
fn predict_population<F: Float>(
    individuals: &mut [Individual<F>],
    data: &Dataset<F>,
) -> Result<()> {
    individuals.par_iter_mut().try_for_each(|ind| {
        let c = decode(&ind.genome, data.n_classes(), data.n_features())?;
        ind.predictions = c.predict_dataset(data)?;
        Ok(())
    })
}

fn decode_all<F: Float>(
    pop: &Population<F>,
    data: &Dataset<F>,
) -> Result<Vec<LinearClassifier<F>>> {
    pop.individuals
        .iter()
        .map(|ind| decode(&ind.genome, data.n_classes(), data.n_features()))
        .collect()
}

/// Position of the member with the fewest training errors, lowest index on ties.
fn lowest_error_index<F: Float>(pop: &Population<F>, labels: &[usize]) -> (usize, usize) {
    let mut best = (0, usize::MAX);
    for (i, ind) in pop.individuals.iter().enumerate() {
        let e = error_count(&ind.predictions, labels);
        if e < best.1 {
            best = (i, e);
        }
    }
    best
}

/// Fitness = training accuracy.
struct AccuracyEvaluator<'a, F: Float> {
    data: &'a Dataset<F>,
}

impl<F: Float> Evaluator<F> for AccuracyEvaluator<'_, F> {
    fn evaluate(&mut self, individuals: &mut [Individual<F>]) -> Result<()> {
        predict_population(individuals, self.data)?;
        let n = F::cast(self.data.len() as f64);
        for ind in individuals {
            let errors = F::cast(error_count(&ind.predictions, self.data.labels()) as f64);
            ind.fitness = (n - errors) / n;
            ind.evaluated = true;
        }
        Ok(())
    }
}

/// Cumulated hardness with the evaluated population itself as reference set.
struct PopulationDiversityEvaluator<'a, F: Float> {
    data: &'a Dataset<F>,
    params: FitnessParams,
}

impl<F: Float> Evaluator<F> for PopulationDiversityEvaluator<'_, F> {
    fn evaluate(&mut self, individuals: &mut [Individual<F>]) -> Result<()> {
        predict_population(individuals, self.data)?;
        let labels = self.data.labels();
        let weights = example_weights::<F, _>(
            individuals.iter().map(|i| i.predictions.as_slice()),
            labels,
            self.params.loss,
        )?;
        let powered = weights.powered(self.params.gamma);
        for ind in individuals {
            ind.fitness = correct_sum(&ind.predictions, labels, &powered);
            ind.evaluated = true;
        }
        Ok(())
    }
}

/// Cumulated hardness against fixed, pre-powered weights.
struct ReferenceDiversityEvaluator<'a, F: Float> {
    data: &'a Dataset<F>,
    powered: &'a [F],
}

impl<F: Float> Evaluator<F> for ReferenceDiversityEvaluator<'_, F> {
    fn evaluate(&mut self, individuals: &mut [Individual<F>]) -> Result<()> {
        predict_population(individuals, self.data)?;
        rescore(individuals, self.data.labels(), self.powered);
        Ok(())
    }
}

fn rescore<F: Float>(individuals: &mut [Individual<F>], labels: &[usize], powered: &[F]) {
    for ind in individuals {
        ind.fitness = correct_sum(&ind.predictions, labels, powered);
        ind.evaluated = true;
    }
}

fn population_stats<F: Float>(pop: &Population<F>, labels: &[usize]) -> GenerationStats {
    let best_fitness = pop
        .best_index()
        .map_or(f64::NAN, |i| pop.individuals[i].fitness.as_f64());
    let (_, errors) = lowest_error_index(pop, labels);
    GenerationStats {
        generation: pop.generation,
        best_fitness,
        best_train_error: errors as f64 / labels.len() as f64,
        ensemble_size: None,
        ensemble_train_error: None,
    }
}

fn candidates<'a, F: Float>(
    classifiers: &'a [LinearClassifier<F>],
    pop: &'a Population<F>,
) -> Vec<Candidate<'a, LinearClassifier<F>>> {
    classifiers
        .iter()
        .zip(&pop.individuals)
        .map(|(c, ind)| Candidate {
            classifier: c,
            predictions: &ind.predictions,
        })
        .collect()
}

/// Offline evolutionary ensemble learning.
///
/// Runs the GA for the whole budget with the cumulated-hardness fitness,
/// the reference set being the entire current population (the evaluated
/// individual included). The ensemble is then selected from the final
/// population, seeded with its lowest-training-error member.
pub fn off_eel<F: Float, R: Rng + ?Sized>(
    train: &Dataset<F>,
    cfg: &EelConfig,
    rng: &mut R,
) -> Result<EelOutcome<F>> {
    let len = check_training_set(train, &cfg.ga)?;
    cfg.fitness.validate()?;
    let labels = train.labels();
    let mut evaluator = PopulationDiversityEvaluator {
        data: train,
        params: cfg.fitness,
    };
    let mut pop = init_population(&cfg.ga, len, rng)?;
    pop.evaluate_all(&mut evaluator)?;
    let mut telemetry = vec![population_stats(&pop, labels)];
    for _ in 1..cfg.ga.generations() {
        pop = evolve_generation(&pop, &mut evaluator, &cfg.ga, rng)?;
        telemetry.push(population_stats(&pop, labels));
    }

    let classifiers = decode_all(&pop, train)?;
    let (best, _) = lowest_error_index(&pop, labels);
    let pool = candidates(&classifiers, &pop);
    let selection = select_ensemble(
        &pool,
        &pool[best..=best],
        labels,
        train.n_classes(),
        cfg.dedup,
    )?;
    let mut members = vec![classifiers[best].clone()];
    members.extend(selection.selected().iter().map(|&i| classifiers[i].clone()));
    let train_error = selection.errors() as f64 / train.len() as f64;
    if let Some(last) = telemetry.last_mut() {
        last.ensemble_size = Some(members.len());
        last.ensemble_train_error = Some(train_error);
    }
    Ok(EelOutcome {
        ensemble: Ensemble::new(members),
        best_single: classifiers[best].clone(),
        selection,
        train_error,
        generations: pop.generation,
        evaluations: pop.evaluations,
        telemetry,
    })
}

/// Online evolutionary ensemble learning.
///
/// The first population is scored by training accuracy and seeds the
/// ensemble through one selection pass. Every later generation is evolved
/// with the current ensemble as the reference set, after which a selection
/// pass over the new population may append members. Members are never
/// removed, so each ensemble is a prefix of the next.
pub fn on_eel<F: Float, R: Rng + ?Sized>(
    train: &Dataset<F>,
    cfg: &EelConfig,
    rng: &mut R,
) -> Result<EelOutcome<F>> {
    let len = check_training_set(train, &cfg.ga)?;
    cfg.fitness.validate()?;
    let labels = train.labels();
    let k = train.n_classes();

    let mut pop = init_population(&cfg.ga, len, rng)?;
    pop.evaluate_all(&mut AccuracyEvaluator { data: train })?;
    let classifiers = decode_all(&pop, train)?;
    let (best, _) = lowest_error_index(&pop, labels);
    let best_single = classifiers[best].clone();
    let pool = candidates(&classifiers, &pop);
    let mut selection = select_ensemble(&pool, &pool[best..=best], labels, k, cfg.dedup)?;
    let mut members = vec![classifiers[best].clone()];
    let mut member_preds = vec![pop.individuals[best].predictions.clone()];
    for &i in selection.selected() {
        members.push(classifiers[i].clone());
        member_preds.push(pop.individuals[i].predictions.clone());
    }

    let ensemble_stats = |pop: &Population<F>, members: usize, errors: usize| GenerationStats {
        ensemble_size: Some(members),
        ensemble_train_error: Some(errors as f64 / labels.len() as f64),
        ..population_stats(pop, labels)
    };
    let mut telemetry = vec![ensemble_stats(&pop, members.len(), selection.errors())];

    let mut powered: Vec<F> = Vec::new();
    let mut reference_len = 0;
    for _ in 1..cfg.ga.generations() {
        if reference_len != members.len() {
            let weights = example_weights::<F, _>(
                member_preds.iter().map(Vec::as_slice),
                labels,
                cfg.fitness.loss,
            )?;
            powered = weights.powered(cfg.fitness.gamma);
            reference_len = members.len();
            // Parents are re-ranked under the new reference set; no new evaluations are charged.
            rescore(&mut pop.individuals, labels, &powered);
        }
        let mut evaluator = ReferenceDiversityEvaluator {
            data: train,
            powered: &powered,
        };
        pop = evolve_generation(&pop, &mut evaluator, &cfg.ga, rng)?;

        let classifiers = decode_all(&pop, train)?;
        let pool = candidates(&classifiers, &pop);
        let initial: Vec<Candidate<'_, LinearClassifier<F>>> = members
            .iter()
            .zip(&member_preds)
            .map(|(c, p)| Candidate {
                classifier: c,
                predictions: p,
            })
            .collect();
        selection = select_ensemble(&pool, &initial, labels, k, cfg.dedup)?;
        drop(initial);
        for &i in selection.selected() {
            members.push(classifiers[i].clone());
            member_preds.push(pop.individuals[i].predictions.clone());
        }
        telemetry.push(ensemble_stats(&pop, members.len(), selection.errors()));
    }

    let errors = vote_errors(member_preds.iter().map(Vec::as_slice), labels, k)?;
    Ok(EelOutcome {
        ensemble: Ensemble::new(members),
        best_single,
        selection,
        train_error: errors as f64 / train.len() as f64,
        generations: pop.generation,
        evaluations: pop.evaluations,
        telemetry,
    })
}

/// Plain GA minimising training error; returns the best individual of the run.
pub fn ga_single<F: Float, R: Rng + ?Sized>(
    train: &Dataset<F>,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<GaSingleOutcome<F>> {
    let len = check_training_set(train, cfg)?;
    let labels = train.labels();
    let mut evaluator = AccuracyEvaluator { data: train };
    let mut pop = init_population(cfg, len, rng)?;
    pop.evaluate_all(&mut evaluator)?;

    let best_of = |pop: &Population<F>| {
        let i = pop.best_index().expect("population is nonempty");
        pop.individuals[i].clone()
    };
    let mut best = best_of(&pop);
    let mut telemetry = vec![population_stats(&pop, labels)];
    for _ in 1..cfg.generations() {
        pop = evolve_generation(&pop, &mut evaluator, cfg, rng)?;
        let candidate = best_of(&pop);
        if candidate.fitness > best.fitness {
            best = candidate;
        }
        telemetry.push(population_stats(&pop, labels));
    }
    let last = best_of(&pop);
    let (k, d) = (train.n_classes(), train.n_features());
    Ok(GaSingleOutcome {
        classifier: decode(&best.genome, k, d)?,
        train_error: error_count(&best.predictions, labels) as f64 / train.len() as f64,
        last_generation_best: decode(&last.genome, k, d)?,
        generations: pop.generation,
        evaluations: pop.evaluations,
        telemetry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::ensemble_error_count;
    use crate::fitness::error_rate_of;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Two noisy Gaussian-ish blobs in 3-D; not linearly separable.
    fn blobs(n: usize, k: usize, seed: u64) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let y = i % k;
            let center = y as f64 - (k as f64 - 1.0) / 2.0;
            rows.push(
                (0..3)
                    .map(|j| center * if j == 0 { 0.6 } else { 0.2 } + rng.random_range(-0.5..0.5))
                    .collect(),
            );
            labels.push(y);
        }
        Dataset::from_rows(&rows, labels, k).unwrap()
    }

    fn quick(pop: usize, evals: usize) -> EelConfig {
        EelConfig {
            ga: GaConfig {
                population_size: pop,
                max_evaluations: evals,
                ..GaConfig::default()
            },
            ..EelConfig::default()
        }
    }

    #[test]
    fn off_eel_single_generation_beats_best_member() {
        let data = blobs(60, 2, 1);
        let cfg = EelConfig {
            ga: GaConfig {
                sbx_probability: 0.0,
                mutation_probability: 0.0,
                ..quick(20, 20).ga
            },
            ..EelConfig::default()
        };
        let out = off_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(out.generations, 1);
        assert_eq!(out.evaluations, 20);
        let single: f64 = error_rate_of(&out.best_single, &data).unwrap();
        assert!(out.train_error <= single);
        assert_eq!(
            ensemble_error_count(&out.ensemble, &data).unwrap() as f64 / data.len() as f64,
            out.train_error
        );
        assert_eq!(out.ensemble.members[0], out.best_single);
    }

    #[test]
    fn off_eel_runs_full_budget_and_is_deterministic() {
        let data = blobs(45, 3, 3);
        let cfg = quick(20, 200);
        let a = off_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = off_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.generations, 10);
        assert_eq!(a.evaluations, 200);
        assert_eq!(a.telemetry.len(), 10);
        assert!(a.ensemble.len() <= 21);
        let single: f64 = error_rate_of(&a.best_single, &data).unwrap();
        assert!(a.train_error <= single);
    }

    #[test]
    fn gamma_zero_off_eel_seed_equals_ga_last_best() {
        let data = blobs(50, 2, 5);
        let cfg = EelConfig {
            fitness: FitnessParams {
                gamma: 0.0,
                ..FitnessParams::default()
            },
            ..quick(20, 200)
        };
        let off = off_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let ga = ga_single(&data, &cfg.ga, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(off.best_single, ga.last_generation_best);
    }

    #[test]
    fn on_eel_single_generation_is_one_selection() {
        let data = blobs(40, 2, 7);
        let cfg = quick(10, 10);
        let out = on_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(out.generations, 1);
        // Reproduce the single selection pass by hand.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pop: Population<f64> = init_population(&cfg.ga, 4, &mut rng).unwrap();
        let classifiers: Vec<LinearClassifier<f64>> = pop
            .individuals
            .iter()
            .map(|i| decode(&i.genome, 2, 3).unwrap())
            .collect();
        let best = classifiers
            .iter()
            .enumerate()
            .min_by_key(|(i, c)| {
                (
                    error_count(&c.predict_dataset(&data).unwrap(), data.labels()),
                    *i,
                )
            })
            .unwrap()
            .0;
        let (expected, _) = crate::ensemble::ensemble_selection(
            &classifiers,
            &data,
            &Ensemble::new(vec![classifiers[best].clone()]),
            DedupMode::Genome,
        )
        .unwrap();
        assert_eq!(out.ensemble, expected);
    }

    #[test]
    fn on_eel_ensembles_only_grow() {
        let data = blobs(45, 3, 9);
        let cfg = quick(16, 160);
        let out = on_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        let sizes: Vec<usize> = out
            .telemetry
            .iter()
            .map(|t| t.ensemble_size.unwrap())
            .collect();
        assert_eq!(sizes.len(), 10);
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*sizes.last().unwrap(), out.ensemble.len());
        assert_eq!(out.ensemble.members[0], out.best_single);
        let again = on_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn ga_single_with_no_evolution_returns_initial_best() {
        let data = blobs(30, 2, 11);
        let cfg = quick(12, 12).ga;
        let out = ga_single(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pop: Population<f64> = init_population(&cfg, 4, &mut rng).unwrap();
        let best = pop
            .individuals
            .iter()
            .map(|i| decode(&i.genome, 2, 3).unwrap())
            .min_by_key(|c| error_count(&c.predict_dataset(&data).unwrap(), data.labels()))
            .unwrap();
        assert_eq!(out.classifier, best);
        assert_eq!(out.generations, 1);
    }

    #[test]
    fn ga_single_best_of_run_dominates_telemetry() {
        let data = blobs(40, 3, 13);
        let out = ga_single(
            &data,
            &quick(20, 300).ga,
            &mut ChaCha8Rng::seed_from_u64(14),
        )
        .unwrap();
        let min_seen = out
            .telemetry
            .iter()
            .map(|t| t.best_train_error)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.train_error, min_seen);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = blobs(20, 2, 15);
        let mut cfg = quick(20, 200);
        cfg.ga.population_size = 7;
        assert!(off_eel(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let single = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![0, 0], 2).unwrap();
        assert!(matches!(
            on_eel(&single, &quick(4, 8), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::SingleClass)
        ));
        let four = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![0, 3], 4).unwrap();
        assert!(matches!(
            ga_single(&four, &quick(4, 8).ga, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::UnsupportedClassCount(4))
        ));
    }
}
