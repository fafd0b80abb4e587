//! Real-valued generational GA: uniform initialization, tournament
//! selection, simulated binary crossover and Gaussian mutation, run against
//! a fitness-evaluation budget. Offspring replace the parents wholesale.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classifiers::Genome;
use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationScope {
    /// The mutation probability is drawn once per offspring; a hit perturbs every gene.
    #[default]
    Individual,
    /// Each gene is perturbed independently with the mutation probability.
    Gene,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_evaluations: usize,
    pub tournament_size: usize,
    pub init_range: (f64, f64),
    pub sbx_probability: f64,
    pub sbx_eta: f64,
    pub mutation_probability: f64,
    pub mutation_sigma: f64,
    pub mutation_scope: MutationScope,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 500,
            max_evaluations: 100_000,
            tournament_size: 2,
            init_range: (-1.0, 1.0),
            sbx_probability: 0.3,
            sbx_eta: 2.0,
            mutation_probability: 0.1,
            mutation_sigma: 0.05,
            mutation_scope: MutationScope::Individual,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return bad(format!(
                "population size {} must be even and >= 2",
                self.population_size
            ));
        }
        if self.max_evaluations < self.population_size {
            return bad(format!(
                "budget of {} evaluations cannot cover the initial population of {}",
                self.max_evaluations, self.population_size
            ));
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be >= 1".into());
        }
        for (name, p) in [
            ("sbx_probability", self.sbx_probability),
            ("mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.mutation_sigma.is_nan() || self.mutation_sigma <= 0.0 {
            return bad(format!(
                "mutation sigma {} must be > 0",
                self.mutation_sigma
            ));
        }
        if self.sbx_eta.is_nan() || self.sbx_eta < 0.0 {
            return bad(format!("SBX eta {} must be >= 0", self.sbx_eta));
        }
        if self.init_range.0.is_nan()
            || self.init_range.1.is_nan()
            || self.init_range.0 > self.init_range.1
        {
            return bad("empty initialization range".into());
        }
        Ok(())
    }

    /// Generations that fit in the budget, counting the initial population.
    pub fn generations(&self) -> usize {
        self.max_evaluations / self.population_size.max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct Individual<F> {
    pub genome: Genome<F>,
    pub fitness: F,
    /// Predicted class of every training example; valid when `evaluated`.
    pub predictions: Vec<usize>,
    pub evaluated: bool,
}

impl<F: Float> Individual<F> {
    pub fn new(genome: Genome<F>) -> Self {
        Self {
            genome,
            fitness: F::neg_infinity(),
            predictions: Vec::new(),
            evaluated: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct Population<F> {
    pub individuals: Vec<Individual<F>>,
    pub generation: usize,
    pub evaluations: usize,
}

impl<F: Float> Population<F> {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Evaluates every individual, charging one evaluation each.
    pub fn evaluate_all<E: Evaluator<F> + ?Sized>(&mut self, evaluator: &mut E) -> Result<()> {
        evaluator.evaluate(&mut self.individuals)?;
        self.evaluations += self.individuals.len();
        Ok(())
    }

    /// Index of the highest-fitness individual, lowest index on ties.
    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, ind) in self.individuals.iter().enumerate() {
            if best.is_none_or(|b| ind.fitness > self.individuals[b].fitness) {
                best = Some(i);
            }
        }
        best
    }
}

/// Fills in `fitness` and `predictions` for a batch of individuals.
///
/// The whole offspring population is passed at once so that fitness may
/// depend on the population itself.
pub trait Evaluator<F: Float> {
    fn evaluate(&mut self, individuals: &mut [Individual<F>]) -> Result<()>;
}

impl<F: Float, T: FnMut(&mut [Individual<F>]) -> Result<()>> Evaluator<F> for T {
    fn evaluate(&mut self, individuals: &mut [Individual<F>]) -> Result<()> {
        self(individuals)
    }
}

/// Unevaluated population with genes drawn uniformly from `cfg.init_range`.
pub fn init_population<F: Float, R: Rng + ?Sized>(
    cfg: &GaConfig,
    genome_len: usize,
    rng: &mut R,
) -> Result<Population<F>> {
    if genome_len == 0 {
        return Err(Error::InvalidConfig("genome length must be >= 1".into()));
    }
    let (lo, hi) = cfg.init_range;
    let individuals = (0..cfg.population_size)
        .map(|_| {
            let genes = (0..genome_len)
                .map(|_| F::cast(lo + (hi - lo) * rng.random::<f64>()))
                .collect();
            Individual::new(Genome(genes))
        })
        .collect();
    Ok(Population {
        individuals,
        generation: 1,
        evaluations: 0,
    })
}

/// SBX spread factor for a uniform draw `u` in `[0, 1)`.
pub fn sbx_spread(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// SBX with the per-gene uniform draws supplied by `draw`.
pub fn sbx_with<F: Float>(
    p1: &Genome<F>,
    p2: &Genome<F>,
    eta: f64,
    mut draw: impl FnMut() -> f64,
) -> Result<(Genome<F>, Genome<F>)> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    let half = F::cast(0.5);
    let one = F::one();
    let (c1, c2) = p1
        .genes()
        .iter()
        .zip(p2.genes())
        .map(|(&a, &b)| {
            let beta = F::cast(sbx_spread(draw(), eta));
            (
                half * ((one + beta) * a + (one - beta) * b),
                half * ((one - beta) * a + (one + beta) * b),
            )
        })
        .unzip();
    Ok((Genome(c1), Genome(c2)))
}

/// Simulated binary crossover with distribution index `eta`; children are
/// not clamped to any bounds.
pub fn sbx_crossover<F: Float, R: Rng + ?Sized>(
    p1: &Genome<F>,
    p2: &Genome<F>,
    eta: f64,
    rng: &mut R,
) -> Result<(Genome<F>, Genome<F>)> {
    sbx_with(p1, p2, eta, || rng.random::<f64>())
}

/// Adds independent `N(0, sigma^2)` noise to every gene.
pub fn gaussian_mutation<F: Float, R: Rng + ?Sized>(
    genome: &Genome<F>,
    sigma: f64,
    rng: &mut R,
) -> Genome<F> {
    Genome(
        genome
            .genes()
            .iter()
            .map(|&g| g + F::cast(sigma * rng.sample::<f64, _>(StandardNormal)))
            .collect(),
    )
}

fn mutate_in_place<F: Float, R: Rng + ?Sized>(genome: &mut Genome<F>, cfg: &GaConfig, rng: &mut R) {
    match cfg.mutation_scope {
        MutationScope::Individual => {
            if rng.random::<f64>() < cfg.mutation_probability {
                *genome = gaussian_mutation(genome, cfg.mutation_sigma, rng);
            }
        }
        MutationScope::Gene => {
            for g in &mut genome.0 {
                if rng.random::<f64>() < cfg.mutation_probability {
                    *g = *g + F::cast(cfg.mutation_sigma * rng.sample::<f64, _>(StandardNormal));
                }
            }
        }
    }
}

/// Draws `size` individuals uniformly with replacement and returns the
/// fittest, the earliest draw winning ties.
pub fn tournament_select<'a, F: Float, R: Rng + ?Sized>(
    individuals: &'a [Individual<F>],
    size: usize,
    rng: &mut R,
) -> Result<&'a Individual<F>> {
    if individuals.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut best = &individuals[rng.random_range(0..individuals.len())];
    for _ in 1..size {
        let other = &individuals[rng.random_range(0..individuals.len())];
        if other.fitness > best.fitness {
            best = other;
        }
    }
    Ok(best)
}

/// Builds and evaluates the next generation.
///
/// Parents are picked in pairs by tournament; with `sbx_probability` they
/// are recombined, otherwise copied; each child is then mutated according to
/// `mutation_scope`. Exactly `population_size` evaluations are charged.
pub fn evolve_generation<F: Float, E: Evaluator<F> + ?Sized, R: Rng + ?Sized>(
    pop: &Population<F>,
    evaluator: &mut E,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Population<F>> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let size = pop.len();
    if pop.evaluations + size > cfg.max_evaluations {
        return Err(Error::BudgetExhausted(cfg.max_evaluations));
    }
    let mut offspring = Vec::with_capacity(size);
    while offspring.len() < size {
        let a = tournament_select(&pop.individuals, cfg.tournament_size, rng)?;
        let b = tournament_select(&pop.individuals, cfg.tournament_size, rng)?;
        let (mut c1, mut c2) = if rng.random::<f64>() < cfg.sbx_probability {
            sbx_crossover(&a.genome, &b.genome, cfg.sbx_eta, rng)?
        } else {
            (a.genome.clone(), b.genome.clone())
        };
        mutate_in_place(&mut c1, cfg, rng);
        mutate_in_place(&mut c2, cfg, rng);
        offspring.push(Individual::new(c1));
        if offspring.len() < size {
            offspring.push(Individual::new(c2));
        }
    }
    let mut next = Population {
        individuals: offspring,
        generation: pop.generation + 1,
        evaluations: pop.evaluations,
    };
    next.evaluate_all(evaluator)?;
    Ok(next)
}
