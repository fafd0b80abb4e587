//! Reference learners: least-mean-squares hyperplanes and AdaBoost.M1 over
//! decision stumps.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{DecisionStump, Hyperplane, LinearClassifier, Predict, StumpTrainer};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Float;

/// Direction of the LMS weight update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LmsSign {
    /// `delta = 2 eta (y - a)`: gradient descent on the squared error.
    #[default]
    Corrected,
    /// `delta = 2 eta (a - y)` with the same `w += delta x, b -= delta`
    /// structure. This climbs the squared error; kept only for comparison.
    Verbatim,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmsConfig {
    pub max_epochs: usize,
    pub stop_epsilon: f64,
    pub sign: LmsSign,
}

impl Default for LmsConfig {
    fn default() -> Self {
        Self {
            max_epochs: 10_000,
            stop_epsilon: 1e-7,
            sign: LmsSign::Corrected,
        }
    }
}

impl LmsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("lms max_epochs must be >= 1".into()));
        }
        if self.stop_epsilon.is_nan() || self.stop_epsilon <= 0.0 {
            return Err(Error::InvalidConfig("lms stop_epsilon must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch RMS error of one trained hyperplane. `rms[0]` is the error of
/// the zero hyperplane; `rms[t]` is measured during epoch `t`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RmsTrace {
    pub rms: Vec<f64>,
}

impl RmsTrace {
    pub fn epochs(&self) -> usize {
        self.rms.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct LmsOutcome<F: Float> {
    pub classifier: LinearClassifier<F>,
    /// One trace per hyperplane (two for three-class problems).
    pub traces: Vec<RmsTrace>,
}

/// Root-mean-square of `<w, x_i> - b - y_i`.
pub fn rms_error<F: Float>(plane: &Hyperplane<F>, data: &Dataset<F>, targets: &[F]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut ss = 0.0;
    for (x, &y) in data.rows().zip(targets) {
        ss += (plane.activation(x)? - y).as_f64().powi(2);
    }
    Ok((ss / data.len() as f64).sqrt())
}

/// `+1` for examples of `positive`, `-1` for the rest.
pub fn one_vs_rest_targets<F: Float>(labels: &[usize], positive: usize) -> Vec<F> {
    labels
        .iter()
        .map(|&l| if l == positive { F::one() } else { -F::one() })
        .collect()
}

/// Trains one hyperplane by per-example stochastic gradient steps with the
/// rate `1 / (n sqrt(t))`, reshuffling every epoch.
pub fn lms_plane<F: Float, R: Rng + ?Sized>(
    data: &Dataset<F>,
    targets: &[F],
    cfg: &LmsConfig,
    rng: &mut R,
) -> Result<(Hyperplane<F>, RmsTrace)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if targets.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: targets.len(),
            right: data.len(),
        });
    }
    let n = data.len();
    let mut plane = Hyperplane::zeros(data.n_features());
    let mut trace = RmsTrace {
        rms: vec![rms_error(&plane, data, targets)?],
    };
    let mut order: Vec<usize> = (0..n).collect();
    let two = F::cast(2.0);
    for t in 1..=cfg.max_epochs {
        let eta = F::cast(1.0 / (n as f64 * (t as f64).sqrt()));
        order.shuffle(rng);
        let mut ss = 0.0;
        for &i in &order {
            let x = data.row(i);
            let a = plane.activation_unchecked(x);
            let y = targets[i];
            ss += (a - y).as_f64().powi(2);
            let delta = match cfg.sign {
                LmsSign::Corrected => two * eta * (y - a),
                LmsSign::Verbatim => two * eta * (a - y),
            };
            for (w, &xj) in plane.weights.iter_mut().zip(x) {
                *w = *w + delta * xj;
            }
            plane.bias = plane.bias - delta;
        }
        let err = (ss / n as f64).sqrt();
        let prev = *trace.rms.last().expect("trace starts nonempty");
        trace.rms.push(err);
        if (err - prev).abs() < cfg.stop_epsilon || !err.is_finite() {
            break;
        }
    }
    Ok((plane, trace))
}

/// LMS classifier. Binary problems use one hyperplane with class 1 as the
/// `+1` target. Three-class problems train class 0 vs rest and class 1 vs
/// rest and combine them with the ternary decision rule.
pub fn lms_train<F: Float, R: Rng + ?Sized>(
    train: &Dataset<F>,
    cfg: &LmsConfig,
    rng: &mut R,
) -> Result<LmsOutcome<F>> {
    match train.n_classes() {
        2 => {
            let targets = one_vs_rest_targets(train.labels(), 1);
            let (plane, trace) = lms_plane(train, &targets, cfg, rng)?;
            Ok(LmsOutcome {
                classifier: LinearClassifier::Binary(plane),
                traces: vec![trace],
            })
        }
        3 => {
            let t0 = one_vs_rest_targets(train.labels(), 0);
            let (p0, tr0) = lms_plane(train, &t0, cfg, rng)?;
            let t1 = one_vs_rest_targets(train.labels(), 1);
            let (p1, tr1) = lms_plane(train, &t1, cfg, rng)?;
            Ok(LmsOutcome {
                classifier: LinearClassifier::Ternary(p0, p1),
                traces: vec![tr0, tr1],
            })
        }
        k => Err(Error::UnsupportedClassCount(k)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub max_rounds: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self { max_rounds: 2000 }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::InvalidConfig("boost max_rounds must be >= 1".into()));
        }
        Ok(())
    }
}

/// Stumps combined by an alpha-weighted plurality vote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct WeightedEnsemble<F> {
    pub n_classes: usize,
    pub stumps: Vec<DecisionStump<F>>,
    pub alphas: Vec<F>,
}

impl<F: Float> WeightedEnsemble<F> {
    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }
}

/// Class with the largest summed alpha; ties go to the lowest index.
pub fn weighted_vote<F: Float>(e: &WeightedEnsemble<F>, x: &[F]) -> Result<usize> {
    if e.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut scores = vec![F::zero(); e.n_classes];
    for (s, &a) in e.stumps.iter().zip(&e.alphas) {
        let c = s.predict(x)?;
        let slot = scores.get_mut(c).ok_or(Error::LabelOutOfRange {
            label: c,
            classes: e.n_classes,
        })?;
        *slot = *slot + a;
    }
    let mut best = 0;
    for (c, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = c;
        }
    }
    Ok(best)
}

impl<F: Float> Predict<F> for WeightedEnsemble<F> {
    fn predict(&self, x: &[F]) -> Result<usize> {
        weighted_vote(self, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoostStop {
    /// All rounds were used.
    Budget,
    /// A stump classified every example; it was kept with a capped alpha.
    PerfectStump,
    /// A later stump was no better than chance and was discarded.
    WeakStump,
    /// Even the first stump was no better than chance; it was kept with
    /// its error clamped just below 1/2.
    WeakFirstStump,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct BoostOutcome<F> {
    pub ensemble: WeightedEnsemble<F>,
    pub stop: BoostStop,
    /// Weighted error of every accepted round.
    pub round_errors: Vec<f64>,
    pub warnings: Vec<String>,
}

const ERROR_FLOOR: f64 = 1e-12;

/// AdaBoost.M1 with exhaustive decision stumps as the weak learner.
pub fn adaboost_train<F: Float>(train: &Dataset<F>, cfg: &BoostConfig) -> Result<BoostOutcome<F>> {
    adaboost_with_observer(train, cfg, |_, _, _| {})
}

/// [`adaboost_train`] that also reports, after every accepted round, the
/// round's stump, its predictions and the renormalised weights.
pub fn adaboost_with_observer<F: Float>(
    train: &Dataset<F>,
    cfg: &BoostConfig,
    mut observe: impl FnMut(&DecisionStump<F>, &[usize], &[F]),
) -> Result<BoostOutcome<F>> {
    cfg.validate()?;
    let k = train.n_classes();
    if !(2..=3).contains(&k) {
        return Err(Error::UnsupportedClassCount(k));
    }
    let trainer = StumpTrainer::new(train)?;
    let labels = train.labels();
    let n = train.len();
    let mut weights = vec![F::cast(1.0 / n as f64); n];
    let mut ensemble = WeightedEnsemble {
        n_classes: k,
        stumps: Vec::new(),
        alphas: Vec::new(),
    };
    let mut round_errors = Vec::new();
    let mut warnings = Vec::new();
    let mut stop = BoostStop::Budget;

    for round in 0..cfg.max_rounds {
        let (stump, _) = trainer.train(&weights)?;
        let preds = stump.predict_dataset(train)?;
        let total: f64 = weights.iter().map(|w| w.as_f64()).sum();
        let wrong: f64 = weights
            .iter()
            .zip(&preds)
            .zip(labels)
            .filter(|((_, p), y)| p != y)
            .map(|((w, _), _)| w.as_f64())
            .sum();
        let mut eps = wrong / total;

        // Reweighting leaves the previous stump at 1/2 only up to rounding.
        if eps >= 0.5 - ERROR_FLOOR {
            if round > 0 {
                stop = BoostStop::WeakStump;
                break;
            }
            warnings.push(format!(
                "first stump has weighted error {eps:.6} >= 0.5; keeping it alone"
            ));
            eps = 0.5 - ERROR_FLOOR;
            stop = BoostStop::WeakFirstStump;
        } else if eps <= 0.0 {
            eps = ERROR_FLOOR;
            stop = BoostStop::PerfectStump;
        }
        let alpha = ((1.0 - eps) / eps).ln();
        ensemble.stumps.push(stump);
        ensemble.alphas.push(F::cast(alpha));
        round_errors.push(eps);
        if stop != BoostStop::Budget {
            break;
        }

        let boost = alpha.exp();
        let mut sum = 0.0;
        for ((w, p), y) in weights.iter_mut().zip(&preds).zip(labels) {
            if p != y {
                *w = F::cast(w.as_f64() * boost);
            }
            sum += w.as_f64();
        }
        for w in &mut weights {
            *w = F::cast(w.as_f64() / sum);
        }
        observe(
            ensemble.stumps.last().expect("just pushed"),
            &preds,
            &weights,
        );
    }
    Ok(BoostOutcome {
        ensemble,
        stop,
        round_errors,
        warnings,
    })
}
