//! Separating-hyperplane classifiers, their flat genome encoding, and the
//! decision-stump weak learner used by boosting.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Float;

/// Anything that maps a feature vector to a class index.
pub trait Predict<F: Float> {
    fn predict(&self, x: &[F]) -> Result<usize>;

    fn predict_dataset(&self, data: &Dataset<F>) -> Result<Vec<usize>> {
        data.rows().map(|x| self.predict(x)).collect()
    }
}

impl<F: Float, T: Predict<F> + ?Sized> Predict<F> for &T {
    fn predict(&self, x: &[F]) -> Result<usize> {
        (**self).predict(x)
    }

    fn predict_dataset(&self, data: &Dataset<F>) -> Result<Vec<usize>> {
        (**self).predict_dataset(data)
    }
}

/// `h(x) = <w, x> - b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct Hyperplane<F> {
    pub weights: Vec<F>,
    pub bias: F,
}

impl<F: Float> Hyperplane<F> {
    pub fn new(weights: Vec<F>, bias: F) -> Self {
        Self { weights, bias }
    }

    pub fn zeros(d: usize) -> Self {
        Self::new(vec![F::zero(); d], F::zero())
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn activation(&self, x: &[F]) -> Result<F> {
        check_dim(self.dim(), x.len())?;
        Ok(self.activation_unchecked(x))
    }

    #[inline]
    pub(crate) fn activation_unchecked(&self, x: &[F]) -> F {
        self.weights
            .iter()
            .zip(x)
            .fold(F::zero(), |acc, (&w, &v)| acc + w * v)
            - self.bias
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Flat real vector: `[w; b]` for two classes, `[w1; b1; w2; b2]` for three.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent, bound = "F: Float")]
pub struct Genome<F>(pub Vec<F>);

impl<F> Genome<F> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn genes(&self) -> &[F] {
        &self.0
    }
}

impl<F> From<Vec<F>> for Genome<F> {
    fn from(genes: Vec<F>) -> Self {
        Genome(genes)
    }
}

/// Genome length for a `n_classes`-class problem over `d` features.
pub fn genome_len(n_classes: usize, d: usize) -> Result<usize> {
    match n_classes {
        2 => Ok(d + 1),
        3 => Ok(2 * d + 2),
        k => Err(Error::UnsupportedClassCount(k)),
    }
}

/// Binary classifiers use one hyperplane; three-class classifiers use two,
/// the first separating class 0 from {1, 2} and the second class 1 from {0, 2}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    bound = "F: Float",
    into = "FlatClassifier<F>",
    try_from = "FlatClassifier<F>"
)]
pub enum LinearClassifier<F: Float> {
    Binary(Hyperplane<F>),
    Ternary(Hyperplane<F>, Hyperplane<F>),
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "F: Float")]
struct FlatClassifier<F> {
    classes: usize,
    genome: Vec<F>,
}

impl<F: Float> From<LinearClassifier<F>> for FlatClassifier<F> {
    fn from(c: LinearClassifier<F>) -> Self {
        Self {
            classes: c.n_classes(),
            genome: c.encode().0,
        }
    }
}

impl<F: Float> TryFrom<FlatClassifier<F>> for LinearClassifier<F> {
    type Error = Error;

    fn try_from(flat: FlatClassifier<F>) -> Result<Self> {
        let d = match flat.classes {
            2 => flat.genome.len().checked_sub(1),
            3 => flat
                .genome
                .len()
                .is_multiple_of(2)
                .then(|| (flat.genome.len() / 2).checked_sub(1))
                .flatten(),
            k => return Err(Error::UnsupportedClassCount(k)),
        }
        .ok_or(Error::GenomeLength {
            expected: 0,
            found: flat.genome.len(),
            classes: flat.classes,
        })?;
        decode(&Genome(flat.genome), flat.classes, d)
    }
}

impl<F: Float> LinearClassifier<F> {
    pub fn n_classes(&self) -> usize {
        match self {
            Self::Binary(_) => 2,
            Self::Ternary(..) => 3,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Self::Binary(h) | Self::Ternary(h, _) => h.dim(),
        }
    }

    pub fn encode(&self) -> Genome<F> {
        let mut genes =
            Vec::with_capacity(genome_len(self.n_classes(), self.n_features()).unwrap_or(0));
        match self {
            Self::Binary(h) => {
                genes.extend_from_slice(&h.weights);
                genes.push(h.bias);
            }
            Self::Ternary(h1, h2) => {
                for h in [h1, h2] {
                    genes.extend_from_slice(&h.weights);
                    genes.push(h.bias);
                }
            }
        }
        Genome(genes)
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[F]) -> usize {
        match self {
            Self::Binary(h) => usize::from(h.activation_unchecked(x) > F::zero()),
            Self::Ternary(h1, h2) => {
                ternary_class(h1.activation_unchecked(x), h2.activation_unchecked(x))
            }
        }
    }
}

/// Combines the two plane activations of a three-class classifier.
///
/// Activation 0 counts as the negative side. When both planes claim the
/// example the larger activation wins, ties going to class 0.
pub fn ternary_class<F: Float>(s0: F, s1: F) -> usize {
    let zero = F::zero();
    match (s0 > zero, s1 > zero) {
        (true, false) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, true) => match s1.partial_cmp(&s0) {
            Some(Ordering::Greater) => 1,
            _ => 0,
        },
    }
}

impl<F: Float> Predict<F> for LinearClassifier<F> {
    fn predict(&self, x: &[F]) -> Result<usize> {
        check_dim(self.n_features(), x.len())?;
        Ok(self.predict_unchecked(x))
    }

    fn predict_dataset(&self, data: &Dataset<F>) -> Result<Vec<usize>> {
        check_dim(self.n_features(), data.n_features())?;
        Ok(data.rows().map(|x| self.predict_unchecked(x)).collect())
    }
}

/// Splits a flat genome into hyperplanes.
pub fn decode<F: Float>(
    genome: &Genome<F>,
    n_classes: usize,
    d: usize,
) -> Result<LinearClassifier<F>> {
    let expected = genome_len(n_classes, d)?;
    if genome.len() != expected {
        return Err(Error::GenomeLength {
            expected,
            found: genome.len(),
            classes: n_classes,
        });
    }
    let g = genome.genes();
    let plane = |s: &[F]| Hyperplane::new(s[..d].to_vec(), s[d]);
    Ok(if n_classes == 2 {
        LinearClassifier::Binary(plane(g))
    } else {
        LinearClassifier::Ternary(plane(&g[..d + 1]), plane(&g[d + 1..]))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

/// One-feature threshold rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct DecisionStump<F> {
    pub feature: usize,
    #[serde(with = "non_finite")]
    pub threshold: F,
    pub op: Comparison,
    pub class_if_true: usize,
    pub class_if_false: usize,
}

impl<F: Float> Predict<F> for DecisionStump<F> {
    fn predict(&self, x: &[F]) -> Result<usize> {
        let &v = x.get(self.feature).ok_or(Error::DimensionMismatch {
            expected: self.feature + 1,
            found: x.len(),
        })?;
        let hit = match self.op {
            Comparison::Less => v < self.threshold,
            Comparison::Greater => v > self.threshold,
        };
        Ok(if hit {
            self.class_if_true
        } else {
            self.class_if_false
        })
    }
}

/// Sentinel thresholds are infinite; JSON carries them as `"inf"` / `"-inf"`.
mod non_finite {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<F: Float, S: Serializer>(v: &F, s: S) -> Result<S::Ok, S::Error> {
        let x = v.as_f64();
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, F: Float, D: Deserializer<'de>>(d: D) -> Result<F, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(F::cast(x)),
            Repr::Text(t) if t == "inf" => Ok(F::infinity()),
            Repr::Text(t) if t == "-inf" => Ok(F::neg_infinity()),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad threshold {t:?}"))),
        }
    }
}

/// Exhaustive stump search over a fixed dataset; feature orderings are
/// computed once so repeated boosting rounds only re-sweep the weights.
pub struct StumpTrainer<'a, F: Float> {
    data: &'a Dataset<F>,
    sorted: Vec<Vec<usize>>,
}

impl<'a, F: Float> StumpTrainer<'a, F> {
    pub fn new(data: &'a Dataset<F>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.n_classes() < 2 {
            return Err(Error::UnsupportedClassCount(data.n_classes()));
        }
        let sorted = (0..data.n_features())
            .map(|j| {
                let mut idx: Vec<usize> = (0..data.len()).collect();
                idx.sort_by(|&a, &b| data.row(a)[j].total_cmp_f(&data.row(b)[j]));
                idx
            })
            .collect();
        Ok(Self { data, sorted })
    }

    /// Returns the stump maximising weighted accuracy and that accuracy (as a
    /// fraction of the total weight).
    ///
    /// Candidates are the midpoints between consecutive distinct values of
    /// each feature plus the two infinite sentinels, both comparison
    /// operators, and every ordered pair of distinct classes. Ties keep the
    /// first candidate in (feature, threshold, operator, class pair) order.
    pub fn train(&self, weights: &[F]) -> Result<(DecisionStump<F>, F)> {
        let data = self.data;
        if weights.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: data.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative",
            ));
        }
        let total_weight: F = weights.iter().copied().sum();
        if total_weight.is_nan() || total_weight <= F::zero() {
            return Err(Error::InvalidWeights("weights must have a positive sum"));
        }
        let k = data.n_classes();
        let labels = data.labels();
        let mut total = vec![F::zero(); k];
        for (&l, &w) in labels.iter().zip(weights) {
            total[l] = total[l] + w;
        }
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();

        let mut best: Option<(DecisionStump<F>, F)> = None;
        let mut left = vec![F::zero(); k];
        for (feature, order) in self.sorted.iter().enumerate() {
            left.iter_mut().for_each(|v| *v = F::zero());
            let value = |i: usize| data.row(i)[feature];
            let mut consider = |threshold: F, left: &[F]| {
                for op in [Comparison::Less, Comparison::Greater] {
                    for &(a, b) in &pairs {
                        let acc = match op {
                            Comparison::Less => left[a] + (total[b] - left[b]),
                            Comparison::Greater => (total[a] - left[a]) + left[b],
                        };
                        if best.as_ref().is_none_or(|(_, best_acc)| acc > *best_acc) {
                            best = Some((
                                DecisionStump {
                                    feature,
                                    threshold,
                                    op,
                                    class_if_true: a,
                                    class_if_false: b,
                                },
                                acc,
                            ));
                        }
                    }
                }
            };
            consider(F::neg_infinity(), &left);
            for (pos, &i) in order.iter().enumerate() {
                left[labels[i]] = left[labels[i]] + weights[i];
                if let Some(&next) = order.get(pos + 1) {
                    let (lo, hi) = (value(i), value(next));
                    if hi > lo {
                        let mid = (lo + hi) / F::cast(2.0);
                        consider(if mid > lo { mid } else { hi }, &left);
                    }
                }
            }
            consider(F::infinity(), &left);
        }
        let (stump, acc) = best.expect("at least one candidate");
        Ok((stump, acc / total_weight))
    }
}

trait TotalCmp {
    fn total_cmp_f(&self, other: &Self) -> Ordering;
}

impl<F: Float> TotalCmp for F {
    fn total_cmp_f(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

pub fn train_stump<F: Float>(data: &Dataset<F>, weights: &[F]) -> Result<DecisionStump<F>> {
    Ok(StumpTrainer::new(data)?.train(weights)?.0)
}
