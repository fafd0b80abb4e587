//! Example hardness weights and the cumulated-hardness fitness.
//!
//! The hardness of example `i` with respect to a reference set `Q` is the
//! mean loss of `Q` on it; a classifier's fitness is the sum of
//! `w_i^gamma` over the examples it classifies correctly. Weights are a
//! pure function of the reference predictions: nothing is remembered
//! between calls.

use serde::{Deserialize, Serialize};

use crate::classifiers::Predict;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFn {
    /// 0 when the prediction is right, 1 otherwise.
    #[default]
    Step,
}

impl LossFn {
    pub fn loss(self, predicted: usize, truth: usize) -> f64 {
        match self {
            LossFn::Step => f64::from(u8::from(predicted != truth)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessParams {
    pub gamma: f64,
    pub loss: LossFn,
}

impl Default for FitnessParams {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            loss: LossFn::Step,
        }
    }
}

impl FitnessParams {
    pub fn validate(&self) -> Result<()> {
        if self.gamma >= 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "gamma {} must be finite and >= 0",
                self.gamma
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct WeightVector<F> {
    pub weights: Vec<F>,
    pub reference_size: usize,
}

impl<F: Float> WeightVector<F> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w_i^gamma` with `0^0 = 1`, for repeated fitness evaluations under one
    /// reference set.
    pub fn powered(&self, gamma: f64) -> Vec<F> {
        let g = F::cast(gamma);
        self.weights
            .iter()
            .map(|&w| if gamma == 0.0 { F::one() } else { w.powf(g) })
            .collect()
    }
}

/// Hardness weights from the reference set's prediction vectors.
pub fn example_weights<'a, F, I>(
    reference: I,
    labels: &[usize],
    loss: LossFn,
) -> Result<WeightVector<F>>
where
    F: Float,
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut totals = vec![0.0f64; labels.len()];
    let mut size = 0usize;
    for preds in reference {
        if preds.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: preds.len(),
                right: labels.len(),
            });
        }
        for ((t, &p), &y) in totals.iter_mut().zip(preds).zip(labels) {
            *t += loss.loss(p, y);
        }
        size += 1;
    }
    if size == 0 {
        return Err(Error::EmptyReferenceSet);
    }
    let q = size as f64;
    Ok(WeightVector {
        weights: totals.into_iter().map(|t| F::cast(t / q)).collect(),
        reference_size: size,
    })
}

/// [`example_weights`] for classifiers that still need to be run over `data`.
pub fn example_weights_of<F: Float, C: Predict<F>>(
    reference: &[C],
    data: &Dataset<F>,
    loss: LossFn,
) -> Result<WeightVector<F>> {
    let preds = reference
        .iter()
        .map(|c| c.predict_dataset(data))
        .collect::<Result<Vec<_>>>()?;
    example_weights(preds.iter().map(Vec::as_slice), data.labels(), loss)
}

/// Sum of `w_i^gamma` over the examples whose prediction matches the label.
pub fn diversity_fitness<F: Float>(
    predictions: &[usize],
    labels: &[usize],
    weights: &WeightVector<F>,
    params: &FitnessParams,
) -> Result<F> {
    if predictions.len() != labels.len() || weights.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: weights.len(),
        });
    }
    Ok(correct_sum(
        predictions,
        labels,
        &weights.powered(params.gamma),
    ))
}

/// Fitness against weights that were already raised to `gamma`.
pub(crate) fn correct_sum<F: Float>(predictions: &[usize], labels: &[usize], powered: &[F]) -> F {
    predictions
        .iter()
        .zip(labels)
        .zip(powered)
        .filter(|((p, y), _)| p == y)
        .fold(F::zero(), |acc, (_, &w)| acc + w)
}

pub fn error_count(predictions: &[usize], labels: &[usize]) -> usize {
    predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| p != y)
        .count()
}

/// Fraction of misclassified examples.
pub fn error_rate<F: Float>(predictions: &[usize], labels: &[usize]) -> Result<F> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    Ok(F::cast(
        error_count(predictions, labels) as f64 / labels.len() as f64,
    ))
}

/// Runs `model` over `data` and returns its error rate.
pub fn error_rate_of<F: Float, P: Predict<F>>(model: &P, data: &Dataset<F>) -> Result<F> {
    error_rate(&model.predict_dataset(data)?, data.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weights_from_two_classifiers() {
        // h1 is right on examples 1 and 2, h2 only on example 1.
        let labels = [0, 1, 0];
        let h1 = [0, 1, 1];
        let h2 = [0, 0, 1];
        let w: WeightVector<f64> =
            example_weights([&h1[..], &h2[..]], &labels, LossFn::Step).unwrap();
        assert_eq!(w.weights, vec![0.0, 0.5, 1.0]);
        assert_eq!(w.reference_size, 2);
    }

    #[test]
    fn weights_extremes() {
        let labels = [0, 1, 1, 0];
        let right = [0, 1, 1, 0];
        let wrong = [1, 0, 0, 1];
        let w: WeightVector<f64> =
            example_weights([&right[..], &right[..], &right[..]], &labels, LossFn::Step).unwrap();
        assert!(w.weights.iter().all(|&v| v == 0.0));
        let w: WeightVector<f64> = example_weights([&wrong[..]], &labels, LossFn::Step).unwrap();
        assert!(w.weights.iter().all(|&v| v == 1.0));
        assert!(matches!(
            example_weights::<f64, _>(std::iter::empty(), &labels, LossFn::Step),
            Err(Error::EmptyReferenceSet)
        ));
    }

    #[test]
    fn fitness_examples() {
        let labels = [0, 1, 0];
        let w = WeightVector {
            weights: vec![0.0, 0.5, 1.0],
            reference_size: 2,
        };
        let params = FitnessParams::default();
        assert_eq!(
            diversity_fitness(&[1, 1, 0], &labels, &w, &params).unwrap(),
            1.25
        );
        assert_eq!(
            diversity_fitness(&[1, 0, 1], &labels, &w, &params).unwrap(),
            0.0
        );
        let zero = FitnessParams {
            gamma: 0.0,
            ..params
        };
        assert_eq!(
            diversity_fitness(&[0, 1, 1], &labels, &w, &zero).unwrap(),
            2.0
        );
    }

    #[test]
    fn error_rate_examples() {
        let labels = [0, 0, 1, 1];
        assert_eq!(error_rate::<f64>(&labels, &labels).unwrap(), 0.0);
        assert_eq!(error_rate::<f64>(&[1, 1, 0, 0], &labels).unwrap(), 1.0);
        // 65/35 split, constant majority prediction.
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 65)).collect();
        assert_eq!(error_rate::<f64>(&vec![0; 100], &labels).unwrap(), 0.35);
        assert!(matches!(
            error_rate::<f64>(&[], &[]),
            Err(Error::EmptyDataset)
        ));
    }

    proptest! {
        #[test]
        fn gamma_zero_counts_correct(
            rows in prop::collection::vec((0usize..3, 0usize..3, 0.0f64..1.0), 1..60),
        ) {
            let preds: Vec<usize> = rows.iter().map(|r| r.0).collect();
            let labels: Vec<usize> = rows.iter().map(|r| r.1).collect();
            let w = WeightVector { weights: rows.iter().map(|r| r.2).collect(), reference_size: 1 };
            let params = FitnessParams { gamma: 0.0, loss: LossFn::Step };
            let f = diversity_fitness(&preds, &labels, &w, &params).unwrap();
            let err: f64 = error_rate(&preds, &labels).unwrap();
            let n = labels.len() as f64;
            prop_assert_eq!(f, n - error_count(&preds, &labels) as f64);
            prop_assert!((f - n * (1.0 - err)).abs() < 1e-9);
        }

        #[test]
        fn step_weights_sum_to_integer_count(
            n in 1usize..40,
            q in 1usize..12,
            seed in prop::collection::vec(0usize..2, 480),
            labels_seed in prop::collection::vec(0usize..2, 40),
        ) {
            let labels = &labels_seed[..n];
            let refs: Vec<Vec<usize>> = (0..q).map(|j| seed[j * n..(j + 1) * n].to_vec()).collect();
            let w: WeightVector<f64> = example_weights(refs.iter().map(Vec::as_slice), labels, LossFn::Step).unwrap();
            let total = w.weights.iter().sum::<f64>() * q as f64;
            let errors: usize = refs.iter().map(|r| error_count(r, labels)).sum();
            prop_assert!((total - errors as f64).abs() < 1e-9);
            prop_assert!(w.weights.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
