//! Majority-vote ensembles, per-example margins, the margin-histogram order
//! on ensembles, and greedy margin-based ensemble selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::classifiers::Predict;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fitness::error_count;
use crate::scalar::Float;

/// Ordered list of classifiers combined by unweighted plurality vote.
/// Member order is the order in which selection added them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble<C> {
    pub members: Vec<C>,
}

impl<C> Ensemble<C> {
    pub fn new(members: Vec<C>) -> Self {
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl<C> Default for Ensemble<C> {
    fn default() -> Self {
        Self {
            members: Vec::new(),
        }
    }
}

/// Index of the largest count, lowest index on ties.
fn plurality<T: Ord + Copy>(counts: &[T]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

/// Class with the most votes; ties go to the lowest class index.
pub fn majority_vote<F: Float, C: Predict<F>>(members: &[C], x: &[F]) -> Result<usize> {
    if members.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut votes: Vec<u32> = Vec::new();
    for m in members {
        let k = m.predict(x)?;
        if k >= votes.len() {
            votes.resize(k + 1, 0);
        }
        votes[k] += 1;
    }
    Ok(plurality(&votes))
}

impl<F: Float, C: Predict<F>> Predict<F> for Ensemble<C> {
    fn predict(&self, x: &[F]) -> Result<usize> {
        majority_vote(&self.members, x)
    }

    fn predict_dataset(&self, data: &Dataset<F>) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let preds = self
            .members
            .iter()
            .map(|m| m.predict_dataset(data))
            .collect::<Result<Vec<_>>>()?;
        let votes = VoteTable::from_predictions(
            preds.iter().map(Vec::as_slice),
            data.len(),
            data.n_classes().max(max_class(&preds) + 1),
        )?;
        Ok((0..data.len()).map(|i| votes.winner(i)).collect())
    }
}

fn max_class(preds: &[Vec<usize>]) -> usize {
    preds.iter().flatten().copied().max().unwrap_or(0)
}

/// Per-example vote counts, `n × k` row-major.
#[derive(Clone, Debug)]
struct VoteTable {
    counts: Vec<u32>,
    k: usize,
    members: usize,
}

impl VoteTable {
    fn new(n: usize, k: usize) -> Self {
        Self {
            counts: vec![0; n * k],
            k,
            members: 0,
        }
    }

    fn from_predictions<'a>(
        preds: impl IntoIterator<Item = &'a [usize]>,
        n: usize,
        k: usize,
    ) -> Result<Self> {
        let mut table = Self::new(n, k);
        for p in preds {
            table.add(p)?;
        }
        Ok(table)
    }

    fn add(&mut self, preds: &[usize]) -> Result<()> {
        let n = self.counts.len() / self.k.max(1);
        if preds.len() != n {
            return Err(Error::LengthMismatch {
                left: preds.len(),
                right: n,
            });
        }
        if let Some(&label) = preds.iter().find(|&&p| p >= self.k) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: self.k,
            });
        }
        for (i, &p) in preds.iter().enumerate() {
            self.counts[i * self.k + p] += 1;
        }
        self.members += 1;
        Ok(())
    }

    fn row(&self, i: usize) -> &[u32] {
        &self.counts[i * self.k..(i + 1) * self.k]
    }

    fn winner(&self, i: usize) -> usize {
        plurality(self.row(i))
    }

    fn errors(&self, labels: &[usize]) -> usize {
        labels
            .iter()
            .enumerate()
            .filter(|&(i, &y)| self.winner(i) != y)
            .count()
    }
}

/// Margin of an example and its strongest wrong class, optionally counting
/// one extra vote for class `extra`.
#[inline]
fn margin_with(row: &[u32], y: usize, extra: Option<usize>) -> (i64, usize) {
    let count = |k: usize| i64::from(row[k]) + i64::from(extra == Some(k));
    let mut wrong = usize::MAX;
    let mut wrong_votes = i64::MIN;
    for k in (0..row.len()).filter(|&k| k != y) {
        let c = count(k);
        if c > wrong_votes {
            wrong = k;
            wrong_votes = c;
        }
    }
    (count(y) - wrong_votes, wrong)
}

/// Per-example margins of an ensemble: votes for the true class minus votes
/// for the most-voted wrong class (lowest index among equals).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginRecord {
    pub ensemble_size: usize,
    pub margins: Vec<i64>,
    pub strongest_wrong: Vec<usize>,
}

/// Margins from the members' prediction vectors.
pub fn compute_margins<'a>(
    member_predictions: impl IntoIterator<Item = &'a [usize]>,
    labels: &[usize],
    n_classes: usize,
) -> Result<MarginRecord> {
    if n_classes < 2 {
        return Err(Error::UnsupportedClassCount(n_classes));
    }
    let table = VoteTable::from_predictions(member_predictions, labels.len(), n_classes)?;
    if table.members == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let (margins, strongest_wrong) = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| margin_with(table.row(i), y, None))
        .unzip();
    Ok(MarginRecord {
        ensemble_size: table.members,
        margins,
        strongest_wrong,
    })
}

/// [`compute_margins`] for an ensemble evaluated on `data`.
pub fn ensemble_margins<F: Float, C: Predict<F>>(
    ensemble: &Ensemble<C>,
    data: &Dataset<F>,
) -> Result<MarginRecord> {
    let preds = ensemble
        .members
        .iter()
        .map(|m| m.predict_dataset(data))
        .collect::<Result<Vec<_>>>()?;
    compute_margins(
        preds.iter().map(Vec::as_slice),
        data.labels(),
        data.n_classes(),
    )
}

/// Number of examples per margin value, `counts[m + ensemble_size]` for
/// `m` in `-ensemble_size..=ensemble_size`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginHistogram {
    pub ensemble_size: usize,
    pub counts: Vec<usize>,
}

impl MarginHistogram {
    pub fn count(&self, margin: i64) -> usize {
        let idx = margin + self.ensemble_size as i64;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.counts.get(i))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub fn margin_histogram(record: &MarginRecord) -> Result<MarginHistogram> {
    let t = record.ensemble_size as i64;
    let mut counts = vec![0; 2 * record.ensemble_size + 1];
    for &m in &record.margins {
        if m < -t || m > t {
            return Err(Error::InvalidConfig(format!(
                "margin {m} outside [-{t}, {t}]"
            )));
        }
        counts[(m + t) as usize] += 1;
    }
    Ok(MarginHistogram {
        ensemble_size: record.ensemble_size,
        counts,
    })
}

/// Compares two same-size ensembles by their margin histograms.
///
/// Scanning margins upward from the lowest, the first value where the
/// counts differ decides: fewer examples there is better. Returns
/// `Ordering::Greater` when `a` is the better ensemble.
pub fn compare_ensembles(a: &MarginHistogram, b: &MarginHistogram) -> Result<Ordering> {
    if a.ensemble_size != b.ensemble_size || a.counts.len() != b.counts.len() {
        return Err(Error::HistogramMismatch {
            left: a.ensemble_size,
            right: b.ensemble_size,
        });
    }
    Ok(compare_counts(&a.counts, &b.counts))
}

#[inline]
fn compare_counts(a: &[usize], b: &[usize]) -> Ordering {
    a.iter()
        .zip(b)
        .find(|(x, y)| x != y)
        .map_or(Ordering::Equal, |(x, y)| y.cmp(x))
}

/// What counts as a duplicate when the candidate pool is cleaned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DedupMode {
    /// Identical parameters (genomes).
    #[default]
    Genome,
    /// Identical predictions on the selection data.
    Phenotype,
}

/// A pool member together with its predictions on the selection data.
#[derive(Clone, Copy, Debug)]
pub struct Candidate<'a, C> {
    pub classifier: &'a C,
    pub predictions: &'a [usize],
}

/// Trace of one selection run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// Pool indices in the order they were added by the greedy pass.
    pub order: Vec<usize>,
    /// Training errors of the initial ensemble, when it is nonempty.
    pub initial_errors: Option<usize>,
    /// Training errors after each greedy addition.
    pub step_errors: Vec<usize>,
    /// How many greedy additions the returned ensemble keeps.
    pub kept: usize,
}

impl SelectionOutcome {
    pub fn selected(&self) -> &[usize] {
        &self.order[..self.kept]
    }

    pub fn errors(&self) -> usize {
        match self.kept {
            0 => self.initial_errors.unwrap_or(usize::MAX),
            k => self.step_errors[k - 1],
        }
    }
}

/// Greedy margin selection over prediction vectors.
///
/// Every pool member is moved into the ensemble one at a time, each step
/// taking the candidate whose addition gives the best margin histogram
/// (lowest pool index on ties). The kept prefix is the one with the fewest
/// training errors, the shortest on ties. Vote counts are updated
/// incrementally, so a step costs `O(|pool| * n * k)`.
pub fn greedy_select(
    pool: &[&[usize]],
    initial: &[&[usize]],
    labels: &[usize],
    n_classes: usize,
) -> Result<SelectionOutcome> {
    if pool.is_empty() && initial.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if n_classes < 2 {
        return Err(Error::UnsupportedClassCount(n_classes));
    }
    let n = labels.len();
    let mut votes = VoteTable::from_predictions(initial.iter().copied(), n, n_classes)?;
    for p in pool {
        if p.len() != n {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: n,
            });
        }
        if let Some(&label) = p.iter().find(|&&c| c >= n_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: n_classes,
            });
        }
    }
    let initial_errors = (!initial.is_empty()).then(|| votes.errors(labels));

    let mut remaining: Vec<usize> = (0..pool.len()).collect();
    let mut order = Vec::with_capacity(pool.len());
    let mut step_errors = Vec::with_capacity(pool.len());
    let mut scratch = Vec::new();
    let mut best_counts = Vec::new();
    while !remaining.is_empty() {
        let size = votes.members + 1;
        let bins = 2 * size + 1;
        let mut best_pos = 0;
        for (pos, &c) in remaining.iter().enumerate() {
            scratch.clear();
            scratch.resize(bins, 0usize);
            for (i, (&y, &p)) in labels.iter().zip(pool[c]).enumerate() {
                let (m, _) = margin_with(votes.row(i), y, Some(p));
                scratch[(m + size as i64) as usize] += 1;
            }
            if pos == 0 || compare_counts(&scratch, &best_counts) == Ordering::Greater {
                best_pos = pos;
                std::mem::swap(&mut scratch, &mut best_counts);
            }
        }
        let chosen = remaining.remove(best_pos);
        votes.add(pool[chosen])?;
        order.push(chosen);
        step_errors.push(votes.errors(labels));
    }

    let mut kept = 0;
    let mut best = initial_errors;
    for (t, &e) in step_errors.iter().enumerate() {
        if best.is_none_or(|b| e < b) {
            best = Some(e);
            kept = t + 1;
        }
    }
    Ok(SelectionOutcome {
        order,
        initial_errors,
        step_errors,
        kept,
    })
}

/// Pool positions that survive deduplication (first occurrence kept).
pub fn dedup_positions<C: PartialEq>(pool: &[Candidate<'_, C>], mode: DedupMode) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::with_capacity(pool.len());
    for (i, cand) in pool.iter().enumerate() {
        let duplicate = kept.iter().any(|&j| match mode {
            DedupMode::Genome => pool[j].classifier == cand.classifier,
            DedupMode::Phenotype => pool[j].predictions == cand.predictions,
        });
        if !duplicate {
            kept.push(i);
        }
    }
    kept
}

/// Deduplicates `pool` and runs [`greedy_select`]; indices in the outcome
/// refer to positions in `pool`.
pub fn select_ensemble<C: PartialEq>(
    pool: &[Candidate<'_, C>],
    initial: &[Candidate<'_, C>],
    labels: &[usize],
    n_classes: usize,
    dedup: DedupMode,
) -> Result<SelectionOutcome> {
    let keep = dedup_positions(pool, dedup);
    let pool_preds: Vec<&[usize]> = keep.iter().map(|&i| pool[i].predictions).collect();
    let init_preds: Vec<&[usize]> = initial.iter().map(|c| c.predictions).collect();
    let mut outcome = greedy_select(&pool_preds, &init_preds, labels, n_classes)?;
    for idx in &mut outcome.order {
        *idx = keep[*idx];
    }
    Ok(outcome)
}

fn candidates<'a, C>(classifiers: &'a [C], predictions: &'a [Vec<usize>]) -> Vec<Candidate<'a, C>> {
    classifiers
        .iter()
        .zip(predictions)
        .map(|(c, p)| Candidate {
            classifier: c,
            predictions: p,
        })
        .collect()
}

/// Selects an ensemble from `pool`, starting from `initial`, by the
/// margin-histogram criterion evaluated on `data`.
pub fn ensemble_selection<F, C>(
    pool: &[C],
    data: &Dataset<F>,
    initial: &Ensemble<C>,
    dedup: DedupMode,
) -> Result<(Ensemble<C>, SelectionOutcome)>
where
    F: Float,
    C: Predict<F> + Clone + PartialEq,
{
    let predict_all = |cs: &[C]| {
        cs.iter()
            .map(|c| c.predict_dataset(data))
            .collect::<Result<Vec<_>>>()
    };
    let pool_preds = predict_all(pool)?;
    let init_preds = predict_all(&initial.members)?;
    let pool_c = candidates(pool, &pool_preds);
    let init_c = candidates(&initial.members, &init_preds);
    let outcome = select_ensemble(&pool_c, &init_c, data.labels(), data.n_classes(), dedup)?;
    let mut members = initial.members.clone();
    members.extend(outcome.selected().iter().map(|&i| pool[i].clone()));
    Ok((Ensemble::new(members), outcome))
}

/// Training errors of an ensemble given its members' prediction vectors.
pub fn vote_errors<'a>(
    member_predictions: impl IntoIterator<Item = &'a [usize]>,
    labels: &[usize],
    n_classes: usize,
) -> Result<usize> {
    let table = VoteTable::from_predictions(member_predictions, labels.len(), n_classes)?;
    if table.members == 0 {
        return Err(Error::EmptyEnsemble);
    }
    Ok(table.errors(labels))
}

/// Majority-vote predictions of an ensemble given its members' predictions.
pub fn vote_predictions<'a>(
    member_predictions: impl IntoIterator<Item = &'a [usize]>,
    n: usize,
    n_classes: usize,
) -> Result<Vec<usize>> {
    let table = VoteTable::from_predictions(member_predictions, n, n_classes)?;
    if table.members == 0 {
        return Err(Error::EmptyEnsemble);
    }
    Ok((0..n).map(|i| table.winner(i)).collect())
}

/// Used by tests and diagnostics; `error_count` on the vote output.
pub fn ensemble_error_count<F: Float, C: Predict<F>>(
    ensemble: &Ensemble<C>,
    data: &Dataset<F>,
) -> Result<usize> {
    Ok(error_count(&ensemble.predict_dataset(data)?, data.labels()))
}
