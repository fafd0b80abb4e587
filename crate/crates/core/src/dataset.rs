//! Labelled feature matrices, CSV ingestion, min-max normalization and
//! stratified fold plans.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Float;

/// Row-major `n × d` feature matrix with dense class indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct Dataset<F> {
    features: Vec<F>,
    labels: Vec<usize>,
    n_features: usize,
    class_names: Vec<String>,
}

impl<F: Float> Dataset<F> {
    /// Builds a dataset from a row-major feature buffer.
    ///
    /// `class_names[k]` names class index `k`; its length fixes the class count.
    pub fn new(
        features: Vec<F>,
        n_features: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.len() != labels.len() * n_features {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * n_features,
                found: features.len(),
            });
        }
        let classes = class_names.len();
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / n_features.max(1),
                column: pos % n_features.max(1),
            });
        }
        Ok(Self {
            features,
            labels,
            n_features,
            class_names,
        })
    }

    /// Convenience constructor from row vectors; class names default to the indices.
    pub fn from_rows(rows: &[Vec<F>], labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len(),
            });
        }
        let names = (0..n_classes).map(|k| k.to_string()).collect();
        Self::new(rows.concat(), d, labels, names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[F] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[F]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order. The class count is inherited even if
    /// some class is absent from the subset.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            labels,
            n_features: self.n_features,
            class_names: self.class_names.clone(),
        }
    }

    /// Errors with [`Error::SingleClass`] unless at least two classes are present.
    pub fn ensure_multiclass(&self) -> Result<()> {
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Rows with a blank, `?`, `NA` or non-numeric feature cell are skipped.
    #[default]
    DropRows,
}

#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    /// Zero-based label column; `None` selects the last column.
    pub label_column: Option<usize>,
    pub missing: MissingPolicy,
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_missing_token(cell: &str) -> bool {
    matches!(
        cell.trim(),
        "" | "?" | "NA" | "na" | "N/A" | "NaN" | "nan" | "null"
    )
}

/// Reads a CSV file without the multi-class check.
///
/// The first line is treated as a header when one of its feature cells is
/// neither numeric nor a missing-value marker. Labels are re-indexed densely
/// in order of first appearance, and row order is preserved.
pub fn read_csv<F: Float>(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push(rec);
    }
    let Some(first) = records.first() else {
        return Err(Error::NoUsableRows);
    };
    let columns = first.len();
    let label_col = opts.label_column.unwrap_or(columns.saturating_sub(1));
    if label_col >= columns || columns < 2 {
        return Err(Error::LabelColumnOutOfRange {
            column: label_col,
            columns,
        });
    }
    let header = first
        .iter()
        .enumerate()
        .any(|(j, c)| j != label_col && parse_cell(c).is_none() && !is_missing_token(c));

    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut row = Vec::with_capacity(columns - 1);
    for rec in records.iter().skip(usize::from(header)) {
        if rec.len() != columns {
            return Err(Error::RaggedRow {
                line: rec.position().map_or(0, |p| p.line()),
                expected: columns,
                found: rec.len(),
            });
        }
        let label = rec[label_col].trim();
        if is_missing_token(label) {
            continue;
        }
        row.clear();
        let usable =
            rec.iter().enumerate().filter(|(j, _)| *j != label_col).all(
                |(_, c)| match parse_cell(c) {
                    Some(v) => {
                        row.push(F::cast(v));
                        true
                    }
                    None => false,
                },
            );
        match opts.missing {
            MissingPolicy::DropRows if !usable => continue,
            MissingPolicy::DropRows => {}
        }
        let next = class_names.len();
        let idx = *class_index.entry(label.to_string()).or_insert_with(|| {
            class_names.push(label.to_string());
            next
        });
        features.extend_from_slice(&row);
        labels.push(idx);
    }
    if labels.is_empty() {
        return Err(Error::NoUsableRows);
    }
    Dataset::new(features, columns - 1, labels, class_names)
}

/// [`read_csv`] followed by [`Dataset::ensure_multiclass`].
pub fn load_csv<F: Float>(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset<F>> {
    let data = read_csv(path, opts)?;
    data.ensure_multiclass()?;
    Ok(data)
}

/// Where normalization parameters are fitted during cross-validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Fit on the training folds, apply to the held-out fold.
    #[default]
    PerFold,
    /// Fit once on the whole dataset.
    Global,
}

/// Per-feature min-max map onto `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Float")]
pub struct NormParams<F> {
    pub min: Vec<F>,
    pub max: Vec<F>,
}

impl<F: Float> NormParams<F> {
    pub fn fit(train: &Dataset<F>) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = train.n_features();
        let mut min = train.row(0).to_vec();
        let mut max = min.clone();
        for row in train.rows() {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Ok(Self { min, max })
    }

    pub fn transform_value(&self, j: usize, x: F) -> F {
        let (lo, hi) = (self.min[j], self.max[j]);
        if hi > lo {
            let two = F::cast(2.0);
            two * (x - lo) / (hi - lo) - F::one()
        } else {
            F::zero()
        }
    }

    /// Maps every feature of `data`. Values outside the fitted range land
    /// outside `[-1, 1]` and are left unclipped.
    pub fn apply(&self, data: &Dataset<F>) -> Result<Dataset<F>> {
        let d = data.n_features();
        if d != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: d,
            });
        }
        let features = data
            .features()
            .iter()
            .enumerate()
            .map(|(pos, &x)| self.transform_value(pos % d, x))
            .collect();
        Dataset::new(
            features,
            d,
            data.labels().to_vec(),
            data.class_names().to_vec(),
        )
    }
}

pub fn fit_normalizer<F: Float>(train: &Dataset<F>) -> Result<NormParams<F>> {
    NormParams::fit(train)
}

pub fn apply_normalizer<F: Float>(params: &NormParams<F>, data: &Dataset<F>) -> Result<Dataset<F>> {
    params.apply(data)
}

/// Assignment of every example to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// `(train, test)` index lists for fold `fold`, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold plan: each class is shuffled with a seeded generator and
/// dealt round-robin, the deal continuing across classes so fold sizes stay
/// within one of each other.
pub fn stratified_kfold<F: Float>(data: &Dataset<F>, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("fold count {k} < 2")));
    }
    let mut by_class = vec![Vec::new(); data.n_classes()];
    for (i, &l) in data.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    if let Some((class, members)) = by_class.iter().enumerate().find(|(_, m)| m.len() < k) {
        return Err(Error::ClassTooSmall {
            class,
            count: members.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; data.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn column(values: &[f64]) -> Dataset<f64> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let labels = (0..values.len()).map(|i| i % 2).collect();
        Dataset::from_rows(&rows, labels, 2).unwrap()
    }

    #[test]
    fn one_row_file_reads_but_fails_multiclass() {
        let f = write_tmp("1.0,2.0,a\n");
        let data: Dataset<f64> = read_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(data.len(), 1);
        assert!(matches!(
            load_csv::<f64>(f.path(), &CsvOptions::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn blank_cell_drops_row() {
        let f = write_tmp("1,2,x\n3,,y\n5,6,y\n");
        let data: Dataset<f64> = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.row(1), &[5.0, 6.0]);
        assert_eq!(data.labels(), &[0, 1]);
    }

    #[test]
    fn header_detected_and_labels_by_first_appearance() {
        let f = write_tmp("label,a,b\npos,1,2\nneg,3,4\npos,5,6\n");
        let opts = CsvOptions {
            label_column: Some(0),
            ..Default::default()
        };
        let data: Dataset<f64> = load_csv(f.path(), &opts).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.class_names(), &["pos".to_string(), "neg".to_string()]);
        assert_eq!(data.labels(), &[0, 1, 0]);
        assert_eq!(data.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn missing_marker_in_first_row_is_not_a_header() {
        let f = write_tmp("?,1,a\n2,3,b\n4,5,a\n");
        let data: Dataset<f64> = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(data.len(), 2);
    }

    #[test]
    fn csv_errors() {
        let f = write_tmp("1,2\n3,4\n");
        let opts = CsvOptions {
            label_column: Some(5),
            ..Default::default()
        };
        assert!(matches!(
            load_csv::<f64>(f.path(), &opts),
            Err(Error::LabelColumnOutOfRange { .. })
        ));
        let f = write_tmp("?,1\n,2\n");
        assert!(matches!(
            load_csv::<f64>(f.path(), &CsvOptions::default()),
            Err(Error::NoUsableRows)
        ));
        assert!(matches!(
            load_csv::<f64>("/nonexistent/file.csv", &CsvOptions::default()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn normalizer_examples() {
        let p = NormParams::fit(&column(&[0.0, 10.0])).unwrap();
        assert_eq!((p.min[0], p.max[0]), (0.0, 10.0));
        assert_eq!(p.transform_value(0, 5.0), 0.0);
        assert_eq!(p.transform_value(0, 20.0), 3.0);

        let data = column(&[-1.0, 1.0, 0.25]);
        let p = NormParams::fit(&data).unwrap();
        assert_eq!(p.apply(&data).unwrap(), data);

        let p = NormParams::fit(&column(&[7.0, 7.0, 7.0])).unwrap();
        let out = p.apply(&column(&[7.0, 7.0, 7.0])).unwrap();
        assert!(out.features().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalizer_dimension_mismatch() {
        let p = NormParams::fit(&column(&[0.0, 1.0])).unwrap();
        let wide = Dataset::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0, 1], 2).unwrap();
        assert!(matches!(
            p.apply(&wide),
            Err(Error::DimensionMismatch { .. })
        ));
        let empty = Dataset::<f64>::new(vec![], 1, vec![], vec!["a".into()]).unwrap();
        assert!(matches!(NormParams::fit(&empty), Err(Error::EmptyDataset)));
    }

    #[test]
    fn kfold_exact_divisibility() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels = (0..10).map(|i| usize::from(i >= 5)).collect();
        let data = Dataset::from_rows(&rows, labels, 2).unwrap();
        let plan = stratified_kfold(&data, 5, 3).unwrap();
        for fold in 0..5 {
            let (_, test) = plan.split(fold);
            let mut per_class = [0; 2];
            for i in test {
                per_class[data.labels()[i]] += 1;
            }
            assert_eq!(per_class, [1, 1]);
        }
        assert_eq!(plan, stratified_kfold(&data, 5, 3).unwrap());
    }

    #[test]
    fn kfold_rejects_small_classes() {
        let data = column(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            stratified_kfold(&data, 2, 0),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
        assert!(stratified_kfold(&data, 1, 0).is_err());
    }

    fn table() -> impl Strategy<Value = Vec<(Vec<f64>, u8)>> {
        prop::collection::vec((prop::collection::vec(-1e3..1e3f64, 2), 0..3u8), 2..30)
    }

    proptest! {
        #[test]
        fn normalizing_twice_equals_once(rows in table()) {
            let features: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
            let data = Dataset::from_rows(&features, vec![0; rows.len()], 1).unwrap();
            let once = NormParams::fit(&data).unwrap().apply(&data).unwrap();
            let twice = NormParams::fit(&once).unwrap().apply(&once).unwrap();
            for (a, b) in once.features().iter().zip(twice.features()) {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert!(a.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn load_is_order_stable(rows in table(), seed in any::<u64>()) {
            let line = |(f, c): &(Vec<f64>, u8)| format!("{},{},c{c}\n", f[0], f[1]);
            let mut order: Vec<usize> = (0..rows.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let plain = write_tmp(&rows.iter().map(line).collect::<String>());
            let shuffled = write_tmp(&order.iter().map(|&i| line(&rows[i])).collect::<String>());
            let a: Dataset<f64> = read_csv(plain.path(), &CsvOptions::default()).unwrap();
            let b: Dataset<f64> = read_csv(shuffled.path(), &CsvOptions::default()).unwrap();
            let record = |d: &Dataset<f64>, i: usize| (d.row(i).to_vec(), d.class_names()[d.labels()[i]].clone());
            // Row `pos` of the shuffled file came from original row `order[pos]`.
            for (pos, &orig) in order.iter().enumerate() {
                prop_assert_eq!(record(&b, pos), record(&a, orig));
            }
        }
    }
}
