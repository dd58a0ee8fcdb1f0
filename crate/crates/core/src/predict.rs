//! Out-of-sample class probabilities for one target column.
//!
//! Features come from a [`FeatureView`] built for one [`Modality`]:
//! one-hot table encodings (scaled by `1/√2` so one categorical mismatch adds
//! squared distance 1), L2-normalised embeddings, or both concatenated. The
//! target column and free-text propagation columns never contribute features.
//!
//! Probabilities come either from stratified K-fold k-NN with Laplace
//! smoothing ([`knn_oos_probabilities`]) or from an external CSV
//! ([`load_probabilities`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{AlignedDataset, ColumnKind};
use crate::error::{Error, Result};
use crate::io;
use crate::rng;

/// Laplace smoothing weight.
pub const SMOOTHING: f64 = 1.0;
/// Tolerance on row sums of probabilities read from a file.
pub const FILE_ROW_SUM_TOLERANCE: f64 = 1e-6;
const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "table")]
    TableOnly,
    #[serde(rename = "image")]
    ImageOnly,
    #[serde(rename = "both")]
    TableAndImage,
}

impl Modality {
    pub fn uses_table(self) -> bool {
        matches!(self, Modality::TableOnly | Modality::TableAndImage)
    }

    pub fn uses_image(self) -> bool {
        matches!(self, Modality::ImageOnly | Modality::TableAndImage)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::TableOnly => "table",
            Modality::ImageOnly => "image",
            Modality::TableAndImage => "both",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Modality::TableOnly),
            "image" => Ok(Modality::ImageOnly),
            "both" => Ok(Modality::TableAndImage),
            other => Err(Error::InvalidConfig(format!("unknown modality `{other}`"))),
        }
    }
}

/// Where a feature column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSlot {
    OneHot { column: String, value: String },
    Embedding(usize),
}

impl FeatureSlot {
    pub fn source_column(&self) -> Option<&str> {
        match self {
            FeatureSlot::OneHot { column, .. } => Some(column),
            FeatureSlot::Embedding(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureView {
    /// `n` rows of `width()` finite features.
    pub features: Vec<Vec<f64>>,
    pub provenance: Vec<FeatureSlot>,
    pub target_column: String,
    pub excluded_columns: Vec<String>,
    /// Observed class index per row.
    pub labels: Vec<usize>,
    pub class_index: Vec<String>,
}

impl FeatureView {
    pub fn width(&self) -> usize {
        self.provenance.len()
    }

    pub fn n_rows(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_index.len()
    }
}

/// Vocabulary learned from one or more datasets sharing a schema, so that
/// clean and dirty tables map into the same feature space.
#[derive(Debug, Clone)]
pub struct FeatureEncoder {
    modality: Modality,
    target: String,
    target_index: usize,
    one_hot: Vec<(usize, String, Vec<String>)>,
    excluded: Vec<String>,
    class_index: Vec<String>,
    embedding_dim: usize,
}

impl FeatureEncoder {
    pub fn fit(datasets: &[&AlignedDataset], target: &str, modality: Modality) -> Result<Self> {
        let first = *datasets
            .first()
            .ok_or_else(|| Error::InvalidConfig("no dataset to fit features on".into()))?;
        for d in &datasets[1..] {
            if d.columns() != first.columns() {
                return Err(Error::Schema("datasets have different schemas".into()));
            }
            if d.embeddings().dim() != first.embeddings().dim() {
                return Err(Error::Schema("datasets have different embedding dimensions".into()));
            }
        }
        let target_index = first.column_index(target)?;
        if first.columns()[target_index].kind != ColumnKind::Categorical {
            return Err(Error::DegenerateTarget(target.to_string()));
        }
        let distinct = |col: usize| -> Vec<String> {
            let mut values: Vec<String> = datasets
                .iter()
                .flat_map(|d| d.distinct_values(col))
                .collect();
            values.sort();
            values.dedup();
            values
        };
        let class_index = distinct(target_index);
        if class_index.len() < 2 {
            return Err(Error::DegenerateTarget(target.to_string()));
        }

        let mut excluded = vec![target.to_string()];
        let mut one_hot = Vec::new();
        for (i, c) in first.columns().iter().enumerate() {
            if i == target_index {
                continue;
            }
            if c.kind == ColumnKind::FreeText || c.propagation_target {
                excluded.push(c.name.clone());
            } else if modality.uses_table() {
                one_hot.push((i, c.name.clone(), distinct(i)));
            }
        }
        Ok(FeatureEncoder {
            modality,
            target: target.to_string(),
            target_index,
            one_hot,
            excluded,
            class_index,
            embedding_dim: first.embeddings().dim(),
        })
    }

    pub fn class_index(&self) -> &[String] {
        &self.class_index
    }

    pub fn provenance(&self) -> Vec<FeatureSlot> {
        let mut out = Vec::new();
        for (_, name, values) in &self.one_hot {
            out.extend(values.iter().map(|v| FeatureSlot::OneHot {
                column: name.clone(),
                value: v.clone(),
            }));
        }
        if self.modality.uses_image() {
            out.extend((0..self.embedding_dim).map(FeatureSlot::Embedding));
        }
        out
    }

    pub fn transform(&self, dataset: &AlignedDataset) -> Result<FeatureView> {
        if dataset.columns().get(self.target_index).map(|c| c.name.as_str())
            != Some(self.target.as_str())
        {
            return Err(Error::Schema("dataset schema differs from the fitted one".into()));
        }
        let class_pos: HashMap<&str, usize> = self
            .class_index
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let lookups: Vec<HashMap<&str, usize>> = self
            .one_hot
            .iter()
            .map(|(_, _, values)| values.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect())
            .collect();
        let provenance = self.provenance();
        let scale = std::f64::consts::FRAC_1_SQRT_2;

        let mut features = Vec::with_capacity(dataset.n_rows());
        let mut labels = Vec::with_capacity(dataset.n_rows());
        for row in 0..dataset.n_rows() {
            let label = dataset.cell(row, self.target_index);
            labels.push(*class_pos.get(label).ok_or_else(|| {
                Error::ClassMismatch(format!("value `{label}` of `{}` was not fitted", self.target))
            })?);

            let mut f = Vec::with_capacity(provenance.len());
            for ((col, _, values), lookup) in self.one_hot.iter().zip(&lookups) {
                let start = f.len();
                f.resize(start + values.len(), 0.0);
                // Values unseen at fit time encode as all zeros.
                if let Some(&k) = lookup.get(dataset.cell(row, *col)) {
                    f[start + k] = scale;
                }
            }
            if self.modality.uses_image() {
                let e = dataset.embeddings().row(row);
                let norm = e.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt();
                if norm > 0.0 {
                    f.extend(e.iter().map(|&v| f64::from(v) / norm));
                } else {
                    f.extend(e.iter().map(|_| 0.0));
                }
            }
            features.push(f);
        }
        Ok(FeatureView {
            features,
            provenance,
            target_column: self.target.clone(),
            excluded_columns: self.excluded.clone(),
            labels,
            class_index: self.class_index.clone(),
        })
    }
}

pub fn build_features(dataset: &AlignedDataset, target: &str, modality: Modality) -> Result<FeatureView> {
    FeatureEncoder::fit(&[dataset], target, modality)?.transform(dataset)
}

/// Row-stochastic `n × m` matrix of class probabilities plus observed labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    values: Vec<f64>,
    n: usize,
    m: usize,
    class_index: Vec<String>,
    labels: Vec<usize>,
}

impl ProbabilityMatrix {
    pub fn new(rows: Vec<Vec<f64>>, class_index: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        let m = class_index.len();
        if m < 2 {
            return Err(Error::InvalidProbabilities("need at least two classes".into()));
        }
        if labels.len() != rows.len() {
            return Err(Error::InvalidProbabilities(format!(
                "{} label entries for {} rows",
                labels.len(),
                rows.len()
            )));
        }
        for (i, (row, &label)) in rows.iter().zip(&labels).enumerate() {
            if row.len() != m {
                return Err(Error::InvalidProbabilities(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if label >= m {
                return Err(Error::InvalidProbabilities(format!("row {i} label {label} out of range")));
            }
            if row.iter().any(|p| !p.is_finite() || !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidProbabilities(format!("row {i} has entries outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidProbabilities(format!("row {i} sums to {sum}")));
            }
        }
        Ok(ProbabilityMatrix {
            n: rows.len(),
            m,
            values: rows.concat(),
            class_index,
            labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_classes(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_index(&self) -> &[String] {
        &self.class_index
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OosWarning {
    /// A class had no members outside this fold; its probability there is 0.
    EmptyClassInTrainingFolds { fold: usize, class: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OosProbabilities {
    pub matrix: ProbabilityMatrix,
    pub folds: Vec<usize>,
    pub warnings: Vec<OosWarning>,
}

/// Stratified fold assignment: each class's rows are shuffled and dealt
/// round-robin, continuing the deal across classes.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut assignment = vec![0; labels.len()];
    let mut dealt = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = dealt % folds;
            dealt += 1;
        }
    }
    assignment
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cross-validated k-NN class probabilities for every row.
///
/// A row's probabilities use only rows from other folds:
/// `p_j = (#class-j among k nearest + λ·prior_j) / (k + λ)` with `λ = 1`
/// and `prior_j` the class frequency in the training folds. Distance ties go
/// to the lower row index.
pub fn knn_oos_probabilities(
    view: &FeatureView,
    k: usize,
    folds: usize,
    seed: u64,
) -> Result<OosProbabilities> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidConfig("at least two folds are required".into()));
    }
    if view.n_rows() < folds {
        return Err(Error::TooFewRows {
            rows: view.n_rows(),
            folds,
        });
    }
    let assignment = stratified_folds(&view.labels, view.n_classes(), folds, seed);
    knn_probabilities_with_folds(view, &assignment, folds, k)
}

/// k-NN probabilities for a given fold assignment.
pub fn knn_probabilities_with_folds(
    view: &FeatureView,
    assignment: &[usize],
    folds: usize,
    k: usize,
) -> Result<OosProbabilities> {
    let n = view.n_rows();
    let m = view.n_classes();
    if assignment.len() != n {
        return Err(Error::InvalidConfig("fold assignment length differs from row count".into()));
    }
    if let Some(r) = view.features.iter().position(|f| f.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidConfig(format!("row {r} has non-finite features")));
    }

    let mut warnings = Vec::new();
    let mut priors = vec![vec![0.0; m]; folds];
    for (fold, prior) in priors.iter_mut().enumerate() {
        let mut counts = vec![0usize; m];
        let mut total = 0usize;
        for (i, &l) in view.labels.iter().enumerate() {
            if assignment[i] != fold {
                counts[l] += 1;
                total += 1;
            }
        }
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 && assignment.contains(&fold) {
                warnings.push(OosWarning::EmptyClassInTrainingFolds {
                    fold,
                    class: view.class_index[j].clone(),
                });
            }
            prior[j] = if total > 0 { c as f64 / total as f64 } else { 1.0 / m as f64 };
        }
    }

    let mut rows = Vec::with_capacity(n);
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let fold = assignment[i];
        candidates.clear();
        candidates.extend(
            (0..n)
                .filter(|&j| assignment[j] != fold)
                .map(|j| (squared_distance(&view.features[i], &view.features[j]), j)),
        );
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k_eff = k.min(candidates.len());
        let mut counts = vec![0usize; m];
        for &(_, j) in &candidates[..k_eff] {
            counts[view.labels[j]] += 1;
        }
        let denom = k_eff as f64 + SMOOTHING;
        rows.push(
            counts
                .iter()
                .zip(&priors[fold])
                .map(|(&c, &p)| (c as f64 + SMOOTHING * p) / denom)
                .collect(),
        );
    }
    Ok(OosProbabilities {
        matrix: ProbabilityMatrix::new(rows, view.class_index.clone(), view.labels.clone())?,
        folds: assignment.to_vec(),
        warnings,
    })
}

/// Reads externally produced probabilities (e.g. from an AutoML system).
///
/// The header lists class names; row `i` holds the probabilities for table
/// row `i`. Rows must sum to 1 within [`FILE_ROW_SUM_TOLERANCE`] and are
/// renormalised exactly.
pub fn load_probabilities(
    path: &Path,
    labels_column: &str,
    dataset: &AlignedDataset,
) -> Result<ProbabilityMatrix> {
    let table = io::read_table(path)?;
    probabilities_from_table(table, &path.display().to_string(), labels_column, dataset)
}

pub fn probabilities_from_table(
    table: io::Table,
    context: &str,
    labels_column: &str,
    dataset: &AlignedDataset,
) -> Result<ProbabilityMatrix> {
    let col = dataset.column_index(labels_column)?;
    let class_index = table.header;
    let mut positions = BTreeMap::new();
    for (i, c) in class_index.iter().enumerate() {
        if positions.insert(c.as_str(), i).is_some() {
            return Err(Error::parse(context, format!("duplicate class `{c}` in header")));
        }
    }
    if table.rows.len() != dataset.n_rows() {
        return Err(Error::RowCountMismatch {
            expected: dataset.n_rows(),
            found: table.rows.len(),
        });
    }
    let mut rows = Vec::with_capacity(table.rows.len());
    for (r, record) in table.rows.iter().enumerate() {
        let row_no = r + 1;
        let mut values = Vec::with_capacity(record.len());
        for field in record {
            let p: f64 = field.trim().parse().map_err(|_| {
                Error::parse(context, format!("data row {row_no}: `{field}` is not a number"))
            })?;
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::parse(context, format!("data row {row_no}: {p} is outside [0, 1]")));
            }
            values.push(p);
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > FILE_ROW_SUM_TOLERANCE {
            return Err(Error::parse(context, format!("data row {row_no} sums to {sum}")));
        }
        values.iter_mut().for_each(|p| *p /= sum);
        rows.push(values);
    }
    let labels = dataset
        .column_values(col)
        .map(|v| {
            positions
                .get(v)
                .copied()
                .ok_or_else(|| Error::ClassMismatch(format!("label `{v}` is not a header class")))
        })
        .collect::<Result<Vec<_>>>()?;
    ProbabilityMatrix::new(rows, class_index, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSchema, Embeddings};

    fn dataset(d: usize) -> AlignedDataset {
        let columns = vec![
            ColumnSchema::categorical("Target"),
            ColumnSchema::categorical("A"),
            ColumnSchema::categorical("B"),
            ColumnSchema::free_text("Title"),
        ];
        let rows = vec![
            vec!["x", "a1", "b1", "t"],
            vec!["y", "a2", "b2", "t"],
            vec!["x", "a3", "b1", "t"],
        ];
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(String::from).collect())
            .collect();
        let emb = Embeddings::new(3, d, (0..3 * d).map(|i| (i % 5) as f32 + 1.0).collect()).unwrap();
        AlignedDataset::new(columns, rows, emb).unwrap()
    }

    #[test]
    fn feature_widths() {
        let ds = dataset(16);
        let t = build_features(&ds, "Target", Modality::TableOnly).unwrap();
        assert_eq!(t.width(), 5);
        let i = build_features(&ds, "Target", Modality::ImageOnly).unwrap();
        assert_eq!(i.width(), 16);
        assert!(i.provenance.iter().all(|p| matches!(p, FeatureSlot::Embedding(_))));
        let b = build_features(&ds, "Target", Modality::TableAndImage).unwrap();
        assert_eq!(b.width(), 21);
        assert!(b.features.iter().all(|f| f.len() == 21));
    }

    #[test]
    fn target_and_titles_excluded() {
        let ds = dataset(4);
        let v = build_features(&ds, "Target", Modality::TableAndImage).unwrap();
        assert!(v.excluded_columns.contains(&"Target".to_string()));
        assert!(v.excluded_columns.contains(&"Title".to_string()));
        assert!(v
            .provenance
            .iter()
            .filter_map(FeatureSlot::source_column)
            .all(|c| c != "Target" && c != "Title"));
    }

    #[test]
    fn one_hot_scaling_and_normalised_embeddings() {
        let ds = dataset(4);
        let v = build_features(&ds, "Target", Modality::TableAndImage).unwrap();
        // Rows 0 and 2 differ only in A.
        let table_part = |r: usize| v.features[r][..5].to_vec();
        let d2 = squared_distance(&table_part(0), &table_part(2));
        assert!((d2 - 1.0).abs() < 1e-12);
        for f in &v.features {
            let n: f64 = f[5..].iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_target() {
        let ds = dataset(2);
        assert!(matches!(
            build_features(&ds, "B", Modality::TableOnly).map(|_| ()),
            Ok(())
        ));
        let rows = vec![vec!["x".to_string()], vec!["x".to_string()]];
        let one = AlignedDataset::new(
            vec![ColumnSchema::categorical("T")],
            rows,
            Embeddings::new(2, 1, vec![1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            build_features(&one, "T", Modality::ImageOnly),
            Err(Error::DegenerateTarget(_))
        ));
        assert!(matches!(
            build_features(&ds, "Title", Modality::ImageOnly),
            Err(Error::DegenerateTarget(_))
        ));
        assert!(matches!(
            build_features(&ds, "Nope", Modality::ImageOnly),
            Err(Error::UnknownColumn(_))
        ));
    }

    fn view(points: &[[f64; 2]], labels: &[usize]) -> FeatureView {
        FeatureView {
            features: points.iter().map(|p| p.to_vec()).collect(),
            provenance: vec![FeatureSlot::Embedding(0), FeatureSlot::Embedding(1)],
            target_column: "T".into(),
            excluded_columns: vec!["T".into()],
            labels: labels.to_vec(),
            class_index: vec!["a".into(), "b".into()],
        }
    }

    #[test]
    fn hand_traced_two_folds() {
        // Folds {0,2} and {1,3}; k = 1, λ = 1.
        // Row 0 (class a) ← nearest of rows 1,3 is row 1 (b); prior (a,b) = (1/2,1/2)
        //   p = ((0 + 0.5)/2, (1 + 0.5)/2) = (0.25, 0.75)
        // Row 1 (class b) ← nearest of rows 0,2 is row 0 (a); prior (1, 0)
        //   p = ((1 + 1)/2, 0/2) = (1.0, 0.0)
        // Row 2 (class a) ← nearest of rows 1,3 is row 3 (a) → (0.75, 0.25)
        // Row 3 (class a) ← rows 0,2 equidistant, tie → row 0 (a); prior (1, 0)
        //   p = ((1 + 1)/2, 0/2) = (1.0, 0.0)
        let v = view(
            &[[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [5.0, 0.0]],
            &[0, 1, 0, 0],
        );
        let out = knn_probabilities_with_folds(&v, &[0, 1, 0, 1], 2, 1).unwrap();
        let expect = [[0.25, 0.75], [1.0, 0.0], [0.75, 0.25], [1.0, 0.0]];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(out.matrix.row(i), e, "row {i}");
        }
        assert_eq!(
            out.warnings,
            vec![OosWarning::EmptyClassInTrainingFolds {
                fold: 1,
                class: "b".into()
            }]
        );
    }

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let a = stratified_folds(&labels, 2, 5, 42);
        assert_eq!(a, stratified_folds(&labels, 2, 5, 42));
        for f in 0..5 {
            let members: Vec<_> = (0..20).filter(|&i| a[i] == f).collect();
            assert_eq!(members.len(), 4);
            assert_eq!(members.iter().filter(|&&i| labels[i] == 0).count(), 2);
        }
    }

    #[test]
    fn oos_preconditions() {
        let v = view(&[[0.0, 0.0], [1.0, 0.0]], &[0, 1]);
        assert!(matches!(
            knn_oos_probabilities(&v, 1, 3, 0),
            Err(Error::TooFewRows { rows: 2, folds: 3 })
        ));
        assert!(knn_oos_probabilities(&v, 0, 2, 0).is_err());
        assert!(knn_oos_probabilities(&v, 1, 1, 0).is_err());
    }

    fn table_of(header: &[&str], rows: &[&[&str]]) -> io::Table {
        io::Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    #[test]
    fn probability_file_contract() {
        let ds = dataset(2);
        let ok = table_of(&["x", "y"], &[&["0.9", "0.1"], &["0.2", "0.8"], &["0.5", "0.5"]]);
        let p = probabilities_from_table(ok, "p", "Target", &ds).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0]);
        assert_eq!(p.row(1), &[0.2, 0.8]);

        let bad_sum = table_of(&["x", "y"], &[&["0.9", "0.1"], &["0.4", "0.4"], &["0.5", "0.5"]]);
        match probabilities_from_table(bad_sum, "p", "Target", &ds) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("row 2"), "{message}"),
            other => panic!("{other:?}"),
        }

        let missing = table_of(&["x", "z"], &[&["0.9", "0.1"], &["0.2", "0.8"], &["0.5", "0.5"]]);
        assert!(matches!(
            probabilities_from_table(missing, "p", "Target", &ds),
            Err(Error::ClassMismatch(_))
        ));

        let short = table_of(&["x", "y"], &[&["0.9", "0.1"]]);
        assert!(matches!(
            probabilities_from_table(short, "p", "Target", &ds),
            Err(Error::RowCountMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn matrix_invariants() {
        let classes = vec!["a".to_string(), "b".to_string()];
        assert!(ProbabilityMatrix::new(vec![vec![0.5, 0.5]], classes.clone(), vec![0]).is_ok());
        assert!(ProbabilityMatrix::new(vec![vec![0.5, 0.4]], classes.clone(), vec![0]).is_err());
        assert!(ProbabilityMatrix::new(vec![vec![1.5, -0.5]], classes.clone(), vec![0]).is_err());
        assert!(ProbabilityMatrix::new(vec![vec![0.5, 0.5]], classes, vec![2]).is_err());
        assert!(ProbabilityMatrix::new(vec![vec![1.0]], vec!["a".into()], vec![0]).is_err());
    }
}
