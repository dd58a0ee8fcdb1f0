//! Exact Data-Shapley values under a 1-nearest-neighbour proxy utility.
//!
//! The utility of a subset `S` of dirty tuples is the fraction of clean
//! validation points whose nearest neighbour in `S` carries the matching
//! label (`U(∅) = 0`). For k = 1 the Shapley values for one validation point
//! follow from a single pass over the dirty tuples sorted by distance,
//! farthest first:
//!
//! ```text
//! s[α_N] = 1[y(α_N) = y_val] / N
//! s[α_i] = s[α_{i+1}] + (1[y(α_i) = y_val] − 1[y(α_{i+1}) = y_val]) / i
//! ```
//!
//! Values are averaged over the validation points. Tuples with negative
//! value are flagged as erroneous.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::RowId;
use crate::error::{Error, Result};
use crate::predict::FeatureView;

/// Largest dirty set accepted by [`brute_force_shapley`].
pub const BRUTE_FORCE_MAX: usize = 12;

/// Feature rows with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledSet {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::InvalidValuationInput(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        Ok(LabeledSet { features, labels })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl From<FeatureView> for LabeledSet {
    fn from(v: FeatureView) -> Self {
        LabeledSet {
            features: v.features,
            labels: v.labels,
        }
    }
}

/// Potentially dirty tuples to value, plus clean validation points.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationInput {
    dirty: LabeledSet,
    clean: LabeledSet,
}

impl ValuationInput {
    pub fn new(dirty: LabeledSet, clean: LabeledSet) -> Result<Self> {
        if dirty.is_empty() {
            return Err(Error::EmptyDirtySet);
        }
        if clean.is_empty() {
            return Err(Error::EmptyCleanSet);
        }
        let dim = dirty.features[0].len();
        for (set, name) in [(&dirty, "dirty"), (&clean, "clean")] {
            if let Some(i) = set.features.iter().position(|f| f.len() != dim) {
                return Err(Error::InvalidValuationInput(format!(
                    "{name} row {i} has dimension {}, expected {dim}",
                    set.features[i].len()
                )));
            }
            if let Some(i) = set
                .features
                .iter()
                .position(|f| f.iter().any(|v| !v.is_finite()))
            {
                return Err(Error::InvalidValuationInput(format!(
                    "{name} row {i} has non-finite features"
                )));
            }
        }
        Ok(ValuationInput { dirty, clean })
    }

    pub fn dirty(&self) -> &LabeledSet {
        &self.dirty
    }

    pub fn clean(&self) -> &LabeledSet {
        &self.clean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationResult {
    pub shapley: Vec<f64>,
    pub flagged: BTreeSet<usize>,
    pub utility_full: f64,
    pub utility_empty: f64,
}

impl ValuationResult {
    /// JSON form; `ids` maps tuple positions to row ids.
    pub fn to_doc(&self, column: &str, ids: &[RowId]) -> ValuationDoc {
        ValuationDoc {
            column: column.to_string(),
            shapley: self
                .shapley
                .iter()
                .zip(ids)
                .map(|(&value, &row)| ShapleyValue { row, value })
                .collect(),
            flagged: self.flagged.iter().map(|&i| ids[i]).collect(),
            utility_full: self.utility_full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationDoc {
    pub column: String,
    pub shapley: Vec<ShapleyValue>,
    pub flagged: Vec<RowId>,
    pub utility_full: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyValue {
    pub row: RowId,
    pub value: f64,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Dirty tuple indices sorted nearest first, ties by lower index.
fn neighbour_order(dirty: &LabeledSet, point: &[f64]) -> Vec<usize> {
    let d: Vec<f64> = dirty
        .features
        .iter()
        .map(|f| squared_distance(f, point))
        .collect();
    let mut order: Vec<usize> = (0..dirty.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order
}

/// Shapley contributions of every dirty tuple for one validation point.
pub fn knn_shapley_single(dirty: &LabeledSet, point: &[f64], label: usize) -> Result<Vec<f64>> {
    if dirty.is_empty() {
        return Err(Error::EmptyDirtySet);
    }
    let order = neighbour_order(dirty, point);
    let hit = |i: usize| f64::from(u8::from(dirty.labels[order[i]] == label));
    let n = order.len();
    let mut s = vec![0.0; n];
    let mut current = hit(n - 1) / n as f64;
    s[order[n - 1]] = current;
    for i in (0..n - 1).rev() {
        // Position i in the sort order is rank i + 1.
        current += (hit(i) - hit(i + 1)) / (i + 1) as f64;
        s[order[i]] = current;
    }
    Ok(s)
}

/// Exact 1-NN Shapley values averaged over the clean validation points.
pub fn knn_shapley(input: &ValuationInput) -> Result<ValuationResult> {
    let dirty = &input.dirty;
    let clean = &input.clean;
    let mut shapley = vec![0.0; dirty.len()];
    let mut hits = 0usize;
    for (point, &label) in clean.features.iter().zip(&clean.labels) {
        let s = knn_shapley_single(dirty, point, label)?;
        shapley.iter_mut().zip(&s).for_each(|(acc, v)| *acc += v);
        let nearest = neighbour_order(dirty, point)[0];
        hits += usize::from(dirty.labels[nearest] == label);
    }
    let v = clean.len() as f64;
    shapley.iter_mut().for_each(|x| *x /= v);
    let mut result = ValuationResult {
        shapley,
        flagged: BTreeSet::new(),
        utility_full: hits as f64 / v,
        utility_empty: 0.0,
    };
    result.flagged = flag_errors(&result);
    Ok(result)
}

/// Shapley values by enumerating all `2^N` subsets of the dirty set.
pub fn brute_force_shapley(input: &ValuationInput) -> Result<Vec<f64>> {
    let n = input.dirty.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            size: n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let orders: Vec<(Vec<usize>, usize)> = input
        .clean
        .features
        .iter()
        .zip(&input.clean.labels)
        .map(|(p, &l)| (neighbour_order(&input.dirty, p), l))
        .collect();
    let v = orders.len() as f64;
    let utility = |subset: usize| -> f64 {
        if subset == 0 {
            return 0.0;
        }
        let hits = orders
            .iter()
            .filter(|(order, label)| {
                let nearest = order.iter().find(|&&i| subset & (1 << i) != 0).unwrap();
                input.dirty.labels[*nearest] == *label
            })
            .count();
        hits as f64 / v
    };
    let utilities: Vec<f64> = (0..1usize << n).map(utility).collect();

    let mut factorial = vec![1.0f64; n + 1];
    for i in 1..=n {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let weight = |size: usize| factorial[size] * factorial[n - size - 1] / factorial[n];

    let mut values = vec![0.0; n];
    for (i, value) in values.iter_mut().enumerate() {
        let bit = 1usize << i;
        for subset in (0..1usize << n).filter(|s| s & bit == 0) {
            let size = subset.count_ones() as usize;
            *value += weight(size) * (utilities[subset | bit] - utilities[subset]);
        }
    }
    Ok(values)
}

/// Tuples with strictly negative value.
pub fn flag_errors(result: &ValuationResult) -> BTreeSet<usize> {
    result
        .shapley
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 0.0)
        .map(|(i, _)| i)
        .collect()
}
