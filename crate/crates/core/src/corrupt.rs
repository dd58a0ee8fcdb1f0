//! Seeded cross-modal error injection.
//!
//! A fraction of rows is sampled without replacement; each sampled row gets
//! exactly one categorical cell swapped for a different value already present
//! in that column. Free-text propagation columns that mention the original
//! value are rewritten so the true value cannot be read off the table, and
//! correlated columns only ever form value pairs seen in the clean data.
//! Embeddings are never touched.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{AlignedDataset, CellError, ColumnKind, ErrorMask, PropagatedCell};
use crate::error::{Error, Result};
use crate::rng;
use crate::text::{contains_whole_word, replace_whole_words};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptionConfig {
    /// Fraction of rows receiving one corrupted cell.
    pub row_fraction: f64,
    pub seed: u64,
    /// Categorical columns that may be corrupted.
    pub eligible_columns: Vec<String>,
    #[serde(default = "default_true")]
    pub enforce_observed_pairs: bool,
    /// Free-text columns scanned for the original value.
    #[serde(default)]
    pub propagation_columns: Vec<String>,
}

impl CorruptionConfig {
    pub fn new(row_fraction: f64, seed: u64, eligible_columns: Vec<String>) -> Self {
        CorruptionConfig {
            row_fraction,
            seed,
            eligible_columns,
            enforce_observed_pairs: true,
            propagation_columns: Vec::new(),
        }
    }

    pub fn with_propagation(mut self, columns: Vec<String>) -> Self {
        self.propagation_columns = columns;
        self
    }

    pub fn validate(&self, dataset: &AlignedDataset) -> Result<()> {
        if !(0.0..=1.0).contains(&self.row_fraction) {
            return Err(Error::InvalidConfig(format!(
                "row_fraction {} is outside [0, 1]",
                self.row_fraction
            )));
        }
        if self.eligible_columns.is_empty() {
            return Err(Error::InvalidConfig("no eligible columns".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &self.eligible_columns {
            if !seen.insert(name) {
                return Err(Error::InvalidConfig(format!("column `{name}` listed twice")));
            }
            if dataset.schema(name)?.kind != ColumnKind::Categorical {
                return Err(Error::InvalidConfig(format!(
                    "eligible column `{name}` is not categorical"
                )));
            }
        }
        for name in &self.propagation_columns {
            if dataset.schema(name)?.kind != ColumnKind::FreeText {
                return Err(Error::InvalidConfig(format!(
                    "propagation column `{name}` is not free-text"
                )));
            }
        }
        Ok(())
    }

    /// Number of rows to corrupt in a table of `n` rows.
    pub fn quota(&self, n: usize) -> usize {
        // Tolerance keeps e.g. 0.29 * 100 from flooring to 28.
        ((self.row_fraction * n as f64) + 1e-9).floor() as usize
    }
}

/// Value pairs of two columns observed together in clean data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConstraint {
    pub columns: (String, String),
    pub observed: BTreeSet<(String, String)>,
}

impl PairConstraint {
    pub fn allows(&self, a: &str, b: &str) -> bool {
        self.observed.contains(&(a.to_string(), b.to_string()))
    }
}

pub fn observed_pairs(dataset: &AlignedDataset, col_a: &str, col_b: &str) -> Result<PairConstraint> {
    let a = dataset.column_index(col_a)?;
    let b = dataset.column_index(col_b)?;
    let observed = dataset
        .rows()
        .iter()
        .map(|r| (r[a].clone(), r[b].clone()))
        .collect();
    Ok(PairConstraint {
        columns: (col_a.to_string(), col_b.to_string()),
        observed,
    })
}

struct EligibleColumn {
    index: usize,
    name: String,
    values: Vec<String>,
    /// Partner column index with the pairs (this column, partner) seen in clean data.
    partners: Vec<(usize, BTreeSet<(String, String)>)>,
}

/// Corrupts `floor(row_fraction * n)` rows of a clean dataset.
///
/// Returns the corrupted dataset (sharing the input's embeddings) and the
/// ground-truth mask with entries sorted by row.
pub fn inject_errors(
    dataset: &AlignedDataset,
    config: &CorruptionConfig,
) -> Result<(AlignedDataset, ErrorMask)> {
    config.validate(dataset)?;

    let mut eligible = Vec::with_capacity(config.eligible_columns.len());
    for name in &config.eligible_columns {
        let index = dataset.column_index(name)?;
        let values = dataset.distinct_values(index);
        if values.len() < 2 {
            return Err(Error::DegenerateColumn(name.clone()));
        }
        let mut partners = Vec::new();
        if config.enforce_observed_pairs {
            if let Some(group) = &dataset.columns()[index].correlated_group {
                for (j, other) in dataset.columns().iter().enumerate() {
                    if j != index && other.correlated_group.as_ref() == Some(group) {
                        partners.push((j, observed_pairs(dataset, name, &other.name)?.observed));
                    }
                }
            }
        }
        eligible.push(EligibleColumn {
            index,
            name: name.clone(),
            values,
            partners,
        });
    }
    let propagation: Vec<(usize, &str)> = config
        .propagation_columns
        .iter()
        .map(|c| Ok((dataset.column_index(c)?, c.as_str())))
        .collect::<Result<_>>()?;

    let n = dataset.n_rows();
    let quota = config.quota(n);
    let mut rng = rng::seeded(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut rows = dataset.rows().to_vec();
    let mut entries = Vec::with_capacity(quota);
    for &row in &order {
        if entries.len() == quota {
            break;
        }
        for _ in 0..eligible.len() {
            let col = &eligible[rng.random_range(0..eligible.len())];
            let candidates = candidates(&rows[row], col, &propagation);
            if candidates.is_empty() {
                continue;
            }
            let injected = candidates[rng.random_range(0..candidates.len())].to_string();
            let original = std::mem::replace(&mut rows[row][col.index], injected.clone());
            let mut propagated = Vec::new();
            for &(p, pname) in &propagation {
                if let Some(new) = replace_whole_words(&rows[row][p], &original, &injected) {
                    let old = std::mem::replace(&mut rows[row][p], new.clone());
                    propagated.push(PropagatedCell {
                        column: pname.to_string(),
                        original: old,
                        new,
                    });
                }
            }
            entries.push(CellError {
                row,
                column: col.name.clone(),
                original,
                injected,
                propagated,
            });
            break;
        }
    }
    if entries.len() < quota {
        return Err(Error::NoCandidateValue {
            required: quota,
            achieved: entries.len(),
        });
    }
    entries.sort_by_key(|e| e.row);
    let corrupted = dataset.with_rows(rows)?;
    Ok((corrupted, ErrorMask::new(entries)?))
}

/// Replacement values for one cell that keep every constraint satisfied.
fn candidates<'a>(
    row: &[String],
    col: &'a EligibleColumn,
    propagation: &[(usize, &str)],
) -> Vec<&'a str> {
    let original = row[col.index].as_str();
    let mentions_original = propagation
        .iter()
        .any(|&(p, _)| contains_whole_word(&row[p], original));
    col.values
        .iter()
        .map(String::as_str)
        .filter(|&v| v != original)
        .filter(|&v| {
            col.partners
                .iter()
                .all(|(p, pairs)| pairs.contains(&(v.to_string(), row[*p].clone())))
        })
        // A replacement that itself contains the original word would leak it.
        .filter(|&v| !mentions_original || !contains_whole_word(v, original))
        .collect()
}

/// Per-column count of injected errors.
pub fn entries_per_column(mask: &ErrorMask) -> BTreeMap<&str, usize> {
    let mut out = BTreeMap::new();
    for e in &mask.entries {
        *out.entry(e.column.as_str()).or_insert(0) += 1;
    }
    out
}
