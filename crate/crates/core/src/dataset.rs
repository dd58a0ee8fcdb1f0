//! Aligned table + embedding data model.
//!
//! A dataset is a relational table of string cells where every row carries
//! one precomputed image embedding. Cells are never typed beyond the
//! categorical / free-text distinction recorded in [`ColumnSchema`]; an empty
//! string is an ordinary value.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positional row identifier (0-based row index in the table file).
pub type RowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Categorical,
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Columns sharing a group label must keep their value pairs jointly
    /// observed when one of them is corrupted.
    #[serde(default)]
    pub correlated_group: Option<String>,
    /// Free-text column that embeds categorical values (e.g. a product title).
    #[serde(default)]
    pub propagation_target: bool,
}

impl ColumnSchema {
    pub fn categorical(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Categorical,
            correlated_group: None,
            propagation_target: false,
        }
    }

    pub fn free_text(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::FreeText,
            correlated_group: None,
            propagation_target: true,
        }
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.correlated_group = Some(group.into());
        self
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == ColumnKind::Categorical
    }
}

/// Schema annotations layered on top of a header-only table.
///
/// Tables are loaded with every column categorical; this declares the
/// free-text columns and correlated groups.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaOverrides {
    /// Free-text columns. They are marked as propagation targets.
    pub free_text: Vec<String>,
    /// Group label → member columns.
    pub correlated_groups: BTreeMap<String, Vec<String>>,
}

/// Row-major `n × dim` matrix of finite `f32` embedding values.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    dim: usize,
    rows: usize,
    values: Vec<f32>,
}

impl Embeddings {
    pub fn new(rows: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Schema("embedding dimension must be at least 1".into()));
        }
        if values.len() != rows * dim {
            return Err(Error::Schema(format!(
                "expected {} embedding values for {rows}x{dim}, got {}",
                rows * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Schema(format!(
                "non-finite embedding value in row {}",
                pos / dim
            )));
        }
        Ok(Embeddings { dim, rows, values })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Schema(format!(
                "embedding row {bad} has dimension {} instead of {dim}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: RowId) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.values
    }
}

/// A relational table aligned row-by-row with embedding vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    columns: Vec<ColumnSchema>,
    rows: Vec<Vec<String>>,
    embeddings: Arc<Embeddings>,
    ids: Vec<RowId>,
}

impl AlignedDataset {
    pub fn new(
        columns: Vec<ColumnSchema>,
        rows: Vec<Vec<String>>,
        embeddings: Embeddings,
    ) -> Result<Self> {
        Self::with_shared_embeddings(columns, rows, Arc::new(embeddings))
    }

    pub(crate) fn with_shared_embeddings(
        columns: Vec<ColumnSchema>,
        rows: Vec<Vec<String>>,
        embeddings: Arc<Embeddings>,
    ) -> Result<Self> {
        validate_schema(&columns)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::Schema(format!(
                    "row {i} has {} cells, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
        }
        if embeddings.len() != rows.len() {
            return Err(Error::Alignment {
                table_rows: rows.len(),
                embedding_rows: embeddings.len(),
            });
        }
        let ids = (0..rows.len()).collect();
        Ok(AlignedDataset {
            columns,
            rows,
            embeddings,
            ids,
        })
    }

    /// Replaces the schema annotations. Column names and order must match.
    pub fn with_schema(self, columns: Vec<ColumnSchema>) -> Result<Self> {
        let same_names = columns.len() == self.columns.len()
            && columns.iter().zip(&self.columns).all(|(a, b)| a.name == b.name);
        if !same_names {
            return Err(Error::Schema(
                "replacement schema must list the same columns in the same order".into(),
            ));
        }
        Self::with_shared_embeddings(columns, self.rows, self.embeddings)
    }

    pub fn apply_overrides(self, overrides: &SchemaOverrides) -> Result<Self> {
        let mut columns = self.columns.clone();
        for name in &overrides.free_text {
            let idx = self.column_index(name)?;
            columns[idx].kind = ColumnKind::FreeText;
            columns[idx].propagation_target = true;
        }
        for (group, members) in &overrides.correlated_groups {
            for name in members {
                let idx = self.column_index(name)?;
                columns[idx].correlated_group = Some(group.clone());
            }
        }
        self.with_schema(columns)
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn schema(&self, name: &str) -> Result<&ColumnSchema> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn ids(&self) -> &[RowId] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn row(&self, i: RowId) -> &[String] {
        &self.rows[i]
    }

    pub fn cell(&self, row: RowId, col: usize) -> &str {
        &self.rows[row][col]
    }

    /// Values of one column in row order.
    pub fn column_values(&self, col: usize) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |r| r[col].as_str())
    }

    /// Sorted distinct values of one column.
    pub fn distinct_values(&self, col: usize) -> Vec<String> {
        self.column_values(col)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    pub fn embeddings(&self) -> &Embeddings {
        &self.embeddings
    }

    pub(crate) fn shared_embeddings(&self) -> Arc<Embeddings> {
        Arc::clone(&self.embeddings)
    }

    /// Same schema and embeddings with a replaced cell matrix.
    pub(crate) fn with_rows(&self, rows: Vec<Vec<String>>) -> Result<Self> {
        Self::with_shared_embeddings(self.columns.clone(), rows, self.shared_embeddings())
    }
}

fn validate_schema(columns: &[ColumnSchema]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in columns {
        if !seen.insert(c.name.as_str()) {
            return Err(Error::Schema(format!("duplicate column name `{}`", c.name)));
        }
        if c.propagation_target && c.kind != ColumnKind::FreeText {
            return Err(Error::Schema(format!(
                "propagation target `{}` must be free-text",
                c.name
            )));
        }
    }
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    for g in columns.iter().filter_map(|c| c.correlated_group.as_deref()) {
        *groups.entry(g).or_default() += 1;
    }
    if let Some((g, _)) = groups.iter().find(|(_, &count)| count < 2) {
        return Err(Error::Schema(format!(
            "correlated group `{g}` needs at least two columns"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub column: String,
    pub distinct_count: usize,
    pub frequencies: BTreeMap<String, usize>,
}

impl ColumnStats {
    /// Histogram ordered by descending count, then by value.
    pub fn sorted_desc(&self) -> Vec<(&str, usize)> {
        let mut v: Vec<_> = self
            .frequencies
            .iter()
            .map(|(k, &c)| (k.as_str(), c))
            .collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn total(&self) -> usize {
        self.frequencies.values().sum()
    }
}

pub fn column_stats(dataset: &AlignedDataset, column: &str) -> Result<ColumnStats> {
    let col = dataset.column_index(column)?;
    let mut frequencies = BTreeMap::new();
    for v in dataset.column_values(col) {
        *frequencies.entry(v.to_string()).or_insert(0) += 1;
    }
    Ok(ColumnStats {
        column: column.to_string(),
        distinct_count: frequencies.len(),
        frequencies,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagatedCell {
    pub column: String,
    pub original: String,
    pub new: String,
}

/// One injected error: the observed value `injected` replaced the true
/// value `original`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellError {
    pub row: RowId,
    pub column: String,
    pub original: String,
    pub injected: String,
    #[serde(default)]
    pub propagated: Vec<PropagatedCell>,
}

/// Ground truth of an injection run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorMask {
    pub entries: Vec<CellError>,
}

impl ErrorMask {
    pub fn new(entries: Vec<CellError>) -> Result<Self> {
        let mask = ErrorMask { entries };
        mask.validate()?;
        Ok(mask)
    }

    pub fn validate(&self) -> Result<()> {
        let mut rows = HashSet::new();
        for e in &self.entries {
            if e.injected == e.original {
                return Err(Error::Schema(format!(
                    "mask entry for row {} injects its original value",
                    e.row
                )));
            }
            if !rows.insert(e.row) {
                return Err(Error::Schema(format!(
                    "row {} has more than one primary corruption",
                    e.row
                )));
            }
        }
        Ok(())
    }

    /// Checks the mask against a dataset's row range and schema.
    pub fn validate_against(&self, dataset: &AlignedDataset) -> Result<()> {
        self.validate()?;
        for e in &self.entries {
            if e.row >= dataset.n_rows() {
                return Err(Error::UnknownRowId(e.row));
            }
            dataset.column_index(&e.column)?;
            for p in &e.propagated {
                if dataset.schema(&p.column)?.kind != ColumnKind::FreeText {
                    return Err(Error::Schema(format!(
                        "propagated cell in non-free-text column `{}`",
                        p.column
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry_for_row(&self, row: RowId) -> Option<&CellError> {
        self.entries.iter().find(|e| e.row == row)
    }
}

/// Rows with at least one corrupted cell.
pub fn erroneous_rows(mask: &ErrorMask) -> BTreeSet<RowId> {
    mask.entries.iter().map(|e| e.row).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(columns: Vec<ColumnSchema>, rows: Vec<Vec<&str>>) -> Result<AlignedDataset> {
        let n = rows.len();
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(String::from).collect())
            .collect();
        AlignedDataset::new(columns, rows, Embeddings::new(n, 2, vec![0.0; 2 * n])?)
    }

    #[test]
    fn stats_constant_column() {
        let d = ds(
            vec![ColumnSchema::categorical("A")],
            vec![vec!["x"]; 5],
        )
        .unwrap();
        let s = column_stats(&d, "A").unwrap();
        assert_eq!(s.distinct_count, 1);
        assert_eq!(s.frequencies["x"], 5);
    }

    #[test]
    fn stats_counts_values() {
        let d = ds(
            vec![ColumnSchema::categorical("A")],
            vec![vec!["a"], vec!["b"], vec!["a"]],
        )
        .unwrap();
        let s = column_stats(&d, "A").unwrap();
        assert_eq!(s.frequencies, BTreeMap::from([("a".into(), 2), ("b".into(), 1)]));
        assert_eq!(s.sorted_desc(), vec![("a", 2), ("b", 1)]);
        assert!(matches!(column_stats(&d, "B"), Err(Error::UnknownColumn(_))));
    }

    #[test]
    fn empty_string_is_a_value() {
        let d = ds(
            vec![ColumnSchema::categorical("A")],
            vec![vec![""], vec!["b"], vec![""]],
        )
        .unwrap();
        let s = column_stats(&d, "A").unwrap();
        assert_eq!(s.distinct_count, 2);
        assert_eq!(s.frequencies[""], 2);
    }

    #[test]
    fn schema_invariants() {
        let dup = ds(
            vec![ColumnSchema::categorical("C"), ColumnSchema::categorical("C")],
            vec![vec!["a", "b"]],
        );
        assert!(matches!(dup, Err(Error::Schema(_))));

        let lonely = ds(
            vec![
                ColumnSchema::categorical("A").with_group("g"),
                ColumnSchema::categorical("B"),
            ],
            vec![vec!["a", "b"]],
        );
        assert!(matches!(lonely, Err(Error::Schema(_))));

        let ragged = ds(
            vec![ColumnSchema::categorical("A"), ColumnSchema::categorical("B")],
            vec![vec!["a"]],
        );
        assert!(matches!(ragged, Err(Error::Schema(_))));
    }

    #[test]
    fn misaligned_embeddings() {
        let err = AlignedDataset::new(
            vec![ColumnSchema::categorical("A")],
            vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
            Embeddings::new(2, 4, vec![0.0; 8]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Alignment {
                table_rows: 3,
                embedding_rows: 2
            }
        ));
    }

    #[test]
    fn non_finite_embeddings_rejected() {
        assert!(Embeddings::new(1, 2, vec![0.0, f32::NAN]).is_err());
        assert!(Embeddings::new(1, 0, vec![]).is_err());
    }

    #[test]
    fn overrides_mark_free_text_and_groups() {
        let d = ds(
            vec![
                ColumnSchema::categorical("Category"),
                ColumnSchema::categorical("SubCategory"),
                ColumnSchema::categorical("Title"),
            ],
            vec![vec!["Footwear", "Sandals", "Nike Sandals"]],
        )
        .unwrap();
        let o = SchemaOverrides {
            free_text: vec!["Title".into()],
            correlated_groups: BTreeMap::from([(
                "cat".into(),
                vec!["Category".into(), "SubCategory".into()],
            )]),
        };
        let d = d.apply_overrides(&o).unwrap();
        assert_eq!(d.schema("Title").unwrap().kind, ColumnKind::FreeText);
        assert!(d.schema("Title").unwrap().propagation_target);
        assert_eq!(
            d.schema("SubCategory").unwrap().correlated_group.as_deref(),
            Some("cat")
        );
    }

    fn entry(row: RowId, propagated: usize) -> CellError {
        CellError {
            row,
            column: "Color".into(),
            original: "Blue".into(),
            injected: "Red".into(),
            propagated: (0..propagated)
                .map(|i| PropagatedCell {
                    column: format!("Title{i}"),
                    original: "Blue shoe".into(),
                    new: "Red shoe".into(),
                })
                .collect(),
        }
    }

    #[test]
    fn erroneous_rows_from_mask() {
        assert!(erroneous_rows(&ErrorMask::default()).is_empty());
        let m = ErrorMask::new(vec![entry(2, 0), entry(7, 0)]).unwrap();
        assert_eq!(erroneous_rows(&m), BTreeSet::from([2, 7]));
        let m = ErrorMask::new(vec![entry(2, 2)]).unwrap();
        assert_eq!(erroneous_rows(&m), BTreeSet::from([2]));
    }

    #[test]
    fn mask_invariants() {
        assert!(ErrorMask::new(vec![entry(1, 0), entry(1, 0)]).is_err());
        let mut identity = entry(0, 0);
        identity.injected = identity.original.clone();
        assert!(ErrorMask::new(vec![identity]).is_err());
    }
}
