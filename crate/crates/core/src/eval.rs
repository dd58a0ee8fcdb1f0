//! Scoring detections and repairs against a ground-truth [`ErrorMask`].
//!
//! Zero denominators yield 0 rather than NaN.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{erroneous_rows, ErrorMask, RowId};
use crate::error::{Error, Result};
use crate::predict::Modality;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl DetectionMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        DetectionMetrics {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }

    fn from_sets(predicted: &BTreeSet<RowId>, actual: &BTreeSet<RowId>) -> Self {
        let tp = predicted.intersection(actual).count();
        Self::from_counts(tp, predicted.len() - tp, actual.len() - tp)
    }
}

fn check_rows<'a>(rows: impl IntoIterator<Item = &'a RowId>, n: usize) -> Result<()> {
    match rows.into_iter().find(|&&r| r >= n) {
        Some(&r) => Err(Error::UnknownRowId(r)),
        None => Ok(()),
    }
}

/// Tuple-level precision/recall/F1 of `predicted` against the mask.
pub fn score_detection(predicted: &BTreeSet<RowId>, mask: &ErrorMask, n: usize) -> Result<DetectionMetrics> {
    check_rows(predicted, n)?;
    check_rows(mask.entries.iter().map(|e| &e.row), n)?;
    Ok(DetectionMetrics::from_sets(predicted, &erroneous_rows(mask)))
}

/// A tuple is erroneous when any of its cells is flagged.
pub fn tuple_level_prediction(per_column_flags: &BTreeMap<String, BTreeSet<RowId>>) -> BTreeSet<RowId> {
    per_column_flags.values().flatten().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modality: Option<Modality>,
    /// Per-column metrics in schema order.
    pub columns: Vec<(String, DetectionMetrics)>,
    pub overall: DetectionMetrics,
}

impl ColumnReport {
    pub fn column(&self, name: &str) -> Option<&DetectionMetrics> {
        self.columns.iter().find(|(c, _)| c == name).map(|(_, m)| m)
    }

    /// Plain-text table: one row per measure, one column per attribute.
    pub fn to_text_table(&self) -> String {
        let mut header = vec!["Measure".to_string()];
        header.extend(self.columns.iter().map(|(c, _)| c.clone()));
        header.push("Tuple".into());
        let metrics: Vec<&DetectionMetrics> = self
            .columns
            .iter()
            .map(|(_, m)| m)
            .chain(std::iter::once(&self.overall))
            .collect();
        let row = |name: &str, f: fn(&DetectionMetrics) -> f64| {
            std::iter::once(name.to_string())
                .chain(metrics.iter().map(|m| format!("{:.2}", f(m))))
                .collect::<Vec<_>>()
        };
        let rows = vec![
            header,
            row("P", |m| m.precision),
            row("R", |m| m.recall),
            row("F1", |m| m.f1),
        ];
        let mut out = String::new();
        if let Some(m) = self.modality {
            let _ = writeln!(out, "modality: {m}");
        }
        out.push_str(&align(&rows));
        out
    }
}

/// Left-aligns the first column and right-aligns the rest.
pub(crate) fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Per-column metrics where the positives of a column are the rows whose
/// mask entry targets that column. A row corrupted in another column is a
/// negative for this one.
pub fn per_column_metrics(
    flags: &BTreeMap<String, BTreeSet<RowId>>,
    mask: &ErrorMask,
    columns: &[String],
    n: usize,
) -> Result<ColumnReport> {
    for name in flags.keys().chain(mask.entries.iter().map(|e| &e.column)) {
        if !columns.contains(name) {
            return Err(Error::UnknownColumn(name.clone()));
        }
    }
    check_rows(flags.values().flatten(), n)?;
    check_rows(mask.entries.iter().map(|e| &e.row), n)?;

    let empty = BTreeSet::new();
    let per_column = columns
        .iter()
        .map(|c| {
            let actual: BTreeSet<RowId> = mask
                .entries
                .iter()
                .filter(|e| &e.column == c)
                .map(|e| e.row)
                .collect();
            let predicted = flags.get(c).unwrap_or(&empty);
            (c.clone(), DetectionMetrics::from_sets(predicted, &actual))
        })
        .collect();
    let overall = DetectionMetrics::from_sets(&tuple_level_prediction(flags), &erroneous_rows(mask));
    Ok(ColumnReport {
        modality: None,
        columns: per_column,
        overall,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRepair {
    pub accuracy: f64,
    pub repaired: usize,
    pub injected: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub columns: BTreeMap<String, ColumnRepair>,
}

impl RepairReport {
    pub fn accuracy(&self, column: &str) -> Option<f64> {
        self.columns.get(column).map(|c| c.accuracy)
    }

    pub fn to_text_table(&self) -> String {
        let mut rows = vec![vec![
            "Column".to_string(),
            "Repaired".into(),
            "Injected".into(),
            "Accuracy".into(),
        ]];
        for (c, r) in &self.columns {
            rows.push(vec![
                c.clone(),
                r.repaired.to_string(),
                r.injected.to_string(),
                format!("{:.2}", r.accuracy),
            ]);
        }
        align(&rows)
    }
}

/// Fraction of each column's injected errors repaired to the true value.
pub fn repair_accuracy(repairs: &BTreeMap<(RowId, String), String>, mask: &ErrorMask) -> RepairReport {
    let mut columns: BTreeMap<String, ColumnRepair> = BTreeMap::new();
    for e in &mask.entries {
        let slot = columns.entry(e.column.clone()).or_insert(ColumnRepair {
            accuracy: 0.0,
            repaired: 0,
            injected: 0,
        });
        slot.injected += 1;
        if repairs.get(&(e.row, e.column.clone())) == Some(&e.original) {
            slot.repaired += 1;
        }
    }
    for r in columns.values_mut() {
        r.accuracy = ratio(r.repaired, r.injected);
    }
    RepairReport { columns }
}
