//! Confident-learning label-issue detection for one target column.
//!
//! Given out-of-sample probabilities `P` and noisy labels `ỹ`:
//!
//! 1. per-class threshold `t_j` = mean of `P[x][j]` over rows labelled `j`;
//! 2. each row votes for the most probable class among those reaching their
//!    threshold, filling the confident joint `C[ỹ][j]`;
//! 3. rows counted off the diagonal are label issues, ranked by
//!    self-confidence `P[x][ỹ]`, and the argmax class is the suggested repair.
//!
//! All ties resolve to the lower class index.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::RowId;
use crate::error::{Error, Result};
use crate::predict::ProbabilityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassThresholds {
    pub thresholds: Vec<f64>,
    /// Number of rows labelled with each class.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidentJoint {
    /// `counts[i][j]`: rows with noisy label `i` confidently predicted as `j`.
    pub counts: Vec<Vec<usize>>,
    pub calibrated: Vec<Vec<f64>>,
    pub thresholds: ClassThresholds,
    /// Confident class per row, `None` when no class reaches its threshold.
    pub assignments: Vec<Option<usize>>,
}

impl ConfidentJoint {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelIssue {
    pub row: RowId,
    /// Self-confidence `P[row][ỹ_row]`.
    pub score: f64,
    pub suggested: usize,
}

/// Flagged rows, most suspicious (lowest self-confidence) first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelIssueReport {
    pub issues: Vec<LabelIssue>,
}

impl LabelIssueReport {
    pub fn flagged(&self) -> BTreeSet<RowId> {
        self.issues.iter().map(|i| i.row).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub fn to_doc(&self, column: &str, class_index: &[String]) -> LabelIssueDoc {
        LabelIssueDoc {
            column: column.to_string(),
            flagged: self
                .issues
                .iter()
                .map(|i| FlaggedRow {
                    row: i.row,
                    score: i.score,
                    suggested: class_index[i.suggested].clone(),
                })
                .collect(),
        }
    }
}

/// JSON form of a [`LabelIssueReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelIssueDoc {
    pub column: String,
    pub flagged: Vec<FlaggedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedRow {
    pub row: RowId,
    pub score: f64,
    pub suggested: String,
}

fn argmax<'a>(values: impl Iterator<Item = (usize, &'a f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in values {
        // Strict comparison keeps the lower index on ties.
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j)
}

pub fn class_thresholds(probs: &ProbabilityMatrix) -> Result<ClassThresholds> {
    let m = probs.n_classes();
    let mut sums = vec![0.0; m];
    let mut support = vec![0usize; m];
    for (row, &label) in probs.rows().zip(probs.labels()) {
        sums[label] += row[label];
        support[label] += 1;
    }
    if let Some(j) = support.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(j));
    }
    let thresholds = sums
        .iter()
        .zip(&support)
        .map(|(&s, &c)| s / c as f64)
        .collect();
    Ok(ClassThresholds { thresholds, support })
}

pub fn confident_joint(probs: &ProbabilityMatrix, thresholds: &ClassThresholds) -> Result<ConfidentJoint> {
    let m = probs.n_classes();
    if thresholds.thresholds.len() != m {
        return Err(Error::InvalidProbabilities(
            "thresholds were computed for a different class count".into(),
        ));
    }
    let mut counts = vec![vec![0usize; m]; m];
    let assignments: Vec<Option<usize>> = probs
        .rows()
        .zip(probs.labels())
        .map(|(row, &label)| {
            let confident = argmax(
                row.iter()
                    .enumerate()
                    .filter(|&(j, p)| *p >= thresholds.thresholds[j]),
            );
            if let Some(j) = confident {
                counts[label][j] += 1;
            }
            confident
        })
        .collect();
    let calibrated = calibrate_joint(&counts, probs.labels())?;
    Ok(ConfidentJoint {
        counts,
        calibrated,
        thresholds: thresholds.clone(),
        assignments,
    })
}

/// Rescales each row of `counts` to the empirical frequency of its noisy
/// label, then normalises the whole matrix to sum to 1.
pub fn calibrate_joint(counts: &[Vec<usize>], labels: &[usize]) -> Result<Vec<Vec<f64>>> {
    let m = counts.len();
    let n = labels.len();
    let mut label_counts = vec![0usize; m];
    for &l in labels {
        if l >= m {
            return Err(Error::InvalidProbabilities(format!("label {l} out of range")));
        }
        label_counts[l] += 1;
    }
    let mut q: Vec<Vec<f64>> = counts
        .iter()
        .zip(&label_counts)
        .map(|(row, &lc)| {
            let rowsum: usize = row.iter().sum();
            if rowsum == 0 {
                return vec![0.0; row.len()];
            }
            row.iter()
                .map(|&c| c as f64 / rowsum as f64 * lc as f64 / n as f64)
                .collect()
        })
        .collect();
    let total: f64 = q.iter().flatten().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateJoint);
    }
    q.iter_mut().flatten().for_each(|v| *v /= total);
    Ok(q)
}

pub fn find_label_issues(probs: &ProbabilityMatrix) -> Result<LabelIssueReport> {
    let thresholds = class_thresholds(probs)?;
    let joint = confident_joint(probs, &thresholds)?;
    let mut issues: Vec<LabelIssue> = joint
        .assignments
        .iter()
        .enumerate()
        .filter_map(|(row, assigned)| {
            let label = probs.label(row);
            let confident = (*assigned)?;
            if confident == label {
                return None;
            }
            let p = probs.row(row);
            // The argmax can equal the noisy label when that class missed its
            // threshold; the confident class is the repair then.
            let best = argmax(p.iter().enumerate()).unwrap_or(confident);
            let suggested = if best == label { confident } else { best };
            Some(LabelIssue {
                row,
                score: p[label],
                suggested,
            })
        })
        .collect();
    issues.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.row.cmp(&b.row)));
    Ok(LabelIssueReport { issues })
}

/// Maps each flagged row to the class value suggested as its repair.
pub fn suggest_repairs(report: &LabelIssueReport, class_index: &[String]) -> BTreeMap<RowId, String> {
    report
        .issues
        .iter()
        .map(|i| (i.row, class_index[i.suggested].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probs(rows: &[&[f64]], labels: &[usize]) -> ProbabilityMatrix {
        let m = rows[0].len();
        ProbabilityMatrix::new(
            rows.iter().map(|r| r.to_vec()).collect(),
            (0..m).map(|j| format!("c{j}")).collect(),
            labels.to_vec(),
        )
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn thresholds_are_class_means() {
        let p = probs(&[&[0.9, 0.1], &[0.8, 0.2], &[0.3, 0.7]], &[0, 0, 1]);
        let t = class_thresholds(&p).unwrap();
        assert!(close(&t.thresholds, &[0.85, 0.7]));
        assert_eq!(t.support, vec![2, 1]);

        let onehot = probs(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]], &[0, 1, 2]);
        assert_eq!(class_thresholds(&onehot).unwrap().thresholds, vec![1.0; 3]);

        let third = 1.0 / 3.0;
        let uniform = probs(&[&[third; 3], &[third; 3], &[third; 3]], &[0, 1, 2]);
        assert!(close(&class_thresholds(&uniform).unwrap().thresholds, &[third; 3]));
    }

    #[test]
    fn empty_class() {
        let p = probs(&[&[0.9, 0.1], &[0.8, 0.2]], &[0, 0]);
        assert!(matches!(class_thresholds(&p), Err(Error::EmptyClass(1))));
        assert!(matches!(find_label_issues(&p), Err(Error::EmptyClass(1))));
    }

    #[test]
    fn joint_hand_traces() {
        let p = probs(&[&[0.9, 0.1], &[0.8, 0.2], &[0.3, 0.7]], &[0, 0, 1]);
        let j = confident_joint(&p, &class_thresholds(&p).unwrap()).unwrap();
        assert_eq!(j.counts, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(j.assignments, vec![Some(0), None, Some(1)]);

        let p = probs(&[&[0.9, 0.1], &[0.1, 0.9], &[0.2, 0.8]], &[0, 0, 1]);
        let t = class_thresholds(&p).unwrap();
        assert!(close(&t.thresholds, &[0.5, 0.8]));
        let j = confident_joint(&p, &t).unwrap();
        assert_eq!(j.counts, vec![vec![1, 1], vec![0, 1]]);
        let third = 1.0 / 3.0;
        assert!(close(&j.calibrated[0], &[third, third]));
        assert!(close(&j.calibrated[1], &[0.0, third]));
    }

    #[test]
    fn balanced_onehot_joint_is_diagonal() {
        let p = probs(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]], &[0, 1, 0, 1]);
        let j = confident_joint(&p, &class_thresholds(&p).unwrap()).unwrap();
        assert_eq!(j.counts, vec![vec![2, 0], vec![0, 2]]);
    }

    #[test]
    fn calibration() {
        let q = calibrate_joint(&[vec![5, 0], vec![0, 5]], &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]).unwrap();
        assert_eq!(q, vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert!(matches!(
            calibrate_joint(&[vec![0, 0], vec![0, 0]], &[0, 1]),
            Err(Error::DegenerateJoint)
        ));
        let q = calibrate_joint(&[vec![3, 1, 0], vec![0, 0, 0], vec![2, 2, 7]], &[0, 0, 1, 2, 2, 2]).unwrap();
        let total: f64 = q.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(q[1], vec![0.0; 3]);
    }

    #[test]
    fn issue_hand_trace() {
        let p = probs(&[&[0.9, 0.1], &[0.1, 0.9], &[0.2, 0.8]], &[0, 0, 1]);
        let r = find_label_issues(&p).unwrap();
        assert_eq!(
            r.issues,
            vec![LabelIssue {
                row: 1,
                score: 0.1,
                suggested: 1
            }]
        );
        let doc = r.to_doc("Color", &["red".into(), "blue".into()]);
        assert_eq!(
            serde_json::to_value(&doc).unwrap(),
            serde_json::json!({"column": "Color", "flagged": [{"row": 1, "score": 0.1, "suggested": "blue"}]})
        );
    }

    #[test]
    fn duplicated_flagged_row_flagged_twice() {
        let p = probs(&[&[0.9, 0.1], &[0.1, 0.9], &[0.2, 0.8], &[0.1, 0.9]], &[0, 0, 1, 0]);
        // Thresholds: t0 = (0.9 + 0.1 + 0.1)/3, t1 = 0.8 → both copies vote 1.
        assert_eq!(find_label_issues(&p).unwrap().flagged(), BTreeSet::from([1, 3]));
    }

    #[test]
    fn argmax_on_noisy_label_falls_back_to_confident_class() {
        // Row 3 is labelled 0 with P = [0.5, 0.3, 0.2]: class 0 misses t0,
        // class 1 reaches t1, so it is an issue whose argmax is its own label.
        let p = probs(
            &[
                &[0.95, 0.05, 0.0],
                &[0.95, 0.05, 0.0],
                &[0.0, 0.2, 0.8],
                &[0.5, 0.3, 0.2],
                &[0.0, 0.25, 0.75],
            ],
            &[0, 0, 1, 0, 2],
        );
        let r = find_label_issues(&p).unwrap();
        let issue = r.issues.iter().find(|i| i.row == 3).expect("row 3 flagged");
        assert_eq!(issue.suggested, 1);
        for i in &r.issues {
            assert_ne!(i.suggested, p.label(i.row));
        }
    }

    #[test]
    fn onehot_reports() {
        let p = probs(&[&[1.0, 0.0], &[0.0, 1.0]], &[0, 1]);
        assert!(find_label_issues(&p).unwrap().is_empty());
        assert!(suggest_repairs(&LabelIssueReport::default(), &[]).is_empty());
    }

    #[test]
    fn repair_values() {
        let report = LabelIssueReport {
            issues: vec![LabelIssue {
                row: 4,
                score: 0.2,
                suggested: 1,
            }],
        };
        let repairs = suggest_repairs(&report, &["red".into(), "blue".into()]);
        assert_eq!(repairs, BTreeMap::from([(4, "blue".to_string())]));
    }
}
