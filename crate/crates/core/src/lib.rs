//! Toolkit for injecting, detecting, repairing and scoring cross-modal errors
//! in relational tables whose rows are aligned with image embeddings.
//!
//! The pipeline is split into small, single-purpose modules:
//!
//! * [`dataset`] – the aligned table/embedding data model, error masks and
//!   column statistics.
//! * [`io`] – CSV tables, the `XMEB` embedding format and mask JSON.
//! * [`corrupt`] – seeded categorical error injection with title propagation
//!   and observed-pair constraints.
//! * [`predict`] – feature views per modality and cross-validated k-NN
//!   out-of-sample class probabilities.
//! * [`confident`] – confident-learning label-issue detection and repair
//!   suggestions.
//! * [`shapley`] – exact Data-Shapley values under a 1-NN proxy utility.
//! * [`eval`] – precision/recall/F1 and repair accuracy against a mask.

pub mod confident;
pub mod corrupt;
pub mod dataset;
mod error;
pub mod eval;
pub mod io;
pub mod predict;
pub mod rng;
pub mod shapley;
pub mod synth;
mod text;

pub use confident::{
    calibrate_joint, class_thresholds, confident_joint, find_label_issues, suggest_repairs,
    ClassThresholds, ConfidentJoint, LabelIssue, LabelIssueReport,
};
pub use corrupt::{inject_errors, observed_pairs, CorruptionConfig, PairConstraint};
pub use dataset::{
    column_stats, erroneous_rows, AlignedDataset, CellError, ColumnKind, ColumnSchema, ColumnStats,
    Embeddings, ErrorMask, PropagatedCell, RowId, SchemaOverrides,
};
pub use error::{Error, Result};
pub use eval::{
    per_column_metrics, repair_accuracy, score_detection, tuple_level_prediction, ColumnReport,
    DetectionMetrics, RepairReport,
};
pub use predict::{
    build_features, knn_oos_probabilities, load_probabilities, FeatureEncoder, FeatureSlot,
    FeatureView, Modality, OosProbabilities, OosWarning, ProbabilityMatrix,
};
pub use shapley::{
    brute_force_shapley, flag_errors, knn_shapley, knn_shapley_single, LabeledSet, ValuationInput,
    ValuationResult,
};
