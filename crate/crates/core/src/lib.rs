//! Explainable outlier detection with formal concept analysis.
//!
//! Records are binarized by interval scaling into a [`FormalContext`]. For
//! each agenda (a set of attributes) the context is restricted to the
//! agenda's features, and an object's outlier degree under that agenda is
//! `exp(-(gamma * |closure|)^2)`, where the closure of the object is the set
//! of objects sharing all of its agenda features. The unsupervised detector
//! averages the degrees over a designated agenda space; the supervised one
//! learns real weights per agenda by gradient descent. Both explain their
//! scores through per-agenda contributions.

pub mod agendas;
pub mod bits;
pub mod context;
pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
pub mod model;
pub mod pipeline;
pub mod scaling;
pub mod sup;
pub mod unsup;

pub use agendas::{
    adaptive_search, expert_agendas, parse_agenda_file, small_agendas, AdaptiveOutcome, Agenda,
    AgendaKind, AgendaSpace, FuzzyAgenda,
};
pub use bits::BitVec;
pub use context::{ClosureCounter, FeatureMask, FormalContext, ObjectMask};
pub use data::DataTable;
pub use error::{Error, Result};
pub use eval::{roc_auc, stratified_split, tpr_fpr, Metrics, Split};
pub use explain::{
    explain_global, explain_local, explain_query, explain_row, export_heatmap, export_histogram,
    GlobalExplanation, Heatmap, HistogramBucket, LocalExplanation, DEFAULT_DEGREE_FLOOR,
};
pub use model::Model;
pub use pipeline::{evaluate, fit_model, split_table, EvalReport, Mode, PipelineConfig};
pub use scaling::Scaler;
pub use sup::{
    compute_bal, fit_sup, fit_sup_adaptive, fit_sup_with, loss, loss_gradient, train,
    weighted_score, LossOrientation, SupModel, TrainConfig, TrainOutcome,
};
pub use unsup::{
    degree, draw_gamma, fit_unsup, score_unsup, DegreeMatrix, UnsupModel, UnsupParams,
};
