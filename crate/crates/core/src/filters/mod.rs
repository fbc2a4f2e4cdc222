//! Supervised filters learned against a training dictionary.

pub mod args;
pub mod bht;
pub mod grid;
pub mod matrix;
pub mod params;

/// Slack for comparisons between fractional counts.
pub const COUNT_EPS: f64 = 1e-9;

pub use args::{
    filter_possible, filter_required, learn_arg_thresholds, restrict_frames, ArgLearning,
    ArgThresholds,
};
pub use bht::{
    binomial_tail, bht_filter, learn_frame_thresholds, FrameLearning, FrameThresholds,
};
pub use grid::{learn_threshold, GridLearnerResult};
pub use matrix::{
    correct_matrix, learn_matrix_params, matrix_majority, MatrixCorrectionParams, MatrixMethod,
    PairStats, RuleParams,
};
pub use params::{params_to_string, read_params, write_params, LearnedParams};
