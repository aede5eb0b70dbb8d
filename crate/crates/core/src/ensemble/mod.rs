//! Prior sampling, skew-normal targets and the constraining pipeline.

pub mod constrain;
pub mod kde;
pub mod prior;
pub mod scaling;
pub mod skewnorm;

pub use constrain::{
    aligned_rmse, importance_weights, resample, rmse, rmse_filter, run_constraining_pipeline,
    ConstraintTarget, PipelineConfig, PipelineOutcome, ReportRow, Series, RMSE_THRESHOLD,
};
pub use kde::{sample_kde, Bandwidth, BinnedKde};
pub use prior::{sample_prior, ForcingPrior, PriorKind, PriorTables};
pub use scaling::ScalingDist;
pub use skewnorm::{fit_skew_normal, owens_t, SkewNormal};
