//! Dynamically weighted mixture of experts for non-stationary time series.
//!
//! Small perceptron experts are trained by random-walk search, combined by
//! a per-region weighted average, and re-weighted online from a short,
//! recency-decayed record of which experts called the direction right.

pub mod data;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod expert;
pub mod metrics;
pub mod partition;
pub mod report;
pub mod rng;

pub use data::{DriftSpec, FeatureMatrix, LabeledPoint, RawSeries, Sample};
pub use ensemble::{Ensemble, GrowthConfig, Scheme, ScoreHistory, ScoreRecord, WeightTable, WeightingConfig};
pub use error::{Error, Result};
pub use expert::{MlpExpert, TrainConfig};
pub use partition::Partition;
pub use report::EvalReport;
