//! Nested leave-one-person-out evaluation: split plans, metrics, aggregation
//! and reporting.

pub mod aggregate;
pub mod config;
pub mod harness;
pub mod metrics;
pub mod probe;
pub mod report;
pub mod split;

pub use aggregate::{aggregate_sessions, AggregationMode, SdKind, SessionResult, Stat, Summary};
pub use config::{ExperimentConfig, TrainerEndpoint};
pub use harness::{evaluate, EvalReport, SessionRunner};
pub use metrics::{compute_metrics, MetricsReport};
pub use split::{make_split_plan, Session, SplitPlan};
