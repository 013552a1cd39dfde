//! End-to-end delay prediction with rational-exponential models, and
//! delay/reliability-aware offloading node selection.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod fitter;
pub mod models;
pub mod offload;
pub mod telemetry;
