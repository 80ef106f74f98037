//! Scaling laws, Pareto frontiers, Pareto training, and budget allocation for
//! the robustness and effectiveness of dense retrievers.
//!
//! Modules map onto the pipeline: [`scaling`] evaluates laws, [`fitting`]
//! recovers them from observations, [`metrics`] computes contrastive entropy,
//! [`frontier`] extracts the robustness/effectiveness Pareto set, [`budget`]
//! allocates dollars between model and data, [`simlab`] is a synthetic
//! retrieval testbed that produces observations, and [`io`] reads and writes
//! the record and law formats.

pub mod budget;
pub mod error;
pub mod fitting;
pub mod frontier;
pub mod io;
pub mod metrics;
pub mod numeric;
pub mod par;
pub mod scaling;
pub mod simlab;

pub use error::{Error, Result};
pub use scaling::{DataSize, JointLaw, Loss, ModelSize, PowerLaw};
