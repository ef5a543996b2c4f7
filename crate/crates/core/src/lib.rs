//! Expected makespan of a batch of tasks on a single machine whose
//! disruptions arrive as a non-homogeneous Poisson process, under the
//! preempt-repeat protocol, and the sequencing rules that minimize it.

pub mod batch;
pub mod error;
pub mod exact;
pub mod harness;
pub mod optimizer;
pub mod quadrature;
pub mod rate_model;
pub mod sampler;
pub mod sim;
pub mod single_failure;
pub mod theory;

pub use batch::{Permutation, TaskBatch};
pub use error::{Error, Result};
pub use rate_model::{Monotonicity, RateKind, RateMetadata, RateModel};
