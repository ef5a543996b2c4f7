//! Deterministic expected makespans: closed forms for constant and
//! zero-then-constant rates, the two-phase approximation, and a numerical
//! solver for the chain of remaining-makespan integral equations.

mod chain;
mod closed_form;

pub use chain::{refine_until, solve_chain, Closure, MakespanGrid, RefineOptions, RefineResult, TailClosure};
pub use closed_form::{
    constant_rate_batch, constant_rate_single, special_two_task, two_phase_delta, two_phase_delta_d_epsilon,
};
