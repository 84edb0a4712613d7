//! Hybrid ODE-threshold dynamics of planned behavior.
//!
//! A population of n individuals each carries a continuously evolving
//! behavioral intention; crossing a fixed threshold triggers a discrete
//! action that resets the intention and emits an exponentially decaying
//! social nudge to everyone else. This crate provides:
//!
//! - the model itself with its closed-form solutions ([`model`]),
//! - an event-detecting simulator for any population size ([`sim`]),
//! - the complete two-individual analytic theory: the period invariant M,
//!   the period map and its semi-stable point, action-count bounds, the
//!   no/partial/full-action classification, and the Lambert-W closed form
//!   for the minimal attitude that tips a partner into acting ([`analytic`]),
//! - attitude-space sweeps that cross-validate the analytic boundaries
//!   against simulation ([`sweep`]), and
//! - reproducible CSV/JSON serialization ([`io`]).
//!
//! Everything is deterministic: identical inputs give bit-identical outputs,
//! for any worker count. The `parallel` feature (on by default) evaluates
//! sweep cells on a rayon pool; without it the same code runs sequentially.

// Guard conditions are written as `!(x > 0.0)` on purpose: they fail closed
// when x is NaN, where the suggested `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod io;
pub mod lambert;
pub mod model;
pub mod sim;
pub mod sweep;

#[cfg(test)]
pub(crate) mod testutil;

pub use analytic::{
    action_bounds, classify_two, fixed_point_xstar, invariant_m, map_f, min_alpha1_bisect,
    min_alpha1_for_action_b0, t_crit, ActionBounds, Classification, Evidence, Regime,
};
pub use error::{Error, Result};
pub use lambert::{lambert_w, LambertBranch};
pub use model::{
    apply_reset, first_action_time, gamma, tanh_solution, two_body_solution, vector_field,
    GlobalParams, IndividualConfig, SystemState, TwoBodyConstants,
};
pub use sim::{
    empirical_classify, simulate, simulate_opts, ActionEvent, SimConfig, SimOptions, Trajectory,
};
pub use sweep::{
    m_zero_alpha2, run_sweep, trace_boundary_m0, AxisRange, CellOutcome, SweepMode, SweepResult,
    SweepSpec, SweepSummary,
};
