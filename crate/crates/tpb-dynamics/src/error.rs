//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} violates `{constraint}`")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// atanh argument outside (-1, 1), or within the saturation guard of the endpoints.
    #[error("atanh argument {value} is outside the open unit interval")]
    AtanhDomain { value: f64 },

    #[error("rate constant A = {rate} is not positive; the individual never acts unaided")]
    RateNotPositive { rate: f64 },

    #[error("time {t} lies outside the valid window [0, {limit}]")]
    TimeOutOfWindow { t: f64, limit: f64 },

    #[error("index {index} out of range for population of {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("reset applied with an empty actor set")]
    EmptyActorSet,

    #[error("nudge decay rate r must be positive here")]
    DecayRequired,

    /// The sign factor of x2's derivative stays positive for the whole nudge.
    #[error("x2 increases throughout the nudge (log argument {arg} <= 0); no critical time")]
    AlwaysIncreasing { arg: f64 },

    /// The sign factor of x2's derivative is non-positive from the start of the nudge.
    #[error("x2 is non-increasing from the start of the nudge (log argument {arg} >= 1); no critical time")]
    NeverIncreasing { arg: f64 },

    #[error("action bounds are undefined for non-positive invariant M = {invariant}")]
    BoundsUndefined { invariant: f64 },

    #[error("Lambert W argument {z} is outside the domain of the {branch} branch")]
    LambertDomain { branch: &'static str, z: f64 },

    #[error("no Lambert-W branch yields a positive period; only the trivial T = 0 root exists")]
    NoPositivePeriodRoot,

    #[error("derived `{name}` = {value} falls outside (-1, 1)")]
    AlphaOutOfRange { name: &'static str, value: f64 },

    #[error("simulation produced a non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("invalid simulation config: {reason}")]
    InvalidSimConfig { reason: String },

    #[error("individual {individual} re-fired within the event tolerance at t = {t}")]
    MinGapViolated { individual: usize, t: f64 },

    #[error("expected {expected} individuals, got {got}")]
    PopulationMismatch { expected: usize, got: usize },

    #[error("invalid sweep spec: {reason}")]
    InvalidSweepSpec { reason: String },

    #[error("alpha1 = {alpha1} in the boundary-trace range has a non-positive margin")]
    NonPositiveMarginInRange { alpha1: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
