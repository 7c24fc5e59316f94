use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at z = {z}")]
    GammaPole { z: f64 },

    #[error("{name} = {value} is outside the admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("power t^{exponent} has no integrable derivative of order {order}")]
    NonIntegrablePower { exponent: f64, order: f64 },

    #[error("kernel point (t = {t}, s = {s}) lies outside the unit square")]
    OutsideUnitSquare { t: f64, s: f64 },

    #[error("kernel is singular at (t = {t}, s = {s})")]
    KernelSingularity { t: f64, s: f64 },

    #[error("power weight exponent {mu} is not integrable even with a pinned endpoint")]
    MomentOverflow { mu: f64 },

    #[error("power weight exponent {mu} requires the density to vanish at the endpoint")]
    UnpinnedEndpoint { mu: f64 },

    #[error("integration endpoint c = {c} is not a grid node")]
    EndpointOffGrid { c: f64 },

    #[error("grid needs at least {min} panels, got {got}")]
    GridTooCoarse { got: usize, min: usize },

    #[error("field has {got} samples but the grid has {expected} nodes")]
    FieldLength { expected: usize, got: usize },

    #[error("closed-form constant forcing requires gamma = 0, got {gamma}")]
    CouplingNotZero { gamma: f64 },

    #[error("Picard iteration diverged at iteration {iteration}: update norm {update:e}")]
    Divergence { iteration: usize, update: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations (last update {last_update:e})")]
    NotConverged { iterations: usize, last_update: f64 },

    #[error("forcing evaluated to a non-finite value at t = {t}")]
    NonFiniteForcing { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
