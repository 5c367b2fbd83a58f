use thiserror::Error;

/// Errors raised by the discrete operators, solvers and steppers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("helmholtz coefficient must be nonnegative, got {0}")]
    NegativeKappa(f64),

    #[error("coupled system is singular at mode {mode} (determinant {det:e})")]
    SingularMode { mode: usize, det: f64 },

    #[error("parameters outside the admissible regime a<=0, b>=0, c<=0, d>=0: {0}")]
    InadmissibleParams(&'static str),

    #[error("(a, b, c, d) = ({a}, {b}, {c}, {d}) is one of the excluded cases: {}", crate::scheme::EXCLUDED_CASES)]
    ExcludedParams { a: f64, b: f64, c: f64, d: f64 },

    #[error("stepper requires {expected} parameters, got {found}")]
    RegimeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("theta = {0} is not allowed for these parameters")]
    InvalidTheta(f64),

    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("CFL violation: max viscosity * dt = {lhs:e} exceeds dx = {dx:e}")]
    CflViolation { lhs: f64, dx: f64 },

    #[error("blow-up detected at t = {t} ({quantity} = {value:e})")]
    BlowUp {
        t: f64,
        quantity: &'static str,
        value: f64,
    },

    #[error("energy kind {0} is incompatible with the parameter signs")]
    IncompatibleEnergyKind(&'static str),

    #[error("states are at different times ({0} vs {1})")]
    TimeMismatch(f64, f64),

    #[error("traveling-wave family {family} requires (a, b, c, d) = {expected}")]
    FamilyParamsMismatch {
        family: &'static str,
        expected: &'static str,
    },

    #[error("invalid experiment setup: {0}")]
    InvalidExperiment(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
