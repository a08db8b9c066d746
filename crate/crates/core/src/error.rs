use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a model or operation precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A function was evaluated outside its domain.
    #[error("{function}: argument {value} outside domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "time step {dt} does not resolve the fastest scale {scale} (dt * scale = {product} > 1)"
    )]
    StepSize { dt: f64, scale: f64, product: f64 },

    #[error("coefficient integration diverged at t = {t}: |u| = {magnitude}")]
    Divergence { t: f64, magnitude: f64 },

    /// `D(t) = w v - x u` came too close to zero for the time-local generator.
    #[error("singular determinant |D| = {magnitude:e} <= {threshold:e} at t = {t}")]
    SingularDeterminant {
        t: f64,
        magnitude: f64,
        threshold: f64,
    },

    #[error(
        "coherent state truncated at n_cap = {n_cap} loses norm {deficit:e} (> {tolerance:e})"
    )]
    Truncation {
        n_cap: usize,
        deficit: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("trace drifted to {trace} at t = {t}")]
    TraceDrift { t: f64, trace: f64 },

    #[error("hermiticity drift {drift:e} at t = {t}")]
    HermiticityDrift { t: f64, drift: f64 },

    #[error("master step {dt_master} is not an even multiple of the coefficient step {dt_coeff}")]
    StepMismatch { dt_master: f64, dt_coeff: f64 },

    /// The largest DFT magnitude sits at DC or Nyquist.
    #[error("no interior spectral peak (maximum at bin {bin} of {bins})")]
    NoPeak { bin: usize, bins: usize },

    #[error("series too short: {len} samples (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    /// Both ends of a bisection interval give the same verdict.
    #[error("no bracket on [{lo}, {hi}]: both ends report {verdict}")]
    NoBracket { lo: f64, hi: f64, verdict: bool },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
