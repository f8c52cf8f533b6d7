//! Crate-wide error type.

/// Errors raised by parameter validation, grid contracts, and solvers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// `gamma ~ omega` makes the characteristic roots coincide and the
    /// closed-form propagator singular; rejected outright.
    #[error("critical damping: |gamma^2 - omega^2| / max(gamma^2, omega^2) < 1e-9 (gamma = {gamma}, omega = {omega})")]
    CriticalDamping { gamma: f64, omega: f64 },

    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be nonnegative (got {value})")]
    Negative { name: &'static str, value: f64 },

    #[error("omega = 0 requires the high-temperature or explicit diffusion mode")]
    OscillatorBathNeedsOmega,

    /// Free-particle parameters were handed to the oscillator path.
    #[error("omega = 0 selects the free-particle solution; use the free-particle propagator")]
    FreeParticle,

    /// Oscillator parameters were handed to the free-particle path.
    #[error("omega = {omega} != 0; the free-particle propagator requires omega = 0")]
    NotFreeParticle { omega: f64 },

    /// Cannot occur for parameters that pass the critical-damping guard;
    /// kept as a hard stop should the guard ever be bypassed.
    #[error("characteristic roots degenerate: |lambda_+ - lambda_-| = {gap:e}")]
    DegenerateLambda { gap: f64 },

    #[error("diffusion below the purity bound: D = {d} < 4 m gamma hbar omega = {bound}")]
    DiffusionBelowBound { d: f64, bound: f64 },

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("time step {dt:e} exceeds the stability bound {bound:e}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("boundary leak: {fraction:e} of the norm reached the grid edge")]
    BoundaryLeak { fraction: f64 },

    #[error("insufficient grid resolution: {0}")]
    Resolution(String),

    #[error("decay-constant fit diverged: {0}")]
    FitDiverged(String),

    #[error("invalid {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Finite and strictly positive, rejecting NaN.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// Finite and nonnegative, rejecting NaN.
pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Negative { name, value })
    }
}
