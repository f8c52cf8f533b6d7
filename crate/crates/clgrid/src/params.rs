//! Physical parameters of the master equation.
//!
//! The equation of motion for the reduced density matrix is fixed by the
//! particle mass `m`, the relaxation rate `gamma`, the oscillator frequency
//! `omega` (zero for a free particle), `hbar`, and the decoherence strength
//! `D` multiplying the double-commutator term. `D` is either supplied
//! directly or derived from a bath temperature, and is stored explicitly so
//! that nothing downstream ever sees a temperature.
//!
//! The test suite works in reduced units (`hbar = m = 1`, rates of order
//! one); arbitrary positive values are accepted.

use crate::error::{Error, Result};

/// Relative gap below which `gamma` and `omega` count as critically damped.
pub const CRITICAL_DAMPING_GUARD: f64 = 1e-9;

/// How the diffusion coefficient `D` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionMode {
    /// High-temperature bath: `D = 8 m gamma kT`, with `kT` in energy units.
    HighTemperature { kt: f64 },
    /// Oscillator bath at temperature `kT`: `D = 8 m gamma hbar omega (n + 1/2)`
    /// with the Bose occupation `n = 1/(exp(hbar omega / kT) - 1)`. Valid at
    /// `kT = 0`, where it saturates the bound `D = 4 m gamma hbar omega`.
    OscillatorBath { kt: f64 },
    /// Pass `D` through unchanged.
    Explicit { d: f64 },
}

/// Validated, immutable model parameters.
///
/// Construction enforces the positivity constraints, the critical-damping
/// exclusion, and the `D >= 4 m gamma hbar omega` bound in oscillator-bath
/// mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    mass: f64,
    gamma: f64,
    omega: f64,
    hbar: f64,
    diffusion: f64,
}

impl ModelParams {
    pub fn new(mass: f64, gamma: f64, omega: f64, hbar: f64, mode: DiffusionMode) -> Result<Self> {
        for (name, value) in [("mass", mass), ("gamma", gamma), ("hbar", hbar)] {
            crate::error::ensure_positive(name, value)?;
        }
        crate::error::ensure_nonnegative("omega", omega)?;
        if omega > 0.0 {
            let gap = (gamma * gamma - omega * omega).abs() / (gamma * gamma).max(omega * omega);
            if gap < CRITICAL_DAMPING_GUARD {
                return Err(Error::CriticalDamping { gamma, omega });
            }
        }
        let diffusion = match mode {
            DiffusionMode::HighTemperature { kt } => {
                crate::error::ensure_positive("kt", kt)?;
                8.0 * mass * gamma * kt
            }
            DiffusionMode::OscillatorBath { kt } => {
                if omega == 0.0 {
                    return Err(Error::OscillatorBathNeedsOmega);
                }
                crate::error::ensure_nonnegative("kt", kt)?;
                // n = 1/(exp(hbar omega / kT) - 1); kT = 0 gives n = 0 exactly.
                let occupation = if kt == 0.0 {
                    0.0
                } else {
                    1.0 / ((hbar * omega / kt).exp_m1())
                };
                8.0 * mass * gamma * hbar * omega * (occupation + 0.5)
            }
            DiffusionMode::Explicit { d } => {
                crate::error::ensure_positive("d", d)?;
                d
            }
        };
        // catches overflow of the derived value for extreme temperatures
        crate::error::ensure_positive("diffusion", diffusion)?;
        Ok(Self {
            mass,
            gamma,
            omega,
            hbar,
            diffusion,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Decoherence strength `D` of the double-commutator term.
    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// `omega = 0` selects the free-particle solution.
    pub fn is_free_particle(&self) -> bool {
        self.omega == 0.0
    }

    /// The purity bound `4 m gamma hbar omega` (zero for a free particle).
    pub fn diffusion_bound(&self) -> f64 {
        4.0 * self.mass * self.gamma * self.hbar * self.omega
    }

    /// Same parameters with `omega` set to zero and `D` carried over;
    /// used when comparing the oscillator solution against its free limit.
    pub fn free_limit(&self) -> Result<Self> {
        Self::new(
            self.mass,
            self.gamma,
            0.0,
            self.hbar,
            DiffusionMode::Explicit { d: self.diffusion },
        )
    }
}
