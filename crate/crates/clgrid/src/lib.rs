//! Exact and finite-difference evolution of the Caldeira-Leggett master
//! equation for a damped harmonic oscillator and a free particle.
//!
//! The reduced density matrix is kept in `(center, offset)` position
//! variables, `rho(R, r) = <R + r/2| rho |R - r/2>`, or Fourier-transformed
//! over the center coordinate to `rho~(k, r)`, where the master equation is
//! first order and solvable in closed form along characteristic curves: the
//! solution is the initial data at shifted arguments times a damping factor
//! that carries no initial-state dependence.
//!
//! Modules:
//! - [`params`]: validated physical constants; diffusion from a temperature
//!   or given directly.
//! - [`grid`]: centered uniform axes and the grid types.
//! - [`states`]: Gaussian / cat / number / thermal initial states with
//!   evaluable transformed representations.
//! - [`propagator`]: the closed-form solutions for both the oscillator and
//!   the free particle.
//! - [`transforms`]: convention-pinned conversions between representations
//!   and the Wigner distribution.
//! - [`oracle`]: an independent method-of-lines integrator used to certify
//!   the closed forms.
//! - [`analysis`]: the long-time state, energy-basis spectral content,
//!   uncertainties, entropy, and the decoherence audits.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod hermite;
pub mod oracle;
pub mod params;
pub mod propagator;
pub mod states;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{Axis, CharGrid, PositionGrid, WignerGrid};
pub use params::{DiffusionMode, ModelParams};
pub use states::{realize, realize_on, Provenance, RealizedState, StateSpec};
