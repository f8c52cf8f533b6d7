//! Closed-form time evolution in the transformed representation.
//!
//! The solution factorizes: `rho~(k, r, t) = rho~_0(k', r') exp(alpha Z)`,
//! where `(k', r')` is the point the characteristic curve through `(k, r, t)`
//! occupied at `t = 0` and `exp(alpha Z)` is a damping factor independent of
//! the initial state. The characteristic roots are
//!
//! ```text
//! lambda_+- = (hbar / m omega^2) (gamma +- sqrt(gamma^2 - omega^2))
//! ```
//!
//! real for `gamma > omega`, a conjugate pair for `gamma < omega`. All root
//! arithmetic is done in complex numbers uniformly; results contract to real
//! values and are asserted to do so. `lambda_-` is computed as
//! `hbar / (m (gamma + sqrt(gamma^2 - omega^2)))`, which is algebraically
//! identical and avoids cancellation when `omega << gamma`.
//!
//! The free particle (`omega = 0`) has its own closed form with `k' = k` and
//! exponential relaxation of `r` toward `hbar k / (2 m gamma)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Axis, CharGrid};
use crate::params::ModelParams;
use crate::states::RealizedState;

/// `1 - exp(-z)`, switching to the series for small `|z|` where the direct
/// form loses precision.
pub(crate) fn one_minus_exp_neg(z: C64) -> C64 {
    if z.norm_sqr() < 1e-6 {
        // z (1 - z/2 (1 - z/3 (1 - z/4)))
        z * (1.0 - z / 2.0 * (1.0 - z / 3.0 * (1.0 - z / 4.0)))
    } else {
        1.0 - (-z).exp()
    }
}

/// Shifted initial arguments of a characteristic curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginPoint {
    pub k: f64,
    pub r: f64,
}

/// Characteristic constants of the oscillator solution.
#[derive(Debug, Clone, Copy)]
pub struct Characteristics {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    /// `D / (16 m^2 (gamma^2 - omega^2))`; negative when underdamped.
    pub alpha: f64,
    /// `hbar/(m lambda_+)`: the slow relaxation rate (conjugate pair when
    /// underdamped).
    pub rate_slow: C64,
    /// `hbar/(m lambda_-)`: the fast relaxation rate.
    pub rate_fast: C64,
    gamma: f64,
    mass: f64,
    hbar: f64,
    denom: C64,
}

impl Characteristics {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if params.is_free_particle() {
            return Err(Error::FreeParticle);
        }
        let (m, g, w, hb) = (params.mass(), params.gamma(), params.omega(), params.hbar());
        let gap = (g * g - w * w).abs() / (g * g).max(w * w);
        if gap < crate::params::CRITICAL_DAMPING_GUARD {
            return Err(Error::CriticalDamping { gamma: g, omega: w });
        }
        let root = C64::new(g * g - w * w, 0.0).sqrt();
        let lambda_plus = (C64::new(g, 0.0) + root) * (hb / (m * w * w));
        let lambda_minus = C64::new(hb / m, 0.0) / (C64::new(g, 0.0) + root);
        let denom = lambda_plus - lambda_minus;
        if denom.norm() < 1e-300 {
            return Err(Error::DegenerateLambda { gap: denom.norm() });
        }
        Ok(Self {
            lambda_plus,
            lambda_minus,
            alpha: params.diffusion() / (16.0 * m * m * (g * g - w * w)),
            rate_slow: C64::new(hb / m, 0.0) / lambda_plus,
            rate_fast: C64::new(hb / m, 0.0) / lambda_minus,
            gamma: g,
            mass: m,
            hbar: hb,
            denom,
        })
    }

    /// Where the characteristic through `(k, r)` at time `t` started.
    /// Identity at `t = 0`.
    pub fn origin(&self, k: f64, r: f64, t: f64) -> OriginPoint {
        let (u_plus, u_minus) = self.invariants(k, r, t);
        let kp = (u_plus * self.lambda_plus - u_minus * self.lambda_minus) / self.denom;
        let rp = (u_plus - u_minus) * self.lambda_plus * self.lambda_minus / self.denom;
        debug_assert!(
            kp.im.abs() + rp.im.abs() < 1e-10 * (kp.re.abs() + rp.re.abs() + 1.0),
            "imaginary residue in shifted arguments: {kp} {rp}"
        );
        OriginPoint { k: kp.re, r: rp.re }
    }

    fn invariants(&self, k: f64, r: f64, t: f64) -> (C64, C64) {
        let a_plus = C64::new(k, 0.0) - r / self.lambda_plus;
        let a_minus = C64::new(k, 0.0) - r / self.lambda_minus;
        (
            a_plus * (-self.rate_slow * t).exp(),
            a_minus * (-self.rate_fast * t).exp(),
        )
    }

    /// The damping quadratic form `Z(k, r, t)`; real in every regime, zero at
    /// `t = 0` and on the `k = r = 0` ray, and such that `alpha Z <= 0`.
    pub fn damping_z(&self, k: f64, r: f64, t: f64) -> f64 {
        let a_plus = C64::new(k, 0.0) - r / self.lambda_plus;
        let a_minus = C64::new(k, 0.0) - r / self.lambda_minus;
        let z = a_plus * a_minus * one_minus_exp_neg(C64::new(2.0 * self.gamma * t, 0.0))
            / self.gamma
            - self.mass * self.lambda_plus / (2.0 * self.hbar)
                * a_plus
                * a_plus
                * one_minus_exp_neg(2.0 * self.rate_slow * t)
            - self.mass * self.lambda_minus / (2.0 * self.hbar)
                * a_minus
                * a_minus
                * one_minus_exp_neg(2.0 * self.rate_fast * t);
        debug_assert!(
            z.im.abs() < 1e-10 * (z.re.abs() + 1.0),
            "imaginary residue in Z: {z}"
        );
        z.re
    }

    /// `alpha Z(k, r, t)`: the log of the state-independent damping factor.
    pub fn damping_exponent(&self, k: f64, r: f64, t: f64) -> f64 {
        let e = self.alpha * self.damping_z(k, r, t);
        debug_assert!(e <= 1e-10 * (k * k + r * r + 1.0), "amplifying factor: {e}");
        e
    }

    /// The `t -> infinity` exponent (every decaying exponential zeroed).
    pub fn damping_exponent_limit(&self, k: f64, r: f64) -> f64 {
        let a_plus = C64::new(k, 0.0) - r / self.lambda_plus;
        let a_minus = C64::new(k, 0.0) - r / self.lambda_minus;
        let z = a_plus * a_minus / self.gamma
            - self.mass * self.lambda_plus / (2.0 * self.hbar) * a_plus * a_plus
            - self.mass * self.lambda_minus / (2.0 * self.hbar) * a_minus * a_minus;
        self.alpha * z.re
    }
}

fn check_time(t: f64) -> Result<()> {
    crate::error::ensure_nonnegative("t", t)
}

/// Evolve an oscillator state: evaluate `rho~_0` at the shifted arguments and
/// apply the damping factor, pointwise over the grid. Preserves the origin
/// value (trace) exactly and the Hermitian mirror symmetry by construction.
pub fn propagate_oscillator(
    state: &RealizedState,
    t: f64,
    params: &ModelParams,
    k_axis: Axis,
    r_axis: Axis,
) -> Result<CharGrid> {
    check_time(t)?;
    let ch = Characteristics::new(params)?;
    let mut out = CharGrid::zeros(k_axis, r_axis);
    let n_r = r_axis.len();
    out.values
        .as_slice_mut()
        .expect("freshly allocated grids are contiguous")
        .par_chunks_mut(n_r)
        .enumerate()
        .for_each(|(i, row)| {
            let k = k_axis.value(i);
            for (j, v) in row.iter_mut().enumerate() {
                let r = r_axis.value(j);
                let o = ch.origin(k, r, t);
                *v = state.char_value(o.k, o.r) * ch.damping_exponent(k, r, t).exp();
            }
        });
    Ok(out)
}

/// Evolve a free-particle state (`omega = 0`).
pub fn propagate_free(
    state: &RealizedState,
    t: f64,
    params: &ModelParams,
    k_axis: Axis,
    r_axis: Axis,
) -> Result<CharGrid> {
    check_time(t)?;
    if !params.is_free_particle() {
        return Err(Error::NotFreeParticle {
            omega: params.omega(),
        });
    }
    let mut out = CharGrid::zeros(k_axis, r_axis);
    let n_r = r_axis.len();
    out.values
        .as_slice_mut()
        .expect("freshly allocated grids are contiguous")
        .par_chunks_mut(n_r)
        .enumerate()
        .for_each(|(i, row)| {
            let k = k_axis.value(i);
            for (j, v) in row.iter_mut().enumerate() {
                let r = r_axis.value(j);
                let (rp, expo) = free_shift_and_exponent(k, r, t, params);
                *v = state.char_value(k, rp) * expo.exp();
            }
        });
    Ok(out)
}

/// Shifted offset argument and damping exponent of the free-particle solution:
/// `r' = hbar k/(2 m gamma) + (r - hbar k/(2 m gamma)) e^(-2 gamma t)` and
/// `-D/(16 m^2 gamma^2) [k^2 t + (m (r - r')/hbar)((r + r') m gamma/hbar + k)]`.
pub fn free_shift_and_exponent(k: f64, r: f64, t: f64, params: &ModelParams) -> (f64, f64) {
    let (m, g, hb, d) = (
        params.mass(),
        params.gamma(),
        params.hbar(),
        params.diffusion(),
    );
    let r_fix = hb * k / (2.0 * m * g);
    let relax = one_minus_exp_neg(C64::new(2.0 * g * t, 0.0)).re;
    let rp = r_fix + (r - r_fix) * (-2.0 * g * t).exp();
    // r - r' written via 1 - e^(-2 gamma t) to keep precision at small t
    let dr = (r - r_fix) * relax;
    let expo =
        -d / (16.0 * m * m * g * g) * (k * k * t + (m * dr / hb) * ((r + rp) * m * g / hb + k));
    debug_assert!(expo <= 1e-10 * (k * k + r * r + 1.0));
    (rp, expo)
}

/// Evolve with whichever solution the parameters select.
pub fn propagate(
    state: &RealizedState,
    t: f64,
    params: &ModelParams,
    k_axis: Axis,
    r_axis: Axis,
) -> Result<CharGrid> {
    if params.is_free_particle() {
        propagate_free(state, t, params, k_axis, r_axis)
    } else {
        propagate_oscillator(state, t, params, k_axis, r_axis)
    }
}

/// Largest pointwise deviation between the small-`omega` oscillator solution
/// and the free-particle solution with the same `m`, `gamma`, `D`; expected
/// to scale as `(omega/gamma)^2`. Requires `omega <= 1e-3 gamma`.
pub fn consistency_check_omega_limit(
    state: &RealizedState,
    params: &ModelParams,
    samples: &[(f64, f64, f64)],
) -> Result<f64> {
    if params.is_free_particle() {
        return Ok(0.0);
    }
    if params.omega() > 1e-3 * params.gamma() {
        return Err(Error::Invalid {
            name: "omega",
            reason: format!(
                "limit check wants omega <= 1e-3 gamma (omega = {}, gamma = {})",
                params.omega(),
                params.gamma()
            ),
        });
    }
    let free = params.free_limit()?;
    let ch = Characteristics::new(params)?;
    let mut worst: f64 = 0.0;
    for &(k, r, t) in samples {
        check_time(t)?;
        let o = ch.origin(k, r, t);
        let osc = state.char_value(o.k, o.r) * ch.damping_exponent(k, r, t).exp();
        let (rp, expo) = free_shift_and_exponent(k, r, t, &free);
        let fr = state.char_value(k, rp) * expo.exp();
        worst = worst.max((osc - fr).norm());
    }
    Ok(worst)
}
