//! Independent finite-difference integrator for the master equation, used to
//! certify the closed-form propagator.
//!
//! Primary form: method of lines on the first-order equation in `(k, r)`,
//!
//! ```text
//! d rho~/dt = -(2 gamma r - hbar k/m) d_r rho~
//!             - (m omega^2 r / hbar) d_k rho~ - (D r^2 / 4 hbar^2) rho~
//! ```
//!
//! with 4th-order (or 2nd-order) central stencils, one-sided at the outflow
//! boundaries, and classical Runge-Kutta time stepping. A position-space
//! integrator for the second-order form of the equation ships as a lower-
//! accuracy second opinion; its mixed derivative `d_r d_center` makes it the
//! worse primary choice.
//!
//! Nothing here touches the characteristic machinery: the two solvers share
//! only the grid types.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CharGrid, PositionGrid};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Second,
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// `dt = safety * stability bound`.
    Auto {
        safety: f64,
    },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub stencil: StencilOrder,
    pub dt: DtPolicy,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            stencil: StencilOrder::Fourth,
            dt: DtPolicy::Auto { safety: 0.8 },
        }
    }
}

/// Norm fraction on the boundary ring above which an evolution is aborted.
const LEAK_TOLERANCE: f64 = 1e-6;

/// Explicit stability bound for the `(k, r)` integrator:
/// `min(dr / vr_max, dk / vk_max, 4 hbar^2 / (D r_max^2), 1 / (2 gamma))`
/// with `vr_max = 2 gamma r_max + hbar k_max / m` and
/// `vk_max = m omega^2 r_max / hbar`. The advective terms are the usual CFL
/// limits; the third is the decay term at the far corner; RK4 tolerates a
/// safety factor up to ~1 on all of them.
pub fn stability_bound(grid: &CharGrid, params: &ModelParams) -> f64 {
    let (m, g, w, hb, d) = (
        params.mass(),
        params.gamma(),
        params.omega(),
        params.hbar(),
        params.diffusion(),
    );
    let (k_max, r_max) = (grid.k.halfwidth(), grid.r.halfwidth());
    let vr_max = 2.0 * g * r_max + hb * k_max / m;
    let mut bound = (grid.r.step() / vr_max)
        .min(4.0 * hb * hb / (d * r_max * r_max))
        .min(1.0 / (2.0 * g));
    if w > 0.0 {
        bound = bound.min(grid.k.step() * hb / (m * w * w * r_max));
    }
    bound
}

/// First-derivative stencil (offsets relative to the line start, premultiplied
/// weights) for position `i` on an axis of `n` points.
fn stencil(order: StencilOrder, i: usize, n: usize, inv_h: f64) -> ([usize; 5], [f64; 5]) {
    match order {
        StencilOrder::Fourth => {
            let s = inv_h / 12.0;
            if i >= 2 && i + 2 < n {
                (
                    [i - 2, i - 1, i, i + 1, i + 2],
                    [s, -8.0 * s, 0.0, 8.0 * s, -s],
                )
            } else if i == 0 {
                (
                    [0, 1, 2, 3, 4],
                    [-25.0 * s, 48.0 * s, -36.0 * s, 16.0 * s, -3.0 * s],
                )
            } else if i == 1 {
                (
                    [0, 1, 2, 3, 4],
                    [-3.0 * s, -10.0 * s, 18.0 * s, -6.0 * s, s],
                )
            } else if i + 2 == n {
                (
                    [n - 5, n - 4, n - 3, n - 2, n - 1],
                    [-s, 6.0 * s, -18.0 * s, 10.0 * s, 3.0 * s],
                )
            } else {
                (
                    [n - 5, n - 4, n - 3, n - 2, n - 1],
                    [3.0 * s, -16.0 * s, 36.0 * s, -48.0 * s, 25.0 * s],
                )
            }
        }
        StencilOrder::Second => {
            let s = inv_h / 2.0;
            if i >= 1 && i + 1 < n {
                ([i - 1, i, i + 1, 0, 0], [-s, 0.0, s, 0.0, 0.0])
            } else if i == 0 {
                ([0, 1, 2, 0, 0], [-3.0 * s, 4.0 * s, -s, 0.0, 0.0])
            } else {
                (
                    [n - 3, n - 2, n - 1, 0, 0],
                    [s, -4.0 * s, 3.0 * s, 0.0, 0.0],
                )
            }
        }
    }
}

struct KrContext {
    n_k: usize,
    n_r: usize,
    order: StencilOrder,
    inv_hr: f64,
    inv_hk: f64,
    /// `2 gamma r_j`
    adv_r: Vec<f64>,
    /// `-hbar k_i / m`
    adv_k_part: Vec<f64>,
    /// `m omega^2 r_j / hbar`; empty when `omega = 0`
    rot: Vec<f64>,
    /// `D r_j^2 / (4 hbar^2)`
    decay: Vec<f64>,
}

impl KrContext {
    fn new(grid: &CharGrid, params: &ModelParams, order: StencilOrder) -> Self {
        let (m, g, w, hb, d) = (
            params.mass(),
            params.gamma(),
            params.omega(),
            params.hbar(),
            params.diffusion(),
        );
        Self {
            n_k: grid.k.len(),
            n_r: grid.r.len(),
            order,
            inv_hr: 1.0 / grid.r.step(),
            inv_hk: 1.0 / grid.k.step(),
            adv_r: grid.r.values().map(|r| 2.0 * g * r).collect(),
            adv_k_part: grid.k.values().map(|k| -hb * k / m).collect(),
            rot: if w > 0.0 {
                grid.r.values().map(|r| m * w * w * r / hb).collect()
            } else {
                Vec::new()
            },
            decay: grid
                .r
                .values()
                .map(|r| d * r * r / (4.0 * hb * hb))
                .collect(),
        }
    }

    /// `dst = d src / dt`, parallel over `k` rows.
    fn rhs_into(&self, src: &[C64], dst: &mut [C64]) {
        let n_r = self.n_r;
        dst.par_chunks_mut(n_r).enumerate().for_each(|(i, out)| {
            let row = &src[i * n_r..(i + 1) * n_r];
            let (krows, kw) = stencil(self.order, i, self.n_k, self.inv_hk);
            let srows = [
                &src[krows[0] * n_r..krows[0] * n_r + n_r],
                &src[krows[1] * n_r..krows[1] * n_r + n_r],
                &src[krows[2] * n_r..krows[2] * n_r + n_r],
                &src[krows[3] * n_r..krows[3] * n_r + n_r],
                &src[krows[4] * n_r..krows[4] * n_r + n_r],
            ];
            let advect = |j: usize, d_r: C64| -> C64 {
                let vr = self.adv_r[j] + self.adv_k_part[i];
                let mut acc = -vr * d_r - self.decay[j] * row[j];
                if !self.rot.is_empty() {
                    let d_k = kw[0] * srows[0][j]
                        + kw[1] * srows[1][j]
                        + kw[2] * srows[2][j]
                        + kw[3] * srows[3][j]
                        + kw[4] * srows[4][j];
                    acc -= self.rot[j] * d_k;
                }
                acc
            };
            match self.order {
                StencilOrder::Fourth => {
                    let s = self.inv_hr / 12.0;
                    for j in 2..n_r - 2 {
                        let d_r = (row[j - 2] - row[j + 2] + 8.0 * (row[j + 1] - row[j - 1])) * s;
                        out[j] = advect(j, d_r);
                    }
                    for j in [0, 1, n_r - 2, n_r - 1] {
                        let (idx, w) = stencil(self.order, j, n_r, self.inv_hr);
                        let d_r = w[0] * row[idx[0]]
                            + w[1] * row[idx[1]]
                            + w[2] * row[idx[2]]
                            + w[3] * row[idx[3]]
                            + w[4] * row[idx[4]];
                        out[j] = advect(j, d_r);
                    }
                }
                StencilOrder::Second => {
                    let s = self.inv_hr / 2.0;
                    for j in 1..n_r - 1 {
                        let d_r = (row[j + 1] - row[j - 1]) * s;
                        out[j] = advect(j, d_r);
                    }
                    for j in [0, n_r - 1] {
                        let (idx, w) = stencil(self.order, j, n_r, self.inv_hr);
                        let d_r = w[0] * row[idx[0]] + w[1] * row[idx[1]] + w[2] * row[idx[2]];
                        out[j] = advect(j, d_r);
                    }
                }
            }
        });
    }
}

/// Discretized right-hand side at the grid's current contents.
pub fn rhs(grid: &CharGrid, params: &ModelParams, order: StencilOrder) -> CharGrid {
    let ctx = KrContext::new(grid, params, order);
    let mut out = CharGrid::zeros(grid.k, grid.r);
    ctx.rhs_into(
        grid.values.as_slice().expect("contiguous"),
        out.values.as_slice_mut().expect("contiguous"),
    );
    out
}

fn edge_fraction(buf: &[C64], n_k: usize, n_r: usize) -> f64 {
    let mut edge = 0.0;
    let mut total = 0.0;
    for v in buf {
        total += v.norm_sqr();
    }
    for j in 0..n_r {
        edge += buf[j].norm_sqr() + buf[(n_k - 1) * n_r + j].norm_sqr();
    }
    for i in 1..n_k - 1 {
        edge += buf[i * n_r].norm_sqr() + buf[i * n_r + n_r - 1].norm_sqr();
    }
    if total > 0.0 {
        (edge / total).sqrt()
    } else {
        0.0
    }
}

fn resolve_dt(policy: DtPolicy, bound: f64) -> Result<f64> {
    match policy {
        DtPolicy::Auto { safety } => {
            let in_range = safety > 0.0 && safety <= 1.0;
            if !in_range {
                return Err(Error::Invalid {
                    name: "safety",
                    reason: format!("need 0 < safety <= 1 (got {safety})"),
                });
            }
            Ok(safety * bound)
        }
        DtPolicy::Fixed(dt) => {
            crate::error::ensure_positive("dt", dt)?;
            if dt > bound {
                return Err(Error::StabilityViolation { dt, bound });
            }
            Ok(dt)
        }
    }
}

/// Integrate the `(k, r)` equation from the grid contents to time `t`.
pub fn evolve(
    initial: &CharGrid,
    t: f64,
    config: &OracleConfig,
    params: &ModelParams,
) -> Result<CharGrid> {
    crate::error::ensure_nonnegative("t", t)?;
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let ctx = KrContext::new(initial, params, config.stencil);
    let dt = resolve_dt(config.dt, stability_bound(initial, params))?;
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let n = ctx.n_k * ctx.n_r;
    let mut y = initial.values.as_slice().expect("contiguous").to_vec();
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = vec![C64::new(0.0, 0.0); n];
    let mut k3 = vec![C64::new(0.0, 0.0); n];
    let mut k4 = vec![C64::new(0.0, 0.0); n];
    for step in 0..steps {
        ctx.rhs_into(&y, &mut k1);
        for i in 0..n {
            stage[i] = y[i] + 0.5 * dt * k1[i];
        }
        ctx.rhs_into(&stage, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + 0.5 * dt * k2[i];
        }
        ctx.rhs_into(&stage, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + dt * k3[i];
        }
        ctx.rhs_into(&stage, &mut k4);
        let w = dt / 6.0;
        for i in 0..n {
            y[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        if step % 128 == 127 || step + 1 == steps {
            let frac = edge_fraction(&y, ctx.n_k, ctx.n_r);
            if frac > LEAK_TOLERANCE {
                return Err(Error::BoundaryLeak { fraction: frac });
            }
            if !y[0].re.is_finite() {
                return Err(Error::StabilityViolation {
                    dt,
                    bound: stability_bound(initial, params),
                });
            }
        }
    }
    let mut out = CharGrid::zeros(initial.k, initial.r);
    out.values
        .as_slice_mut()
        .expect("contiguous")
        .copy_from_slice(&y);
    Ok(out)
}

/// Stability bound for the position-space form: the mixed-derivative
/// (dispersive) eigenvalue `~1.88 hbar/(m dR dr)` plus advection, decay, and
/// the `m omega^2 r R / hbar` rotation term, combined as `2 / sum`.
pub fn stability_bound_position(grid: &PositionGrid, params: &ModelParams) -> f64 {
    let (m, g, w, hb, d) = (
        params.mass(),
        params.gamma(),
        params.omega(),
        params.hbar(),
        params.diffusion(),
    );
    let (c_max, r_max) = (grid.center.halfwidth(), grid.offset.halfwidth());
    let disp = 1.88 * hb / (m * grid.center.step() * grid.offset.step());
    let adv = 1.372 * 2.0 * g * r_max / grid.offset.step();
    let decay = d * r_max * r_max / (4.0 * hb * hb);
    let rot = m * w * w * r_max * c_max / hb;
    2.0 / (disp + adv + decay + rot)
}

/// Second-opinion integrator on the position-space form of the equation:
///
/// ```text
/// d rho/dt = -(i hbar / m) d_r d_center rho - 2 gamma r d_r rho
///            - (D r^2 / 4 hbar^2) rho + (i m omega^2 r center / hbar) rho
/// ```
pub fn evolve_position(
    initial: &PositionGrid,
    t: f64,
    config: &OracleConfig,
    params: &ModelParams,
) -> Result<PositionGrid> {
    crate::error::ensure_nonnegative("t", t)?;
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let (m, g, w, hb, d) = (
        params.mass(),
        params.gamma(),
        params.omega(),
        params.hbar(),
        params.diffusion(),
    );
    let (n_c, n_r) = (initial.center.len(), initial.offset.len());
    let order = config.stencil;
    let (inv_hc, inv_hr) = (1.0 / initial.center.step(), 1.0 / initial.offset.step());
    let rs: Vec<f64> = initial.offset.values().collect();
    let cs: Vec<f64> = initial.center.values().collect();
    let dt = resolve_dt(config.dt, stability_bound_position(initial, params))?;
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let n = n_c * n_r;
    let mut y = initial.values.as_slice().expect("contiguous").to_vec();
    let mut dr_buf = vec![C64::new(0.0, 0.0); n];
    let rhs_into = |src: &[C64], dr_buf: &mut [C64], dst: &mut [C64]| {
        // d_r row by row
        dr_buf.par_chunks_mut(n_r).enumerate().for_each(|(i, out)| {
            let row = &src[i * n_r..(i + 1) * n_r];
            for (j, o) in out.iter_mut().enumerate() {
                let (idx, wgt) = stencil(order, j, n_r, inv_hr);
                *o = wgt[0] * row[idx[0]]
                    + wgt[1] * row[idx[1]]
                    + wgt[2] * row[idx[2]]
                    + wgt[3] * row[idx[3]]
                    + wgt[4] * row[idx[4]];
            }
        });
        let dr_ref: &[C64] = dr_buf;
        dst.par_chunks_mut(n_r).enumerate().for_each(|(i, out)| {
            let (idx, wgt) = stencil(order, i, n_c, inv_hc);
            let row = &src[i * n_r..(i + 1) * n_r];
            let drow = &dr_ref[i * n_r..(i + 1) * n_r];
            for (j, o) in out.iter_mut().enumerate() {
                let mixed = wgt[0] * dr_ref[idx[0] * n_r + j]
                    + wgt[1] * dr_ref[idx[1] * n_r + j]
                    + wgt[2] * dr_ref[idx[2] * n_r + j]
                    + wgt[3] * dr_ref[idx[3] * n_r + j]
                    + wgt[4] * dr_ref[idx[4] * n_r + j];
                let r = rs[j];
                *o = C64::new(0.0, -hb / m) * mixed - 2.0 * g * r * drow[j]
                    + C64::new(-d * r * r / (4.0 * hb * hb), m * w * w * r * cs[i] / hb) * row[j];
            }
        });
    };
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = vec![C64::new(0.0, 0.0); n];
    let mut k3 = vec![C64::new(0.0, 0.0); n];
    let mut k4 = vec![C64::new(0.0, 0.0); n];
    for step in 0..steps {
        rhs_into(&y, &mut dr_buf, &mut k1);
        for i in 0..n {
            stage[i] = y[i] + 0.5 * dt * k1[i];
        }
        rhs_into(&stage, &mut dr_buf, &mut k2);
        for i in 0..n {
            stage[i] = y[i] + 0.5 * dt * k2[i];
        }
        rhs_into(&stage, &mut dr_buf, &mut k3);
        for i in 0..n {
            stage[i] = y[i] + dt * k3[i];
        }
        rhs_into(&stage, &mut dr_buf, &mut k4);
        let wgt = dt / 6.0;
        for i in 0..n {
            y[i] += wgt * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        if step % 64 == 63 || step + 1 == steps {
            let frac = edge_fraction(&y, n_c, n_r);
            if frac > LEAK_TOLERANCE {
                return Err(Error::BoundaryLeak { fraction: frac });
            }
        }
    }
    let mut out = PositionGrid::zeros(initial.center, initial.offset);
    out.values
        .as_slice_mut()
        .expect("contiguous")
        .copy_from_slice(&y);
    Ok(out)
}
