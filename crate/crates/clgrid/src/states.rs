//! Initial-state construction.
//!
//! A [`StateSpec`] describes an initial density matrix declaratively; a
//! [`RealizedState`] can evaluate its transformed representation
//! `rho~(k, r)` at arbitrary real arguments, which is what the closed-form
//! propagator consumes (the shifted arguments generally fall between grid
//! points).
//!
//! Gaussian wavepackets, cats, and thermal states have exact analytic forms:
//! every such state reduces to a sum of terms `w exp(q_aa a^2 + q_bb b^2 +
//! q_a a + q_b b)` simultaneously in `(k, r)` and `(center, offset)`
//! variables. Number states are rendered on a grid and looked up with
//! bicubic interpolation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{Axis, CharGrid, PositionGrid};
use crate::hermite;
use crate::params::ModelParams;
use crate::transforms;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Declarative description of an initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// Single Gaussian wavepacket centered at `x0` with mean momentum `p0`
    /// and position spread `sigma`.
    Gaussian { x0: f64, p0: f64, sigma: f64 },
    /// Even superposition of two wavepackets at `x0 +- separation/2`, both
    /// with momentum `p0`, relative phase `phase` on the second branch.
    Cat {
        x0: f64,
        separation: f64,
        p0: f64,
        sigma: f64,
        phase: f64,
    },
    /// Oscillator number state `|n><n|`; realized on a grid.
    Fock { n: usize },
    /// Oscillator thermal state at temperature `kt` (energy units).
    Thermal { kt: f64 },
}

impl StateSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Gaussian { sigma, .. } => crate::error::ensure_positive("sigma", sigma),
            StateSpec::Cat {
                separation, sigma, ..
            } => {
                crate::error::ensure_positive("sigma", sigma)?;
                crate::error::ensure_positive("separation", separation)
            }
            StateSpec::Fock { .. } => Ok(()),
            StateSpec::Thermal { kt } => crate::error::ensure_nonnegative("kt", kt),
        }
    }
}

/// One exponential-of-quadratic term, `w exp(q_aa a^2 + q_bb b^2 + q_a a + q_b b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct QuadTerm {
    w: C64,
    q_aa: C64,
    q_bb: C64,
    q_a: C64,
    q_b: C64,
}

impl QuadTerm {
    fn eval(&self, a: f64, b: f64) -> C64 {
        self.w * ((self.q_aa * a + self.q_a) * a + (self.q_bb * b + self.q_b) * b).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct AnalyticState {
    char_terms: Vec<QuadTerm>,
    pos_terms: Vec<QuadTerm>,
    /// Half-width of the position support and bandwidth estimate, used for
    /// aliasing checks when the state is put on a grid.
    center_support: f64,
    offset_support: f64,
    bandwidth: f64,
}

#[derive(Debug, Clone)]
struct GriddedState {
    grid: CharGrid,
}

impl GriddedState {
    /// Catmull-Rom bicubic lookup; zero outside the tabulated support.
    fn eval(&self, k: f64, r: f64) -> C64 {
        let (nk, nr) = self.grid.values.dim();
        let uk = k / self.grid.k.step() + self.grid.k.zero_index() as f64;
        let ur = r / self.grid.r.step() + self.grid.r.zero_index() as f64;
        let (ik, ir) = (uk.floor(), ur.floor());
        if ik < 1.0 || ir < 1.0 || ik + 2.0 >= nk as f64 || ir + 2.0 >= nr as f64 {
            return C64::new(0.0, 0.0);
        }
        let (ik, ir) = (ik as usize, ir as usize);
        let (sk, sr) = (uk - ik as f64, ur - ir as f64);
        let mut rows = [C64::new(0.0, 0.0); 4];
        for (m, row) in rows.iter_mut().enumerate() {
            let i = ik + m - 1;
            *row = catmull_rom(
                self.grid.values[[i, ir - 1]],
                self.grid.values[[i, ir]],
                self.grid.values[[i, ir + 1]],
                self.grid.values[[i, ir + 2]],
                sr,
            );
        }
        catmull_rom(rows[0], rows[1], rows[2], rows[3], sk)
    }
}

fn catmull_rom(p0: C64, p1: C64, p2: C64, p3: C64, s: f64) -> C64 {
    0.5 * (2.0 * p1
        + ((p2 - p0)
            + ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + (3.0 * (p1 - p2) + p3 - p0) * s) * s)
            * s)
}

#[derive(Debug, Clone)]
enum CharFn {
    Analytic(AnalyticState),
    Gridded(GriddedState),
}

/// Where a realized state's evaluator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Gridded,
}

/// A state ready for propagation: an evaluable `rho~(k, r)` plus an optional
/// position-representation rendering.
#[derive(Debug, Clone)]
pub struct RealizedState {
    char_fn: CharFn,
    position: Option<PositionGrid>,
}

impl RealizedState {
    /// `rho~(k, r)` at arbitrary real arguments. Unit-trace states give
    /// `1/sqrt(2 pi)` at the origin.
    pub fn char_value(&self, k: f64, r: f64) -> C64 {
        match &self.char_fn {
            CharFn::Analytic(a) => a.char_terms.iter().map(|t| t.eval(k, r)).sum(),
            CharFn::Gridded(g) => g.eval(k, r),
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self.char_fn {
            CharFn::Analytic(_) => Provenance::Analytic,
            CharFn::Gridded(_) => Provenance::Gridded,
        }
    }

    /// The stored position rendering, if the state was realized on a grid.
    pub fn position(&self) -> Option<&PositionGrid> {
        self.position.as_ref()
    }

    /// Tabulate `rho~` on the given axes.
    pub fn char_grid(&self, k: Axis, r: Axis) -> CharGrid {
        CharGrid::from_fn(k, r, |kk, rr| self.char_value(kk, rr))
    }

    /// Render the position representation `rho(center, offset)` on the given
    /// axes. Analytic states are evaluated in closed form after an aliasing
    /// check; gridded states return their stored rendering and insist on
    /// matching axes.
    pub fn render_position(&self, center: Axis, offset: Axis) -> Result<PositionGrid> {
        match &self.char_fn {
            CharFn::Analytic(a) => {
                check_support(a, center, offset)?;
                Ok(PositionGrid::from_fn(center, offset, |c, o| {
                    a.pos_terms.iter().map(|t| t.eval(c, o)).sum()
                }))
            }
            CharFn::Gridded(_) => {
                let stored = self
                    .position
                    .as_ref()
                    .expect("gridded states keep a rendering");
                if stored.center == center && stored.offset == offset {
                    Ok(stored.clone())
                } else {
                    Err(Error::Invalid {
                        name: "axes",
                        reason: "gridded state was realized on different axes; use realize_on"
                            .into(),
                    })
                }
            }
        }
    }
}

fn check_support(a: &AnalyticState, center: Axis, offset: Axis) -> Result<()> {
    if a.center_support > center.halfwidth() {
        return Err(Error::Aliasing(format!(
            "state support {:.3} exceeds the center half-width {:.3}",
            a.center_support,
            center.halfwidth()
        )));
    }
    if a.offset_support > offset.halfwidth() {
        return Err(Error::Aliasing(format!(
            "state coherence support {:.3} exceeds the offset half-width {:.3}",
            a.offset_support,
            offset.halfwidth()
        )));
    }
    let nyquist = std::f64::consts::PI / center.step();
    if a.bandwidth > nyquist {
        return Err(Error::Aliasing(format!(
            "state bandwidth {:.3} exceeds the grid Nyquist limit {:.3}",
            a.bandwidth, nyquist
        )));
    }
    Ok(())
}

/// Gaussian-superposition component: amplitude, position, momentum.
struct Component {
    c: C64,
    a: f64,
    b: f64,
}

fn gaussian_sum(components: &[Component], sigma: f64, hbar: f64) -> AnalyticState {
    let mut char_terms = Vec::with_capacity(components.len() * components.len());
    let mut pos_terms = Vec::with_capacity(components.len() * components.len());
    let s2 = sigma * sigma;
    for j in components {
        for k in components {
            let da = j.a - k.a;
            let sa = j.a + k.a;
            let db = (j.b - k.b) / hbar;
            let sb2 = (j.b + k.b) / (2.0 * hbar);
            let cc = j.c * k.c.conj();
            char_terms.push(QuadTerm {
                w: cc
                    * INV_SQRT_2PI
                    * C64::new(-da * da / (8.0 * s2) - s2 * db * db / 2.0, db * sa / 2.0).exp(),
                q_aa: C64::new(-s2 / 2.0, 0.0),
                q_bb: C64::new(-1.0 / (8.0 * s2), 0.0),
                q_a: C64::new(s2 * db, -sa / 2.0),
                q_b: C64::new(da / (4.0 * s2), sb2),
            });
            pos_terms.push(QuadTerm {
                w: cc / (2.0 * std::f64::consts::PI * s2).sqrt()
                    * C64::new(-(sa * sa + da * da) / (8.0 * s2), 0.0).exp(),
                q_aa: C64::new(-1.0 / (2.0 * s2), 0.0),
                q_bb: C64::new(-1.0 / (8.0 * s2), 0.0),
                q_a: C64::new(sa / (2.0 * s2), db),
                q_b: C64::new(da / (4.0 * s2), sb2),
            });
        }
    }
    let reach = components.iter().map(|c| c.a.abs()).fold(0.0, f64::max);
    let dmax = components
        .iter()
        .flat_map(|j| components.iter().map(move |k| (j.a - k.a).abs()))
        .fold(0.0, f64::max);
    let pmax = components.iter().map(|c| c.b.abs()).fold(0.0, f64::max);
    AnalyticState {
        char_terms,
        pos_terms,
        center_support: reach + 7.0 * sigma,
        // coherence lobes at the branch separations have width 2 sigma;
        // 11 sigma puts the boundary amplitude near 3e-7, inside the 1e-6
        // edge tolerance of the transforms
        offset_support: dmax + 11.0 * sigma,
        bandwidth: pmax / hbar + 4.0 / sigma,
    }
}

/// Grid-sizing policy for number states: resolve the fastest oscillation
/// with ~14 points per wavelength, keep the spacing of the conjugate axis
/// fine enough for the bicubic lookup, and cap the sizes at 2048.
fn fock_axes(n: usize, params: &ModelParams) -> Result<(Axis, Axis)> {
    let ell = (params.hbar() / (params.mass() * params.omega())).sqrt();
    let q = ((2 * n + 1) as f64).sqrt();
    // Center axis: spacing resolves the fastest oscillation; the width sets
    // the conjugate spacing pi / center_half, which the bicubic lookup wants
    // fine relative to the state's feature scale (ratio ~0.04 keeps its error
    // near 1e-6 for moderate n; capped sizes degrade gracefully).
    let dr_target = std::f64::consts::PI * ell / (7.0 * q);
    let n_center = ((110.0 * ell * q / dr_target).ceil() as usize)
        .next_power_of_two()
        .clamp(256, 2048);
    let center_half = 0.5 * n_center as f64 * dr_target;
    // Offset axis: keep the support (~ twice the classical turning point)
    // first, then as much interpolation fineness as the size cap allows.
    let support = (3.2 * q * ell + 8.0 * ell).max(10.0 * ell);
    let feature = 0.042 * ell * std::f64::consts::SQRT_2 / q;
    let n_offset = ((2.0 * support / feature).ceil() as usize)
        .next_power_of_two()
        .clamp(256, 2048);
    let offset_half = support.max(0.5 * n_offset as f64 * feature);
    Ok((
        Axis::symmetric(n_center, center_half)?,
        Axis::symmetric(n_offset, offset_half)?,
    ))
}

/// Build a state per spec, choosing grids internally where they are needed.
pub fn realize(spec: &StateSpec, params: &ModelParams) -> Result<RealizedState> {
    match spec {
        StateSpec::Fock { n } => {
            let (center, offset) = fock_axes(*n, params)?;
            realize_on(spec, params, center, offset)
        }
        _ => {
            spec.validate()?;
            Ok(RealizedState {
                char_fn: CharFn::Analytic(analytic_form(spec, params)?),
                position: None,
            })
        }
    }
}

/// Build a state on explicit axes; gridded states are tabulated there, and
/// analytic states additionally keep a rendering after an aliasing check.
pub fn realize_on(
    spec: &StateSpec,
    params: &ModelParams,
    center: Axis,
    offset: Axis,
) -> Result<RealizedState> {
    spec.validate()?;
    match spec {
        StateSpec::Fock { n } => {
            if params.is_free_particle() {
                return Err(Error::Invalid {
                    name: "state",
                    reason: "number states need an oscillator (omega > 0)".into(),
                });
            }
            let mw = params.mass() * params.omega() / params.hbar();
            // Aliasing preconditions: support and oscillation of phi_n.
            let turning = ((2 * n + 1) as f64).sqrt() / mw.sqrt();
            if 1.3 * turning >= center.halfwidth().min(0.5 * offset.halfwidth()) {
                return Err(Error::Aliasing(format!(
                    "number state n = {n} reaches {:.2}, outside the grid",
                    1.3 * turning
                )));
            }
            let k_osc = ((2 * n + 1) as f64 * mw).sqrt();
            if 8.0 * k_osc * center.step().max(0.5 * offset.step()) > 2.0 * std::f64::consts::PI {
                return Err(Error::Resolution(format!(
                    "number state n = {n} needs at least 8 points per oscillation"
                )));
            }
            let pos = PositionGrid::from_fn(center, offset, |c, o| {
                C64::new(
                    hermite::eigenfunction(*n, c + 0.5 * o, mw)
                        * hermite::eigenfunction(*n, c - 0.5 * o, mw),
                    0.0,
                )
            });
            let grid = transforms::to_char(&pos)?;
            Ok(RealizedState {
                char_fn: CharFn::Gridded(GriddedState { grid }),
                position: Some(pos),
            })
        }
        _ => {
            let analytic = analytic_form(spec, params)?;
            let position = {
                check_support(&analytic, center, offset)?;
                Some(PositionGrid::from_fn(center, offset, |c, o| {
                    analytic.pos_terms.iter().map(|t| t.eval(c, o)).sum()
                }))
            };
            Ok(RealizedState {
                char_fn: CharFn::Analytic(analytic),
                position,
            })
        }
    }
}

fn analytic_form(spec: &StateSpec, params: &ModelParams) -> Result<AnalyticState> {
    let hbar = params.hbar();
    match *spec {
        StateSpec::Gaussian { x0, p0, sigma } => Ok(gaussian_sum(
            &[Component {
                c: C64::new(1.0, 0.0),
                a: x0,
                b: p0,
            }],
            sigma,
            hbar,
        )),
        StateSpec::Cat {
            x0,
            separation,
            p0,
            sigma,
            phase,
        } => {
            // Overlap-corrected normalization of the two-branch superposition.
            let overlap = (-separation * separation / (8.0 * sigma * sigma)).exp();
            let norm = 1.0 / (2.0 + 2.0 * overlap * phase.cos()).sqrt();
            Ok(gaussian_sum(
                &[
                    Component {
                        c: C64::new(norm, 0.0),
                        a: x0 + 0.5 * separation,
                        b: p0,
                    },
                    Component {
                        c: C64::from_polar(norm, phase),
                        a: x0 - 0.5 * separation,
                        b: p0,
                    },
                ],
                sigma,
                hbar,
            ))
        }
        StateSpec::Thermal { kt } => {
            if params.is_free_particle() {
                return Err(Error::Invalid {
                    name: "state",
                    reason: "thermal states need an oscillator (omega > 0)".into(),
                });
            }
            let mw = params.mass() * params.omega();
            // beta = hbar omega / (2 kT); kt = 0 degenerates to the ground state.
            let beta = if kt == 0.0 {
                f64::INFINITY
            } else {
                hbar * params.omega() / (2.0 * kt)
            };
            let tanh = beta.tanh();
            let a = mw * tanh / hbar;
            let b = mw / (4.0 * hbar * tanh);
            let zero = C64::new(0.0, 0.0);
            Ok(AnalyticState {
                char_terms: vec![QuadTerm {
                    w: C64::new(INV_SQRT_2PI, 0.0),
                    q_aa: C64::new(-1.0 / (4.0 * a), 0.0),
                    q_bb: C64::new(-b, 0.0),
                    q_a: zero,
                    q_b: zero,
                }],
                pos_terms: vec![QuadTerm {
                    w: C64::new((a / std::f64::consts::PI).sqrt(), 0.0),
                    q_aa: C64::new(-a, 0.0),
                    q_bb: C64::new(-b, 0.0),
                    q_a: zero,
                    q_b: zero,
                }],
                center_support: 7.0 / (2.0 * a).sqrt(),
                offset_support: 7.0 / (2.0 * b).sqrt(),
                bandwidth: 4.0 * (2.0 * a).sqrt(),
            })
        }
        StateSpec::Fock { .. } => unreachable!("number states are realized on a grid"),
    }
}

/// `Tr rho^2` as the position-representation double integral
/// `integral |rho(center, offset)|^2 dcenter doffset`.
pub fn purity(rho: &PositionGrid) -> f64 {
    let sum: f64 = rho.values.iter().map(|v| v.norm_sqr()).sum();
    sum * rho.center.step() * rho.offset.step()
}

/// Purity plus the fraction of `|rho|^2` sitting on the boundary ring; a
/// fraction above ~1e-6 means the grid truncates the state.
pub fn purity_report(rho: &PositionGrid) -> (f64, f64) {
    let total: f64 = rho.values.iter().map(|v| v.norm_sqr()).sum();
    let (nc, nr) = rho.values.dim();
    let mut edge = 0.0;
    for j in 0..nr {
        edge += rho.values[[0, j]].norm_sqr() + rho.values[[nc - 1, j]].norm_sqr();
    }
    for i in 1..nc - 1 {
        edge += rho.values[[i, 0]].norm_sqr() + rho.values[[i, nr - 1]].norm_sqr();
    }
    (
        total * rho.center.step() * rho.offset.step(),
        if total > 0.0 { edge / total } else { 0.0 },
    )
}
