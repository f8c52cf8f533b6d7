//! Uniform grids and the two density-matrix representations.
//!
//! Axes are symmetric about zero and endpoint-exclusive: an axis of `n`
//! points with spacing `h` holds `x_j = (j - n/2) h`, so zero is always a
//! grid point (index `n/2`) and `+n/2 h` is excluded. This is the layout the
//! centered discrete Fourier transform in [`crate::transforms`] expects.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A uniform, symmetric, endpoint-exclusive axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    n: usize,
    step: f64,
}

impl Axis {
    /// Axis of `n` points covering `[-halfwidth, halfwidth)`.
    pub fn symmetric(n: usize, halfwidth: f64) -> Result<Self> {
        if n < 4 || !halfwidth.is_finite() || halfwidth <= 0.0 {
            return Err(Error::Invalid {
                name: "axis",
                reason: format!(
                    "need n >= 4 and positive halfwidth (n = {n}, halfwidth = {halfwidth})"
                ),
            });
        }
        Ok(Self {
            n,
            step: 2.0 * halfwidth / n as f64,
        })
    }

    pub fn from_step(n: usize, step: f64) -> Result<Self> {
        if n < 4 || !step.is_finite() || step <= 0.0 {
            return Err(Error::Invalid {
                name: "axis",
                reason: format!("need n >= 4 and positive step (n = {n}, step = {step})"),
            });
        }
        Ok(Self { n, step })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Largest magnitude on the axis, `n/2 * step`.
    pub fn halfwidth(&self) -> f64 {
        0.5 * self.n as f64 * self.step
    }

    pub fn value(&self, index: usize) -> f64 {
        (index as f64 - (self.n / 2) as f64) * self.step
    }

    /// Index of the zero coordinate.
    pub fn zero_index(&self) -> usize {
        self.n / 2
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.value(j))
    }

    pub fn is_power_of_two(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// The Fourier-conjugate axis: same length, spacing `2 pi / (n step)`.
    pub fn conjugate(&self) -> Axis {
        Axis {
            n: self.n,
            step: 2.0 * std::f64::consts::PI / (self.n as f64 * self.step),
        }
    }
}

/// Relative magnitude of the largest sample on the outermost ring of a grid.
fn edge_amplitude(values: &Array2<C64>) -> f64 {
    let (nk, nr) = values.dim();
    let mut edge: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for v in values.iter() {
        peak = peak.max(v.norm_sqr());
    }
    for j in 0..nr {
        edge = edge.max(values[[0, j]].norm_sqr());
        edge = edge.max(values[[nk - 1, j]].norm_sqr());
    }
    for i in 0..nk {
        edge = edge.max(values[[i, 0]].norm_sqr());
        edge = edge.max(values[[i, nr - 1]].norm_sqr());
    }
    if peak == 0.0 {
        0.0
    } else {
        (edge / peak).sqrt()
    }
}

fn hermiticity_error(values: &Array2<C64>) -> f64 {
    // The mirror of index j is n - j; j = 0 has no counterpart on an
    // endpoint-exclusive axis and is skipped.
    let (nk, nr) = values.dim();
    let mut worst: f64 = 0.0;
    for i in 1..nk {
        for j in 1..nr {
            let d = values[[nk - i, nr - j]] - values[[i, j]].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// The density matrix in the transformed representation: complex amplitudes
/// on a `(k, r)` grid, rows indexed by `k` and columns by `r`.
///
/// For a unit-trace state the origin value is `1/sqrt(2 pi)`, and Hermiticity
/// of the underlying density matrix shows up as the mirror symmetry
/// `f(-k, -r) = conj f(k, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharGrid {
    pub k: Axis,
    pub r: Axis,
    pub values: Array2<C64>,
}

impl CharGrid {
    pub fn zeros(k: Axis, r: Axis) -> Self {
        Self {
            values: Array2::zeros((k.len(), r.len())),
            k,
            r,
        }
    }

    pub fn from_fn(k: Axis, r: Axis, mut f: impl FnMut(f64, f64) -> C64) -> Self {
        let mut g = Self::zeros(k, r);
        for i in 0..k.len() {
            let kv = k.value(i);
            for j in 0..r.len() {
                g.values[[i, j]] = f(kv, r.value(j));
            }
        }
        g
    }

    /// Value at the origin; equals `trace / sqrt(2 pi)` for the represented state.
    pub fn origin_value(&self) -> C64 {
        self.values[[self.k.zero_index(), self.r.zero_index()]]
    }

    /// Worst-case violation of `f(-k, -r) = conj f(k, r)`.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.values)
    }

    /// Relative amplitude of the largest sample on the boundary ring.
    pub fn edge_amplitude(&self) -> f64 {
        edge_amplitude(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of the difference with `other`.
    pub fn linf_distance(&self, other: &CharGrid) -> f64 {
        assert_eq!(self.values.dim(), other.values.dim());
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The density matrix in the position representation: `rho(center, offset)`
/// where `center = (x + x')/2` and `offset = x - x'`. Rows indexed by
/// `center`, columns by `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionGrid {
    pub center: Axis,
    pub offset: Axis,
    pub values: Array2<C64>,
}

impl PositionGrid {
    pub fn zeros(center: Axis, offset: Axis) -> Self {
        Self {
            values: Array2::zeros((center.len(), offset.len())),
            center,
            offset,
        }
    }

    pub fn from_fn(center: Axis, offset: Axis, mut f: impl FnMut(f64, f64) -> C64) -> Self {
        let mut g = Self::zeros(center, offset);
        for i in 0..center.len() {
            let cv = center.value(i);
            for j in 0..offset.len() {
                g.values[[i, j]] = f(cv, offset.value(j));
            }
        }
        g
    }

    /// Trace as the quadrature of the diagonal: `sum_R rho(R, 0) dR`.
    ///
    /// Real part of the complex sum; the imaginary part is available from
    /// [`PositionGrid::trace_residual`] as a diagnostic.
    pub fn trace(&self) -> f64 {
        self.trace_complex().re
    }

    /// Magnitude of the imaginary residue of the trace quadrature.
    pub fn trace_residual(&self) -> f64 {
        self.trace_complex().im.abs()
    }

    fn trace_complex(&self) -> C64 {
        let j0 = self.offset.zero_index();
        let sum: C64 = (0..self.center.len()).map(|i| self.values[[i, j0]]).sum();
        sum * self.center.step()
    }

    /// Worst-case violation of `rho(R, -r) = conj rho(R, r)`.
    pub fn hermiticity_error(&self) -> f64 {
        let (nc, nr) = self.values.dim();
        let mut worst: f64 = 0.0;
        for i in 0..nc {
            for j in 1..nr {
                let d = self.values[[i, nr - j]] - self.values[[i, j]].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Most negative real part found on the diagonal `rho(R, 0)`.
    pub fn diagonal_min(&self) -> f64 {
        let j0 = self.offset.zero_index();
        (0..self.center.len())
            .map(|i| self.values[[i, j0]].re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn edge_amplitude(&self) -> f64 {
        edge_amplitude(&self.values)
    }

    pub fn linf_distance(&self, other: &PositionGrid) -> f64 {
        assert_eq!(self.values.dim(), other.values.dim());
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A real-valued phase-space distribution on an `(x, p)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Axis,
    pub p: Axis,
    pub values: Array2<f64>,
    /// Largest imaginary residue discarded when the transform output was
    /// taken real; diagnostic only.
    pub imag_residual: f64,
}

impl WignerGrid {
    /// `integral W dx dp` by the trapezoid-consistent grid sum.
    pub fn total_mass(&self) -> f64 {
        self.values.sum() * self.x.step() * self.p.step()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
