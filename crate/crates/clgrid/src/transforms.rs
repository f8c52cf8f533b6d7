//! Conversions between the position and transformed representations, and the
//! phase-space (Wigner) distribution.
//!
//! The continuous pair is
//!
//! ```text
//! rho(R, r) = (1/sqrt(2 pi)) integral dK e^{+iKR} rho~(K, r)
//! rho~(K, r) = (1/sqrt(2 pi)) integral dR e^{-iKR} rho(R, r)
//! ```
//!
//! discretized trapezoid-consistently on centered, endpoint-exclusive axes:
//! the grid sum times the spacing converges to the integral, so refinement
//! approaches the continuum convention instead of a bare-DFT one. With the
//! conjugate spacing `dK = 2 pi / (N dR)` the discrete pair inverts exactly.
//! One kernel implements both directions (and the Wigner transform), so the
//! sign and scale conventions cannot drift apart.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Axis, CharGrid, PositionGrid, WignerGrid};

/// Relative boundary amplitude above which a transform refuses the grid:
/// the state visibly touches the edge of the transformed axis, so its
/// bandwidth exceeds what the conjugate axis can represent.
const EDGE_TOLERANCE: f64 = 1e-6;

fn require_pow2(axis: &Axis, name: &'static str) -> Result<()> {
    if !axis.is_power_of_two() {
        return Err(Error::Invalid {
            name,
            reason: format!("transform axes must be powers of two (got {})", axis.len()),
        });
    }
    Ok(())
}

/// Centered transform of one line, in place:
/// `out_l = scale * (-1)^(N/2) (-1)^l sum_j (-1)^j in_j e^{-+ 2 pi i l j / N}`,
/// which is the trapezoid sum of `e^{-+ i k_l x_j} f(x_j)` on centered axes.
fn transform_line(fft: &Arc<dyn Fft<f64>>, buf: &mut [C64], scale: f64) {
    for v in buf.iter_mut().skip(1).step_by(2) {
        *v = -*v;
    }
    fft.process(buf);
    let sign = if (buf.len() / 2).is_multiple_of(2) {
        scale
    } else {
        -scale
    };
    for (l, v) in buf.iter_mut().enumerate() {
        *v *= if l.is_multiple_of(2) { sign } else { -sign };
    }
}

fn edge_amplitude_rows(values: &ndarray::Array2<C64>) -> f64 {
    let (n0, n1) = values.dim();
    let mut edge: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for v in values.iter() {
        peak = peak.max(v.norm_sqr());
    }
    for j in 0..n1 {
        edge = edge.max(values[[0, j]].norm_sqr());
        edge = edge.max(values[[n0 - 1, j]].norm_sqr());
    }
    if peak == 0.0 {
        0.0
    } else {
        (edge / peak).sqrt()
    }
}

/// `rho(R, r) -> rho~(K, r)`: forward transform along the center axis.
pub fn to_char(rho: &PositionGrid) -> Result<CharGrid> {
    require_pow2(&rho.center, "center axis")?;
    require_pow2(&rho.offset, "offset axis")?;
    if edge_amplitude_rows(&rho.values) > EDGE_TOLERANCE {
        return Err(Error::Aliasing(
            "state amplitude touches the center-axis boundary".into(),
        ));
    }
    let n = rho.center.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = rho.center.step() / (2.0 * std::f64::consts::PI).sqrt();
    let mut out = CharGrid::zeros(rho.center.conjugate(), rho.offset);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for j in 0..rho.offset.len() {
        for (i, v) in buf.iter_mut().enumerate() {
            *v = rho.values[[i, j]];
        }
        transform_line(&fft, &mut buf, scale);
        for (i, v) in buf.iter().enumerate() {
            out.values[[i, j]] = *v;
        }
    }
    Ok(out)
}

/// `rho~(K, r) -> rho(R, r)`: inverse transform along the `k` axis.
pub fn to_position(rho_t: &CharGrid) -> Result<PositionGrid> {
    require_pow2(&rho_t.k, "k axis")?;
    require_pow2(&rho_t.r, "r axis")?;
    if edge_amplitude_rows(&rho_t.values) > EDGE_TOLERANCE {
        return Err(Error::Aliasing(
            "amplitude touches the k-axis boundary; position grid would alias".into(),
        ));
    }
    let n = rho_t.k.len();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let scale = rho_t.k.step() / (2.0 * std::f64::consts::PI).sqrt();
    let mut out = PositionGrid::zeros(rho_t.k.conjugate(), rho_t.r);
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for j in 0..rho_t.r.len() {
        for (i, v) in buf.iter_mut().enumerate() {
            *v = rho_t.values[[i, j]];
        }
        transform_line(&fft, &mut buf, scale);
        for (i, v) in buf.iter().enumerate() {
            out.values[[i, j]] = *v;
        }
    }
    Ok(out)
}

/// Wigner distribution `W(x, p) = (1/2 pi hbar) integral dr rho(x, r) e^{-ipr/hbar}`.
///
/// Real for Hermitian input; the discarded imaginary residue is kept as a
/// diagnostic on the returned grid.
pub fn wigner(rho: &PositionGrid, hbar: f64) -> Result<WignerGrid> {
    require_pow2(&rho.offset, "offset axis")?;
    crate::error::ensure_positive("hbar", hbar)?;
    let mut offset_edge: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for v in rho.values.iter() {
        peak = peak.max(v.norm_sqr());
    }
    let (nc, nr) = rho.values.dim();
    for i in 0..nc {
        offset_edge = offset_edge.max(rho.values[[i, 0]].norm_sqr());
        offset_edge = offset_edge.max(rho.values[[i, nr - 1]].norm_sqr());
    }
    if peak > 0.0 && (offset_edge / peak).sqrt() > EDGE_TOLERANCE {
        return Err(Error::Aliasing(
            "coherence amplitude touches the offset-axis boundary".into(),
        ));
    }
    let n = rho.offset.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = rho.offset.step() / (2.0 * std::f64::consts::PI * hbar);
    let p_axis = Axis::from_step(n, rho.offset.conjugate().step() * hbar)?;
    let mut values = ndarray::Array2::<f64>::zeros((rho.center.len(), n));
    let mut imag_residual: f64 = 0.0;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for i in 0..rho.center.len() {
        for (j, v) in buf.iter_mut().enumerate() {
            *v = rho.values[[i, j]];
        }
        transform_line(&fft, &mut buf, scale);
        for (j, v) in buf.iter().enumerate() {
            values[[i, j]] = v.re;
            imag_residual = imag_residual.max(v.im.abs());
        }
    }
    Ok(WignerGrid {
        x: rho.center,
        p: p_axis,
        values,
        imag_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PositionGrid;
    use approx::assert_relative_eq;

    fn gaussian_position(n: usize, half: f64, sigma: f64) -> PositionGrid {
        let ax = Axis::symmetric(n, half).unwrap();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();
        PositionGrid::from_fn(ax, ax, |c, o| {
            C64::new(
                norm * (-c * c / (2.0 * sigma * sigma) - o * o / (8.0 * sigma * sigma)).exp(),
                0.0,
            )
        })
    }

    #[test]
    fn gaussian_transforms_to_gaussian_with_reciprocal_width() {
        let sigma = 0.8;
        let rho = gaussian_position(256, 8.0, sigma);
        let tilde = to_char(&rho).unwrap();
        // rho~(K, 0) = (1/sqrt(2pi)) exp(-sigma^2 K^2 / 2)
        let j0 = tilde.r.zero_index();
        for i in (0..tilde.k.len()).step_by(17) {
            let k = tilde.k.value(i);
            let expect =
                (-(sigma * sigma) * k * k / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let got = tilde.values[[i, j0]];
            assert!(
                (got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12,
                "k = {k}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn round_trip_is_identity_on_hermitian_image_data() {
        // Band-limited pseudo-random Hermitian-image grid.
        let ax = Axis::symmetric(64, 6.0).unwrap();
        let mut rho = PositionGrid::from_fn(ax, ax, |c, o| {
            let env = (-0.7 * (c * c + o * o)).exp();
            C64::new(
                env * (1.3 * c + 0.9 * o).cos(),
                env * (0.7 * c).sin() * (1.1 * o).sin(),
            )
        });
        // enforce rho(R, -r) = conj rho(R, r) exactly
        let (nc, nr) = rho.values.dim();
        for i in 0..nc {
            for j in 1..nr / 2 {
                rho.values[[i, nr - j]] = rho.values[[i, j]].conj();
            }
            rho.values[[i, 0]] = C64::new(rho.values[[i, 0]].re, 0.0);
        }
        let back = to_position(&to_char(&rho).unwrap()).unwrap();
        let scale = rho.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(back.linf_distance(&rho) / scale < 1e-12);
    }

    #[test]
    fn trace_equals_scaled_origin_value() {
        // sum_R rho(R, 0) dR = sqrt(2 pi) rho~(0, 0): exact for the discrete
        // pair on centered axes.
        let rho = gaussian_position(128, 8.0, 0.75);
        let tilde = to_char(&rho).unwrap();
        let expect = (2.0 * std::f64::consts::PI).sqrt() * tilde.origin_value().re;
        assert_relative_eq!(rho.trace(), expect, max_relative = 1e-12);
    }

    #[test]
    fn parseval_identity() {
        let rho = gaussian_position(256, 8.0, 0.6);
        let tilde = to_char(&rho).unwrap();
        let pos: f64 = rho.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * rho.center.step()
            * rho.offset.step();
        let chr: f64 = tilde.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * tilde.k.step()
            * tilde.r.step();
        assert_relative_eq!(pos, chr, max_relative = 1e-12);
    }

    #[test]
    fn aliasing_flagged_when_state_touches_boundary() {
        // A wide state on a narrow grid leaves visible boundary amplitude.
        let rho = gaussian_position(64, 2.0, 0.9);
        assert!(matches!(to_char(&rho), Err(Error::Aliasing(_))));
    }

    #[test]
    fn non_power_of_two_rejected() {
        let ax = Axis::symmetric(96, 8.0).unwrap();
        let rho = PositionGrid::zeros(ax, ax);
        assert!(to_char(&rho).is_err());
    }

    #[test]
    fn wigner_of_ground_state_is_the_minimum_uncertainty_gaussian() {
        // W(x, p) = (1/pi hbar) exp(-x^2 m w / hbar - p^2/(m w hbar))
        let (m, w, hb) = (1.0f64, 3.0f64, 1.0f64);
        let sigma = (hb / (2.0 * m * w)).sqrt();
        let rho = gaussian_position(256, 8.0, sigma);
        let wg = wigner(&rho, hb).unwrap();
        assert!(wg.imag_residual < 1e-10);
        assert!((wg.total_mass() - 1.0).abs() < 1e-6);
        let mut worst: f64 = 0.0;
        for i in (0..wg.x.len()).step_by(13) {
            for j in (0..wg.p.len()).step_by(13) {
                let (x, p) = (wg.x.value(i), wg.p.value(j));
                let expect = (-(x * x) * m * w / hb - p * p / (m * w * hb)).exp()
                    / (std::f64::consts::PI * hb);
                worst = worst.max((wg.values[[i, j]] - expect).abs());
            }
        }
        assert!(worst < 1e-10, "wigner vs analytic: {worst:e}");
    }

    #[test]
    fn wigner_marginals() {
        let rho = gaussian_position(256, 8.0, 0.5);
        let wg = wigner(&rho, 1.0).unwrap();
        // integral over p recovers the diagonal rho(x, 0)
        let j0 = rho.offset.zero_index();
        for i in (0..wg.x.len()).step_by(31) {
            let marginal: f64 =
                (0..wg.p.len()).map(|j| wg.values[[i, j]]).sum::<f64>() * wg.p.step();
            assert!((marginal - rho.values[[i, j0]].re).abs() < 1e-6);
        }
        // integral over x at p = 0 equals the momentum diagonal
        // <p|rho|p> = (1/2 pi hbar) iint rho(R, r) e^{-ipr/hbar} dR dr.
        let mut direct = C64::new(0.0, 0.0);
        for i in 0..rho.center.len() {
            for j in 0..rho.offset.len() {
                direct += rho.values[[i, j]];
            }
        }
        let direct =
            (direct * rho.center.step() * rho.offset.step() / (2.0 * std::f64::consts::PI)).re;
        let jp0 = wg.p.zero_index();
        let marginal: f64 = (0..wg.x.len()).map(|i| wg.values[[i, jp0]]).sum::<f64>() * wg.x.step();
        assert!((marginal - direct).abs() < 1e-6);
    }

    #[test]
    fn wigner_momentum_sign_convention() {
        // A boosted packet must peak at +p0.
        let ax = Axis::symmetric(256, 8.0).unwrap();
        let (sigma, p0) = (0.6, 1.8);
        let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();
        let rho = PositionGrid::from_fn(ax, ax, |c, o| {
            C64::from_polar(
                norm * (-c * c / (2.0 * sigma * sigma) - o * o / (8.0 * sigma * sigma)).exp(),
                p0 * o,
            )
        });
        let wg = wigner(&rho, 1.0).unwrap();
        let mut best = (0.0, 0.0);
        for j in 0..wg.p.len() {
            let v = wg.values[[wg.x.zero_index(), j]];
            if v > best.1 {
                best = (wg.p.value(j), v);
            }
        }
        assert!((best.0 - p0).abs() <= wg.p.step());
    }

    #[test]
    fn cat_wigner_interference_fringes() {
        // Two branches separated by d: the analytic two-Gaussian Wigner along
        // x = 0 is (N^2/pi) e^{-2 sigma^2 p^2} [2 e^{-d^2/8 sigma^2} + 2 cos(p d)],
        // i.e. center fringes of period 2 pi hbar / d in p.
        let ax = Axis::symmetric(512, 12.0).unwrap();
        let (sigma, d) = (0.45f64, 3.0f64);
        let overlap = (-d * d / (8.0 * sigma * sigma)).exp();
        let norm2 = 1.0 / (2.0 + 2.0 * overlap);
        let g = |x: f64| (-(x * x) / (4.0 * sigma * sigma)).exp();
        let pref = norm2 / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt();
        let rho = PositionGrid::from_fn(ax, ax, |c, o| {
            let (xp, xm) = (c + o / 2.0, c - o / 2.0);
            let amp = g(xp - d / 2.0) * g(xm - d / 2.0)
                + g(xp + d / 2.0) * g(xm + d / 2.0)
                + g(xp - d / 2.0) * g(xm + d / 2.0)
                + g(xp + d / 2.0) * g(xm - d / 2.0);
            C64::new(pref * amp, 0.0)
        });
        let wg = wigner(&rho, 1.0).unwrap();
        let i0 = wg.x.zero_index();
        let closed = |p: f64| {
            norm2 / std::f64::consts::PI
                * (-2.0 * sigma * sigma * p * p).exp()
                * (2.0 * overlap + 2.0 * (p * d).cos())
        };
        let mut worst: f64 = 0.0;
        for j in 0..wg.p.len() {
            worst = worst.max((wg.values[[i0, j]] - closed(wg.p.value(j))).abs());
        }
        assert!(worst < 1e-10, "center slice vs closed form: {worst:e}");
        // Fringe period from the zero crossings of the oscillatory part:
        // W(0, p) - envelope term crosses zero every pi / d.
        let osc = |j: usize| {
            wg.values[[i0, j]]
                - norm2 / std::f64::consts::PI
                    * (-2.0 * sigma * sigma * wg.p.value(j) * wg.p.value(j)).exp()
                    * 2.0
                    * overlap
        };
        let mut crossings = Vec::new();
        for j in wg.p.zero_index()..wg.p.len() - 1 {
            if osc(j).signum() != osc(j + 1).signum() && crossings.len() < 3 {
                crossings.push(wg.p.value(j));
            }
        }
        assert!(crossings.len() >= 2, "fringes not visible: {crossings:?}");
        let period = 2.0 * (crossings[1] - crossings[0]);
        let expected = 2.0 * std::f64::consts::PI / d;
        assert!(
            (period - expected).abs() < 2.0 * wg.p.step(),
            "fringe period {period} vs {expected}"
        );
    }
}
