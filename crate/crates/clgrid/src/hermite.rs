//! Hermite polynomials and harmonic-oscillator eigenfunctions.

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
///
/// Fine for the moderate orders used here (`n <= 60`); values grow like
/// `(2x)^n` for large `x`, so callers pair them with Gaussian weights.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut hm = 1.0;
    if n == 0 {
        return hm;
    }
    let mut h = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * h - 2.0 * k as f64 * hm;
        hm = h;
        h = next;
    }
    h
}

/// Normalized oscillator eigenfunction
/// `phi_n(x) = A_n exp(-x^2 m omega / 2 hbar) H_n(x sqrt(m omega / hbar))`.
///
/// Evaluated with the normalized recurrence
/// `phi_{n+1} = xi sqrt(2/(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1}`,
/// which keeps every intermediate bounded (no factorial overflow) up to the
/// n = 60 range used by the states module.
pub fn eigenfunction(n: usize, x: f64, m_omega_over_hbar: f64) -> f64 {
    let xi = x * m_omega_over_hbar.sqrt();
    let mut lo = (m_omega_over_hbar / std::f64::consts::PI).powf(0.25) * (-0.5 * xi * xi).exp();
    if n == 0 {
        return lo;
    }
    let mut hi = std::f64::consts::SQRT_2 * xi * lo;
    for k in 1..n {
        let kf = k as f64;
        let next = xi * (2.0 / (kf + 1.0)).sqrt() * hi - (kf / (kf + 1.0)).sqrt() * lo;
        lo = hi;
        hi = next;
    }
    hi
}

/// All eigenfunctions `phi_0 .. phi_n_max` at one point, sharing the recurrence.
pub fn eigenfunctions_upto(n_max: usize, x: f64, m_omega_over_hbar: f64, out: &mut [f64]) {
    debug_assert!(out.len() == n_max + 1);
    let xi = x * m_omega_over_hbar.sqrt();
    out[0] = (m_omega_over_hbar / std::f64::consts::PI).powf(0.25) * (-0.5 * xi * xi).exp();
    if n_max == 0 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * xi * out[0];
    for k in 1..n_max {
        let kf = k as f64;
        out[k + 1] =
            xi * (2.0 / (kf + 1.0)).sqrt() * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}
