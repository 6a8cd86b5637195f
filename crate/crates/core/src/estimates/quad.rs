//! Quadrature on geometric grids and small fitting helpers.

/// `∫_{s0}^{s1} g ds` with `g` interpolated as a power law between the two
/// samples (exact for `g ∝ s^γ`). Falls back to the trapezoid when a sample
/// vanishes.
pub(crate) fn power_law_segment(s0: f64, s1: f64, g0: f64, g1: f64) -> f64 {
    if !(g0 > 0.0 && g1 > 0.0) {
        return 0.5 * (s1 - s0) * (g0 + g1);
    }
    let rho = s1 / s0;
    let gamma = (g1 / g0).ln() / rho.ln();
    let e = gamma + 1.0;
    if e.abs() < 1e-12 {
        g0 * s0 * rho.ln()
    } else {
        g0 * s0 * (rho.powf(e) - 1.0) / e
    }
}

/// Sum of [`power_law_segment`] over consecutive samples.
pub(crate) fn power_law_body(s: &[f64], g: &[f64]) -> f64 {
    s.windows(2)
        .zip(g.windows(2))
        .map(|(s, g)| power_law_segment(s[0], s[1], g[0], g[1]))
        .sum()
}

/// Local log-log slope between two samples.
pub(crate) fn local_slope(s0: f64, s1: f64, g0: f64, g1: f64) -> f64 {
    (g1 / g0).ln() / (s1 / s0).ln()
}

/// `∫_0^{s0} g ds` for `g ≈ g0 (s/s0)^γ`; `None` when `γ <= -1`.
pub(crate) fn head(s0: f64, g0: f64, gamma: f64) -> Option<f64> {
    if g0 == 0.0 {
        return Some(0.0);
    }
    (gamma > -1.0).then(|| g0 * s0 / (gamma + 1.0))
}

/// `∫_{s1}^∞ g ds` for `g ≈ g1 (s/s1)^γ`; `None` when `γ >= -1`.
pub(crate) fn tail(s1: f64, g1: f64, gamma: f64) -> Option<f64> {
    if g1 == 0.0 {
        return Some(0.0);
    }
    (gamma < -1.0).then(|| -g1 * s1 / (gamma + 1.0))
}

/// Ordinary least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
