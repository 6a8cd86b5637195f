use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{quad, require_band_limited, LOG_GRID_RATIO};
use crate::error::{Error, Result};
use crate::grid::{
    contamination, geometric_times, synthesize_field, Field, GridSpec, Recipe, CONTAMINATION_LIMIT,
};
use crate::norms::{check_exponent, lp_norm, recip};
use crate::semigroup::{apply_semigroup, gradient_magnitude, kernel, kernel_unchecked, Alpha};

/// Log-log fit of a decay rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    /// `-(n/2α)(1/r - 1/p)`, minus `1/2α` for the gradient variant.
    pub predicted: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest boundary-contamination fraction of the evolved fields.
    pub contamination: f64,
}

impl DecayFit {
    /// `|slope/predicted - 1|`, or `|slope|` when the prediction is 0.
    pub fn relative_error(&self) -> f64 {
        if self.predicted == 0.0 {
            self.slope.abs()
        } else {
            (self.slope / self.predicted - 1.0).abs()
        }
    }
}

fn predicted_slope(alpha: Alpha, r: f64, p: f64, with_gradient: bool) -> f64 {
    let base = -alpha.sigma() * (recip(r) - recip(p));
    if with_gradient {
        base - 1.0 / (2.0 * alpha.value())
    } else {
        base
    }
}

fn check_decay_args(r: f64, p: f64, times: &[f64]) -> Result<()> {
    check_exponent("r", r)?;
    check_exponent("p", p)?;
    if r > p {
        return Err(Error::Exponent(format!("need r <= p, got r = {r}, p = {p}")));
    }
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::TimeGrid("decay fit needs at least two positive times".into()));
    }
    Ok(())
}

/// Evolves, checks contamination, and returns `‖u‖_p` or `‖∇u‖_p`.
fn evolved_norm(f: &Field, t: f64, alpha: Alpha, p: f64, with_gradient: bool) -> Result<(f64, f64)> {
    let u = apply_semigroup(f, t, alpha)?.into_physical();
    let c = contamination(&u);
    if c > CONTAMINATION_LIMIT {
        return Err(Error::Contamination {
            fraction: c,
            limit: CONTAMINATION_LIMIT,
        });
    }
    let v = if with_gradient {
        lp_norm(&gradient_magnitude(&u), p)?
    } else {
        lp_norm(&u, p)?
    };
    Ok((v, c))
}

fn fit(times: Vec<f64>, values: Vec<f64>, predicted: f64, contamination: f64) -> Result<DecayFit> {
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::NonFinite("decay-fit norm vanished or overflowed".into()));
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(DecayFit {
        slope: quad::ls_slope(&x, &y),
        predicted,
        times,
        values,
        contamination,
    })
}

/// Least-squares slope of `ln ‖e^{-tΛ}f‖_p` (or `‖∇e^{-tΛ}f‖_p`) against
/// `ln t` for a fixed field.
///
/// The fitted slope only approaches the prediction once `t` is large against
/// the intrinsic time scale of `f`; see [`decay_fit_rescaled`] for a fit
/// that holds on every window.
pub fn decay_fit(
    f: &Field,
    r: f64,
    p: f64,
    alpha: Alpha,
    times: &[f64],
    with_gradient: bool,
) -> Result<DecayFit> {
    check_decay_args(r, p, times)?;
    alpha.check_grid(f.grid())?;
    let spec = f.to_spectral();
    let mut values = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &t in times {
        let (v, c) = evolved_norm(&spec, t, alpha, p, with_gradient)?;
        values.push(v);
        worst = worst.max(c);
    }
    fit(times.to_vec(), values, predicted_slope(alpha, r, p, with_gradient), worst)
}

/// Decay fit along the parabolic family: at time `t` the data is
/// `f_λ(x) = f(c + λ(x - c))` with `λ = (t_ref/t)^{1/2α}`, and the fitted
/// value is `‖(∇)e^{-tΛ}f_λ‖_p / ‖f_λ‖_r`.
///
/// Each sample is the worst case of the bound at its time scale, so the
/// slope equals the predicted rate exactly in the whole-space limit.
#[allow(clippy::too_many_arguments)]
pub fn decay_fit_rescaled(
    grid: &Arc<GridSpec>,
    recipe: &Recipe,
    r: f64,
    p: f64,
    alpha: Alpha,
    times: &[f64],
    t_ref: f64,
    with_gradient: bool,
) -> Result<DecayFit> {
    check_decay_args(r, p, times)?;
    alpha.check_grid(grid)?;
    if !(t_ref > 0.0) {
        return Err(Error::NegativeTime(t_ref));
    }
    let mut values = Vec::with_capacity(times.len());
    let mut worst: f64 = 0.0;
    for &t in times {
        let lambda = (t_ref / t).powf(1.0 / (2.0 * alpha.value()));
        let f = synthesize_field(grid, &recipe.dilate(lambda, grid)?)?;
        require_band_limited(&f)?;
        let den = lp_norm(&f, r)?;
        if den == 0.0 {
            return Err(Error::ZeroDenominator("‖f_λ‖_r".into()));
        }
        let (v, c) = evolved_norm(&f, t, alpha, p, with_gradient)?;
        values.push(v / den);
        worst = worst.max(c);
    }
    fit(times.to_vec(), values, predicted_slope(alpha, r, p, with_gradient), worst)
}

/// Mixed norm of the kernel over `(0, T]` and its fitted power of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelFit {
    /// `‖K‖_{L^h_t((0,T]; L^r_x)}`.
    pub norm_t: f64,
    /// Same over `(0, 2T]`.
    pub norm_2t: f64,
    /// `log2(norm_2t / norm_t)`.
    pub exponent: f64,
    /// `1/h - (n/2α)(1 - 1/r)`.
    pub predicted: f64,
    /// `(nh/2α)(1 - 1/r)`.
    pub window: f64,
    /// Kernel contamination at `2T`.
    pub contamination: f64,
    /// Sample times and `‖K_t‖_r` at each.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Smallest time at which the kernel is resolved: `e^{-t ξ_N^{2α}} <= e^{-34}`
/// at the Nyquist radius.
fn resolved_time(grid: &GridSpec, alpha: Alpha) -> f64 {
    34.0 / alpha.symbol(grid.nyquist() * grid.nyquist())
}

/// `‖K_t‖_{L^h_t((0,T]; L^r_x)}` at `T` and `2T`, and the fitted exponent.
///
/// Requires `0 <= (nh/2α)(1 - 1/r) < 1` (the lower end is the unit-mass
/// case `r = 1`). Times below the resolution limit of the grid are covered
/// by power-law extrapolation.
pub fn kernel_mixed_norm_fit(
    grid: &Arc<GridSpec>,
    alpha: Alpha,
    h: f64,
    r: f64,
    t_end: f64,
) -> Result<KernelFit> {
    check_exponent("h", h)?;
    check_exponent("r", r)?;
    alpha.check_grid(grid)?;
    if h.is_infinite() {
        return Err(Error::Exponent("h must be finite".into()));
    }
    let window = alpha.sigma() * h * (1.0 - recip(r));
    if !(0.0..1.0).contains(&window) {
        return Err(Error::Exponent(format!(
            "(nh/2α)(1 - 1/r) = {window} must lie in [0, 1)"
        )));
    }
    let t_min = resolved_time(grid, alpha);
    if !(t_min < t_end) {
        return Err(Error::TimeGrid(format!(
            "T = {t_end} is below the grid's resolved time {t_min:.3e}"
        )));
    }
    let mut times = geometric_times(t_min, t_end, LOG_GRID_RATIO);
    let split = times.len() - 1;
    times.extend_from_slice(&geometric_times(t_end, 2.0 * t_end, LOG_GRID_RATIO)[1..]);
    let last = times.len() - 1;
    let mut values = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let k = if i == last {
            kernel(grid, t, alpha)?
        } else {
            kernel_unchecked(grid, t, alpha)?
        };
        values.push(lp_norm(&k, r)?);
    }
    let contamination = contamination(&kernel_unchecked(grid, 2.0 * t_end, alpha)?);
    let g: Vec<f64> = values.iter().map(|v| v.powf(h)).collect();
    let head = quad::head(times[0], g[0], quad::local_slope(times[0], times[1], g[0], g[1]))
        .ok_or_else(|| Error::Hypothesis("kernel norm too singular at t = 0".into()))?;
    let int_t = head + quad::power_law_body(&times[..=split], &g[..=split]);
    let int_2t = int_t + quad::power_law_body(&times[split..], &g[split..]);
    let (norm_t, norm_2t) = (int_t.powf(1.0 / h), int_2t.powf(1.0 / h));
    Ok(KernelFit {
        norm_t,
        norm_2t,
        exponent: (norm_2t / norm_t).log2(),
        predicted: 1.0 / h - alpha.sigma() * (1.0 - recip(r)),
        window,
        contamination,
        times,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equal_exponents_do_not_grow() {
        let g = Arc::new(GridSpec::new(1, 512, 200.0).unwrap());
        let f = synthesize_field(&g, &Recipe::GaussianBump { center: None, width: 2.0 }).unwrap();
        let a = Alpha::new(1.0, 1).unwrap();
        let times = geometric_times(0.5, 8.0, 1.25);
        let fit = decay_fit(&f, 2.0, 2.0, a, &times, false).unwrap();
        assert_eq!(fit.predicted, 0.0);
        assert!(fit.slope <= 0.0);
        assert!(fit.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rescaled_heat_sup_rate() {
        let g = Arc::new(GridSpec::new(1, 1024, 400.0).unwrap());
        let recipe = Recipe::GaussianBump { center: None, width: 4.0 };
        let a = Alpha::new(1.0, 1).unwrap();
        let times = geometric_times(1.0, 16.0, 1.25);
        let fit = decay_fit_rescaled(&g, &recipe, 1.0, f64::INFINITY, a, &times, 4.0, false).unwrap();
        assert!((fit.predicted + 0.5).abs() < 1e-15);
        assert!(fit.relative_error() < 0.02, "{fit:?}");
        let grad =
            decay_fit_rescaled(&g, &recipe, 1.0, f64::INFINITY, a, &times, 4.0, true).unwrap();
        assert!((grad.predicted + 1.0).abs() < 1e-15);
        assert!(grad.relative_error() < 0.02, "{grad:?}");
    }

    #[test]
    fn contaminated_decay_is_rejected() {
        let g = Arc::new(GridSpec::new(1, 64, 20.0).unwrap());
        let f = synthesize_field(&g, &Recipe::GaussianBump { center: None, width: 1.0 }).unwrap();
        let a = Alpha::new(1.0, 1).unwrap();
        let r = decay_fit(&f, 1.0, 2.0, a, &[1.0, 10.0], false);
        assert!(matches!(r, Err(Error::Contamination { .. })));
    }

    #[test]
    fn kernel_fit_examples() {
        let g = Arc::new(GridSpec::new(2, 128, 40.0).unwrap());
        let a = Alpha::new(1.0, 2).unwrap();
        let fit = kernel_mixed_norm_fit(&g, a, 1.0, 2.0, 1.0).unwrap();
        for (t, v) in fit.times.iter().zip(&fit.values) {
            let exact = (8.0 * PI * t).powf(-0.5);
            assert!((v / exact - 1.0).abs() < 5e-3, "t = {t}: {v} vs {exact}");
        }
        assert!((fit.exponent / 0.5 - 1.0).abs() < 0.01, "{}", fit.exponent);

        let unit = kernel_mixed_norm_fit(&g, a, 2.0, 1.0, 1.0).unwrap();
        assert!((unit.exponent - 0.5).abs() < 1e-3);
        assert!(matches!(
            kernel_mixed_norm_fit(&g, a, 2.4, 2.0, 1.0),
            Err(Error::Exponent(_))
        ));
    }
}
