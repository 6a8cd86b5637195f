//! Admissibility arithmetic and LHS/RHS ratio harnesses for Strichartz-type
//! estimates of the fractional heat semigroup.
//!
//! A bound `A ≲ B` is exercised numerically by evaluating `A/B` on concrete
//! data and checking finiteness and invariance under parabolic dilation
//! (see [`dilation_sweep`]).

mod decay;
mod quad;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{geometric_times, Field, TimeSeries};
use crate::norms::{check_exponent, conjugate, exponent_serde, recip, time_norm, NormSpec};
use crate::semigroup::{apply_semigroup, duhamel, require_zero_mean, Alpha};

pub use decay::{decay_fit, decay_fit_rescaled, kernel_mixed_norm_fit, DecayFit, KernelFit};
pub use sweep::{
    dilation_sweep, max_drift, Forcing, RatioReport, SweepCase, TimeProfile, Verdict,
};

/// Residual tolerance under which a triplet counts as admissible.
pub const ADMISSIBLE_TOL: f64 = 1e-12;
/// Tolerance on [`check_scaling_relation`] for inhomogeneous ratios.
pub const SCALING_TOL: f64 = 1e-9;
/// Interpolation factor for BMO evaluations inside ratios.
pub const BMO_REFINE: usize = 4;
/// Largest spectral energy fraction allowed on modes with
/// `max_j |k_j| >= 7N/16`.
pub const NYQUIST_LEAK_LIMIT: f64 = 1e-6;

/// Exponents `(q, p, r)` with scaling weight `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    #[serde(with = "exponent_serde")]
    pub q: f64,
    #[serde(with = "exponent_serde")]
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub r: f64,
    pub sigma: f64,
}

impl Triplet {
    pub fn new(q: f64, p: f64, r: f64, sigma: f64) -> Self {
        Triplet { q, p, r, sigma }
    }

    /// `(q, p, 2)` with `σ = n/2α`.
    pub fn strichartz(q: f64, p: f64, alpha: Alpha) -> Self {
        Triplet::new(q, p, 2.0, alpha.sigma())
    }
}

/// `1/q - σ(1/r - 1/p)`; admissible when below [`ADMISSIBLE_TOL`] in size.
pub fn check_admissible(t: &Triplet) -> Result<f64> {
    check_exponent("q", t.q)?;
    check_exponent("p", t.p)?;
    check_exponent("r", t.r)?;
    if !(t.sigma.is_finite() && t.sigma > 0.0) {
        return Err(Error::Exponent(format!("σ = {} must be positive", t.sigma)));
    }
    if t.r > t.p {
        return Err(Error::Exponent(format!("r = {} exceeds p = {}", t.r, t.p)));
    }
    Ok(recip(t.q) - t.sigma * (recip(t.r) - recip(t.p)))
}

pub fn is_admissible(t: &Triplet) -> bool {
    matches!(check_admissible(t), Ok(res) if res.abs() < ADMISSIBLE_TOL)
}

/// `(1/q1' - 1/q) + (n/2α)(1/p1' - 1/p) - 1`.
pub fn check_scaling_relation(q: f64, p: f64, q1: f64, p1: f64, alpha: f64, n: usize) -> f64 {
    (recip(conjugate(q1)) - recip(q)) + n as f64 / (2.0 * alpha) * (recip(conjugate(p1)) - recip(p))
        - 1.0
}

/// Spatial norm family used on both sides of a ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateNorm {
    Lebesgue,
    /// `Ḣ^{β,p}` (homogeneous) or `H^{β,p}`.
    Sobolev { beta: f64, homogeneous: bool },
    /// `B^s_{p,2}` against `B^s_{2,2}`.
    Besov { s: f64, homogeneous: bool },
    /// BMO against `L²`; only for `n = 2α`, `q = 2`.
    Bmo,
}

impl EstimateNorm {
    /// The spatial norm with integrability `p`.
    pub fn at(&self, p: f64) -> NormSpec {
        match *self {
            EstimateNorm::Lebesgue => NormSpec::Lebesgue { p },
            EstimateNorm::Sobolev { beta, homogeneous } => NormSpec::Sobolev {
                s: beta,
                p,
                homogeneous,
            },
            EstimateNorm::Besov { s, homogeneous } => NormSpec::Besov {
                s,
                p,
                q: 2.0,
                homogeneous,
            },
            EstimateNorm::Bmo => NormSpec::Bmo { refine: BMO_REFINE },
        }
    }

    fn data_norm(&self) -> NormSpec {
        match self {
            EstimateNorm::Bmo => NormSpec::Lebesgue { p: 2.0 },
            other => other.at(2.0),
        }
    }
}

/// Fraction of spectral energy on modes with `max_j |k_j| >= 7N/16`.
pub fn nyquist_leak(f: &Field) -> f64 {
    let s = f.to_spectral();
    let grid = s.grid();
    let edge = (7 * grid.size() / 16) as i64;
    let (mut near, mut total) = (0.0, 0.0);
    for (i, c) in s.data().iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        let k = grid.mode(i);
        if k[..grid.dim()].iter().any(|m| m.abs() >= edge) {
            near += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        near / total
    }
}

/// Fails with [`Error::Aliasing`] when [`nyquist_leak`] is above the limit.
pub fn require_band_limited(f: &Field) -> Result<()> {
    let leak = nyquist_leak(f);
    if leak > NYQUIST_LEAK_LIMIT {
        return Err(Error::Aliasing {
            leak,
            limit: NYQUIST_LEAK_LIMIT,
        });
    }
    Ok(())
}

fn nonzero(value: f64, what: &str) -> Result<f64> {
    if value == 0.0 || !value.is_finite() {
        return Err(Error::ZeroDenominator(what.to_string()));
    }
    Ok(value)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::TimeGrid("need at least two time samples".into()));
    }
    if times[0] < 0.0 {
        return Err(Error::NegativeTime(times[0]));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::TimeGrid("times not strictly increasing".into()));
    }
    Ok(())
}

/// `‖e^{-tΛ}f‖_{L^q_t X_p} / ‖f‖_{X_2}` over the given time grid.
pub fn homogeneous_ratio(
    f: &Field,
    q: f64,
    p: f64,
    alpha: Alpha,
    times: &[f64],
    norm: &EstimateNorm,
) -> Result<f64> {
    check_exponent("q", q)?;
    check_exponent("p", p)?;
    check_times(times)?;
    alpha.check_grid(f.grid())?;
    let sigma = alpha.sigma();
    if *norm != EstimateNorm::Bmo && q == 2.0 && p.is_infinite() && (sigma - 1.0).abs() < ADMISSIBLE_TOL {
        return Err(Error::Exponent(
            "(q, p, n/2α) = (2, ∞, 1) is the excluded endpoint".into(),
        ));
    }
    if *norm == EstimateNorm::Bmo {
        if (sigma - 1.0).abs() > ADMISSIBLE_TOL {
            return Err(Error::Hypothesis(format!(
                "the BMO estimate needs n = 2α, got n = {}, α = {}",
                alpha.dim(),
                alpha.value()
            )));
        }
        if q != 2.0 {
            return Err(Error::Exponent(format!("the BMO estimate needs q = 2, got {q}")));
        }
    }
    let spatial = norm.at(p);
    spatial.validate()?;
    let data_norm = norm.data_norm();
    if spatial.needs_zero_mean() || data_norm.needs_zero_mean() {
        require_zero_mean(f)?;
    }
    let den = nonzero(data_norm.eval(f)?, "data norm of f")?;
    let spec = f.to_spectral();
    let values = times
        .iter()
        .map(|&t| spatial.eval(&apply_semigroup(&spec, t, alpha)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(time_norm(times, &values, q)? / den)
}

fn mixed(u: &TimeSeries, q: f64, spatial: &NormSpec) -> Result<f64> {
    let values = u
        .snapshots()
        .iter()
        .map(|f| spatial.eval(f))
        .collect::<Result<Vec<f64>>>()?;
    time_norm(u.times(), &values, q)
}

/// `‖∫_0^t e^{-(t-s)Λ}F(s) ds‖_{L^q_t X_p} / ‖F‖_{L^{q1'}_t X_{p1'}}`,
/// both over the forcing's time grid (which must start at 0).
pub fn inhomogeneous_ratio(
    forcing: &TimeSeries,
    (q, p): (f64, f64),
    (q1, p1): (f64, f64),
    alpha: Alpha,
    norm: &EstimateNorm,
    check_relation: bool,
) -> Result<f64> {
    for (name, v) in [("q", q), ("p", p), ("q1", q1), ("p1", p1)] {
        check_exponent(name, v)?;
    }
    let (q1c, p1c) = (conjugate(q1), conjugate(p1));
    if !(p1c < p) {
        return Err(Error::Exponent(format!("need p1' < p, got p1' = {p1c}, p = {p}")));
    }
    if !(1.0 < q1c && q1c < q && q.is_finite()) {
        return Err(Error::Exponent(format!(
            "need 1 < q1' < q < ∞, got q1' = {q1c}, q = {q}"
        )));
    }
    if *norm == EstimateNorm::Bmo {
        return Err(Error::Exponent("no BMO variant of the inhomogeneous estimate".into()));
    }
    if check_relation {
        let res = check_scaling_relation(q, p, q1, p1, alpha.value(), alpha.dim());
        if res.abs() > SCALING_TOL {
            return Err(Error::Hypothesis(format!(
                "exponents violate the scaling relation (residual {res:.3e})"
            )));
        }
    }
    let lhs_norm = norm.at(p);
    let rhs_norm = norm.at(p1c);
    lhs_norm.validate()?;
    if lhs_norm.needs_zero_mean() {
        for f in forcing.snapshots() {
            require_zero_mean(f)?;
        }
    }
    let den = nonzero(mixed(forcing, q1c, &rhs_norm)?, "forcing norm")?;
    let u = duhamel(forcing, forcing.times(), alpha)?;
    Ok(mixed(&u, q, &lhs_norm)? / den)
}

/// Sobolev-source form: `‖Duhamel(F)‖_{L²_t L^{2n/(n-2α)}_x}` against
/// `‖F‖_{L^q_t H^{α,p}_x}` with `1/q + (n/2α)(1/p - 1/2) = 3/2`,
/// `1 <= p < 2`, `1 < q < 2`, `n > 2α`.
pub fn sobolev_source_ratio(
    forcing: &TimeSeries,
    q: f64,
    p: f64,
    alpha: Alpha,
    homogeneous: bool,
) -> Result<f64> {
    let n = alpha.dim() as f64;
    let a = alpha.value();
    if !(n > 2.0 * a) {
        return Err(Error::Hypothesis(format!("needs n > 2α, got n = {n}, α = {a}")));
    }
    if !(1.0..2.0).contains(&p) || !(q > 1.0 && q < 2.0) {
        return Err(Error::Exponent(format!(
            "needs 1 <= p < 2 and 1 < q < 2, got p = {p}, q = {q}"
        )));
    }
    let res = 1.0 / q + alpha.sigma() * (1.0 / p - 0.5) - 1.5;
    if res.abs() > SCALING_TOL {
        return Err(Error::Hypothesis(format!(
            "1/q + (n/2α)(1/p - 1/2) = 3/2 fails (residual {res:.3e})"
        )));
    }
    let rhs_norm = NormSpec::Sobolev {
        s: a,
        p,
        homogeneous,
    };
    let den = nonzero(mixed(forcing, q, &rhs_norm)?, "forcing norm")?;
    let u = duhamel(forcing, forcing.times(), alpha)?;
    let lhs = mixed(
        &u,
        2.0,
        &NormSpec::Lebesgue {
            p: 2.0 * n / (n - 2.0 * a),
        },
    )?;
    Ok(lhs / den)
}

/// Ratio of the `s`-weighted parabolic estimate with its quadrature split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicReport {
    pub ratio: f64,
    /// Extrapolated `∫_0^{s_min}`.
    pub head: f64,
    pub body: f64,
    /// Extrapolated `∫_{s_max}^∞`.
    pub tail: f64,
    /// `tail / (head + body + tail)`.
    pub tail_fraction: f64,
    pub samples: usize,
}

/// Grid ratio for integrals in `ln s`.
pub const LOG_GRID_RATIO: f64 = 1.25;

/// `(∫_0^∞ s^{-2/p}‖e^{-sΛ}f‖_p² ds)^{1/2} / ‖f‖_2` for `n = 2α`, `p > 2`.
///
/// The integral is sampled on a geometric grid over `[s_min, s_max]`; the
/// two ends are closed by power-law extrapolation from the outermost
/// samples.
pub fn parabolic_ratio(
    f: &Field,
    p: f64,
    alpha: Alpha,
    s_min: f64,
    s_max: f64,
) -> Result<ParabolicReport> {
    check_exponent("p", p)?;
    alpha.check_grid(f.grid())?;
    if (alpha.sigma() - 1.0).abs() > ADMISSIBLE_TOL {
        return Err(Error::Hypothesis(format!(
            "the parabolic estimate needs n = 2α, got n = {}, α = {}",
            alpha.dim(),
            alpha.value()
        )));
    }
    if !(p > 2.0) {
        return Err(Error::Exponent(format!("the parabolic estimate needs p > 2, got {p}")));
    }
    if !(s_min > 0.0 && s_max > s_min) {
        return Err(Error::TimeGrid(format!("need 0 < s_min < s_max, got [{s_min}, {s_max}]")));
    }
    let den = nonzero(crate::norms::lp_norm(&f.to_physical(), 2.0)?, "‖f‖_2")?;
    let s = geometric_times(s_min, s_max, LOG_GRID_RATIO);
    let spec = f.to_spectral();
    let spatial = NormSpec::Lebesgue { p };
    let g = s
        .iter()
        .map(|&t| Ok(t.powf(-2.0 * recip(p)) * spatial.eval(&apply_semigroup(&spec, t, alpha)?)?.powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    let m = s.len() - 1;
    let head = quad::head(s[0], g[0], quad::local_slope(s[0], s[1], g[0], g[1]))
        .ok_or_else(|| Error::Hypothesis("integrand too singular at s = 0".into()))?;
    let tail = quad::tail(s[m], g[m], quad::local_slope(s[m - 1], s[m], g[m - 1], g[m]))
        .ok_or_else(|| {
            Error::Hypothesis(format!("integrand not yet decaying at s_max = {s_max}; enlarge s_max"))
        })?;
    let body = quad::power_law_body(&s, &g);
    let total = head + body + tail;
    Ok(ParabolicReport {
        ratio: total.sqrt() / den,
        head,
        body,
        tail,
        tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
        samples: s.len(),
    })
}

/// `∫_0^T s^{-nr/(2pα)} ‖e^{-sΛ}f‖_p^r ds / (T^{1-n/2α} ‖f‖_r^r)` for
/// `n < 2α`, `1 <= r <= p`.
pub fn parabolic_ratio_a(f: &Field, r: f64, p: f64, alpha: Alpha, t_end: f64) -> Result<f64> {
    check_exponent("r", r)?;
    check_exponent("p", p)?;
    alpha.check_grid(f.grid())?;
    if r > p || r.is_infinite() {
        return Err(Error::Exponent(format!("need 1 <= r <= p, r finite; got r = {r}, p = {p}")));
    }
    if !(alpha.sigma() < 1.0) {
        return Err(Error::Hypothesis(format!(
            "the T-weighted form needs n < 2α, got n = {}, α = {}",
            alpha.dim(),
            alpha.value()
        )));
    }
    if !(t_end > 0.0) {
        return Err(Error::NegativeTime(t_end));
    }
    let phys = f.to_physical();
    let den = nonzero(
        t_end.powf(1.0 - alpha.sigma()) * crate::norms::lp_norm(&phys, r)?.powf(r),
        "T-weighted ‖f‖_r^r",
    )?;
    let weight = alpha.sigma() * r * recip(p);
    let s = geometric_times(t_end * 1e-8, t_end, LOG_GRID_RATIO);
    let spec = f.to_spectral();
    let spatial = NormSpec::Lebesgue { p };
    let g = s
        .iter()
        .map(|&t| Ok(t.powf(-weight) * spatial.eval(&apply_semigroup(&spec, t, alpha)?)?.powf(r)))
        .collect::<Result<Vec<f64>>>()?;
    let head = quad::head(s[0], g[0], quad::local_slope(s[0], s[1], g[0], g[1]))
        .ok_or_else(|| Error::Hypothesis("integrand too singular at s = 0".into()))?;
    Ok((head + quad::power_law_body(&s, &g)) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{synthesize_field, uniform_times, GridSpec, Recipe};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn admissible_examples() {
        for (n, a) in [(2usize, 0.5), (3, 1.0), (3, 0.75)] {
            let al = Alpha::new(a, n).unwrap();
            let p = 2.0 * n as f64 / (n as f64 - 2.0 * a);
            let t = Triplet::strichartz(2.0, p, al);
            assert!(check_admissible(&t).unwrap().abs() < 1e-12);
        }
        let al = Alpha::new(1.0, 1).unwrap();
        let t = Triplet::strichartz(4.0, f64::INFINITY, al);
        assert!(check_admissible(&t).unwrap().abs() < 1e-12);
        let t = Triplet::new(f64::INFINITY, 2.0, 2.0, 1.3);
        assert_eq!(check_admissible(&t).unwrap(), 0.0);
        assert!(check_admissible(&Triplet::new(2.0, 2.0, 3.0, 1.0)).is_err());
        // (2, 4) is not admissible for σ = 1.
        assert!(!is_admissible(&Triplet::new(2.0, 4.0, 2.0, 1.0)));
    }

    #[test]
    fn scaling_relation_examples() {
        assert!(check_scaling_relation(2.0, 4.0, 2.0, 4.0, 1.0, 4).abs() < 1e-15);
        let inf = f64::INFINITY;
        let r = check_scaling_relation(2.0, inf, 2.0, inf, 1.0, 1);
        assert!((r + 0.5).abs() < 1e-15);
        // In two dimensions the same pairs happen to balance.
        assert!(check_scaling_relation(2.0, inf, 2.0, inf, 1.0, 2).abs() < 1e-15);
        // Two admissible pairs with r = 2 always satisfy the relation.
        for (n, a) in [(1usize, 1.0), (2, 1.0), (3, 0.8)] {
            let sigma = n as f64 / (2.0 * a);
            let pair = |p: f64| (1.0 / (sigma * (0.5 - 1.0 / p)), p);
            for p in [2.5, 3.0, 5.0] {
                for p1 in [2.2, 4.0, 7.0] {
                    let (q, p) = pair(p);
                    let (q1, p1) = pair(p1);
                    if q < 2.0 || q1 < 2.0 {
                        continue;
                    }
                    assert!(check_scaling_relation(q, p, q1, p1, a, n).abs() < 1e-12);
                }
            }
        }
    }

    fn torus(dim: usize, n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::new(dim, n, 2.0 * PI).unwrap())
    }

    #[test]
    fn homogeneous_plane_wave_closed_form() {
        let g = torus(2, 16);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![2, 1] }).unwrap();
        let al = Alpha::new(0.75, 2).unwrap();
        let (q, p, t_end) = (4.0, 4.0, 0.8);
        let times = uniform_times(t_end, 4000);
        let v = homogeneous_ratio(&f, q, p, al, &times, &EstimateNorm::Lebesgue).unwrap();
        let mu = 5f64.powf(0.75);
        let l = 2.0 * PI;
        let exact =
            l.powf(2.0 / p) * ((1.0 - (-q * t_end * mu).exp()) / (q * mu)).powf(1.0 / q) / l;
        assert!(((v - exact) / exact).abs() < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn homogeneous_errors() {
        let g = torus(2, 16);
        let al = Alpha::new(1.0, 2).unwrap();
        let z = Field::zeros(g.clone(), crate::grid::Representation::Physical);
        let times = uniform_times(1.0, 4);
        assert!(matches!(
            homogeneous_ratio(&z, 4.0, 4.0, al, &times, &EstimateNorm::Lebesgue),
            Err(Error::ZeroDenominator(_))
        ));
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![1, 0] }).unwrap();
        assert!(matches!(
            homogeneous_ratio(&f, 2.0, f64::INFINITY, al, &times, &EstimateNorm::Lebesgue),
            Err(Error::Exponent(_))
        ));
        let al3 = Alpha::new(0.8, 2).unwrap();
        assert!(matches!(
            homogeneous_ratio(&f, 2.0, 4.0, al3, &times, &EstimateNorm::Bmo),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn inhomogeneous_single_mode() {
        let g = torus(2, 16);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![1, 1] }).unwrap();
        let al = Alpha::new(1.0, 2).unwrap();
        let t_end = 1.2;
        let times = uniform_times(t_end, 3000);
        let forcing = TimeSeries::new(times.clone(), vec![f.clone(); times.len()]).unwrap();
        let (q, p) = (4.0, 4.0);
        let v = inhomogeneous_ratio(&forcing, (q, p), (q, p), al, &EstimateNorm::Lebesgue, true)
            .unwrap();
        // u(t) = (1 - e^{-2t})/2 · f, |f| = 1 pointwise.
        let mu = 2.0;
        let area = 4.0 * PI * PI;
        let integrand = |t: f64| ((1.0 - (-mu * t).exp()) / mu).powf(q);
        let m = 200_000;
        let h = t_end / m as f64;
        let simpson: f64 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * integrand(i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        let lhs = area.powf(1.0 / p) * simpson.powf(1.0 / q);
        let q1c = conjugate(q);
        let rhs = area.powf(1.0 / conjugate(p)) * t_end.powf(1.0 / q1c);
        let exact = lhs / rhs;
        assert!(((v - exact) / exact).abs() < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn inhomogeneous_windows() {
        let g = torus(2, 16);
        let al = Alpha::new(1.0, 2).unwrap();
        let z = Field::zeros(g, crate::grid::Representation::Physical);
        let times = uniform_times(1.0, 4);
        let forcing = TimeSeries::new(times, vec![z; 5]).unwrap();
        let lebesgue = EstimateNorm::Lebesgue;
        assert!(matches!(
            inhomogeneous_ratio(&forcing, (4.0, 4.0), (4.0, 4.0), al, &lebesgue, true),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(matches!(
            inhomogeneous_ratio(&forcing, (4.0, 4.0), (1.2, 4.0), al, &lebesgue, false),
            Err(Error::Exponent(_))
        ));
        assert!(matches!(
            inhomogeneous_ratio(&forcing, (4.0, 4.0), (4.0, 6.0), al, &lebesgue, true),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn parabolic_errors_and_a_form() {
        let g = Arc::new(GridSpec::new(2, 32, 20.0).unwrap());
        let f = synthesize_field(&g, &Recipe::GaussianBump { center: None, width: 1.0 }).unwrap();
        let al = Alpha::new(1.0, 2).unwrap();
        assert!(matches!(parabolic_ratio(&f, 2.0, al, 1e-3, 10.0), Err(Error::Exponent(_))));
        let al2 = Alpha::new(0.75, 2).unwrap();
        assert!(matches!(parabolic_ratio(&f, 4.0, al2, 1e-3, 10.0), Err(Error::Hypothesis(_))));

        let g1 = Arc::new(GridSpec::new(1, 256, 40.0).unwrap());
        let f1 = synthesize_field(&g1, &Recipe::GaussianBump { center: None, width: 1.0 }).unwrap();
        let a1 = Alpha::new(1.0, 1).unwrap();
        for t_end in [0.1, 1.0, 4.0] {
            let v = parabolic_ratio_a(&f1, 2.0, 2.0, a1, t_end).unwrap();
            assert!(v > 0.0 && v <= 2.0 + 1e-9, "{v}");
        }
        assert!(parabolic_ratio_a(&f, 2.0, 2.0, al, 1.0).is_err());
    }

    #[test]
    fn leak_of_smooth_and_rough_fields() {
        let g = Arc::new(GridSpec::new(1, 64, 64.0).unwrap());
        let smooth = synthesize_field(&g, &Recipe::GaussianBump { center: None, width: 4.0 }).unwrap();
        assert!(nyquist_leak(&smooth) < 1e-20);
        assert!(require_band_limited(&smooth).is_ok());
        let rough = synthesize_field(&g, &Recipe::PlaneWave { k: vec![30] }).unwrap();
        assert!(matches!(require_band_limited(&rough), Err(Error::Aliasing { .. })));
    }
}
