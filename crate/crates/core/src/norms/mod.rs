//! Lebesgue, mixed space-time, Sobolev, Besov and BMO norms on the grid.
//!
//! Exponents are plain `f64`; `f64::INFINITY` stands for ∞.

mod besov;
mod bmo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Representation, TimeSeries};
use crate::semigroup::{fractional_derivative, DerivativeKind};

pub use besov::{besov_norm, eta, lp_block, low_block, DyadicPartition};
pub use bmo::{bmo_norm, bmo_norm_refined};

/// Serde helper writing ∞ as the string `"inf"` (JSON has no infinity).
pub mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse_exponent(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses an exponent; `inf`, `infinity` and `∞` give `f64::INFINITY`.
pub fn parse_exponent(text: &str) -> Result<f64> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::Exponent(format!("cannot parse exponent {t:?}"))),
    }
}

/// Formats an exponent so that [`parse_exponent`] reads it back.
pub fn format_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

/// Hölder conjugate `p' = p / (p - 1)`, with `1' = ∞` and `∞' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `1/p`, zero for `p = ∞`.
pub fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

pub(crate) fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Exponent(format!("{name} = {p} must lie in [1, ∞]")));
    }
    Ok(())
}

fn require_physical(f: &Field) -> Result<()> {
    if f.representation() != Representation::Physical {
        return Err(Error::Representation {
            expected: "physical",
            found: f.representation().name(),
        });
    }
    Ok(())
}

/// `(∫ |f|^p dx)^{1/p}` as a Riemann sum; `p = ∞` gives the sample maximum.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    require_physical(f)?;
    Ok(lp_of_samples(f, p))
}

fn lp_of_samples(f: &Field, p: f64) -> f64 {
    let max = f.max_abs();
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    // Scale by the maximum so large p cannot overflow.
    let sum: f64 = f.data().iter().map(|c| (c.norm() / max).powf(p)).sum();
    max * (sum * f.grid().cell_volume()).powf(1.0 / p)
}

/// Composite trapezoid of `values^q` over `times`, raised to `1/q`;
/// `q = ∞` gives the maximum.
pub fn time_norm(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    check_exponent("q", q)?;
    if times.len() != values.len() {
        return Err(Error::TimeGrid("times and values differ in length".into()));
    }
    if times.len() < 2 {
        return Err(Error::TimeGrid("mixed norm needs at least two samples".into()));
    }
    if q.is_infinite() {
        return Ok(values.iter().cloned().fold(0.0, f64::max));
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * ((v[0] / max).powf(q) + (v[1] / max).powf(q)))
        .sum();
    Ok(max * integral.powf(1.0 / q))
}

/// `‖u‖_{L^q_t L^p_x}` over the series' time grid.
pub fn mixed_norm(u: &TimeSeries, q: f64, p: f64) -> Result<f64> {
    mixed_norm_with(u, q, &NormSpec::Lebesgue { p })
}

/// `‖ ‖u(t)‖_X ‖_{L^q_t}` for any spatial norm `X`.
pub fn mixed_norm_with(u: &TimeSeries, q: f64, spatial: &NormSpec) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::TimeGrid("empty series".into()));
    }
    let values = u
        .snapshots()
        .iter()
        .map(|f| spatial.eval(f))
        .collect::<Result<Vec<f64>>>()?;
    time_norm(u.times(), &values, q)
}

/// `‖(-Δ)^{s/2} f‖_p` or `‖(I - Δ)^{s/2} f‖_p`.
pub fn sobolev_norm(f: &Field, s: f64, p: f64, homogeneous: bool) -> Result<f64> {
    let kind = if homogeneous {
        DerivativeKind::Homogeneous
    } else {
        DerivativeKind::Inhomogeneous
    };
    let d = fractional_derivative(f, s, kind)?;
    lp_norm(&d.into_physical(), p)
}

/// A spatial norm selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormSpec {
    Lebesgue {
        #[serde(with = "exponent_serde")]
        p: f64,
    },
    Sobolev {
        s: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
        homogeneous: bool,
    },
    Besov {
        s: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
        #[serde(with = "exponent_serde")]
        q: f64,
        homogeneous: bool,
    },
    /// Dyadic-cube BMO; `refine > 1` evaluates on a finer interpolant.
    Bmo {
        #[serde(default = "one")]
        refine: usize,
    },
}

fn one() -> usize {
    1
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NormSpec::Lebesgue { p } | NormSpec::Sobolev { p, .. } => check_exponent("p", *p),
            NormSpec::Besov { p, q, .. } => {
                check_exponent("p", *p)?;
                check_exponent("q", *q)
            }
            NormSpec::Bmo { refine } => {
                if *refine == 0 || !refine.is_power_of_two() {
                    return Err(Error::InvalidGrid(format!("refinement {refine} must be a power of two")));
                }
                Ok(())
            }
        }
    }

    /// Evaluates the norm; the Besov partition is the grid's full window.
    pub fn eval(&self, f: &Field) -> Result<f64> {
        let phys;
        let f = if f.representation() == Representation::Physical {
            f
        } else {
            phys = f.to_physical();
            &phys
        };
        match *self {
            NormSpec::Lebesgue { p } => lp_norm(f, p),
            NormSpec::Sobolev { s, p, homogeneous } => sobolev_norm(f, s, p, homogeneous),
            NormSpec::Besov {
                s,
                p,
                q,
                homogeneous,
            } => {
                let partition = DyadicPartition::for_grid(f.grid())?;
                besov_norm(f, s, p, q, homogeneous, &partition)
            }
            NormSpec::Bmo { refine } => bmo_norm_refined(f, refine),
        }
    }

    /// Whether the norm only makes sense for zero-mean data.
    pub fn needs_zero_mean(&self) -> bool {
        match *self {
            NormSpec::Sobolev { s, homogeneous, .. } => homogeneous && s < 0.0,
            NormSpec::Besov { homogeneous, .. } => homogeneous,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{synthesize_field, uniform_times, GridSpec, Recipe};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(dim: usize, n: usize, l: f64) -> Arc<GridSpec> {
        Arc::new(GridSpec::new(dim, n, l).unwrap())
    }

    #[test]
    fn constant_and_plane_wave() {
        let g = grid(2, 16, 3.0);
        let c = Field::from_real_fn(g.clone(), |_| -2.5);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            let expected = 2.5 * 9f64.powf(recip(p));
            assert!((lp_norm(&c, p).unwrap() - expected).abs() < 1e-12 * expected);
        }
        let w = synthesize_field(&g, &Recipe::PlaneWave { k: vec![1, -3] }).unwrap();
        for p in [1.0, 4.0, f64::INFINITY] {
            let expected = 9f64.powf(recip(p));
            assert!((lp_norm(&w, p).unwrap() - expected).abs() < 1e-12 * expected);
        }
        assert!(matches!(lp_norm(&c, 0.5), Err(Error::Exponent(_))));
        assert!(matches!(lp_norm(&c.to_spectral(), 2.0), Err(Error::Representation { .. })));
    }

    #[test]
    fn gaussian_l2() {
        let g = grid(1, 256, 30.0);
        let f = Field::from_real_fn(g, |x| (-(x[0] - 15.0).powi(2) / 2.0).exp());
        let v = lp_norm(&f, 2.0).unwrap();
        assert!((v - PI.powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn mixed_norm_examples() {
        let g = grid(2, 16, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![1, 1] }).unwrap();
        let times = uniform_times(2.0, 10);
        let u = TimeSeries::new(times.clone(), vec![f.clone(); times.len()]).unwrap();
        let p = 3.0;
        let l_np = (2.0 * PI).powf(2.0 / p);
        for q in [1.0, 2.0, 5.0] {
            let v = mixed_norm(&u, q, p).unwrap();
            assert!((v - 2f64.powf(1.0 / q) * l_np).abs() < 1e-12);
        }
        let decaying = TimeSeries::from_fn(times, |t| f.scale((-t).exp())).unwrap();
        let v = mixed_norm(&decaying, f64::INFINITY, p).unwrap();
        assert!((v - l_np).abs() < 1e-12);
        let single = TimeSeries::new(vec![0.0], vec![f]).unwrap();
        assert!(mixed_norm(&single, 2.0, 2.0).is_err());
    }

    #[test]
    fn mixed_norm_decaying_mode() {
        let g = grid(2, 16, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![1, 0] }).unwrap();
        let alpha = 0.75;
        let mu = 1f64.powf(2.0 * alpha);
        let (t_end, q, p) = (1.5, 3.0, 4.0);
        let times = uniform_times(t_end, 4000);
        let u = TimeSeries::from_fn(times, |t| f.scale((-t * mu).exp())).unwrap();
        let exact = (2.0 * PI).powf(2.0 / p)
            * ((1.0 - (-q * t_end * mu).exp()) / (q * mu)).powf(1.0 / q);
        let v = mixed_norm(&u, q, p).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn sobolev_examples() {
        let g = grid(2, 32, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![3, 4] }).unwrap();
        let l_half = 2.0 * PI;
        let v = sobolev_norm(&f, 1.5, 2.0, true).unwrap();
        assert!((v - 5f64.powf(1.5) * l_half).abs() < 1e-10);
        let v = sobolev_norm(&f, -0.5, 3.0, false).unwrap();
        let expected = 26f64.powf(-0.25) * (2.0 * PI).powf(2.0 / 3.0);
        assert!((v - expected).abs() < 1e-12);
        assert_eq!(sobolev_norm(&f, 0.0, 3.0, true).unwrap(), lp_norm(&f, 3.0).unwrap());
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate(1.0), f64::INFINITY);
        assert_eq!(conjugate(f64::INFINITY), 1.0);
        assert_eq!(conjugate(2.0), 2.0);
        assert!((conjugate(4.0) - 4.0 / 3.0).abs() < 1e-15);
    }
}
