use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    homogeneous_ratio, inhomogeneous_ratio, nyquist_leak, parabolic_ratio, sobolev_source_ratio,
    EstimateNorm, NYQUIST_LEAK_LIMIT,
};
use crate::error::{Error, Result};
use crate::grid::{
    contamination, synthesize_field, uniform_times, Field, GridSpec, Recipe, TimeSeries,
    CONTAMINATION_LIMIT,
};
use crate::norms::{besov_norm, exponent_serde, lp_norm, DyadicPartition};
use crate::semigroup::Alpha;

/// `φ(τ) = 1 + a sin(2π k τ / T + θ)` on a reference window `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    pub amplitude: f64,
    pub cycles: u32,
    pub phase: f64,
}

impl TimeProfile {
    pub fn constant() -> Self {
        TimeProfile {
            amplitude: 0.0,
            cycles: 0,
            phase: 0.0,
        }
    }

    /// Amplitude in `[0.2, 0.6)`, one or two cycles, uniform phase.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0x5EED);
        TimeProfile {
            amplitude: rng.random_range(0.2..0.6),
            cycles: rng.random_range(1..=2),
            phase: rng.random_range(0.0..2.0 * PI),
        }
    }

    pub fn eval(&self, tau: f64, period: f64) -> f64 {
        1.0 + self.amplitude * (2.0 * PI * self.cycles as f64 * tau / period + self.phase).sin()
    }
}

/// Separable forcing `F(t, x) = φ(t) f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub spatial: Recipe,
    pub profile: TimeProfile,
}

impl Forcing {
    /// Reseeds both the spatial recipe and the time profile.
    pub fn seeded(spatial: &Recipe, seed: u64) -> Self {
        Forcing {
            spatial: spatial.with_seed(seed),
            profile: TimeProfile::seeded(seed),
        }
    }

    /// `F_λ(t, x) = φ(λ^{2α} t) f_λ(x)` on `steps` uniform intervals of
    /// `[0, λ^{-2α} T]`. Also returns the spatial factor `f_λ`.
    pub fn series(
        &self,
        grid: &Arc<GridSpec>,
        lambda: f64,
        alpha: Alpha,
        t_end: f64,
        steps: usize,
    ) -> Result<(TimeSeries, Field)> {
        let f = synthesize_field(grid, &self.spatial.dilate(lambda, grid)?)?;
        let scale = lambda.powf(2.0 * alpha.value());
        let times = uniform_times(t_end / scale, steps);
        let series =
            TimeSeries::from_fn(times, |t| f.scale(self.profile.eval(t * scale, t_end)))?;
        Ok((series, f))
    }
}

/// One estimate evaluated along the dilation family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimate", rename_all = "snake_case")]
pub enum SweepCase {
    Homogeneous {
        grid: GridSpec,
        data: Recipe,
        alpha: f64,
        #[serde(with = "exponent_serde")]
        q: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
        t_end: f64,
        steps: usize,
        norm: EstimateNorm,
    },
    Inhomogeneous {
        grid: GridSpec,
        forcing: Forcing,
        alpha: f64,
        #[serde(with = "exponent_serde")]
        q: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
        #[serde(with = "exponent_serde")]
        q1: f64,
        #[serde(with = "exponent_serde")]
        p1: f64,
        t_end: f64,
        steps: usize,
        norm: EstimateNorm,
    },
    SobolevSource {
        grid: GridSpec,
        forcing: Forcing,
        alpha: f64,
        q: f64,
        p: f64,
        t_end: f64,
        steps: usize,
        homogeneous: bool,
    },
    Parabolic {
        grid: GridSpec,
        data: Recipe,
        alpha: f64,
        #[serde(with = "exponent_serde")]
        p: f64,
        s_min: f64,
        s_max: f64,
    },
    /// `‖f‖_{Ḃ^s_{p,2}} / ‖f‖_2` with `s = n/p - n/2`.
    BesovEmbedding {
        grid: GridSpec,
        data: Recipe,
        #[serde(with = "exponent_serde")]
        p: f64,
    },
}

/// Ratio at one λ plus its diagnostics.
struct Sample {
    ratio: f64,
    contamination: f64,
    leak: f64,
    tail_fraction: Option<f64>,
}

fn check_input(f: &Field) -> Result<(f64, f64)> {
    let c = contamination(f);
    if c > CONTAMINATION_LIMIT {
        return Err(Error::Contamination {
            fraction: c,
            limit: CONTAMINATION_LIMIT,
        });
    }
    let leak = nyquist_leak(f);
    if leak > NYQUIST_LEAK_LIMIT {
        return Err(Error::Aliasing {
            leak,
            limit: NYQUIST_LEAK_LIMIT,
        });
    }
    Ok((c, leak))
}

impl SweepCase {
    pub fn estimate_id(&self) -> &'static str {
        match self {
            SweepCase::Homogeneous { .. } => "homogeneous",
            SweepCase::Inhomogeneous { .. } => "inhomogeneous",
            SweepCase::SobolevSource { .. } => "sobolev_source",
            SweepCase::Parabolic { .. } => "parabolic",
            SweepCase::BesovEmbedding { .. } => "besov_embedding",
        }
    }

    pub fn grid(&self) -> &GridSpec {
        match self {
            SweepCase::Homogeneous { grid, .. }
            | SweepCase::Inhomogeneous { grid, .. }
            | SweepCase::SobolevSource { grid, .. }
            | SweepCase::Parabolic { grid, .. }
            | SweepCase::BesovEmbedding { grid, .. } => grid,
        }
    }

    /// The estimate's ratio for dilation factor `lambda`.
    pub fn ratio(&self, lambda: f64) -> Result<f64> {
        let grid = Arc::new(self.grid().clone());
        self.sample(&grid, lambda).map(|s| s.ratio)
    }

    fn sample(&self, grid: &Arc<GridSpec>, lambda: f64) -> Result<Sample> {
        match self {
            SweepCase::Homogeneous {
                data,
                alpha,
                q,
                p,
                t_end,
                steps,
                norm,
                ..
            } => {
                let al = Alpha::for_grid(*alpha, grid)?;
                let f = synthesize_field(grid, &data.dilate(lambda, grid)?)?;
                let (c, leak) = check_input(&f)?;
                let times = uniform_times(t_end * lambda.powf(-2.0 * alpha), *steps);
                Ok(Sample {
                    ratio: homogeneous_ratio(&f, *q, *p, al, &times, norm)?,
                    contamination: c,
                    leak,
                    tail_fraction: None,
                })
            }
            SweepCase::Inhomogeneous {
                forcing,
                alpha,
                q,
                p,
                q1,
                p1,
                t_end,
                steps,
                norm,
                ..
            } => {
                let al = Alpha::for_grid(*alpha, grid)?;
                let (series, f) = forcing.series(grid, lambda, al, *t_end, *steps)?;
                let (c, leak) = check_input(&f)?;
                Ok(Sample {
                    ratio: inhomogeneous_ratio(&series, (*q, *p), (*q1, *p1), al, norm, true)?,
                    contamination: c,
                    leak,
                    tail_fraction: None,
                })
            }
            SweepCase::SobolevSource {
                forcing,
                alpha,
                q,
                p,
                t_end,
                steps,
                homogeneous,
                ..
            } => {
                let al = Alpha::for_grid(*alpha, grid)?;
                let (series, f) = forcing.series(grid, lambda, al, *t_end, *steps)?;
                let (c, leak) = check_input(&f)?;
                Ok(Sample {
                    ratio: sobolev_source_ratio(&series, *q, *p, al, *homogeneous)?,
                    contamination: c,
                    leak,
                    tail_fraction: None,
                })
            }
            SweepCase::Parabolic {
                data,
                alpha,
                p,
                s_min,
                s_max,
                ..
            } => {
                let al = Alpha::for_grid(*alpha, grid)?;
                let f = synthesize_field(grid, &data.dilate(lambda, grid)?)?;
                let (c, leak) = check_input(&f)?;
                let scale = lambda.powf(-2.0 * alpha);
                let rep = parabolic_ratio(&f, *p, al, s_min * scale, s_max * scale)?;
                Ok(Sample {
                    ratio: rep.ratio,
                    contamination: c,
                    leak,
                    tail_fraction: Some(rep.tail_fraction),
                })
            }
            SweepCase::BesovEmbedding { data, p, .. } => {
                if !(*p > 2.0) {
                    return Err(Error::Exponent(format!("the embedding needs p > 2, got {p}")));
                }
                let f = synthesize_field(grid, &data.dilate(lambda, grid)?)?;
                let (c, leak) = check_input(&f)?;
                let n = grid.dim() as f64;
                let s = n * crate::norms::recip(*p) - n / 2.0;
                let partition = DyadicPartition::for_grid(grid)?;
                let num = besov_norm(&f, s, *p, 2.0, true, &partition)?;
                let den = lp_norm(&f, 2.0)?;
                if den == 0.0 {
                    return Err(Error::ZeroDenominator("‖f‖_2".into()));
                }
                Ok(Sample {
                    ratio: num / den,
                    contamination: c,
                    leak,
                    tail_fraction: None,
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `max_drift` below the tolerance.
    Invariant,
    Drifting,
}

/// Ratios of one estimate along a dilation family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub estimate_id: String,
    pub params: serde_json::Value,
    pub lambdas: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max |ratio(λ)/ratio(λ_0) - 1|`, `λ_0` the first factor.
    pub max_drift: f64,
    /// Input contamination per λ.
    pub contamination: Vec<f64>,
    pub nyquist_leak: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_fraction: Option<Vec<f64>>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// `max |r_i / r_0 - 1|`.
pub fn max_drift(ratios: &[f64]) -> f64 {
    match ratios.first() {
        Some(&r0) => ratios.iter().map(|r| (r / r0 - 1.0).abs()).fold(0.0, f64::max),
        None => 0.0,
    }
}

impl RatioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// One row per λ.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimate_id,lambda,ratio,drift,contamination,nyquist_leak\n");
        let r0 = self.ratios.first().copied().unwrap_or(1.0);
        for i in 0..self.lambdas.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.estimate_id,
                self.lambdas[i],
                self.ratios[i],
                self.ratios[i] / r0 - 1.0,
                self.contamination[i],
                self.nyquist_leak[i]
            );
        }
        out
    }

    /// Ratios strictly monotone along the λ order.
    pub fn is_monotone(&self) -> bool {
        let w: Vec<bool> = self.ratios.windows(2).map(|w| w[1] > w[0]).collect();
        self.ratios.windows(2).all(|w| w[1] != w[0])
            && (w.iter().all(|&b| b) || w.iter().all(|&b| !b))
    }
}

/// Evaluates `case` at every factor in `lambdas` (in parallel; the report
/// order follows `lambdas`) and compares against the first.
pub fn dilation_sweep(case: &SweepCase, lambdas: &[f64], tolerance: f64) -> Result<RatioReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidRecipe("no dilation factors".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidRecipe(format!("dilation factor {l} must be positive")));
    }
    let grid = Arc::new(case.grid().clone());
    let samples = lambdas
        .par_iter()
        .map(|&l| case.sample(&grid, l))
        .collect::<Result<Vec<Sample>>>()?;
    let ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::NonFinite(format!("ratio not finite: {ratios:?}")));
    }
    let drift = max_drift(&ratios);
    let tail_fraction = samples
        .iter()
        .map(|s| s.tail_fraction)
        .collect::<Option<Vec<f64>>>();
    Ok(RatioReport {
        estimate_id: case.estimate_id().to_string(),
        params: serde_json::to_value(case).expect("case is serializable"),
        lambdas: lambdas.to_vec(),
        max_drift: drift,
        contamination: samples.iter().map(|s| s.contamination).collect(),
        nyquist_leak: samples.iter().map(|s| s.leak).collect(),
        tail_fraction,
        ratios,
        tolerance,
        verdict: if drift < tolerance {
            Verdict::Invariant
        } else {
            Verdict::Drifting
        },
    })
}
