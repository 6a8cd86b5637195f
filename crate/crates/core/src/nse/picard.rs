use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    bilinear_b, leray_project, max_divergence, series_sub, vector_duhamel, vector_mixed_norm,
    VectorField,
};
use crate::error::{Error, Result};
use crate::grid::{synthesize_field, uniform_times, GridSpec, Recipe, Representation, TimeSeries};
use crate::norms::{exponent_serde, recip};
use crate::semigroup::{apply_semigroup, Alpha};

/// Tolerance on `2α - 1 = 2α/q + n/p`.
const RELATION_TOL: f64 = 1e-9;
/// Largest `|∇·g|` accepted as divergence-free.
const DIVERGENCE_TOL: f64 = 1e-10;

/// Settings for [`solve_nse_picard`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardParams {
    pub alpha: f64,
    pub t_end: f64,
    /// Uniform time steps on `[0, t_end]`.
    pub steps: usize,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    #[serde(with = "exponent_serde")]
    pub p: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Random solenoidal fields used to measure the bilinear constant.
    pub ensemble: usize,
}

impl Default for PicardParams {
    fn default() -> Self {
        PicardParams {
            alpha: 1.0,
            t_end: 1.0,
            steps: 128,
            q: 4.0,
            p: 4.0,
            tol: 1e-10,
            max_iter: 30,
            ensemble: 4,
        }
    }
}

/// Outcome of a Picard solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    /// `‖v^{m+1} - v^m‖_X / ‖v^{m+1}‖_X` per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `‖v‖_{L^q_t L^p_x}` of the returned solution.
    pub final_norm: f64,
    /// Ball radius `R = 2a`.
    pub radius: f64,
    /// `a = ‖T(0)‖_X`.
    pub a: f64,
    /// Measured bilinear constant.
    pub c_est: f64,
    /// Lipschitz bound `2 C_est R` of `T` on the ball.
    pub contraction_bound: f64,
    /// Largest `|∇·v|` over all stored times.
    pub max_divergence: f64,
}

/// Checks `α ∈ (1/2, 1/2 + n/4]`, `p > n/(2α-1)` and `2α-1 = 2α/q + n/p`.
pub fn check_nse_exponents(alpha: f64, n: usize, q: f64, p: f64) -> Result<()> {
    let upper = 0.5 + n as f64 / 4.0;
    if !(alpha > 0.5 && alpha <= upper) {
        return Err(Error::Hypothesis(format!(
            "α = {alpha} outside (1/2, 1/2 + n/4] = (0.5, {upper}] for n = {n}"
        )));
    }
    let nf = n as f64;
    if !(p > nf / (2.0 * alpha - 1.0)) {
        return Err(Error::Exponent(format!(
            "need p > n/(2α-1) = {}, got p = {p}",
            nf / (2.0 * alpha - 1.0)
        )));
    }
    let res = 2.0 * alpha - 1.0 - 2.0 * alpha * recip(q) - nf * recip(p);
    if res.abs() > RELATION_TOL {
        return Err(Error::Exponent(format!(
            "need 2α - 1 = 2α/q + n/p; residual {res:.3e} for q = {q}, p = {p}"
        )));
    }
    Ok(())
}

/// Leray projection of a seeded random field with modes in
/// `[dξ, 8dξ]`, unit RMS per component before projection.
pub fn random_solenoidal(grid: &Arc<GridSpec>, seed: u64) -> Result<VectorField> {
    let j_min = grid.dxi().log2().floor() as i32;
    let comps = (0..grid.dim())
        .map(|j| {
            let recipe = Recipe::RandomBandlimited {
                seed: seed.wrapping_mul(31).wrapping_add(j as u64),
                j_min,
                j_max: j_min + 2,
            };
            synthesize_field(grid, &recipe)
        })
        .collect::<Result<_>>()?;
    Ok(leray_project(&VectorField::new(comps)?))
}

/// Largest `‖B(u,v)‖_X / (‖u‖_X ‖v‖_X)` over the pairs.
pub fn bilinear_constant(
    pairs: &[(&TimeSeries<VectorField>, &TimeSeries<VectorField>)],
    alpha: Alpha,
    q: f64,
    p: f64,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for (u, v) in pairs {
        let den = vector_mixed_norm(u, q, p)? * vector_mixed_norm(v, q, p)?;
        if den == 0.0 {
            continue;
        }
        let b = bilinear_b(u, v, alpha, u.times())?;
        best = best.max(vector_mixed_norm(&b, q, p)? / den);
    }
    Ok(best)
}

fn free_evolution(g: &VectorField, times: &[f64], alpha: Alpha) -> Result<TimeSeries<VectorField>> {
    let spec = g.to_spectral();
    let snaps = times
        .par_iter()
        .map(|&t| {
            let comps = spec
                .components()
                .iter()
                .map(|c| apply_semigroup(c, t, alpha))
                .collect::<Result<_>>()?;
            VectorField::new(comps)
        })
        .collect::<Result<_>>()?;
    TimeSeries::new(times.to_vec(), snaps)
}

/// Solves `v = e^{-tΛ}g + ∫_0^t e^{-(t-s)Λ} P h ds - B(v, v)` on a uniform
/// time grid by Picard iteration from `v⁰ = T(0)`. The forcing `h`, when
/// given, must start at 0 and cover `[0, t_end]`.
///
/// The smallness gate `2 C_est a < 1` is checked before iterating, with
/// `C_est` measured by [`bilinear_constant`] on `v⁰` and on the free
/// evolutions of `params.ensemble` random solenoidal fields.
pub fn solve_nse_picard(
    g: &VectorField,
    h: Option<&TimeSeries<VectorField>>,
    params: &PicardParams,
) -> Result<(TimeSeries<VectorField>, PicardReport)> {
    let grid = g.grid_arc().clone();
    let n = grid.dim();
    let alpha = Alpha::new(params.alpha, n)?;
    check_nse_exponents(params.alpha, n, params.q, params.p)?;
    if !(params.t_end > 0.0) || params.steps == 0 {
        return Err(Error::TimeGrid("need t_end > 0 and at least one step".into()));
    }
    if !(params.tol > 0.0) {
        return Err(Error::Hypothesis(format!("tolerance {} must be positive", params.tol)));
    }
    let div = max_divergence(g);
    if div > DIVERGENCE_TOL {
        return Err(Error::Hypothesis(format!(
            "initial velocity is not divergence-free: max |∇·g| = {div:.3e}"
        )));
    }
    let (q, p) = (params.q, params.p);
    let times = uniform_times(params.t_end, params.steps);

    let mut v0 = free_evolution(g, &times, alpha)?;
    if let Some(h) = h {
        if !h.snapshots()[0].grid().same_as(&grid) {
            return Err(Error::GridMismatch);
        }
        let ph = h.try_map(|f| Ok(leray_project(&f.to_spectral())))?;
        let forced = vector_duhamel(&ph, &times, alpha)?;
        let snaps = v0
            .snapshots()
            .iter()
            .zip(forced.snapshots())
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        v0 = TimeSeries::new(times.clone(), snaps)?;
    }
    let a = vector_mixed_norm(&v0, q, p)?;

    let ensemble = (0..params.ensemble as u64)
        .into_par_iter()
        .map(|seed| free_evolution(&random_solenoidal(&grid, seed)?, &times, alpha))
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = vec![(&v0, &v0)];
    for u in &ensemble {
        pairs.push((u, u));
        pairs.push((u, &v0));
    }
    let c_est = bilinear_constant(&pairs, alpha, q, p)?;
    if !(2.0 * c_est * a < 1.0) {
        return Err(Error::Hypothesis(format!(
            "data too large for the contraction: 2·C_est·a = {:.3e} >= 1 (a = {a:.3e}, C_est = {c_est:.3e})",
            2.0 * c_est * a
        )));
    }

    let mut v = v0.clone();
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..params.max_iter {
        let b = bilinear_b(&v, &v, alpha, &times)?;
        let next = series_sub(&v0, &b)?;
        if !next.snapshots().iter().all(VectorField::is_finite) {
            return Err(Error::NonFinite("Picard iterate".into()));
        }
        let diff = vector_mixed_norm(&series_sub(&next, &v)?, q, p)?;
        let size = vector_mixed_norm(&next, q, p)?;
        let res = if diff == 0.0 { 0.0 } else { diff / size };
        residuals.push(res);
        v = next;
        if res < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: residuals.len(),
            residual: *residuals.last().unwrap_or(&f64::NAN),
        });
    }
    let final_norm = vector_mixed_norm(&v, q, p)?;
    let max_div = v
        .snapshots()
        .par_iter()
        .map(max_divergence)
        .reduce(|| 0.0, f64::max);
    let radius = 2.0 * a;
    let report = PicardReport {
        iterations: residuals.len(),
        residuals,
        converged,
        final_norm,
        radius,
        a,
        c_est,
        contraction_bound: 2.0 * c_est * radius,
        max_divergence: max_div,
    };
    let v = v.map(|f| f.clone().into_repr(Representation::Physical));
    Ok((v, report))
}
