use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{check_admissible, Triplet, ADMISSIBLE_TOL};
use crate::grid::{Field, Representation, TimeSeries};
use crate::norms::{conjugate, exponent_serde, lp_norm, mixed_norm, recip, time_norm};
use crate::semigroup::{apply_semigroup, duhamel, Alpha};

const RELATION_TOL: f64 = 1e-9;
/// Largest admissible `∫_J ‖V‖_∞` per subinterval.
const CONTRACTION_TARGET: f64 = 0.5;

/// Settings for [`solve_potential_eq`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub alpha: f64,
    /// `V ∈ L^r_t L^s_x` with `1/r + n/(2αs) = 1`.
    #[serde(with = "exponent_serde")]
    pub r: f64,
    #[serde(with = "exponent_serde")]
    pub s: f64,
    /// Solution norm `L^q_t L^p_x`, `(q, p, 2)` admissible.
    #[serde(with = "exponent_serde")]
    pub q: f64,
    #[serde(with = "exponent_serde")]
    pub p: f64,
    /// Forcing norm `L^{q1'}_t L^{p1'}_x`, `(q1, p1, 2)` admissible.
    #[serde(with = "exponent_serde")]
    pub q1: f64,
    #[serde(with = "exponent_serde")]
    pub p1: f64,
    pub tol: f64,
    pub max_iter: usize,
}

/// One piece of the partition of the time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subinterval {
    pub start: f64,
    pub end: f64,
    /// `Σ dt · max ‖V‖_∞` over the piece; bounds the contraction factor in
    /// `L^∞_t L²_x`.
    pub kappa: f64,
    /// Largest ratio of successive iterate differences.
    pub factor: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub subintervals: Vec<Subinterval>,
    /// `‖V‖_{L^r_t L^s_x}`.
    pub potential_norm: f64,
    /// `‖v‖_{L^q_t L^p_x}`.
    pub solution_norm: f64,
    /// `‖f‖₂ + ‖F‖_{L^{q1'}_t L^{p1'}_x}`.
    pub data_norm: f64,
    /// `solution_norm / data_norm`.
    pub constant: f64,
}

fn check_params(params: &PotentialParams, alpha: Alpha) -> Result<()> {
    let n = alpha.dim() as f64;
    if n < 2.0 * params.alpha {
        return Err(Error::Hypothesis(format!(
            "need n >= 2α, got n = {n}, α = {}",
            params.alpha
        )));
    }
    if !(params.r > 1.0 && params.r.is_finite() && params.r != 2.0) {
        return Err(Error::Exponent(format!("need r ∈ (1,2) ∪ (2,∞), got {}", params.r)));
    }
    let res = recip(params.r) + n / (2.0 * params.alpha) * recip(params.s) - 1.0;
    if res.abs() > RELATION_TOL {
        return Err(Error::Exponent(format!(
            "need 1/r + n/(2αs) = 1; residual {res:.3e} for r = {}, s = {}",
            params.r, params.s
        )));
    }
    for (name, q, p) in [("(q, p, 2)", params.q, params.p), ("(q1, p1, 2)", params.q1, params.p1)] {
        let res = check_admissible(&Triplet::strichartz(q, p, alpha))?;
        if res.abs() > ADMISSIBLE_TOL {
            return Err(Error::Exponent(format!("{name} not admissible (residual {res:.3e})")));
        }
    }
    let (q1c, p1c) = (conjugate(params.q1), conjugate(params.p1));
    if !(1.0 < q1c && q1c < 2.0 && (1.0..2.0).contains(&p1c)) {
        return Err(Error::Exponent(format!(
            "need q1' ∈ (1,2) and p1' ∈ [1,2), got q1' = {q1c}, p1' = {p1c}"
        )));
    }
    if !(params.q >= 2.0 && params.q.is_finite()) {
        return Err(Error::Exponent(format!("need 2 <= q < ∞, got {}", params.q)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::Hypothesis(format!("tolerance {} must be positive", params.tol)));
    }
    Ok(())
}

fn l2(f: &Field) -> f64 {
    // Unitary transform: the spectral sum of squares equals the physical one.
    let sum: f64 = f.data().iter().map(Complex64::norm_sqr).sum();
    (sum * f.grid().cell_volume()).sqrt()
}

/// Greedy partition of sample indices so that each piece has
/// `κ = Σ dt · max(‖V(t_i)‖_∞, ‖V(t_{i+1})‖_∞) <= 1/2`.
fn partition(times: &[f64], sup: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut kappa = 0.0;
    for i in 0..times.len() - 1 {
        let step = (times[i + 1] - times[i]) * sup[i].max(sup[i + 1]);
        if step > CONTRACTION_TARGET {
            return Err(Error::Hypothesis(format!(
                "time grid too coarse for the potential: one step on [{}, {}] has ∫‖V‖_∞ = {step:.3e} > 1/2",
                times[i],
                times[i + 1]
            )));
        }
        if kappa + step > CONTRACTION_TARGET {
            out.push((start, i, kappa));
            start = i;
            kappa = 0.0;
        }
        kappa += step;
    }
    out.push((start, times.len() - 1, kappa));
    Ok(out)
}

/// Solves `v = e^{-tΛ}f + ∫_0^t e^{-(t-s)Λ}(F - V v)(s) ds` on the time
/// grid of `V`. The grid is split into pieces on which the map is a
/// contraction with factor at most 1/2 in `L^∞_t L²_x`, and each piece is
/// solved by fixed-point iteration from the end state of the previous one.
pub fn solve_potential_eq(
    f: &Field,
    forcing: Option<&TimeSeries>,
    potential: &TimeSeries,
    params: &PotentialParams,
) -> Result<(TimeSeries, PotentialReport)> {
    let grid = f.grid_arc().clone();
    let alpha = Alpha::new(params.alpha, grid.dim())?;
    check_params(params, alpha)?;
    let times = potential.times();
    if times[0] != 0.0 || times.len() < 2 {
        return Err(Error::TimeGrid("potential must be sampled from t = 0 on".into()));
    }
    let v_phys: Vec<Field> = potential
        .snapshots()
        .iter()
        .map(|v| {
            if !v.grid().same_as(&grid) {
                return Err(Error::GridMismatch);
            }
            let p = v.to_physical();
            if p.max_imag() > 1e-12 * p.max_abs().max(1.0) {
                return Err(Error::Hypothesis("the potential V must be real".into()));
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;
    let forcing_spec: Option<Vec<Field>> = match forcing {
        Some(ff) => {
            if ff.times() != times {
                return Err(Error::TimeGrid("forcing and potential use different time grids".into()));
            }
            Some(ff.snapshots().iter().map(Field::to_spectral).collect())
        }
        None => None,
    };
    let sup: Vec<f64> = v_phys.iter().map(Field::max_abs).collect();
    let pieces = partition(times, &sup)?;

    let mut solution: Vec<Field> = vec![f.to_spectral()];
    let mut subintervals = Vec::with_capacity(pieces.len());
    for (a, b, kappa) in pieces {
        let t0 = times[a];
        let local: Vec<f64> = times[a..=b].iter().map(|t| t - t0).collect();
        let start = solution[a].clone();
        let mut base = local
            .iter()
            .map(|&t| apply_semigroup(&start, t, alpha))
            .collect::<Result<Vec<_>>>()?;
        if let Some(fs) = &forcing_spec {
            let piece = TimeSeries::new(local.clone(), fs[a..=b].to_vec())?;
            let forced = duhamel(&piece, &local, alpha)?;
            for (x, y) in base.iter_mut().zip(forced.snapshots()) {
                *x = x.add(y)?;
            }
        }
        let mut w = base.clone();
        let mut diffs: Vec<f64> = Vec::new();
        let mut converged = false;
        for _ in 0..params.max_iter {
            let products = w
                .iter()
                .zip(&v_phys[a..=b])
                .map(|(wk, vk)| {
                    let wp = wk.to_physical();
                    let data = wp.data().iter().zip(vk.data()).map(|(x, y)| x * y.re).collect();
                    Ok(Field::from_data(grid.clone(), Representation::Physical, data)?.into_spectral())
                })
                .collect::<Result<Vec<_>>>()?;
            let d = duhamel(&TimeSeries::new(local.clone(), products)?, &local, alpha)?;
            let next = base
                .iter()
                .zip(d.snapshots())
                .map(|(x, y)| x.sub(y))
                .collect::<Result<Vec<_>>>()?;
            if !next.iter().all(Field::is_finite) {
                return Err(Error::NonFinite("potential iterate".into()));
            }
            let diff = next
                .iter()
                .zip(&w)
                .map(|(x, y)| x.sub(y).map(|e| l2(&e)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let size = next.iter().map(l2).fold(0.0, f64::max);
            diffs.push(diff);
            w = next;
            if diff <= params.tol * size {
                converged = true;
                break;
            }
        }
        if !converged {
            let last = diffs.last().copied().unwrap_or(f64::NAN);
            return Err(Error::NotConverged { iterations: diffs.len(), residual: last });
        }
        let factor = diffs
            .windows(2)
            .filter(|d| d[0] > 0.0)
            .map(|d| d[1] / d[0])
            .fold(0.0, f64::max);
        subintervals.push(Subinterval {
            start: t0,
            end: times[b],
            kappa,
            factor,
            iterations: diffs.len(),
        });
        solution.truncate(a);
        solution.extend(w);
    }

    let repr = f.representation();
    let out = TimeSeries::new(
        times.to_vec(),
        solution.into_iter().map(|s| s.into_repr(repr)).collect(),
    )?;
    let spatial: Vec<f64> = v_phys
        .iter()
        .map(|v| lp_norm(v, params.s))
        .collect::<Result<_>>()?;
    let potential_norm = time_norm(times, &spatial, params.r)?;
    let physical = out.map(Field::to_physical);
    let solution_norm = mixed_norm(&physical, params.q, params.p)?;
    let mut data_norm = lp_norm(&f.to_physical(), 2.0)?;
    if let Some(ff) = forcing {
        let phys = ff.map(Field::to_physical);
        data_norm += mixed_norm(&phys, conjugate(params.q1), conjugate(params.p1))?;
    }
    let constant = if data_norm > 0.0 { solution_norm / data_norm } else { 0.0 };
    Ok((
        out,
        PotentialReport {
            subintervals,
            potential_norm,
            solution_norm,
            data_norm,
            constant,
        },
    ))
}
