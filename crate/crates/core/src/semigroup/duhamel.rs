use num_complex::Complex64;

use super::{dissipation_rates, Alpha};
use crate::error::{Error, Result};
use crate::grid::{Field, TimeSeries};

/// `φ1(z) = (e^z - 1)/z`, with φ1(0) = 1.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 0.1 {
        taylor(z, 1)
    } else {
        z.exp_m1() / z
    }
}

/// `φ2(z) = (e^z - 1 - z)/z²`, with φ2(0) = 1/2.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        taylor(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `sum_k z^k / (k + shift)!`, enough terms for |z| < 0.1.
fn taylor(z: f64, shift: u32) -> f64 {
    let mut fact: f64 = (1..=shift).map(f64::from).product();
    let mut zk = 1.0;
    let mut sum = 1.0 / fact;
    for k in 1..16u32 {
        fact *= f64::from(k + shift);
        zk *= z;
        sum += zk / fact;
    }
    sum
}

/// Integrates `∫_a^{a+h} e^{-μ(a+h-s)} F(s) ds` for the linear interpolant
/// through `f0` at `a` and `f1` at `a + step`, over a sub-step `h <= step`.
#[inline]
fn weights(mu: f64, h: f64, step: f64) -> (f64, f64, f64) {
    let z = -mu * h;
    let decay = (-mu * h).exp();
    let w_left = h * phi1(z);
    let w_slope = h * h / step * phi2(z);
    (decay, w_left, w_slope)
}

/// Duhamel integral `∫_0^t e^{-(t-s)μ_k} F_k(s) ds` for each mode `k` with
/// rate `rates[k]`, `F` piecewise linear through spectral snapshots given at
/// `times` (which must start at 0). Returns one coefficient vector per
/// entry of `t_eval`.
pub fn duhamel_modes(
    times: &[f64],
    snapshots: &[&[Complex64]],
    rates: &[f64],
    t_eval: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    if times.is_empty() || times.len() != snapshots.len() {
        return Err(Error::TimeGrid("forcing has no snapshots".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::TimeGrid(format!(
            "forcing must start at t = 0, starts at {}",
            times[0]
        )));
    }
    let end = *times.last().unwrap();
    for w in t_eval.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::TimeGrid("evaluation times not strictly increasing".into()));
        }
    }
    if let Some(&t) = t_eval.iter().find(|&&t| !(0.0..=end).contains(&t)) {
        return Err(Error::TimeGrid(format!(
            "evaluation time {t} outside forcing coverage [0, {end}]"
        )));
    }
    let modes = rates.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); modes];
    let mut out = Vec::with_capacity(t_eval.len());
    let mut next = 0;
    let mut i = 0;
    while next < t_eval.len() {
        let t = t_eval[next];
        // Advance whole intervals that end at or before t.
        while i + 1 < times.len() && times[i + 1] <= t {
            let step = times[i + 1] - times[i];
            let (f0, f1) = (snapshots[i], snapshots[i + 1]);
            for k in 0..modes {
                let (decay, wl, ws) = weights(rates[k], step, step);
                acc[k] = decay * acc[k] + wl * f0[k] + ws * (f1[k] - f0[k]);
            }
            i += 1;
        }
        let h = t - times[i];
        if h == 0.0 {
            out.push(acc.clone());
        } else {
            let step = times[i + 1] - times[i];
            let (f0, f1) = (snapshots[i], snapshots[i + 1]);
            let partial = (0..modes)
                .map(|k| {
                    let (decay, wl, ws) = weights(rates[k], h, step);
                    decay * acc[k] + wl * f0[k] + ws * (f1[k] - f0[k])
                })
                .collect();
            out.push(partial);
        }
        next += 1;
    }
    Ok(out)
}

/// `∫_0^t e^{-(t-s)(-Δ)^α} F(s) ds` at each time of `t_eval`, using the
/// exact integrating factor for `F` linear between snapshots. The output
/// keeps the representation of the forcing snapshots.
pub fn duhamel(forcing: &TimeSeries, t_eval: &[f64], alpha: Alpha) -> Result<TimeSeries> {
    let first = &forcing.snapshots()[0];
    let grid = first.grid_arc().clone();
    if grid.dim() != alpha.dim() {
        return Err(Error::InvalidGrid(format!(
            "α was declared for dimension {} but the grid has dimension {}",
            alpha.dim(),
            grid.dim()
        )));
    }
    let repr = first.representation();
    let spectral: Vec<Field> = forcing
        .snapshots()
        .iter()
        .map(|f| {
            if !f.grid().same_as(&grid) {
                Err(Error::GridMismatch)
            } else {
                Ok(f.to_spectral())
            }
        })
        .collect::<Result<_>>()?;
    let slices: Vec<&[Complex64]> = spectral.iter().map(|f| f.data()).collect();
    let rates = dissipation_rates(&grid, alpha);
    let coeffs = duhamel_modes(forcing.times(), &slices, &rates, t_eval)?;
    let fields = coeffs
        .into_iter()
        .map(|c| {
            Field::from_data(grid.clone(), crate::grid::Representation::Spectral, c)
                .map(|f| f.into_repr(repr))
        })
        .collect::<Result<_>>()?;
    TimeSeries::new(t_eval.to_vec(), fields)
}
