use serde::{Deserialize, Serialize};

use super::Field;
use crate::error::{Error, Result};

/// How consecutive time intervals relate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    Uniform,
    /// Consecutive intervals grow by a constant ratio.
    Geometric { ratio: f64 },
    /// Neither of the above (e.g. user-supplied times).
    Irregular,
}

const GRADING_TOL: f64 = 1e-9;

/// Snapshots sampled on a strictly increasing time grid.
#[derive(Clone, Debug)]
pub struct TimeSeries<S = Field> {
    times: Vec<f64>,
    snapshots: Vec<S>,
    grading: Grading,
}

impl<S> TimeSeries<S> {
    /// Validates the time grid and classifies its grading.
    pub fn new(times: Vec<f64>, snapshots: Vec<S>) -> Result<Self> {
        validate_times(&times)?;
        if times.len() != snapshots.len() {
            return Err(Error::TimeGrid(format!(
                "{} times but {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        let grading = classify(&times);
        Ok(TimeSeries {
            times,
            snapshots,
            grading,
        })
    }

    /// Evaluates `f` at every time of the grid.
    pub fn from_fn(times: Vec<f64>, f: impl FnMut(f64) -> S) -> Result<Self> {
        let snapshots = times.iter().copied().map(f).collect();
        Self::new(times, snapshots)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[S] {
        &self.snapshots
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.snapshots.iter())
    }

    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> TimeSeries<T> {
        TimeSeries {
            times: self.times.clone(),
            snapshots: self.snapshots.iter().map(f).collect(),
            grading: self.grading,
        }
    }

    pub fn try_map<T>(&self, f: impl FnMut(&S) -> Result<T>) -> Result<TimeSeries<T>> {
        Ok(TimeSeries {
            times: self.times.clone(),
            snapshots: self.snapshots.iter().map(f).collect::<Result<_>>()?,
            grading: self.grading,
        })
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<S>) {
        (self.times, self.snapshots)
    }
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::TimeGrid("empty time grid".into()));
    }
    if !(times[0] >= 0.0) {
        return Err(Error::TimeGrid(format!("first time {} is negative", times[0])));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::TimeGrid(format!(
                "times not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn classify(times: &[f64]) -> Grading {
    if times.len() < 3 {
        return Grading::Uniform;
    }
    let steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let h0 = steps[0];
    if steps.iter().all(|h| ((h - h0) / h0).abs() < GRADING_TOL) {
        return Grading::Uniform;
    }
    let ratio = steps[1] / steps[0];
    if steps
        .windows(2)
        .all(|w| ((w[1] / w[0] - ratio) / ratio).abs() < GRADING_TOL)
    {
        return Grading::Geometric { ratio };
    }
    Grading::Irregular
}

/// `0, T/steps, ..., T`.
pub fn uniform_times(t_end: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| t_end * i as f64 / steps as f64)
        .collect()
}

/// `t_start * rho^k` for `k = 0..=m`, with `rho <= max_ratio` chosen so the
/// grid lands exactly on `t_end`.
pub fn geometric_times(t_start: f64, t_end: f64, max_ratio: f64) -> Vec<f64> {
    assert!(t_start > 0.0 && t_end > t_start && max_ratio > 1.0);
    let span = (t_end / t_start).ln();
    let m = (span / max_ratio.ln()).ceil().max(1.0) as usize;
    let rho = (span / m as f64).exp();
    let mut out: Vec<f64> = (0..=m).map(|k| t_start * rho.powi(k as i32)).collect();
    out[m] = t_end;
    out
}

/// Grid starting at 0 whose intervals grow geometrically from `first_step`
/// until `t_end` is reached; the interval ratio is adjusted to land on `t_end`.
pub fn graded_times(t_end: f64, first_step: f64, max_ratio: f64) -> Vec<f64> {
    assert!(t_end > 0.0 && first_step > 0.0 && max_ratio > 1.0);
    if first_step >= t_end {
        return vec![0.0, t_end];
    }
    // Number of intervals m with first_step * (r^m - 1)/(r - 1) = t_end.
    let target = t_end / first_step;
    let m = ((target * (max_ratio - 1.0) + 1.0).ln() / max_ratio.ln()).ceil() as usize;
    let m = m.max(1);
    // Solve sum_{k<m} r^k = target for r by bisection.
    let sum = |r: f64| -> f64 {
        if (r - 1.0).abs() < 1e-14 {
            m as f64
        } else {
            (r.powi(m as i32) - 1.0) / (r - 1.0)
        }
    };
    let (mut lo, mut hi) = (1.0, max_ratio);
    if sum(lo) >= target {
        return uniform_times(t_end, m);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let h0 = t_end / sum(r);
    let mut out = Vec::with_capacity(m + 1);
    let mut t = 0.0;
    out.push(t);
    for k in 0..m {
        t += h0 * r.powi(k as i32);
        out.push(t);
    }
    out[m] = t_end;
    out
}
