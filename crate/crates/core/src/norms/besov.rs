use serde::{Deserialize, Serialize};

use super::{check_exponent, lp_norm};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::semigroup::require_zero_mean;

fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 for `r <= 1`, 0 for `r >= 2`.
pub fn eta(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = g(2.0 - r);
        a / (a + g(r - 1.0))
    }
}

/// Littlewood–Paley bands `ψ_j(ξ) = η(|ξ|/2^j) - η(|ξ|/2^{j-1})` for
/// `j_min <= j <= j_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub j_min: i32,
    pub j_max: i32,
}

impl DyadicPartition {
    pub fn new(j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(Error::InvalidRecipe(format!(
                "empty partition: j_min {j_min} > j_max {j_max}"
            )));
        }
        Ok(DyadicPartition { j_min, j_max })
    }

    /// Widest window the grid resolves: the smallest `j` with
    /// `2^{j-1} >= 2π/L` and the largest with `2^{j+1} <= πN/L`.
    pub fn for_grid(grid: &GridSpec) -> Result<Self> {
        let j_min = (grid.dxi().log2() - 1e-12).ceil() as i32 + 1;
        let j_max = (grid.nyquist().log2() + 1e-12).floor() as i32 - 1;
        if j_min > j_max {
            return Err(Error::InvalidGrid(format!(
                "grid resolves no complete dyadic band (j_min {j_min}, j_max {j_max})"
            )));
        }
        Ok(DyadicPartition { j_min, j_max })
    }

    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// `ψ_j` at radius `r = |ξ|`.
    pub fn psi(j: i32, r: f64) -> f64 {
        eta(r / 2f64.powi(j)) - eta(r / 2f64.powi(j - 1))
    }

    /// Largest `|1 - Σ_j ψ_j(ξ)|` over lattice modes in
    /// `2^{j_min} <= |ξ| <= 2^{j_max}`, where the bands sum to one.
    pub fn unity_residual(&self, grid: &GridSpec) -> f64 {
        let (lo, hi) = (2f64.powi(self.j_min), 2f64.powi(self.j_max));
        grid.xi_norm2()
            .iter()
            .map(|r2| r2.sqrt())
            .filter(|r| (lo..=hi).contains(r))
            .map(|r| (1.0 - self.bands().map(|j| Self::psi(j, r)).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }
}

/// `Δ_j f = F^{-1}(ψ_j F f)`, in the caller's representation.
pub fn lp_block(f: &Field, j: i32, partition: &DyadicPartition) -> Result<Field> {
    if !partition.contains(j) {
        return Err(Error::Band {
            band: j,
            j_min: partition.j_min,
            j_max: partition.j_max,
        });
    }
    Ok(band(f, j))
}

fn band(f: &Field, j: i32) -> Field {
    let grid = f.grid_arc().clone();
    f.apply_real_symbol(|i| DyadicPartition::psi(j, grid.xi_norm2()[i].sqrt()))
}

/// `F^{-1}(η F f)`, the low-frequency part `|ξ| <= 2`.
pub fn low_block(f: &Field) -> Field {
    let grid = f.grid_arc().clone();
    f.apply_real_symbol(|i| eta(grid.xi_norm2()[i].sqrt()))
}

fn lq_sum(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Besov norm from dyadic blocks.
///
/// Homogeneous: `ℓ^q` over `j_min..=j_max` of `2^{js} ‖Δ_j f‖_p` (zero-mean
/// input required). Inhomogeneous: `‖F^{-1}(η F f)‖_p` plus the `ℓ^q` sum
/// over `1..=j_max`.
pub fn besov_norm(
    f: &Field,
    s: f64,
    p: f64,
    q: f64,
    homogeneous: bool,
    partition: &DyadicPartition,
) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let spec = f.to_spectral();
    let block_norm = |j: i32| -> Result<f64> {
        let b = band(&spec, j).into_physical();
        Ok(2f64.powf(j as f64 * s) * lp_norm(&b, p)?)
    };
    if homogeneous {
        require_zero_mean(f)?;
        let terms = partition
            .bands()
            .map(block_norm)
            .collect::<Result<Vec<_>>>()?;
        Ok(lq_sum(terms.into_iter(), q))
    } else {
        let low = lp_norm(&low_block(&spec).into_physical(), p)?;
        let terms = (1..=partition.j_max)
            .map(block_norm)
            .collect::<Result<Vec<_>>>()?;
        Ok(low + lq_sum(terms.into_iter(), q))
    }
}
