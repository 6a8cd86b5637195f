//! Periodic box, complex fields and the unitary discrete Fourier layer.
//!
//! Whole-space problems are emulated on a periodic box `[0, L)^n` sampled at
//! `N` points per axis. Spectral coefficients use the unitary DFT
//! normalisation, `c_k = N^{-n/2} sum_x f(x) e^{-i xi_k . x}`, so that
//! `sum |data|^2 * cell_volume` is the same number in either representation.

mod field;
mod io;
mod series;
mod synth;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use field::{contamination, Direction, Field, Representation, CONTAMINATION_LIMIT};
pub use io::{read_field, write_field, FIELD_MAGIC, FIELD_VERSION};
pub use series::{geometric_times, graded_times, uniform_times, Grading, TimeSeries};
pub use synth::{synthesize_field, Recipe};

/// Discrete periodic domain: dimension, resolution and box length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridParams", try_from = "GridParams")]
pub struct GridSpec {
    dim: usize,
    size: usize,
    length: f64,
    /// Per-axis wavenumbers in FFT order, scaled by 2π/L.
    wavenumbers: Vec<f64>,
    /// |ξ|² for every flat index.
    xi_norm2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridParams {
    n: usize,
    #[serde(rename = "N")]
    size: usize,
    #[serde(rename = "L")]
    length: f64,
}

impl From<GridSpec> for GridParams {
    fn from(g: GridSpec) -> Self {
        GridParams {
            n: g.dim,
            size: g.size,
            length: g.length,
        }
    }
}

impl TryFrom<GridParams> for GridSpec {
    type Error = Error;
    fn try_from(p: GridParams) -> Result<Self> {
        GridSpec::new(p.n, p.size, p.length)
    }
}

/// Builds a grid; see [`GridSpec::new`].
pub fn make_grid(dim: usize, size: usize, length: f64) -> Result<GridSpec> {
    GridSpec::new(dim, size, length)
}

impl GridSpec {
    pub fn new(dim: usize, size: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1,2,3}}")));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "resolution {size} must be a power of two >= 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {length} must be positive")));
        }
        let scale = 2.0 * PI / length;
        let wavenumbers: Vec<f64> = (0..size)
            .map(|i| scale * signed_mode(i, size) as f64)
            .collect();
        let total = size.pow(dim as u32);
        let mut xi_norm2 = vec![0.0; total];
        for (flat, slot) in xi_norm2.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut rem = flat;
            for _ in 0..dim {
                let k = wavenumbers[rem % size];
                acc += k * k;
                rem /= size;
            }
            *slot = acc;
        }
        Ok(GridSpec {
            dim,
            size,
            length,
            wavenumbers,
            xi_norm2,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.size as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Total number of grid points, `N^n`.
    pub fn len(&self) -> usize {
        self.xi_norm2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_norm2.is_empty()
    }

    /// Lattice spacing in frequency, 2π/L.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest representable |ξ_j| on one axis, πN/L.
    pub fn nyquist(&self) -> f64 {
        PI * self.size as f64 / self.length
    }

    /// Per-axis wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Table of |ξ|² indexed like field data.
    pub fn xi_norm2(&self) -> &[f64] {
        &self.xi_norm2
    }

    /// Row-major multi-index of a flat index (last axis fastest). Unused
    /// axes are zero.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % self.size;
            rem /= self.size;
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.size + (i % self.size))
    }

    /// Signed integer lattice mode per axis, in `-N/2 .. N/2-1`.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let mut out = [0i64; 3];
        for axis in 0..self.dim {
            out[axis] = signed_mode(idx[axis], self.size);
        }
        out
    }

    /// Wavevector ξ at a flat spectral index.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut out = [0.0; 3];
        for axis in 0..self.dim {
            out[axis] = self.wavenumbers[idx[axis]];
        }
        out
    }

    /// True when any axis of the mode sits on the unpaired Nyquist index.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        idx[..self.dim].contains(&(self.size / 2))
    }

    /// Physical coordinates of a grid point, `x_j = j * dx`.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let dx = self.dx();
        let mut out = [0.0; 3];
        for axis in 0..self.dim {
            out[axis] = idx[axis] as f64 * dx;
        }
        out
    }

    /// Centre of the box, `L/2` on each active axis.
    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for v in c.iter_mut().take(self.dim) {
            *v = 0.5 * self.length;
        }
        c
    }

    /// Whether a point lies in the closed central half-box `|x_j - L/2| <= L/4`.
    pub fn in_central_half_box(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        let half = self.size / 2;
        let quarter = self.size / 4;
        idx[..self.dim]
            .iter()
            .all(|&i| i.abs_diff(half) <= quarter)
    }

    pub(crate) fn same_as(&self, other: &GridSpec) -> bool {
        self.dim == other.dim && self.size == other.size && self.length == other.length
    }
}

fn signed_mode(i: usize, size: usize) -> i64 {
    if i >= size / 2 {
        i as i64 - size as i64
    } else {
        i as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_spacing_lattice() {
        let g = make_grid(1, 8, 2.0 * PI).unwrap();
        let mut ks: Vec<i64> = g.wavenumbers().iter().map(|k| k.round() as i64).collect();
        ks.sort();
        assert_eq!(ks, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        for k in g.wavenumbers() {
            assert!((k - k.round()).abs() < 1e-15);
        }
    }

    #[test]
    fn two_dimensional_lattice() {
        let g = make_grid(2, 64, 32.0).unwrap();
        assert_eq!(g.len(), 64 * 64);
        assert!((g.dxi() - 2.0 * PI / 32.0).abs() < 1e-15);
        assert!((g.cell_volume() - 0.25).abs() < 1e-15);
        let max = g.wavenumbers().iter().cloned().fold(f64::MIN, f64::max);
        let min = g.wavenumbers().iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 31.0 * g.dxi()).abs() < 1e-12);
        assert!((min + 32.0 * g.dxi()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_grid(3, 4, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(2, 48, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(4, 8, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(0, 8, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(1, 8, -1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn lattice_is_symmetric_away_from_nyquist() {
        let g = make_grid(2, 16, 3.0).unwrap();
        for flat in 0..g.len() {
            if g.is_nyquist(flat) {
                continue;
            }
            let m = g.mode(flat);
            let mirror = [(-m[0]).rem_euclid(16) as usize, (-m[1]).rem_euclid(16) as usize];
            let back = g.mode(g.flat_index(&mirror));
            assert_eq!(back[0], -m[0]);
            assert_eq!(back[1], -m[1]);
        }
    }

    #[test]
    fn multi_index_round_trip() {
        let g = make_grid(3, 8, 1.0).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            let idx = g.multi_index(flat);
            assert_eq!(g.flat_index(&idx), flat);
        }
    }
}
