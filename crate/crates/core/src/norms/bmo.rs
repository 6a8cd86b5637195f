use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

/// Root-mean-square oscillation of `f` over the closed cube with corner
/// `origin` and `side` cells per axis. Each axis uses the `side + 1` samples
/// `origin..=origin + side` (periodic) with trapezoid weights, visited in
/// row-major order; mean first, then variance.
fn cube_oscillation(data: &[Complex64], grid: &GridSpec, origin: &[usize; 3], side: usize) -> f64 {
    let dim = grid.dim();
    let per_axis = side + 1;
    let count = per_axis.pow(dim as u32);
    let sample = |offset: usize| -> (Complex64, f64) {
        let mut idx = [0usize; 3];
        let mut rem = offset;
        let mut weight = 1.0;
        for axis in (0..dim).rev() {
            let k = rem % per_axis;
            rem /= per_axis;
            if k == 0 || k == side {
                weight *= 0.5;
            }
            idx[axis] = origin[axis] + k;
        }
        (data[grid.flat_index(&idx[..dim])], weight)
    };
    let total = (side as f64).powi(dim as i32);
    let mut sum = Complex64::new(0.0, 0.0);
    for offset in 0..count {
        let (v, w) = sample(offset);
        sum += w * v;
    }
    let mean = sum / total;
    let mut var = 0.0;
    for offset in 0..count {
        let (v, w) = sample(offset);
        var += w * (v - mean).norm_sqr();
    }
    (var / total).sqrt()
}

/// Supremum over grid-aligned dyadic cubes (side `2^m` cells,
/// `m = 0..=log2 N`) of the RMS oscillation about the cube average, each
/// cube integrated with the trapezoid rule on its closure. Spectral input is
/// transformed first.
pub fn bmo_norm(f: &Field) -> f64 {
    dyadic_sup(&f.to_physical(), 1)
}

/// [`bmo_norm`] over the same cube family, evaluated on the trigonometric
/// interpolant sampled `refine` times more finely per axis. Use it when the
/// data vary on the scale of a few cells.
pub fn bmo_norm_refined(f: &Field, refine: usize) -> Result<f64> {
    if refine == 0 || !refine.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("refinement {refine} must be a power of two")));
    }
    if refine == 1 {
        return Ok(bmo_norm(f));
    }
    let fine = f.resample(f.grid().size() * refine)?.into_physical();
    Ok(separable_sup(&fine, refine))
}

/// Trapezoid sums over consecutive closed blocks of `side` cells along
/// `axis` (periodic). `shape` is updated in place.
fn block_sums(data: &[f64], shape: &mut [usize], axis: usize, side: usize) -> Vec<f64> {
    let n = shape[axis];
    let blocks = n / side;
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0.0; outer * blocks * inner];
    for o in 0..outer {
        for b in 0..blocks {
            let row = &mut out[(o * blocks + b) * inner..][..inner];
            for k in 0..=side {
                let w = if k == 0 || k == side { 0.5 } else { 1.0 };
                let src = &data[(o * n + (b * side + k) % n) * inner..][..inner];
                for (acc, v) in row.iter_mut().zip(src) {
                    *acc += w * v;
                }
            }
        }
    }
    shape[axis] = blocks;
    out
}

/// Same cube family and weights as [`dyadic_sup`], with the cube sums of
/// `f` and `|f|²` formed axis by axis.
fn separable_sup(phys: &Field, min_side: usize) -> f64 {
    let grid = phys.grid();
    let n = grid.size();
    let dim = grid.dim();
    let re: Vec<f64> = phys.data().iter().map(|c| c.re).collect();
    let im: Vec<f64> = phys.data().iter().map(|c| c.im).collect();
    let sq: Vec<f64> = phys.data().iter().map(|c| c.norm_sqr()).collect();
    let mut best: f64 = 0.0;
    let mut side = min_side;
    while side <= n {
        let sums: Vec<Vec<f64>> = [&re, &im, &sq]
            .iter()
            .map(|d| {
                let mut shape = vec![n; dim];
                let mut cur = (*d).clone();
                for axis in 0..dim {
                    cur = block_sums(&cur, &mut shape, axis, side);
                }
                cur
            })
            .collect();
        let volume = (side as f64).powi(dim as i32);
        for c in 0..sums[0].len() {
            let (mr, mi) = (sums[0][c] / volume, sums[1][c] / volume);
            let var = (sums[2][c] / volume - mr * mr - mi * mi).max(0.0);
            best = best.max(var.sqrt());
        }
        side *= 2;
    }
    best
}

/// Sup over cubes of side `min_side * 2^m` fine cells.
fn dyadic_sup(phys: &Field, min_side: usize) -> f64 {
    let grid = phys.grid();
    let data = phys.data();
    let n = grid.size();
    let dim = grid.dim();
    let mut best: f64 = 0.0;
    let mut side = min_side;
    while side <= n {
        let per_axis = n / side;
        let cubes = per_axis.pow(dim as u32);
        for c in 0..cubes {
            let mut origin = [0usize; 3];
            let mut rem = c;
            for axis in (0..dim).rev() {
                origin[axis] = (rem % per_axis) * side;
                rem /= per_axis;
            }
            best = best.max(cube_oscillation(data, grid, &origin, side));
        }
        side *= 2;
    }
    best
}
