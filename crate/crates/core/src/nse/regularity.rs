use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{vector_mixed_norm, VectorField};
use crate::error::{Error, Result};
use crate::grid::TimeSeries;

/// Highest derivative order handled by [`regularity_check`].
const MAX_ORDER: usize = 4;

/// `‖D^j v‖_{L^q_t L^p_x}` for one multi-index `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeNorm {
    pub index: Vec<usize>,
    pub norm: f64,
}

/// All multi-indices in `dim` variables with `|j| <= order`, ordered by
/// total degree.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for degree in 0..=order {
        let mut current = vec![0; dim];
        fill(&mut out, &mut current, 0, degree);
    }
    out
}

fn fill(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, axis: usize, left: usize) {
    if axis + 1 == current.len() {
        current[axis] = left;
        out.push(current.clone());
        return;
    }
    for k in (0..=left).rev() {
        current[axis] = k;
        fill(out, current, axis + 1, left - k);
    }
}

/// `Π_a (iξ_a)^{j_a}`; zero on Nyquist modes once `|j| > 0`.
fn derivative(v: &VectorField, index: &[usize]) -> VectorField {
    if index.iter().all(|&j| j == 0) {
        return v.clone();
    }
    let grid = v.grid_arc().clone();
    let comps = v
        .components()
        .iter()
        .map(|c| {
            c.apply_symbol(|i| {
                if grid.is_nyquist(i) {
                    return Complex64::new(0.0, 0.0);
                }
                let xi = grid.wavevector(i);
                index
                    .iter()
                    .enumerate()
                    .fold(Complex64::new(1.0, 0.0), |acc, (a, &j)| {
                        acc * Complex64::new(0.0, xi[a]).powu(j as u32)
                    })
            })
        })
        .collect();
    VectorField::new(comps).expect("components share a grid")
}

/// Mixed norms of `D^j v` for every `|j| <= order`. Fails on non-finite
/// values.
pub fn regularity_check(
    v: &TimeSeries<VectorField>,
    order: usize,
    q: f64,
    p: f64,
) -> Result<Vec<DerivativeNorm>> {
    if order > MAX_ORDER {
        return Err(Error::Exponent(format!(
            "derivative order {order} above the supported {MAX_ORDER}"
        )));
    }
    let dim = v.snapshots()[0].dim();
    multi_indices(dim, order)
        .into_iter()
        .map(|index| {
            let d = v.try_map(|s| Ok(derivative(s, &index)))?;
            let norm = vector_mixed_norm(&d, q, p)?;
            if !norm.is_finite() {
                return Err(Error::NonFinite(format!("‖D^{index:?} v‖")));
            }
            Ok(DerivativeNorm { index, norm })
        })
        .collect()
}
