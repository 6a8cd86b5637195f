use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{Error, Result};

/// Largest admissible fraction of `|f|` mass outside the central half-box.
pub const CONTAMINATION_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Physical,
    Spectral,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Physical => "physical",
            Representation::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Complex samples of a function on a [`GridSpec`], in physical or
/// spectral representation. Data is row-major with the last axis fastest.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<GridSpec>,
    repr: Representation,
    data: Vec<Complex64>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.repr == other.repr && self.data == other.data
    }
}

/// FFT plans keyed by `(length, inverse)`.
type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// In-place unitary n-dimensional DFT over row-major data.
fn fft_nd(data: &mut [Complex64], dim: usize, size: usize, forward: bool) {
    let fft = plan(size, forward);
    let scale = 1.0 / (size as f64).sqrt();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Last axis is contiguous: transform all lines in one call.
    fft.process_with_scratch(data, &mut scratch);
    // Other axes: gather a batch of strided lines into contiguous rows.
    const BATCH: usize = 16;
    let mut buf = vec![Complex64::new(0.0, 0.0); BATCH * size];
    for axis in (0..dim.saturating_sub(1)).rev() {
        let stride = size.pow((dim - 1 - axis) as u32);
        let block = stride * size;
        for outer in (0..data.len()).step_by(block) {
            for inner0 in (0..stride).step_by(BATCH) {
                let width = BATCH.min(stride - inner0);
                for j in 0..size {
                    let src = &data[outer + j * stride + inner0..][..width];
                    for (c, v) in src.iter().enumerate() {
                        buf[c * size + j] = *v;
                    }
                }
                fft.process_with_scratch(&mut buf[..width * size], &mut scratch);
                for j in 0..size {
                    let dst = &mut data[outer + j * stride + inner0..][..width];
                    for (c, v) in dst.iter_mut().enumerate() {
                        *v = buf[c * size + j];
                    }
                }
            }
        }
    }
    let total = scale.powi(dim as i32);
    for v in data.iter_mut() {
        *v *= total;
    }
}

impl Field {
    pub fn zeros(grid: Arc<GridSpec>, repr: Representation) -> Self {
        let len = grid.len();
        Field {
            grid,
            repr,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_data(grid: Arc<GridSpec>, repr: Representation, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, repr, data })
    }

    /// Samples `f` at every grid point (physical representation).
    pub fn from_fn(grid: Arc<GridSpec>, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Field {
            grid,
            repr: Representation::Physical,
            data,
        }
    }

    pub fn from_real_fn(grid: Arc<GridSpec>, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Builds a spectral field from a function of the flat spectral index.
    pub fn from_spectrum(grid: Arc<GridSpec>, f: impl Fn(usize) -> Complex64) -> Self {
        let data = (0..grid.len()).map(f).collect();
        Field {
            grid,
            repr: Representation::Spectral,
            data,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Strict transform: forward needs physical data, inverse needs spectral.
    pub fn transform(&self, direction: Direction) -> Result<Field> {
        let (needed, out) = match direction {
            Direction::Forward => (Representation::Physical, Representation::Spectral),
            Direction::Inverse => (Representation::Spectral, Representation::Physical),
        };
        if self.repr != needed {
            return Err(Error::Representation {
                expected: needed.name(),
                found: self.repr.name(),
            });
        }
        let mut data = self.data.clone();
        fft_nd(
            &mut data,
            self.grid.dim(),
            self.grid.size(),
            direction == Direction::Forward,
        );
        Ok(Field {
            grid: self.grid.clone(),
            repr: out,
            data,
        })
    }

    /// Spectral copy, transforming only when needed.
    pub fn to_spectral(&self) -> Field {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => self.clone().into_spectral(),
        }
    }

    pub fn to_physical(&self) -> Field {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => self.clone().into_physical(),
        }
    }

    pub fn into_spectral(mut self) -> Field {
        if self.repr == Representation::Physical {
            fft_nd(&mut self.data, self.grid.dim(), self.grid.size(), true);
            self.repr = Representation::Spectral;
        }
        self
    }

    pub fn into_physical(mut self) -> Field {
        if self.repr == Representation::Spectral {
            fft_nd(&mut self.data, self.grid.dim(), self.grid.size(), false);
            self.repr = Representation::Physical;
        }
        self
    }

    pub fn into_repr(self, repr: Representation) -> Field {
        match repr {
            Representation::Physical => self.into_physical(),
            Representation::Spectral => self.into_spectral(),
        }
    }

    /// Multiplies spectral coefficients by `symbol(flat)`, returning the
    /// result in the caller's representation.
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> Complex64) -> Field {
        let repr = self.repr;
        let mut spec = self.to_spectral();
        for (i, c) in spec.data.iter_mut().enumerate() {
            *c *= symbol(i);
        }
        spec.into_repr(repr)
    }

    /// Real-symbol variant of [`Field::apply_symbol`].
    pub fn apply_real_symbol(&self, symbol: impl Fn(usize) -> f64) -> Field {
        let repr = self.repr;
        let mut spec = self.to_spectral();
        for (i, c) in spec.data.iter_mut().enumerate() {
            *c *= symbol(i);
        }
        spec.into_repr(repr)
    }

    fn check_compatible(&self, other: &Field) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.repr != other.repr {
            return Err(Error::Representation {
                expected: self.repr.name(),
                found: other.repr.name(),
            });
        }
        Ok(())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: Complex64, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            repr: self.repr,
            data,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, a: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            repr: self.repr,
            data: self.data.iter().map(|x| x * a).collect(),
        }
    }

    /// L² inner product `∫ f conj(g) dx`. Both representations give the same
    /// value under the unitary convention.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_compatible(other)?;
        let sum: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x * y.conj())
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// Spatial mean `L^{-n} ∫ f dx`.
    pub fn mean(&self) -> Complex64 {
        match self.repr {
            Representation::Physical => {
                self.data.iter().sum::<Complex64>() / self.data.len() as f64
            }
            Representation::Spectral => self.data[0] / (self.data.len() as f64).sqrt(),
        }
    }

    /// Largest |Im| over physical samples.
    pub fn max_imag(&self) -> f64 {
        self.to_physical()
            .data
            .iter()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops imaginary parts of physical samples.
    pub fn real_part(&self) -> Field {
        let repr = self.repr;
        let mut phys = self.to_physical();
        for c in phys.data.iter_mut() {
            c.im = 0.0;
        }
        phys.into_repr(repr)
    }

    /// Periodic shift by `cells` grid points along `axis`:
    /// `out(x) = f(x - cells * dx e_axis)`.
    pub fn shift_cells(&self, axis: usize, cells: isize) -> Result<Field> {
        let g = &self.grid;
        if axis >= g.dim() {
            return Err(Error::Axis { axis, dim: g.dim() });
        }
        let phys = self.to_physical();
        let n = g.size() as isize;
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        for (flat, v) in phys.data.iter().enumerate() {
            let mut idx = g.multi_index(flat);
            idx[axis] = ((idx[axis] as isize + cells).rem_euclid(n)) as usize;
            out[g.flat_index(&idx)] = *v;
        }
        Ok(Field {
            grid: self.grid.clone(),
            repr: Representation::Physical,
            data: out,
        }
        .into_repr(self.repr))
    }

    /// Trigonometric interpolation onto the same box with `size` points per
    /// axis. Modes with `|k_j| >= min(N, size)/2` are dropped, so the
    /// coarser grid's Nyquist modes never survive. Keeps the representation.
    pub fn resample(&self, size: usize) -> Result<Field> {
        let g = &self.grid;
        let fine = Arc::new(GridSpec::new(g.dim(), size, g.length())?);
        let spec = self.to_spectral();
        let half = (g.size().min(size) / 2) as i64;
        let scale = (size as f64 / g.size() as f64).powf(g.dim() as f64 / 2.0);
        let mut out = vec![Complex64::new(0.0, 0.0); fine.len()];
        for (flat, c) in spec.data.iter().enumerate() {
            let k = g.mode(flat);
            if k[..g.dim()].iter().any(|m| m.abs() >= half) {
                continue;
            }
            let idx: Vec<usize> = k[..g.dim()]
                .iter()
                .map(|&m| m.rem_euclid(size as i64) as usize)
                .collect();
            out[fine.flat_index(&idx)] = c * scale;
        }
        Ok(Field {
            grid: fine,
            repr: Representation::Spectral,
            data: out,
        }
        .into_repr(self.repr))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Fraction of `∫|f|` lying outside the central half-box. Zero for the zero
/// field.
pub fn contamination(field: &Field) -> f64 {
    let phys = field.to_physical();
    let g = phys.grid();
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (flat, v) in phys.data().iter().enumerate() {
        if g.in_central_half_box(flat) {
            inside += v.norm();
        } else {
            outside += v.norm();
        }
    }
    let total = inside + outside;
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}
