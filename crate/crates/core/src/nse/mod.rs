//! Mild-solution machinery for the generalized Navier–Stokes system
//! `∂_t v + (-Δ)^α v + (v·∇)v - ∇p = h`, `∇·v = 0`, evolved in
//! Leray-projected form, plus the potential-perturbed heat equation.

mod picard;
mod potential;
mod regularity;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{synthesize_field, Field, GridSpec, Recipe, Representation, TimeSeries};
use crate::norms::{lp_norm, time_norm};
use crate::semigroup::{duhamel, partial_derivative, Alpha, Multiplier};

pub use picard::{
    bilinear_constant, check_nse_exponents, random_solenoidal, solve_nse_picard, PicardParams,
    PicardReport,
};
pub use potential::{solve_potential_eq, PotentialParams, PotentialReport, Subinterval};
pub use regularity::{multi_indices, regularity_check, DerivativeNorm};

/// `n` fields on one grid, one per velocity component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<Field>,
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidGrid("vector field needs components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(Error::InvalidGrid(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                first.grid().dim()
            )));
        }
        for c in &components[1..] {
            if !c.grid().same_as(first.grid()) {
                return Err(Error::GridMismatch);
            }
            if c.representation() != first.representation() {
                return Err(Error::Representation {
                    expected: first.representation().name(),
                    found: c.representation().name(),
                });
            }
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Arc<GridSpec>, repr: Representation) -> Self {
        let components = (0..grid.dim())
            .map(|_| Field::zeros(grid.clone(), repr))
            .collect();
        VectorField { components }
    }

    /// Planar velocity `(∂₂ψ, -∂₁ψ)` of a stream function.
    pub fn from_stream(psi: &Field) -> Result<Self> {
        if psi.grid().dim() != 2 {
            return Err(Error::InvalidGrid("stream functions need a 2-D grid".into()));
        }
        let repr = psi.representation();
        let u = partial_derivative(psi, 1)?.into_repr(repr);
        let v = partial_derivative(psi, 0)?.scale(-1.0).into_repr(repr);
        VectorField::new(vec![u, v])
    }

    /// `A κ (sin κx cos κy, -cos κx sin κy)`, κ = 2π/L.
    pub fn taylor_green(grid: &Arc<GridSpec>, amplitude: f64) -> Result<Self> {
        let psi = synthesize_field(grid, &Recipe::TaylorGreen { amplitude })?;
        Self::from_stream(&psi)
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Field {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Field> {
        self.components
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn grid_arc(&self) -> &Arc<GridSpec> {
        self.components[0].grid_arc()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn representation(&self) -> Representation {
        self.components[0].representation()
    }

    fn map(&self, f: impl Fn(&Field) -> Field) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &VectorField, f: impl Fn(&Field, &Field) -> Result<Field>) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::GridMismatch);
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        VectorField::new(components)
    }

    pub fn to_spectral(&self) -> VectorField {
        self.map(Field::to_spectral)
    }

    pub fn to_physical(&self) -> VectorField {
        self.map(Field::to_physical)
    }

    pub fn into_repr(self, repr: Representation) -> VectorField {
        VectorField {
            components: self.components.into_iter().map(|c| c.into_repr(repr)).collect(),
        }
    }

    /// Componentwise sum; the result takes `self`'s representation.
    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.add(&b.clone().into_repr(a.representation())))
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.sub(&b.clone().into_repr(a.representation())))
    }

    pub fn scale(&self, a: f64) -> VectorField {
        self.map(|c| c.scale(a))
    }

    /// Pointwise Euclidean magnitude `|u(x)|`, physical.
    pub fn magnitude(&self) -> Field {
        let parts: Vec<Field> = self.components.iter().map(Field::to_physical).collect();
        let grid = self.grid_arc().clone();
        let data = (0..grid.len())
            .map(|i| {
                let s: f64 = parts.iter().map(|p| p.data()[i].norm_sqr()).sum();
                Complex64::new(s.sqrt(), 0.0)
            })
            .collect();
        Field::from_data(grid, Representation::Physical, data).expect("length matches grid")
    }

    /// `‖ |u| ‖_{L^p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(&self.magnitude(), p)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(Field::is_finite)
    }

    /// Spectral resampling of every component (see [`Field::resample`]).
    pub fn resample(&self, size: usize) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| c.resample(size))
            .collect::<Result<_>>()?;
        VectorField::new(components)
    }
}

/// `‖u‖_{L^q_t L^p_x}` of a vector series, with `|u(t,x)|` pointwise.
pub fn vector_mixed_norm(u: &TimeSeries<VectorField>, q: f64, p: f64) -> Result<f64> {
    let values = u
        .snapshots()
        .par_iter()
        .map(|v| v.lp_norm(p))
        .collect::<Result<Vec<f64>>>()?;
    time_norm(u.times(), &values, q)
}

/// `‖u - v‖ / ‖v‖` in `L^q_t L^p_x`; the series must share a time grid.
pub fn relative_mixed_error(
    u: &TimeSeries<VectorField>,
    v: &TimeSeries<VectorField>,
    q: f64,
    p: f64,
) -> Result<f64> {
    let diff = series_sub(u, v)?;
    let den = vector_mixed_norm(v, q, p)?;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("reference mixed norm".into()));
    }
    Ok(vector_mixed_norm(&diff, q, p)? / den)
}

pub(crate) fn series_sub(
    u: &TimeSeries<VectorField>,
    v: &TimeSeries<VectorField>,
) -> Result<TimeSeries<VectorField>> {
    same_times(u.times(), v.times())?;
    let snaps = u
        .snapshots()
        .iter()
        .zip(v.snapshots())
        .map(|(a, b)| a.sub(b))
        .collect::<Result<_>>()?;
    TimeSeries::new(u.times().to_vec(), snaps)
}

pub(crate) fn same_times(a: &[f64], b: &[f64]) -> Result<()> {
    if a != b {
        return Err(Error::TimeGrid("series are sampled on different time grids".into()));
    }
    Ok(())
}

/// Symbol `δ_{jk} - ξ_j ξ_k / |ξ|²`, identity at ξ = 0.
pub fn leray_project(u: &VectorField) -> VectorField {
    let repr = u.representation();
    let spec = u.to_spectral();
    let grid = u.grid_arc().clone();
    let n = u.dim();
    let mut out: Vec<Vec<Complex64>> = spec.components.iter().map(|c| c.data().to_vec()).collect();
    for i in 0..grid.len() {
        let r2 = grid.xi_norm2()[i];
        if r2 == 0.0 {
            continue;
        }
        let xi = grid.wavevector(i);
        let dot: Complex64 = (0..n).map(|j| spec.components[j].data()[i] * xi[j]).sum();
        for (j, comp) in out.iter_mut().enumerate() {
            comp[i] -= dot * (xi[j] / r2);
        }
    }
    let components = out
        .into_iter()
        .map(|d| {
            Field::from_data(grid.clone(), Representation::Spectral, d)
                .expect("length matches grid")
                .into_repr(repr)
        })
        .collect();
    VectorField { components }
}

/// `Σ_j ∂_j u_j`, spectral in, same representation out.
pub fn divergence(u: &VectorField) -> Field {
    let repr = u.representation();
    let grid = u.grid_arc().clone();
    let mut acc = Field::zeros(grid, Representation::Spectral);
    for (j, c) in u.components.iter().enumerate() {
        let d = Multiplier::partial(j).apply(&c.to_spectral());
        for (a, b) in acc.data_mut().iter_mut().zip(d.data()) {
            *a += b;
        }
    }
    acc.into_repr(repr)
}

/// Largest `|∇·u(x)|` over the grid.
pub fn max_divergence(u: &VectorField) -> f64 {
    divergence(u).to_physical().max_abs()
}

/// Highest retained lattice mode per axis under the 2/3 rule: `3K < N`.
pub fn dealias_cutoff(size: usize) -> i64 {
    (size as i64 - 1) / 3
}

/// Zeros every mode with some `|k_j| > K`, K from [`dealias_cutoff`].
pub fn dealias(f: &Field) -> Field {
    let grid = f.grid_arc().clone();
    let cut = dealias_cutoff(grid.size());
    let dim = grid.dim();
    f.apply_real_symbol(|i| {
        let k = grid.mode(i);
        if k[..dim].iter().any(|m| m.abs() > cut) {
            0.0
        } else {
            1.0
        }
    })
}

/// `P ∇·(u ⊗ v)` with components `Σ_i ∂_i(u_i v_j)`, products formed from
/// dealiased factors; spectral output, dealiased.
pub fn projected_flux(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    if !u.grid().same_as(v.grid()) || u.dim() != v.dim() {
        return Err(Error::GridMismatch);
    }
    let n = u.dim();
    let grid = u.grid_arc().clone();
    let up: Vec<Field> = u.components.iter().map(|c| dealias(c).into_physical()).collect();
    let vp: Vec<Field> = if u == v {
        up.clone()
    } else {
        v.components.iter().map(|c| dealias(c).into_physical()).collect()
    };
    let mut flux = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Field::zeros(grid.clone(), Representation::Spectral);
        for (i, ui) in up.iter().enumerate() {
            let data = ui
                .data()
                .iter()
                .zip(vp[j].data())
                .map(|(a, b)| a * b)
                .collect();
            let prod = Field::from_data(grid.clone(), Representation::Physical, data)?.into_spectral();
            let d = Multiplier::partial(i).apply(&prod);
            for (a, b) in acc.data_mut().iter_mut().zip(d.data()) {
                *a += b;
            }
        }
        flux.push(acc);
    }
    let projected = leray_project(&VectorField::new(flux)?);
    Ok(projected.map(dealias))
}

/// Componentwise Duhamel integral of a vector series (starting at 0).
pub fn vector_duhamel(
    forcing: &TimeSeries<VectorField>,
    t_eval: &[f64],
    alpha: Alpha,
) -> Result<TimeSeries<VectorField>> {
    let n = forcing.snapshots()[0].dim();
    let parts = (0..n)
        .into_par_iter()
        .map(|j| {
            let comp = forcing.map(|v| v.component(j).clone());
            duhamel(&comp, t_eval, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    let snaps = (0..t_eval.len())
        .map(|k| VectorField::new(parts.iter().map(|s| s.snapshots()[k].clone()).collect()))
        .collect::<Result<_>>()?;
    TimeSeries::new(t_eval.to_vec(), snaps)
}

/// `B(u,v)(t) = ∫_0^t e^{-(t-s)(-Δ)^α} P∇·(u ⊗ v)(s) ds` at `t_eval`,
/// with the flux linear between the shared sample times. Output is
/// spectral.
pub fn bilinear_b(
    u: &TimeSeries<VectorField>,
    v: &TimeSeries<VectorField>,
    alpha: Alpha,
    t_eval: &[f64],
) -> Result<TimeSeries<VectorField>> {
    same_times(u.times(), v.times())?;
    alpha.check_grid(u.snapshots()[0].grid())?;
    let flux = u
        .snapshots()
        .par_iter()
        .zip(v.snapshots().par_iter())
        .map(|(a, b)| projected_flux(a, b))
        .collect::<Result<Vec<_>>>()?;
    let flux = TimeSeries::new(u.times().to_vec(), flux)?;
    vector_duhamel(&flux, t_eval, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::gradient;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::new(2, n, 2.0 * PI).unwrap())
    }

    fn random_vector(g: &Arc<GridSpec>, seed: u64) -> VectorField {
        let comps = (0..g.dim())
            .map(|j| {
                synthesize_field(
                    g,
                    &Recipe::RandomBandlimited { seed: seed * 7 + j as u64, j_min: 0, j_max: 2 },
                )
                .unwrap()
            })
            .collect();
        VectorField::new(comps).unwrap()
    }

    fn max_diff(a: &VectorField, b: &VectorField) -> f64 {
        a.sub(b)
            .unwrap()
            .components()
            .iter()
            .map(|c| c.to_physical().max_abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn projection_kills_gradients_and_keeps_solenoidal_fields() {
        let g = grid(32);
        let phi = synthesize_field(&g, &Recipe::RandomBandlimited { seed: 2, j_min: 0, j_max: 2 })
            .unwrap();
        let grad = VectorField::new(gradient(&phi)).unwrap();
        assert!(leray_project(&grad).to_physical().magnitude().max_abs() < 1e-12);
        let tg = VectorField::taylor_green(&g, 1.0).unwrap();
        assert!(max_diff(&leray_project(&tg), &tg) < 1e-12);
        let u = random_vector(&g, 4);
        let pu = leray_project(&u);
        assert!(max_diff(&leray_project(&pu), &pu) < 1e-12);
        assert!(max_divergence(&pu) < 1e-12);
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let g = grid(32);
        let phi = synthesize_field(&g, &Recipe::RandomBandlimited { seed: 9, j_min: 0, j_max: 2 })
            .unwrap();
        let div = divergence(&VectorField::new(gradient(&phi)).unwrap()).to_physical();
        // Δφ = -(-Δ)φ; nothing sits at Nyquist for this band.
        let lap = phi.apply_real_symbol(|i| -g.xi_norm2()[i]).into_physical();
        assert!(div.sub(&lap).unwrap().max_abs() < 1e-12);
        assert!(max_divergence(&VectorField::taylor_green(&g, 1.0).unwrap()) < 1e-12);
        assert_eq!(max_divergence(&VectorField::zeros(g, Representation::Physical)), 0.0);
    }

    #[test]
    fn dealiasing_keeps_a_third() {
        assert_eq!(dealias_cutoff(64), 21);
        assert_eq!(dealias_cutoff(32), 10);
        let g = grid(32);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![11, 0] }).unwrap();
        assert!(dealias(&f).max_abs() < 1e-13);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![10, -10] }).unwrap();
        assert!(dealias(&f).sub(&f).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn taylor_green_flux_is_a_gradient() {
        let g = grid(32);
        let tg = VectorField::taylor_green(&g, 0.3).unwrap();
        let flux = projected_flux(&tg, &tg).unwrap();
        assert!(flux.to_physical().magnitude().max_abs() < 1e-13);
    }

    #[test]
    fn mismatched_components_are_rejected() {
        let g = grid(16);
        let a = Field::zeros(g.clone(), Representation::Physical);
        let b = Field::zeros(g.clone(), Representation::Spectral);
        assert!(VectorField::new(vec![a.clone(), b]).is_err());
        assert!(VectorField::new(vec![a]).is_err());
    }
}
