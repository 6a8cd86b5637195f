//! The fractional heat propagator `e^{-t(-Δ)^α}` and friends, all realised
//! as Fourier multipliers on the grid lattice.

mod duhamel;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{contamination, Field, GridSpec, Representation, CONTAMINATION_LIMIT};

pub use duhamel::{duhamel, duhamel_modes, phi1, phi2};

/// Dissipation order α together with the spatial dimension it acts in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alpha {
    alpha: f64,
    n: usize,
}

impl Alpha {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Exponent(format!("α = {alpha} must be positive")));
        }
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension {n} not in {{1,2,3}}")));
        }
        Ok(Alpha { alpha, n })
    }

    /// Same α in the dimension of `grid`.
    pub fn for_grid(alpha: f64, grid: &GridSpec) -> Result<Self> {
        Self::new(alpha, grid.dim())
    }

    pub fn value(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Scaling weight `n / 2α`.
    pub fn sigma(&self) -> f64 {
        self.n as f64 / (2.0 * self.alpha)
    }

    /// `|ξ|^{2α}` from `|ξ|²`.
    pub fn symbol(&self, xi_norm2: f64) -> f64 {
        if xi_norm2 == 0.0 {
            0.0
        } else {
            xi_norm2.powf(self.alpha)
        }
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.n {
            return Err(Error::InvalidGrid(format!(
                "α was declared for dimension {} but the grid has dimension {}",
                self.n,
                grid.dim()
            )));
        }
        Ok(())
    }
}

/// `|ξ|^{2α}` for every lattice mode.
pub fn dissipation_rates(grid: &GridSpec, alpha: Alpha) -> Vec<f64> {
    grid.xi_norm2().iter().map(|&r2| alpha.symbol(r2)).collect()
}

type Symbol = dyn Fn(&GridSpec, usize) -> Complex64 + Send + Sync;

/// A named Fourier multiplier, evaluated per flat lattice index.
#[derive(Clone)]
pub struct Multiplier {
    label: String,
    symbol: Arc<Symbol>,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier").field("label", &self.label).finish()
    }
}

/// Homogeneous `|ξ|^β` or Bessel-type `(1 + |ξ|²)^{β/2}` derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeKind {
    Homogeneous,
    Inhomogeneous,
}

impl Multiplier {
    pub fn new(
        label: impl Into<String>,
        symbol: impl Fn(&GridSpec, usize) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Multiplier {
            label: label.into(),
            symbol: Arc::new(symbol),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, grid: &GridSpec, flat: usize) -> Complex64 {
        (self.symbol)(grid, flat)
    }

    pub fn apply(&self, f: &Field) -> Field {
        let grid = f.grid_arc().clone();
        f.apply_symbol(|i| self.eval(&grid, i))
    }

    /// Product symbol `self * other` (both act on the same mode).
    pub fn then(&self, other: &Multiplier) -> Multiplier {
        let (a, b) = (self.symbol.clone(), other.symbol.clone());
        Multiplier {
            label: format!("{} * {}", other.label, self.label),
            symbol: Arc::new(move |g, i| a(g, i) * b(g, i)),
        }
    }

    /// `e^{-t|ξ|^{2α}}`.
    pub fn semigroup(t: f64, alpha: Alpha) -> Multiplier {
        Multiplier::new(format!("exp(-{t}|xi|^{})", 2.0 * alpha.value()), move |g, i| {
            Complex64::new((-t * alpha.symbol(g.xi_norm2()[i])).exp(), 0.0)
        })
    }

    /// `|ξ|^β` (zero at ξ = 0) or `(1 + |ξ|²)^{β/2}`.
    pub fn fractional(beta: f64, kind: DerivativeKind) -> Multiplier {
        match kind {
            DerivativeKind::Homogeneous => Multiplier::new(format!("|xi|^{beta}"), move |g, i| {
                let r2 = g.xi_norm2()[i];
                let v = if r2 == 0.0 { 0.0 } else { r2.powf(0.5 * beta) };
                Complex64::new(v, 0.0)
            }),
            DerivativeKind::Inhomogeneous => {
                Multiplier::new(format!("(1+|xi|^2)^{}", 0.5 * beta), move |g, i| {
                    Complex64::new((1.0 + g.xi_norm2()[i]).powf(0.5 * beta), 0.0)
                })
            }
        }
    }

    /// `i ξ_j / |ξ|`, zero at ξ = 0 and on Nyquist modes.
    pub fn riesz(axis: usize) -> Multiplier {
        Multiplier::new(format!("R_{axis}"), move |g, i| {
            let r2 = g.xi_norm2()[i];
            if r2 == 0.0 || g.is_nyquist(i) {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, g.wavevector(i)[axis] / r2.sqrt())
        })
    }

    /// `i ξ_j`, zero on Nyquist modes.
    pub fn partial(axis: usize) -> Multiplier {
        Multiplier::new(format!("d_{axis}"), move |g, i| {
            if g.is_nyquist(i) {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(0.0, g.wavevector(i)[axis])
        })
    }
}

/// `e^{-t(-Δ)^α} f`.
pub fn apply_semigroup(f: &Field, t: f64, alpha: Alpha) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    alpha.check_grid(f.grid())?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let g = f.grid_arc().clone();
    Ok(f.apply_real_symbol(|i| (-t * alpha.symbol(g.xi_norm2()[i])).exp()))
}

/// Kernel `K_t^α` centred at the box centre, in physical representation.
/// Fails when more than [`CONTAMINATION_LIMIT`] of its mass leaves the
/// central half-box.
pub fn kernel(grid: &Arc<GridSpec>, t: f64, alpha: Alpha) -> Result<Field> {
    let k = kernel_unchecked(grid, t, alpha)?;
    let fraction = contamination(&k);
    if fraction > CONTAMINATION_LIMIT {
        return Err(Error::Contamination {
            fraction,
            limit: CONTAMINATION_LIMIT,
        });
    }
    Ok(k)
}

/// [`kernel`] without the contamination guard.
pub fn kernel_unchecked(grid: &Arc<GridSpec>, t: f64, alpha: Alpha) -> Result<Field> {
    if !(t > 0.0) {
        return Err(Error::NegativeTime(t));
    }
    alpha.check_grid(grid)?;
    // Continuous transform e^{-t|ξ|^{2α}} shifted to the centre, sampled on
    // the lattice: c_k = N^{n/2} L^{-n} e^{-t|ξ|^{2α}} e^{-i ξ.c}.
    let scale = (grid.len() as f64).sqrt() / grid.volume();
    let c = grid.center();
    let spec = Field::from_spectrum(grid.clone(), |i| {
        let xi = grid.wavevector(i);
        let phase: f64 = (0..grid.dim()).map(|j| xi[j] * c[j]).sum();
        let amp = scale * (-t * alpha.symbol(grid.xi_norm2()[i])).exp();
        Complex64::from_polar(amp, -phase)
    });
    Ok(spec.into_physical().real_part())
}

fn spectral_l2(f: &Field) -> f64 {
    f.to_spectral()
        .data()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Relative size of the ξ = 0 coefficient; used by zero-mean preconditions.
pub(crate) fn mean_fraction(f: &Field) -> f64 {
    let s = f.to_spectral();
    let total = spectral_l2(&s);
    if total == 0.0 {
        0.0
    } else {
        s.data()[0].norm() / total
    }
}

/// Tolerance on [`mean_fraction`] below which a field counts as zero-mean.
pub(crate) const ZERO_MEAN_TOL: f64 = 1e-10;

pub(crate) fn require_zero_mean(f: &Field) -> Result<()> {
    if mean_fraction(f) > ZERO_MEAN_TOL {
        return Err(Error::NonzeroMean(f.mean().norm()));
    }
    Ok(())
}

/// `(-Δ)^{β/2} f` (homogeneous) or `(I - Δ)^{β/2} f` (inhomogeneous).
pub fn fractional_derivative(f: &Field, beta: f64, kind: DerivativeKind) -> Result<Field> {
    if beta == 0.0 {
        return Ok(f.clone());
    }
    if kind == DerivativeKind::Homogeneous && beta < 0.0 {
        require_zero_mean(f)?;
    }
    Ok(Multiplier::fractional(beta, kind).apply(f))
}

/// Riesz transform `R_j = ∂_j (-Δ)^{-1/2}`.
pub fn riesz_transform(f: &Field, axis: usize) -> Result<Field> {
    if axis >= f.grid().dim() {
        return Err(Error::Axis {
            axis,
            dim: f.grid().dim(),
        });
    }
    Ok(Multiplier::riesz(axis).apply(f))
}

/// Spectral partial derivative `∂_j f`.
pub fn partial_derivative(f: &Field, axis: usize) -> Result<Field> {
    if axis >= f.grid().dim() {
        return Err(Error::Axis {
            axis,
            dim: f.grid().dim(),
        });
    }
    Ok(Multiplier::partial(axis).apply(f))
}

/// All first partial derivatives of `f`.
pub fn gradient(f: &Field) -> Vec<Field> {
    let spec = f.to_spectral();
    (0..f.grid().dim())
        .map(|j| {
            Multiplier::partial(j)
                .apply(&spec)
                .into_repr(f.representation())
        })
        .collect()
}

/// Pointwise Euclidean magnitude `|∇f|` of a real field, physical.
pub fn gradient_magnitude(f: &Field) -> Field {
    let parts: Vec<Field> = gradient(f).into_iter().map(|g| g.into_physical()).collect();
    let grid = f.grid_arc().clone();
    let data = (0..grid.len())
        .map(|i| {
            let s: f64 = parts.iter().map(|p| p.data()[i].norm_sqr()).sum();
            Complex64::new(s.sqrt(), 0.0)
        })
        .collect();
    Field::from_data(grid, Representation::Physical, data).expect("length matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{synthesize_field, Recipe};
    use std::f64::consts::PI;

    fn grid(dim: usize, n: usize, l: f64) -> Arc<GridSpec> {
        Arc::new(GridSpec::new(dim, n, l).unwrap())
    }

    fn max_diff(a: &Field, b: &Field) -> f64 {
        let (a, b) = (a.to_physical(), b.to_physical());
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_at_time_zero_and_negative_time() {
        let g = grid(2, 16, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![2, 1] }).unwrap();
        let a = Alpha::new(0.7, 2).unwrap();
        assert_eq!(apply_semigroup(&f, 0.0, a).unwrap(), f);
        assert!(matches!(apply_semigroup(&f, -1.0, a), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn plane_wave_eigenfunction() {
        let g = grid(2, 16, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![2, 1] }).unwrap();
        let a = Alpha::new(0.7, 2).unwrap();
        let t = 0.3;
        let out = apply_semigroup(&f, t, a).unwrap();
        let factor = (-t * 5f64.powf(0.7)).exp();
        assert!(max_diff(&out, &f.scale(factor)) < 1e-13);
    }

    #[test]
    fn gaussian_heat_flow_closed_form() {
        let l = 40.0;
        let g = grid(1, 512, l);
        let c = l / 2.0;
        let f = Field::from_real_fn(g.clone(), |x| (-(x[0] - c).powi(2) / 2.0).exp());
        let a = Alpha::new(1.0, 1).unwrap();
        for t in [0.1, 0.5, 2.0] {
            let u = apply_semigroup(&f, t, a).unwrap();
            let s = 1.0 + 2.0 * t;
            let mut err: f64 = 0.0;
            for i in 0..g.len() {
                if !g.in_central_half_box(i) {
                    continue;
                }
                let x = g.position(i)[0] - c;
                let exact = s.powf(-0.5) * (-x * x / (2.0 * s)).exp();
                err = err.max((u.data()[i].re - exact).abs());
            }
            assert!(err < 1e-8, "t = {t}: {err:e}");
        }
    }

    #[test]
    fn kernel_unit_mass_and_l2_norm() {
        let g = grid(2, 64, 4.0);
        let a = Alpha::new(1.0, 2).unwrap();
        let t = 0.01;
        let k = kernel(&g, t, a).unwrap();
        let mass: f64 = k.data().iter().map(|c| c.re).sum::<f64>() * g.cell_volume();
        assert!((mass - 1.0).abs() < 1e-10);
        let l2 = (k.data().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell_volume()).sqrt();
        let exact = (8.0 * PI * t).powf(-0.5);
        assert!(((l2 - exact) / exact).abs() < 5e-3, "{l2} vs {exact}");
        // A kernel spread over the whole box trips the guard.
        assert!(matches!(kernel(&g, 1.0, a), Err(Error::Contamination { .. })));
    }

    #[test]
    fn kernel_scaling_at_matched_points() {
        for (alpha, n, t, l1) in [(1.0f64, 1, 0.2f64, 40.0), (1.0, 2, 0.05, 40.0), (2.0, 1, 0.3, 100.0)] {
            let a = Alpha::new(alpha, n).unwrap();
            let lt = l1 * t.powf(1.0 / (2.0 * alpha));
            let g1 = grid(n, 128, l1);
            let gt = grid(n, 128, lt);
            let k1 = kernel(&g1, 1.0, a).unwrap();
            let kt = kernel(&gt, t, a).unwrap();
            let factor = t.powf(-(n as f64) / (2.0 * alpha));
            let peak = k1.max_abs() * factor;
            for i in 0..g1.len() {
                let lhs = kt.data()[i].re;
                let rhs = factor * k1.data()[i].re;
                assert!((lhs - rhs).abs() < 1e-6 * peak);
            }
        }
    }

    #[test]
    fn fractional_derivative_examples() {
        let g = grid(2, 32, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![3, -4] }).unwrap();
        let d = fractional_derivative(&f, 1.5, DerivativeKind::Homogeneous).unwrap();
        assert!(max_diff(&d, &f.scale(5f64.powf(1.5))) < 1e-12);
        let b = fractional_derivative(&f, 1.5, DerivativeKind::Inhomogeneous).unwrap();
        assert!(max_diff(&b, &f.scale(26f64.powf(0.75))) < 1e-11);
        assert_eq!(fractional_derivative(&f, 0.0, DerivativeKind::Homogeneous).unwrap(), f);

        let r = synthesize_field(
            &g,
            &Recipe::RandomBandlimited {
                seed: 1,
                j_min: 0,
                j_max: 3,
            },
        )
        .unwrap();
        let two = fractional_derivative(&r, 2.0, DerivativeKind::Homogeneous).unwrap();
        let once = fractional_derivative(&r, 1.0, DerivativeKind::Homogeneous).unwrap();
        let twice = fractional_derivative(&once, 1.0, DerivativeKind::Homogeneous).unwrap();
        assert!(max_diff(&two, &twice) < 1e-12 * two.max_abs().max(1.0));

        let bump = synthesize_field(&g, &Recipe::GaussianBump { center: None, width: 0.5 }).unwrap();
        assert!(matches!(
            fractional_derivative(&bump, -1.0, DerivativeKind::Homogeneous),
            Err(Error::NonzeroMean(_))
        ));
    }

    #[test]
    fn riesz_examples() {
        let g = grid(2, 32, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![3, -4] }).unwrap();
        let r0 = riesz_transform(&f, 0).unwrap();
        let expected = f.scale(1.0).apply_symbol(|_| Complex64::new(0.0, 3.0 / 5.0));
        assert!(max_diff(&r0, &expected) < 1e-13);
        assert!(riesz_transform(&f, 2).is_err());

        let r = synthesize_field(
            &g,
            &Recipe::RandomBandlimited {
                seed: 4,
                j_min: 0,
                j_max: 3,
            },
        )
        .unwrap();
        let mut acc = Field::zeros(g.clone(), Representation::Physical);
        for j in 0..2 {
            let rj = riesz_transform(&riesz_transform(&r, j).unwrap(), j).unwrap();
            assert!(rj.max_imag() < 1e-12);
            acc = acc.add(&rj).unwrap();
        }
        assert!(max_diff(&acc, &r.scale(-1.0)) < 1e-12);
    }
}
