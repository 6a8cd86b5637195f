//! Test-only oracles shared by the integration targets.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;

use fracheat::grid::{synthesize_field, uniform_times, GridSpec, Recipe, Representation};
use fracheat::nse::VectorField;
use fracheat::{Field, TimeSeries};

/// Taylor–Green of amplitude `a` plus `eps` times the velocity of a seeded
/// random stream function with modes in `[1, 4]` (box length 2π).
pub fn perturbed_taylor_green(grid: &Arc<GridSpec>, a: f64, eps: f64, seed: u64) -> VectorField {
    let tg = VectorField::taylor_green(grid, a).unwrap();
    let psi = synthesize_field(grid, &Recipe::RandomBandlimited { seed, j_min: 0, j_max: 1 }).unwrap();
    let pert = VectorField::from_stream(&psi).unwrap().scale(eps);
    tg.add(&pert).unwrap()
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Fourth-order exponential time differencing (Cox–Matthews) for
/// `v_t = -(-Δ)^α v - P[(v·∇)v]`, coefficients by contour integrals
/// (Kassam–Trefethen). Written independently of the library's Picard path:
/// advective form, own dealiasing mask and projection.
pub struct Etdrk4 {
    grid: Arc<GridSpec>,
    keep: Vec<bool>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

impl Etdrk4 {
    pub fn new(grid: Arc<GridSpec>, alpha: f64, h: f64) -> Self {
        let n = grid.size() as i64;
        let dim = grid.dim();
        let len = grid.len();
        let mut s = Etdrk4 {
            keep: (0..len)
                .map(|i| grid.mode(i)[..dim].iter().all(|k| 3 * k.abs() < n))
                .collect(),
            e: vec![0.0; len],
            e2: vec![0.0; len],
            q: vec![0.0; len],
            f1: vec![0.0; len],
            f2: vec![0.0; len],
            f3: vec![0.0; len],
            grid: grid.clone(),
        };
        const M: usize = 32;
        let roots: Vec<Complex64> = (0..M)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * (j as f64 + 0.5) / M as f64 * 2.0))
            .collect();
        for i in 0..len {
            let r2 = grid.xi_norm2()[i];
            let mu = if r2 == 0.0 { 0.0 } else { r2.powf(alpha) };
            let z = -mu * h;
            s.e[i] = z.exp();
            s.e2[i] = (z / 2.0).exp();
            let (mut q, mut a, mut b, mut c) = (zero(), zero(), zero(), zero());
            for r in &roots {
                let w = z + r;
                let ew = w.exp();
                let w3 = w * w * w;
                q += ((w / 2.0).exp() - 1.0) / w;
                a += (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
                b += (2.0 + w + ew * (w - 2.0)) / w3;
                c += (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
            }
            let m = M as f64;
            s.q[i] = h * q.re / m;
            s.f1[i] = h * a.re / m;
            s.f2[i] = h * b.re / m;
            s.f3[i] = h * c.re / m;
        }
        s
    }

    fn physical(&self, data: &[Complex64]) -> Vec<Complex64> {
        let masked = data
            .iter()
            .zip(&self.keep)
            .map(|(c, &k)| if k { *c } else { zero() })
            .collect();
        Field::from_data(self.grid.clone(), Representation::Spectral, masked)
            .unwrap()
            .into_physical()
            .into_data()
    }

    /// `-P[(v·∇)v]`, spectral in and out.
    fn nonlinear(&self, v: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let dim = v.len();
        let g = &self.grid;
        let len = g.len();
        let u: Vec<Vec<Complex64>> = v.iter().map(|c| self.physical(c)).collect();
        let mut adv = vec![vec![zero(); len]; dim];
        for j in 0..dim {
            for i in 0..dim {
                let d: Vec<Complex64> = (0..len)
                    .map(|m| {
                        if g.is_nyquist(m) {
                            zero()
                        } else {
                            v[j][m] * Complex64::new(0.0, g.wavevector(m)[i])
                        }
                    })
                    .collect();
                let dp = self.physical(&d);
                for m in 0..len {
                    adv[j][m] += u[i][m] * dp[m];
                }
            }
        }
        let spec: Vec<Vec<Complex64>> = adv
            .into_iter()
            .map(|a| {
                Field::from_data(g.clone(), Representation::Physical, a)
                    .unwrap()
                    .into_spectral()
                    .into_data()
            })
            .collect();
        let mut out = vec![vec![zero(); len]; dim];
        for m in 0..len {
            if !self.keep[m] {
                continue;
            }
            let r2 = g.xi_norm2()[m];
            let xi = g.wavevector(m);
            let dot: Complex64 = if r2 == 0.0 {
                zero()
            } else {
                (0..dim).map(|j| spec[j][m] * xi[j]).sum::<Complex64>() / r2
            };
            for j in 0..dim {
                out[j][m] = -(spec[j][m] - dot * xi[j]);
            }
        }
        out
    }

    fn combine(&self, terms: &[(&[f64], &[Vec<Complex64>])]) -> Vec<Vec<Complex64>> {
        let dim = terms[0].1.len();
        let len = self.grid.len();
        (0..dim)
            .map(|j| {
                (0..len)
                    .map(|m| terms.iter().map(|(w, x)| x[j][m] * w[m]).sum())
                    .collect()
            })
            .collect()
    }

    pub fn step(&self, v: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let nv = self.nonlinear(v);
        let a = self.combine(&[(&self.e2, v), (&self.q, &nv)]);
        let na = self.nonlinear(&a);
        let b = self.combine(&[(&self.e2, v), (&self.q, &na)]);
        let nb = self.nonlinear(&b);
        let two_nb_minus_nv: Vec<Vec<Complex64>> = nb
            .iter()
            .zip(&nv)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| 2.0 * p - q).collect())
            .collect();
        let c = self.combine(&[(&self.e2, &a), (&self.q, &two_nb_minus_nv)]);
        let nc = self.nonlinear(&c);
        let two = vec![2.0; self.grid.len()];
        let f2x2: Vec<f64> = self.f2.iter().zip(&two).map(|(a, b)| a * b).collect();
        self.combine(&[
            (&self.e, v),
            (&self.f1, &nv),
            (&f2x2, &na),
            (&f2x2, &nb),
            (&self.f3, &nc),
        ])
    }
}

/// Reference solution sampled at `uniform_times(t_end, steps)`, taking
/// `refine` oracle steps per sample interval.
pub fn etdrk4_reference(
    g: &VectorField,
    alpha: f64,
    t_end: f64,
    steps: usize,
    refine: usize,
) -> TimeSeries<VectorField> {
    let grid = g.grid_arc().clone();
    let h = t_end / (steps * refine) as f64;
    let scheme = Etdrk4::new(grid.clone(), alpha, h);
    let mut v: Vec<Vec<Complex64>> = g
        .components()
        .iter()
        .map(|c| c.to_spectral().into_data())
        .collect();
    let to_field = |v: &[Vec<Complex64>]| {
        VectorField::new(
            v.iter()
                .map(|c| {
                    Field::from_data(grid.clone(), Representation::Spectral, c.clone())
                        .unwrap()
                        .into_physical()
                })
                .collect(),
        )
        .unwrap()
    };
    let mut snaps = vec![to_field(&v)];
    for _ in 0..steps {
        for _ in 0..refine {
            v = scheme.step(&v);
        }
        snaps.push(to_field(&v));
    }
    TimeSeries::new(uniform_times(t_end, steps), snaps).unwrap()
}
