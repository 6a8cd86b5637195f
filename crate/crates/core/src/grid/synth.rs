use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Field, GridSpec};
use crate::error::{Error, Result};

/// Deterministic test-data generators.
///
/// Every recipe is a pure function of `(grid, recipe)`; random recipes carry
/// their seed. Localised recipes (`GaussianBump`, `RandomPackets`) can be
/// dilated analytically about the box centre with [`Recipe::dilate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    /// `exp(-|x - c|^2 / width^2)`; `c` defaults to the box centre.
    GaussianBump {
        center: Option<Vec<f64>>,
        width: f64,
    },
    /// `exp(i xi_k . x)` for integer lattice mode `k`.
    PlaneWave { k: Vec<i64> },
    /// Taylor–Green stream function `A sin(κ x1) sin(κ x2)`, κ = 2π/L.
    TaylorGreen { amplitude: f64 },
    /// Real, zero-mean field with i.i.d. Gaussian coefficients on every
    /// lattice mode with `2^j_min <= |xi| <= 2^(j_max+1)`, scaled to unit RMS.
    RandomBandlimited { seed: u64, j_min: i32, j_max: i32 },
    /// `(-width^2 Δ)^order exp(-|x - c|^2 / width^2)` centred in the box.
    Packet { width: f64, order: u32 },
    /// `sum_i a_i (-width^2 Δ)^order exp(-|x - c - width u_i|^2 / width^2)`
    /// with seeded amplitudes `a_i` and offsets `u_i in [-1, 1]^n`. Real,
    /// localised near the box centre, and zero mean when `order >= 1`.
    RandomPackets {
        seed: u64,
        count: usize,
        width: f64,
        order: u32,
    },
}

impl Recipe {
    /// Recipe for `f_λ(x) = f(c + λ (x - c))`, `c` the box centre.
    pub fn dilate(&self, lambda: f64, grid: &GridSpec) -> Result<Recipe> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidRecipe(format!("dilation factor {lambda} must be positive")));
        }
        match self {
            Recipe::GaussianBump { center, width } => {
                let c = grid.center();
                let center = center.as_ref().map(|v| {
                    v.iter()
                        .enumerate()
                        .map(|(j, x)| c[j] + (x - c[j]) / lambda)
                        .collect()
                });
                Ok(Recipe::GaussianBump {
                    center,
                    width: width / lambda,
                })
            }
            Recipe::Packet { width, order } => Ok(Recipe::Packet {
                width: width / lambda,
                order: *order,
            }),
            Recipe::RandomPackets {
                seed,
                count,
                width,
                order,
            } => Ok(Recipe::RandomPackets {
                seed: *seed,
                count: *count,
                width: width / lambda,
                order: *order,
            }),
            other => Err(Error::InvalidRecipe(format!(
                "{} has no analytic dilation",
                other.name()
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Recipe::GaussianBump { .. } => "gaussian_bump",
            Recipe::PlaneWave { .. } => "plane_wave",
            Recipe::TaylorGreen { .. } => "taylor_green",
            Recipe::RandomBandlimited { .. } => "random_bandlimited",
            Recipe::Packet { .. } => "packet",
            Recipe::RandomPackets { .. } => "random_packets",
        }
    }

    /// Seed of random recipes.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Recipe::RandomBandlimited { seed, .. } | Recipe::RandomPackets { seed, .. } => {
                Some(*seed)
            }
            _ => None,
        }
    }

    /// Same recipe with a different seed (no-op for deterministic recipes).
    pub fn with_seed(&self, new_seed: u64) -> Recipe {
        let mut out = self.clone();
        match &mut out {
            Recipe::RandomBandlimited { seed, .. } | Recipe::RandomPackets { seed, .. } => {
                *seed = new_seed
            }
            _ => {}
        }
        out
    }
}

/// Samples a recipe on a grid. Output is in physical representation.
pub fn synthesize_field(grid: &Arc<GridSpec>, recipe: &Recipe) -> Result<Field> {
    match recipe {
        Recipe::GaussianBump { center, width } => gaussian_bump(grid, center.as_deref(), *width),
        Recipe::PlaneWave { k } => plane_wave(grid, k),
        Recipe::TaylorGreen { amplitude } => taylor_green_stream(grid, *amplitude),
        Recipe::RandomBandlimited { seed, j_min, j_max } => {
            random_bandlimited(grid, *seed, *j_min, *j_max)
        }
        Recipe::Packet { width, order } => {
            check_width(grid, *width)?;
            Ok(packet_sum(grid, &[(1.0, [0.0; 3])], *width, *order))
        }
        Recipe::RandomPackets {
            seed,
            count,
            width,
            order,
        } => random_packets(grid, *seed, *count, *width, *order),
    }
}

fn check_width(grid: &GridSpec, width: f64) -> Result<()> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidRecipe(format!("width {width} must be positive")));
    }
    if width > grid.length() / 4.0 {
        return Err(Error::InvalidRecipe(format!(
            "width {width} exceeds L/4 = {}; the bump would leak across the periodic boundary",
            grid.length() / 4.0
        )));
    }
    Ok(())
}

fn gaussian_bump(grid: &Arc<GridSpec>, center: Option<&[f64]>, width: f64) -> Result<Field> {
    check_width(grid, width)?;
    let mut c = grid.center();
    if let Some(v) = center {
        if v.len() != grid.dim() {
            return Err(Error::InvalidRecipe(format!(
                "center has {} coordinates, grid has dimension {}",
                v.len(),
                grid.dim()
            )));
        }
        for (j, x) in v.iter().enumerate() {
            if !(0.0..=grid.length()).contains(x) {
                return Err(Error::InvalidRecipe(format!("center coordinate {x} outside the box")));
            }
            c[j] = *x;
        }
    }
    let w2 = width * width;
    Ok(Field::from_real_fn(grid.clone(), |x| {
        let r2: f64 = (0..3).map(|j| (x[j] - c[j]).powi(2)).sum();
        (-r2 / w2).exp()
    }))
}

fn plane_wave(grid: &Arc<GridSpec>, k: &[i64]) -> Result<Field> {
    if k.len() != grid.dim() {
        return Err(Error::InvalidRecipe(format!(
            "mode has {} components, grid has dimension {}",
            k.len(),
            grid.dim()
        )));
    }
    let half = (grid.size() / 2) as i64;
    if k.iter().any(|&kj| kj.abs() >= half) {
        return Err(Error::InvalidRecipe(format!(
            "mode {k:?} is at or beyond the Nyquist index {half}"
        )));
    }
    let scale = grid.dxi();
    let xi: Vec<f64> = k.iter().map(|&kj| kj as f64 * scale).collect();
    Ok(Field::from_fn(grid.clone(), |x| {
        let phase: f64 = xi.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        Complex64::from_polar(1.0, phase)
    }))
}

fn taylor_green_stream(grid: &Arc<GridSpec>, amplitude: f64) -> Result<Field> {
    if grid.dim() < 2 {
        return Err(Error::InvalidRecipe("taylor_green needs n >= 2".into()));
    }
    let kappa = grid.dxi();
    Ok(Field::from_real_fn(grid.clone(), |x| {
        amplitude * (kappa * x[0]).sin() * (kappa * x[1]).sin()
    }))
}

/// Flat index of the mode `-k`.
pub(crate) fn mirror_index(grid: &GridSpec, flat: usize) -> usize {
    let idx = grid.multi_index(flat);
    let n = grid.size();
    let mut m = [0usize; 3];
    for axis in 0..grid.dim() {
        m[axis] = (n - idx[axis]) % n;
    }
    grid.flat_index(&m)
}

fn random_bandlimited(grid: &Arc<GridSpec>, seed: u64, j_min: i32, j_max: i32) -> Result<Field> {
    if j_min > j_max {
        return Err(Error::InvalidRecipe(format!("band j_min {j_min} > j_max {j_max}")));
    }
    let lo = 2f64.powi(j_min);
    let hi = 2f64.powi(j_max + 1);
    if hi > grid.nyquist() {
        return Err(Error::InvalidRecipe(format!(
            "band edge 2^{} = {hi} exceeds the Nyquist frequency {}",
            j_max + 1,
            grid.nyquist()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut populated = 0usize;
    for flat in 0..grid.len() {
        let rho = grid.xi_norm2()[flat].sqrt();
        if rho < lo || rho > hi || grid.is_nyquist(flat) {
            continue;
        }
        let mirror = mirror_index(grid, flat);
        if mirror < flat {
            continue;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if mirror == flat {
            spec[flat] = Complex64::new(re, 0.0);
        } else {
            spec[flat] = Complex64::new(re, im);
            spec[mirror] = Complex64::new(re, -im);
        }
        populated += 1;
    }
    if populated == 0 {
        return Err(Error::InvalidRecipe(format!(
            "band [{lo}, {hi}] contains no lattice modes"
        )));
    }
    let energy: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let rms = (energy / grid.len() as f64).sqrt();
    for c in spec.iter_mut() {
        *c /= rms;
    }
    let field = Field::from_data(grid.clone(), super::Representation::Spectral, spec)?;
    Ok(field.into_physical().real_part())
}

fn random_packets(grid: &Arc<GridSpec>, seed: u64, count: usize, width: f64, order: u32) -> Result<Field> {
    check_width(grid, width)?;
    if count == 0 {
        return Err(Error::InvalidRecipe("random_packets needs count >= 1".into()));
    }
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let packets: Vec<(f64, [f64; 3])> = (0..count)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let mut u = [0.0; 3];
            for v in u.iter_mut().take(dim) {
                *v = rng.random_range(-1.0..1.0);
            }
            (a, u)
        })
        .collect();
    Ok(packet_sum(grid, &packets, width, order))
}

/// `sum_i a_i (-w^2 Δ)^m G(x - c - w u_i)`, synthesised from the sampled
/// continuous transform so the result is exact up to aliasing.
fn packet_sum(grid: &Arc<GridSpec>, packets: &[(f64, [f64; 3])], width: f64, order: u32) -> Field {
    let dim = grid.dim();
    let c = grid.center();
    let w2 = width * width;
    let prefactor = (PI * w2).powf(dim as f64 / 2.0) * (grid.len() as f64).sqrt() / grid.volume();
    let field = Field::from_spectrum(grid.clone(), |flat| {
        if grid.is_nyquist(flat) {
            return Complex64::new(0.0, 0.0);
        }
        let xi = grid.wavevector(flat);
        let r2 = grid.xi_norm2()[flat];
        let envelope = prefactor * (w2 * r2).powi(order as i32) * (-0.25 * r2 * w2).exp();
        if envelope == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, u) in packets {
            let phase: f64 = (0..dim).map(|j| xi[j] * (c[j] + width * u[j])).sum();
            acc += *a * Complex64::from_polar(1.0, -phase);
        }
        envelope * acc
    });
    field.into_physical().real_part()
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join_f = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";");
        match self {
            Recipe::GaussianBump { center, width } => match center {
                Some(c) => write!(f, "gaussian_bump(center={}, width={width})", join_f(c)),
                None => write!(f, "gaussian_bump(width={width})"),
            },
            Recipe::PlaneWave { k } => {
                let ks = k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
                write!(f, "plane_wave(k={ks})")
            }
            Recipe::TaylorGreen { amplitude } => write!(f, "taylor_green(amplitude={amplitude})"),
            Recipe::Packet { width, order } => write!(f, "packet(width={width}, order={order})"),
            Recipe::RandomBandlimited { seed, j_min, j_max } => {
                write!(f, "random_bandlimited(seed={seed}, j_min={j_min}, j_max={j_max})")
            }
            Recipe::RandomPackets {
                seed,
                count,
                width,
                order,
            } => write!(
                f,
                "random_packets(seed={seed}, count={count}, width={width}, order={order})"
            ),
        }
    }
}

impl FromStr for Recipe {
    type Err = Error;

    /// Parses `name(key=value, ...)`; vector values are `;`-separated.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: String| Error::InvalidRecipe(msg);
        let open = s.find('(').ok_or_else(|| bad(format!("missing '(' in {s:?}")))?;
        if !s.ends_with(')') {
            return Err(bad(format!("missing ')' in {s:?}")));
        }
        let name = s[..open].trim();
        let body = &s[open + 1..s.len() - 1];
        let mut args = std::collections::BTreeMap::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("argument {part:?} is not key=value")))?;
            args.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &str| -> Result<&String> {
            args.get(key)
                .ok_or_else(|| bad(format!("{name} needs argument {key}")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse::<f64>()
                .map_err(|e| bad(format!("{key}: {e}")))
        };
        let int = |key: &str| -> Result<i64> {
            get(key)?
                .parse::<i64>()
                .map_err(|e| bad(format!("{key}: {e}")))
        };
        let recipe = match name {
            "gaussian_bump" => Recipe::GaussianBump {
                center: match args.get("center") {
                    Some(v) => Some(
                        v.split(';')
                            .map(|x| x.trim().parse::<f64>().map_err(|e| bad(format!("center: {e}"))))
                            .collect::<Result<_>>()?,
                    ),
                    None => None,
                },
                width: num("width")?,
            },
            "plane_wave" => Recipe::PlaneWave {
                k: get("k")?
                    .split(';')
                    .map(|x| x.trim().parse::<i64>().map_err(|e| bad(format!("k: {e}"))))
                    .collect::<Result<_>>()?,
            },
            "taylor_green" => Recipe::TaylorGreen {
                amplitude: num("amplitude")?,
            },
            "random_bandlimited" => Recipe::RandomBandlimited {
                seed: int("seed")? as u64,
                j_min: int("j_min")? as i32,
                j_max: int("j_max")? as i32,
            },
            "packet" => Recipe::Packet {
                width: num("width")?,
                order: int("order")? as u32,
            },
            "random_packets" => Recipe::RandomPackets {
                seed: int("seed")? as u64,
                count: int("count")? as usize,
                width: num("width")?,
                order: int("order")? as u32,
            },
            other => return Err(bad(format!("unknown recipe {other:?}"))),
        };
        Ok(recipe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{contamination, Direction};

    fn grid(dim: usize, n: usize, l: f64) -> Arc<GridSpec> {
        Arc::new(GridSpec::new(dim, n, l).unwrap())
    }

    #[test]
    fn plane_wave_example() {
        let g = grid(2, 16, 2.0 * PI);
        let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![1, 0] }).unwrap();
        for flat in 0..g.len() {
            let x = g.position(flat);
            let expected = Complex64::from_polar(1.0, x[0]);
            assert!((f.data()[flat] - expected).norm() < 1e-14);
        }
        assert!(synthesize_field(&g, &Recipe::PlaneWave { k: vec![8, 0] }).is_err());
    }

    #[test]
    fn gaussian_bump_mass_inside_half_box() {
        // Oracle: direct summation of samples against the product of
        // one-dimensional Riemann sums, and erf(4) for the continuum value.
        let l = 1.0;
        let g = grid(1, 1024, l);
        let width = l / 16.0;
        let f = synthesize_field(&g, &Recipe::GaussianBump { center: None, width }).unwrap();
        let peak = f
            .data()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap())
            .unwrap()
            .0;
        assert_eq!(g.position(peak)[0], 0.5);
        assert!(f.data().iter().all(|c| c.re > 0.0 && c.im == 0.0));
        let outside = contamination(&f);
        // Independent oracle: direct sum over sample offsets i - N/2.
        let (mut inside, mut total) = (0.0, 0.0);
        for i in -512i64..512 {
            let v = (-((i as f64 / 1024.0) / width).powi(2)).exp();
            total += v;
            if i.abs() <= 256 {
                inside += v;
            }
        }
        assert!((outside - (1.0 - inside / total)).abs() < 1e-15, "{outside:e}");
        // Continuum value 1 - erf(4) = 1.54e-8; the closed half-box on the
        // grid keeps slightly more.
        assert!(outside < 1.55e-8);
        assert!(synthesize_field(&g, &Recipe::GaussianBump { center: None, width: 0.3 }).is_err());
    }

    #[test]
    fn random_bandlimited_support_and_mean() {
        let g = grid(2, 64, 2.0 * PI);
        let r = Recipe::RandomBandlimited {
            seed: 7,
            j_min: 2,
            j_max: 4,
        };
        let f = synthesize_field(&g, &r).unwrap();
        assert!(f.max_imag() == 0.0);
        let s = f.transform(Direction::Forward).unwrap();
        let mut inside = 0.0;
        for flat in 0..g.len() {
            let rho = g.xi_norm2()[flat].sqrt();
            let e = s.data()[flat].norm_sqr();
            if !(4.0..=32.0).contains(&rho) {
                assert!(e < 1e-24, "energy {e} at |xi| = {rho}");
            } else {
                inside += e;
            }
        }
        assert!(inside > 0.0);
        assert!(f.mean().norm() < 1e-14);
        let again = synthesize_field(&g, &r).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn random_packets_are_real_zero_mean_and_localised() {
        let g = grid(2, 128, 40.0);
        let r = Recipe::RandomPackets {
            seed: 3,
            count: 4,
            width: 1.5,
            order: 2,
        };
        let f = synthesize_field(&g, &r).unwrap();
        assert!(f.mean().norm() < 1e-12 * f.max_abs());
        assert!(contamination(&f) < 1e-9);
        // Dilation by 2 equals direct evaluation at half width.
        let d = synthesize_field(&g, &r.dilate(2.0, &g).unwrap()).unwrap();
        let direct = synthesize_field(
            &g,
            &Recipe::RandomPackets {
                seed: 3,
                count: 4,
                width: 0.75,
                order: 2,
            },
        )
        .unwrap();
        assert_eq!(d, direct);
    }

    #[test]
    fn packet_matches_physical_formula() {
        // order 1, single packet: (-w^2 Δ) exp(-r^2/w^2) = (2n - 4 r^2/w^2) exp(-r^2/w^2).
        let g = grid(1, 256, 20.0);
        let w = 1.0;
        let f = synthesize_field(
            &g,
            &Recipe::RandomPackets {
                seed: 11,
                count: 1,
                width: w,
                order: 1,
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random_range(-1.0..1.0);
        let x0 = 10.0 + w * u;
        for flat in 0..g.len() {
            let x = g.position(flat)[0];
            let r2 = (x - x0).powi(2) / (w * w);
            let expected = a * (2.0 - 4.0 * r2) * (-r2).exp();
            assert!((f.data()[flat].re - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn recipe_text_round_trip() {
        let recipes = [
            Recipe::GaussianBump {
                center: Some(vec![1.5, 2.0]),
                width: 0.25,
            },
            Recipe::GaussianBump {
                center: None,
                width: 0.5,
            },
            Recipe::PlaneWave { k: vec![1, -2] },
            Recipe::Packet {
                width: 0.5,
                order: 1,
            },
            Recipe::TaylorGreen { amplitude: 0.05 },
            Recipe::RandomBandlimited {
                seed: 9,
                j_min: 1,
                j_max: 3,
            },
            Recipe::RandomPackets {
                seed: 2,
                count: 3,
                width: 1.25,
                order: 2,
            },
        ];
        for r in recipes {
            let parsed: Recipe = r.to_string().parse().unwrap();
            assert_eq!(parsed, r);
        }
        assert!("bogus(x=1)".parse::<Recipe>().is_err());
        assert!("plane_wave(k=1".parse::<Recipe>().is_err());
    }
}
