use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use fracheat::grid::{synthesize_field, uniform_times, GridSpec, Recipe};
use fracheat::norms::lp_norm;
use fracheat::semigroup::{apply_semigroup, duhamel, fractional_derivative, Alpha, DerivativeKind};
use fracheat::{Field, TimeSeries};

fn grid() -> Arc<GridSpec> {
    Arc::new(GridSpec::new(2, 32, 2.0 * PI).unwrap())
}

fn field(seed: u64) -> Field {
    synthesize_field(&grid(), &Recipe::RandomBandlimited { seed, j_min: 0, j_max: 3 }).unwrap()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.to_physical().sub(&b.to_physical()).unwrap().max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semigroup_law(seed in 0u64..1000, alpha in 0.2f64..2.0, s in 0.0f64..0.2, t in 0.0f64..0.2) {
        let a = Alpha::new(alpha, 2).unwrap();
        let f = field(seed);
        let lhs = apply_semigroup(&apply_semigroup(&f, s, a).unwrap(), t, a).unwrap();
        let rhs = apply_semigroup(&f, s + t, a).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn self_adjoint(seed in 0u64..1000, alpha in 0.2f64..2.0, t in 0.0f64..0.5) {
        let a = Alpha::new(alpha, 2).unwrap();
        let (f, g) = (field(seed), field(seed + 5000));
        let lhs = apply_semigroup(&f, t, a).unwrap().inner(&g).unwrap();
        let rhs = f.inner(&apply_semigroup(&g, t, a).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn commutes_with_fractional_powers(
        seed in 0u64..1000,
        alpha in 0.2f64..2.0,
        beta in -1.0f64..2.0,
        t in 0.0f64..0.5,
    ) {
        let a = Alpha::new(alpha, 2).unwrap();
        let f = field(seed);
        let d = |x: &Field| fractional_derivative(x, beta, DerivativeKind::Homogeneous).unwrap();
        let st = |x: &Field| apply_semigroup(x, t, a).unwrap();
        prop_assert!(max_diff(&st(&d(&f)), &d(&st(&f))) < 1e-12);
    }

    #[test]
    fn l2_contraction(seed in 0u64..1000, alpha in 0.2f64..2.0, t in 0.0f64..5.0) {
        let a = Alpha::new(alpha, 2).unwrap();
        let f = field(seed);
        let before = lp_norm(&f, 2.0).unwrap();
        let after = lp_norm(&apply_semigroup(&f, t, a).unwrap().into_physical(), 2.0).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-14));
    }
}

/// Exact `∫_0^t e^{-μ(t-s)} cos(ωs) ds`.
fn cos_duhamel(mu: f64, omega: f64, t: f64) -> f64 {
    (mu * (omega * t).cos() + omega * (omega * t).sin() - mu * (-mu * t).exp())
        / (mu * mu + omega * omega)
}

#[test]
fn duhamel_is_second_order() {
    let g = grid();
    let f = synthesize_field(&g, &Recipe::PlaneWave { k: vec![2, 1] }).unwrap();
    let alpha = Alpha::new(0.8, 2).unwrap();
    let mu = 5f64.powf(0.8);
    let omega = 3.0;
    let t_end = 1.0;
    let errors: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&steps| {
            let times = uniform_times(t_end, steps);
            let forcing = TimeSeries::from_fn(times.clone(), |t| f.scale((omega * t).cos())).unwrap();
            let out = duhamel(&forcing, &times, alpha).unwrap();
            out.iter()
                .map(|(t, u)| {
                    let exact = f.scale(cos_duhamel(mu, omega, t));
                    max_diff(u, &exact)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.15, "observed order {order} from {errors:?}");
    }
}

#[test]
fn duhamel_of_constant_forcing_is_exact() {
    let g = grid();
    let f = field(3);
    let alpha = Alpha::new(1.3, 2).unwrap();
    let times = uniform_times(0.7, 5);
    let forcing = TimeSeries::from_fn(times.clone(), |_| f.clone()).unwrap();
    let out = duhamel(&forcing, &times, alpha).unwrap();
    for (t, u) in out.iter() {
        let expect = f.apply_symbol(|i| {
            let mu = alpha.symbol(g.xi_norm2()[i]);
            let w = if mu == 0.0 { t } else { -(-mu * t).exp_m1() / mu };
            Complex64::new(w, 0.0)
        });
        assert!(max_diff(u, &expect) < 1e-13);
    }
}
