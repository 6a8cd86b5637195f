use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use fracheat::grid::{synthesize_field, GridSpec, Recipe};
use fracheat::norms::{besov_norm, bmo_norm, lp_norm, sobolev_norm, DyadicPartition};
use fracheat::Field;

fn grid(n: usize) -> Arc<GridSpec> {
    Arc::new(GridSpec::new(2, n, 2.0 * PI).unwrap())
}

fn field(g: &Arc<GridSpec>, seed: u64, j_max: i32) -> Field {
    synthesize_field(g, &Recipe::RandomBandlimited { seed, j_min: 0, j_max }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn holder_monotone_on_normalized_box(
        seed in 0u64..10_000,
        p1 in 1.0f64..8.0,
        gap in 0.0f64..8.0,
        length in 0.5f64..20.0,
    ) {
        let g = Arc::new(GridSpec::new(2, 32, length).unwrap());
        let j_min = g.dxi().log2().floor() as i32;
        let f = synthesize_field(&g, &Recipe::RandomBandlimited { seed, j_min, j_max: j_min + 2 })
            .unwrap()
            .into_physical();
        let p2 = p1 + gap;
        let vol = g.volume();
        let a = vol.powf(-1.0 / p1) * lp_norm(&f, p1).unwrap();
        let b = vol.powf(-1.0 / p2) * lp_norm(&f, p2).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
        let sup = lp_norm(&f, f64::INFINITY).unwrap();
        prop_assert!(b <= sup * (1.0 + 1e-12));
    }

    #[test]
    fn bmo_bounded_by_twice_sup(seed in 0u64..10_000) {
        let g = grid(32);
        let f = field(&g, seed, 3).into_physical();
        prop_assert!(bmo_norm(&f) <= 2.0 * f.max_abs());
    }

    #[test]
    fn bmo_invariant_under_half_box_shifts(seed in 0u64..10_000, axis in 0usize..2) {
        // Every dyadic side divides N/2, so the cube family maps onto itself.
        let g = grid(32);
        let f = field(&g, seed, 3).into_physical();
        let shifted = f.shift_cells(axis, 16).unwrap();
        let (a, b) = (bmo_norm(&f), bmo_norm(&shifted));
        prop_assert!((a - b).abs() <= 1e-13 * a);
    }
}

#[test]
fn partition_of_unity() {
    let g = grid(128);
    let part = DyadicPartition::for_grid(&g).unwrap();
    assert!(part.unity_residual(&g) < 1e-12);
}

/// Extremes over in-window lattice modes of
/// `Σ_j 2^{2js} ψ_j(|ξ|)² / |ξ|^{2s}`, the squared Besov/Sobolev ratio of a
/// single mode.
fn symbol_range(g: &GridSpec, part: &DyadicPartition, s: f64, lo: f64, hi: f64) -> (f64, f64) {
    g.xi_norm2()
        .iter()
        .map(|r2| r2.sqrt())
        .filter(|r| (lo..=hi).contains(r))
        .map(|r| {
            let num: f64 = part
                .bands()
                .map(|j| 2f64.powf(2.0 * j as f64 * s) * DyadicPartition::psi(j, r).powi(2))
                .sum();
            num / r.powf(2.0 * s)
        })
        .fold((f64::INFINITY, 0.0), |(a, b), m| (a.min(m), b.max(m)))
}

#[test]
fn besov_22_is_equivalent_to_sobolev() {
    let g = grid(64);
    let part = DyadicPartition::for_grid(&g).unwrap();
    for s in [0.0, 0.5, 1.0, 1.5] {
        let (lo, hi) = symbol_range(&g, &part, s, 2.0, 16.0);
        for seed in 0..6 {
            let f = synthesize_field(&g, &Recipe::RandomBandlimited { seed, j_min: 1, j_max: 3 })
                .unwrap();
            let b = besov_norm(&f, s, 2.0, 2.0, true, &part).unwrap();
            let h = sobolev_norm(&f, s, 2.0, true).unwrap();
            let ratio2 = (b / h).powi(2);
            assert!(
                ratio2 >= lo * (1.0 - 1e-12) && ratio2 <= hi * (1.0 + 1e-12),
                "s = {s}: ratio² {ratio2} outside [{lo}, {hi}]"
            );
        }
    }
}
