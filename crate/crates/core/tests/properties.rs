//! Geometric properties of the three spaces and statistical properties of
//! the estimators, checked on random inputs.

mod common;

use geodid::frechet::frechet_mean;
use geodid::geometry::evaluate_geodesic;
use geodid::simulate::{run_monte_carlo, SimConfig, SimSpace};
use geodid::sphere::{sphere_distance, sphere_transport};
use geodid::staggered::{default_form, estimate_group_time_gatt, Comparison, EstimatorForm, GroupTimeCell};
use geodid::wasserstein::wasserstein_transport;
use geodid::{
    distance, estimate_gatt, quotient_distance, transport, Geodesic, MatrixKind, PanelDataset, SpaceId, SpacePoint,
    SymmetricMatrixPoint,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_curve, random_matrix, random_point, random_sphere, random_two_period, SPACES};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn sphere_transport_moves_by_the_geodesic_length(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, w) = (random_sphere(&mut r), random_sphere(&mut r), random_sphere(&mut r));
        let moved = sphere_transport(&a, &b, &w).unwrap().point;
        let norm = moved.coords().iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        let shift = sphere_distance(&w, &moved).unwrap();
        prop_assert!((shift - sphere_distance(&a, &b).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn cdf_inverts_the_quantile_curve(seed in any::<u64>()) {
        let curve = random_curve(&mut rng(seed));
        for (k, p) in curve.probabilities().enumerate() {
            prop_assert!((curve.cdf(curve.values()[k]) - p).abs() < 1e-8);
        }
    }

    #[test]
    fn wasserstein_transport_is_path_independent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let [a, b, z, w] = [(); 4].map(|_| random_curve(&mut r));
        let via = wasserstein_transport(&z, &b, &wasserstein_transport(&a, &z, &w).unwrap()).unwrap();
        let direct = wasserstein_transport(&a, &b, &w).unwrap();
        for (x, y) in via.values().iter().zip(direct.values()) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn shifted_geodesics_are_equivalent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let [a, b, c, w] = [(); 4].map(|_| random_matrix(&mut r));
        let shift = |x: &SymmetricMatrixPoint| -> SpacePoint {
            SymmetricMatrixPoint::new(x.entries() + c.entries(), MatrixKind::Free).unwrap().into()
        };
        let g1 = Geodesic::new(a.clone().into(), b.clone().into()).unwrap();
        let g2 = Geodesic::new(shift(&a), shift(&b)).unwrap();
        prop_assert!(quotient_distance(&g1, &g2, &w.into()).unwrap() < 1e-10);
    }

    #[test]
    fn geodesics_have_constant_speed(seed in any::<u64>(), s in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let mut r = rng(seed);
        for space in SPACES {
            let g = Geodesic::new(random_point(space, &mut r), random_point(space, &mut r)).unwrap();
            let length = g.length().unwrap();
            let gap = distance(&evaluate_geodesic(&g, s).unwrap(), &evaluate_geodesic(&g, t).unwrap()).unwrap();
            prop_assert!((gap - (t - s).abs() * length).abs() < 1e-9 * length.max(1.0));
        }
    }

    #[test]
    fn estimates_ignore_unit_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        for space in SPACES {
            let panel = random_two_period(space, &mut r, 2);
            let mut order: Vec<usize> = (0..panel.n_units()).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, r.random_range(0..=i));
            }
            let a = estimate_gatt(&panel).unwrap();
            let b = estimate_gatt(&panel.permuted(&order).unwrap()).unwrap();
            prop_assert!(distance(a.effect.start(), b.effect.start()).unwrap() < 1e-9);
            prop_assert!(distance(a.effect.end(), b.effect.end()).unwrap() < 1e-9);
        }
    }

    #[test]
    fn frechet_mean_minimises_the_objective(seed in any::<u64>()) {
        let mut r = rng(seed);
        for space in SPACES {
            let points: Vec<SpacePoint> = (0..5).map(|_| random_point(space, &mut r)).collect();
            let fit = frechet_mean(&points, None).unwrap();
            let refs: Vec<&SpacePoint> = points.iter().collect();
            for p in &points {
                let other = geodid::frechet::frechet_objective(&refs, None, p).unwrap();
                prop_assert!(fit.objective <= other + 1e-9);
            }
        }
    }
}

/// Empirical transport Lipschitz constants, in the point argument and in
/// the trend endpoints. Reported, and pinned where the value is exact.
#[test]
fn transport_lipschitz_report() {
    let mut r = rng(99);
    for space in SPACES {
        let mut point_ratio: f64 = 0.0;
        let mut endpoint_ratio: f64 = 0.0;
        for _ in 0..1000 {
            let [a, b, w, z, a2, b2] = [(); 6].map(|_| random_point(space, &mut r));
            let moved = distance(&transport(&a, &b, &w).unwrap(), &transport(&a, &b, &z).unwrap()).unwrap();
            point_ratio = point_ratio.max(moved / distance(&w, &z).unwrap());
            let shifted = distance(&transport(&a, &b, &w).unwrap(), &transport(&a2, &b2, &w).unwrap()).unwrap();
            endpoint_ratio =
                endpoint_ratio.max(shifted / (distance(&a, &a2).unwrap() + distance(&b, &b2).unwrap()));
        }
        println!("{space}: max point ratio {point_ratio:.6}, max endpoint ratio {endpoint_ratio:.6}");
        assert!(point_ratio.is_finite() && endpoint_ratio.is_finite());
        if space == SpaceId::Frobenius {
            assert!((point_ratio - 1.0).abs() < 1e-12);
            assert!(endpoint_ratio <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn sphere_keeps_the_recursive_form() {
    let mut r = rng(3);
    let panel = common::random_panel(SpaceId::Sphere, &[None, None, Some(1), Some(2)], 3, &mut r);
    assert_eq!(default_form(&panel), EstimatorForm::Recursive);
    let cell = GroupTimeCell {
        g: 1,
        t: 2,
        delta: 0,
        comparison: Comparison::NeverTreated,
        estimator_form: EstimatorForm::Shortcut,
    };
    assert!(estimate_group_time_gatt(&panel, &cell).is_err());
    // the shortcut/recursive agreement check does not apply: sphere
    // transport is path-dependent, so only the recursion is defined
    println!("skipped: shortcut equivalence on the sphere (path-dependent transport)");
}

#[test]
fn effectless_errors_shrink_with_n() {
    for space in [SimSpace::Network, SimSpace::Wasserstein] {
        let mut base = SimConfig::new(space, 0, 40, 17);
        base.dgp.beta = 0.0;
        let report = run_monte_carlo(&base.for_sizes(&[50, 200, 1000])).unwrap();
        let medians: Vec<f64> = report.summaries.iter().map(|s| s.median_error).collect();
        assert!(medians.windows(2).all(|w| w[1] < w[0]), "{space}: {medians:?}");
    }
}

#[test]
fn estimation_errors_shrink_with_n() {
    for space in [SimSpace::Network, SimSpace::Wasserstein] {
        let report = run_monte_carlo(&SimConfig::new(space, 0, 40, 23).for_sizes(&[50, 200, 1000])).unwrap();
        let medians: Vec<f64> = report.summaries.iter().map(|s| s.median_error).collect();
        assert!(medians.windows(2).all(|w| w[1] < w[0]), "{space}: {medians:?}");
    }
}

/// Staggered panel on 2x2 matrices in which every cohort follows the
/// never-treated trend; cohort 1 has no effect at `t = 2`.
fn effectless_staggered_panel(n: usize, r: &mut ChaCha8Rng) -> PanelDataset {
    let trend = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]);
    let mut groups = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    for i in 0..n {
        let group = [None, Some(1), Some(2)][i % 3];
        let level = DMatrix::from_fn(2, 2, |j, k| (j + k) as f64 * group.map_or(0.0, |g| g as f64));
        let row = (0..3)
            .map(|t| {
                let noise = DMatrix::from_fn(2, 2, |_, _| r.random_range(-1.0..1.0));
                let y = &level + &trend * t as f64 + (&noise + noise.transpose()) * 0.5;
                SymmetricMatrixPoint::new(y, MatrixKind::Free).unwrap().into()
            })
            .collect();
        groups.push(group);
        outcomes.push(row);
    }
    let ids = (0..n).map(|i| i.to_string()).collect();
    PanelDataset::from_groups(ids, outcomes, &groups).unwrap()
}

#[test]
fn staggered_no_effect_error_shrinks() {
    let cell = GroupTimeCell {
        g: 1,
        t: 2,
        delta: 0,
        comparison: Comparison::NeverTreated,
        estimator_form: EstimatorForm::Recursive,
    };
    let median = |n: usize| -> f64 {
        let mut r = rng(n as u64);
        let mut errors: Vec<f64> = (0..200)
            .map(|_| estimate_group_time_gatt(&effectless_staggered_panel(n, &mut r), &cell).unwrap().magnitude)
            .collect();
        errors.sort_by(f64::total_cmp);
        0.5 * (errors[99] + errors[100])
    };
    let (small, large) = (median(100), median(400));
    assert!(large < small, "{small} -> {large}");
}

#[test]
fn wasserstein_transport_rejects_constant_sources() {
    let mut r = rng(5);
    let flat = geodid::QuantileCurve::new(vec![1.0; common::GRID]).unwrap();
    let b = random_curve(&mut r);
    assert!(wasserstein_transport(&flat, &b, &b).is_err());
}
