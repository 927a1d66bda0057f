//! Random points and panels shared by the integration tests.
#![allow(dead_code)]

use geodid::{PanelDataset, QuantileCurve, SpaceId, SpacePoint, SymmetricMatrixPoint, UnitCompositionPoint};
use geodid::MatrixKind;
use nalgebra::DMatrix;
use rand::Rng;

pub const SPACES: [SpaceId; 3] = [SpaceId::Wasserstein, SpaceId::Sphere, SpaceId::Frobenius];

pub const GRID: usize = 40;
pub const SPHERE_DIM: usize = 4;
pub const MATRIX_DIM: usize = 3;

/// Strictly increasing curve: random location, then positive increments.
pub fn random_curve<R: Rng>(rng: &mut R) -> QuantileCurve {
    let mut x = rng.random_range(-3.0..3.0);
    let scale = rng.random_range(0.1..2.0);
    let values = (0..GRID)
        .map(|_| {
            x += scale * rng.random_range(0.01..1.0);
            x
        })
        .collect();
    QuantileCurve::new(values).unwrap()
}

/// Point in the open positive orthant.
pub fn random_sphere<R: Rng>(rng: &mut R) -> UnitCompositionPoint {
    let coords: Vec<f64> = (0..SPHERE_DIM).map(|_| rng.random_range(0.01..1.0)).collect();
    UnitCompositionPoint::normalized(coords).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R) -> SymmetricMatrixPoint {
    let upper: Vec<f64> = (0..MATRIX_DIM * MATRIX_DIM).map(|_| rng.random_range(-5.0..5.0)).collect();
    let entries = DMatrix::from_fn(MATRIX_DIM, MATRIX_DIM, |j, k| upper[j.min(k) * MATRIX_DIM + j.max(k)]);
    SymmetricMatrixPoint::new(entries, MatrixKind::Free).unwrap()
}

pub fn random_point<R: Rng>(space: SpaceId, rng: &mut R) -> SpacePoint {
    match space {
        SpaceId::Wasserstein => random_curve(rng).into(),
        SpaceId::Sphere => random_sphere(rng).into(),
        SpaceId::Frobenius => random_matrix(rng).into(),
    }
}

/// Panel with `periods` periods whose units belong to the given cohorts.
pub fn random_panel<R: Rng>(space: SpaceId, groups: &[Option<usize>], periods: usize, rng: &mut R) -> PanelDataset {
    let ids = (0..groups.len()).map(|i| format!("u{i}")).collect();
    let outcomes = groups
        .iter()
        .map(|_| (0..periods).map(|_| random_point(space, rng)).collect())
        .collect();
    PanelDataset::from_groups(ids, outcomes, groups).unwrap()
}

/// Two-period panel with at least `min_group` treated and control units.
pub fn random_two_period<R: Rng>(space: SpaceId, rng: &mut R, min_group: usize) -> PanelDataset {
    let n_treated = rng.random_range(min_group..min_group + 6);
    let n_control = rng.random_range(min_group..min_group + 6);
    let groups: Vec<Option<usize>> = (0..n_treated).map(|_| Some(1)).chain((0..n_control).map(|_| None)).collect();
    random_panel(space, &groups, 2, rng)
}
