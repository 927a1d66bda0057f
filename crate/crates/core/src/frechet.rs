//! Empirical Fréchet means.
//!
//! The Wasserstein and Frobenius spaces are convex in their linear
//! coordinates (quantile functions, matrix entries), so the weighted mean is
//! the entrywise weighted average. The sphere has no closed form; its mean is
//! found by fixed-point iteration on the tangent-space average.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{distance, SpaceId, SpacePoint};
use crate::matrix::{MatrixKind, SymmetricMatrixPoint};
use crate::panel::{PanelDataset, UnitSelector};
use crate::sphere::{self, UnitCompositionPoint};
use crate::wasserstein::QuantileCurve;

pub const SPHERE_TOLERANCE: f64 = 1e-10;
pub const SPHERE_MAX_ITERATIONS: usize = 200;
const EXTRINSIC_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetResult {
    pub mean: SpacePoint,
    /// Weighted mean squared distance from the data to `mean`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn validated_weights(n: usize, weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let Some(w) = weights else {
        return Ok(vec![1.0; n]);
    };
    if w.len() != n {
        return Err(Error::InvalidWeights(format!("{} weights for {n} points", w.len())));
    }
    if let Some(x) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {x} is not a nonnegative number")));
    }
    if !(w.iter().sum::<f64>() > 0.0) {
        return Err(Error::InvalidWeights("weights sum to zero".into()));
    }
    Ok(w.to_vec())
}

/// Weighted mean squared distance `Σ w_i d²(x_i, c) / Σ w_i`.
pub fn frechet_objective(points: &[&SpacePoint], weights: Option<&[f64]>, candidate: &SpacePoint) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let w = validated_weights(points.len(), weights)?;
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for (p, wi) in points.iter().zip(&w) {
        let d = distance(p, candidate)?;
        num.add(wi * d * d);
        den.add(*wi);
    }
    Ok(num.value() / den.value())
}

/// Weighted Fréchet mean of `points`.
pub fn frechet_mean(points: &[SpacePoint], weights: Option<&[f64]>) -> Result<FrechetResult> {
    let refs: Vec<&SpacePoint> = points.iter().collect();
    frechet_mean_of(&refs, weights)
}

/// [`frechet_mean`] over borrowed points.
pub fn frechet_mean_of(points: &[&SpacePoint], weights: Option<&[f64]>) -> Result<FrechetResult> {
    let first = *points.first().ok_or(Error::EmptyInput)?;
    let w = validated_weights(points.len(), weights)?;
    let space = first.space_id();
    let dim = first.dimension();
    for p in points {
        if p.space_id() != space {
            return Err(Error::SpaceMismatch {
                left: space,
                right: p.space_id(),
            });
        }
        if p.dimension() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dimension(),
            });
        }
    }
    let (mean, iterations, converged) = match space {
        SpaceId::Wasserstein => (wasserstein_mean(points, &w)?, 0, true),
        SpaceId::Frobenius => (matrix_mean(points, &w), 0, true),
        SpaceId::Sphere => sphere_mean(points, &w)?,
    };
    let objective = frechet_objective(points, Some(&w), &mean)?;
    Ok(FrechetResult {
        mean,
        objective,
        iterations,
        converged,
    })
}

fn weighted_entrywise(rows: impl Iterator<Item = (usize, f64)> + Clone, len: usize, value: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut total = CompensatedSum::default();
    for (_, w) in rows.clone() {
        total.add(w);
    }
    let total = total.value();
    (0..len)
        .map(|k| {
            let mut acc = CompensatedSum::default();
            for (i, w) in rows.clone() {
                acc.add(w * value(i, k));
            }
            acc.value() / total
        })
        .collect()
}

fn wasserstein_mean(points: &[&SpacePoint], w: &[f64]) -> Result<SpacePoint> {
    let curves: Vec<&QuantileCurve> = points.iter().map(|p| p.as_quantile_curve().unwrap()).collect();
    let m = curves[0].grid_size();
    let values = weighted_entrywise(w.iter().copied().enumerate(), m, |i, k| curves[i].values()[k]);
    Ok(QuantileCurve::repaired(values)?.into())
}

fn matrix_mean(points: &[&SpacePoint], w: &[f64]) -> SpacePoint {
    let mats: Vec<&SymmetricMatrixPoint> = points.iter().map(|p| p.as_matrix().unwrap()).collect();
    let m = mats[0].size();
    let kind = if mats.iter().all(|x| x.kind() == mats[0].kind()) {
        mats[0].kind()
    } else {
        MatrixKind::Free
    };
    let flat = weighted_entrywise(w.iter().copied().enumerate(), m * m, |i, k| mats[i].entries()[(k / m, k % m)]);
    let entries = DMatrix::from_fn(m, m, |j, k| flat[j * m + k]);
    SymmetricMatrixPoint::from_arithmetic(entries, kind).0.into()
}

/// Weighted tangent-space mean of the data at `base`.
fn tangent_mean(base: &UnitCompositionPoint, points: &[&UnitCompositionPoint], w: &[f64], total: f64) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; base.dim()];
    for (p, wi) in points.iter().zip(w) {
        if *wi == 0.0 {
            continue;
        }
        let v = sphere::log_map(base, p).map_err(|_| Error::NonConvergence {
            iterations: 0,
            residual: f64::NAN,
        })?;
        for (a, x) in acc.iter_mut().zip(v) {
            *a += wi * x;
        }
    }
    Ok(acc.into_iter().map(|a| a / total).collect())
}

fn sphere_mean(points: &[&SpacePoint], w: &[f64]) -> Result<(SpacePoint, usize, bool)> {
    let pts: Vec<&UnitCompositionPoint> = points.iter().map(|p| p.as_sphere_point().unwrap()).collect();
    let total: f64 = w.iter().sum();
    let d = pts[0].dim();

    let mut extrinsic = vec![0.0; d];
    for (p, wi) in pts.iter().zip(w) {
        for (e, c) in extrinsic.iter_mut().zip(p.coords()) {
            *e += wi * c;
        }
    }
    let mut current = if sphere::norm(&extrinsic) / total < EXTRINSIC_FLOOR {
        let first = pts.iter().zip(w).find(|(_, wi)| **wi > 0.0).unwrap().0;
        (*first).clone()
    } else {
        UnitCompositionPoint::normalized(extrinsic)?
    };

    let mut residual = f64::INFINITY;
    for iteration in 0..SPHERE_MAX_ITERATIONS {
        let step = tangent_mean(&current, &pts, w, total).map_err(|_| Error::NonConvergence {
            iterations: iteration,
            residual,
        })?;
        residual = sphere::norm(&step);
        if residual < SPHERE_TOLERANCE {
            return Ok((current.into(), iteration, true));
        }
        current = sphere::exp_map(&current, &step)?;
    }
    let step = tangent_mean(&current, &pts, w, total)?;
    let converged = sphere::norm(&step) < SPHERE_TOLERANCE;
    Ok((current.into(), SPHERE_MAX_ITERATIONS, converged))
}

/// Fréchet mean of the outcomes at `period` over the units `selector` picks.
pub fn group_means(panel: &PanelDataset, period: usize, selector: &UnitSelector) -> Result<FrechetResult> {
    if period >= panel.n_periods() {
        return Err(Error::InvalidPanel(format!("period {period} is out of range")));
    }
    let points: Vec<&SpacePoint> = panel
        .select(selector)
        .into_iter()
        .map(|i| panel.outcome(i, period))
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyGroup {
            group: selector.to_string(),
            period,
        });
    }
    frechet_mean_of(&points, None)
}
