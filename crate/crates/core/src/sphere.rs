//! Positive orthant of the unit sphere, the square-root image of the simplex.
//!
//! Angles are computed as `2 atan2(|a - b|, |a + b|)`, which equals
//! `arccos(a'b)` but keeps full precision for nearly coincident points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on unit norm for points accepted from outside the crate.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Slack below zero tolerated on each coordinate.
pub const ORTHANT_SLACK: f64 = 1e-12;
/// Tangent vectors shorter than this cannot be normalised.
pub const TANGENT_FLOOR: f64 = 1e-12;
/// Slack on the share sum accepted by [`embed_composition`].
pub const SHARE_SUM_TOLERANCE: f64 = 1e-8;
const NEGATIVE_SHARE_FLOOR: f64 = -1e-8;

/// Unit vector, normally in the closed positive orthant.
///
/// Transported points may leave the orthant (the geodesic structure is
/// inherited from the full sphere); [`UnitCompositionPoint::in_positive_orthant`]
/// reports whether a point still represents a composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitCompositionPoint {
    coords: Vec<f64>,
}

impl UnitCompositionPoint {
    /// Accepts a vector of unit norm (within 1e-10) in the positive orthant.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let point = Self::on_sphere(coords)?;
        if let Some(j) = point.coords.iter().position(|&c| c < -ORTHANT_SLACK) {
            return Err(Error::InvalidPoint {
                rule: format!(
                    "coordinate {j} = {} lies outside the positive orthant",
                    point.coords[j]
                ),
            });
        }
        Ok(point)
    }

    /// Accepts any unit vector, inside the orthant or not.
    pub fn on_sphere(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint {
                rule: "coordinates must be finite".into(),
            });
        }
        let norm = norm(&coords);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidPoint {
                rule: format!("norm {norm} differs from 1"),
            });
        }
        Ok(Self { coords })
    }

    /// Normalises `coords` to unit length.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidPoint {
                rule: "cannot normalise a zero or non-finite vector".into(),
            });
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / n).collect(),
        })
    }

    /// Standard basis vector `e_axis` in `R^dim`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[axis] = 1.0;
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn in_positive_orthant(&self) -> bool {
        self.coords.iter().all(|&c| c >= -ORTHANT_SLACK)
    }

    pub fn min_coordinate(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for UnitCompositionPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::on_sphere(coords)
    }
}

impl From<UnitCompositionPoint> for Vec<f64> {
    fn from(p: UnitCompositionPoint) -> Self {
        p.coords
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_dims(a: &UnitCompositionPoint, b: &UnitCompositionPoint) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Great-circle distance, in `[0, π]`.
pub fn sphere_distance(a: &UnitCompositionPoint, b: &UnitCompositionPoint) -> Result<f64> {
    check_dims(a, b)?;
    Ok(angle(&a.coords, &b.coords))
}

/// Component of `v` orthogonal to the unit vector `base`.
fn tangent_projection(v: &[f64], base: &[f64]) -> Vec<f64> {
    let c = dot(v, base);
    v.iter().zip(base).map(|(x, b)| x - c * b).collect()
}

/// `cos(θ) base + sin(θ) dir` for a unit tangent `dir`, renormalised.
fn rotate(base: &[f64], dir: &[f64], theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let v: Vec<f64> = base.iter().zip(dir).map(|(b, d)| c * b + s * d).collect();
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Point at fraction `t` along the minimising great-circle arc from `a` to `b`.
pub fn slerp(a: &UnitCompositionPoint, b: &UnitCompositionPoint, t: f64) -> Result<UnitCompositionPoint> {
    check_dims(a, b)?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let theta = angle(&a.coords, &b.coords);
    let v = tangent_projection(&b.coords, &a.coords);
    let nv = norm(&v);
    if theta == 0.0 || nv == 0.0 {
        return Ok(a.clone());
    }
    let dir: Vec<f64> = v.iter().map(|x| x / nv).collect();
    Ok(UnitCompositionPoint {
        coords: rotate(&a.coords, &dir, theta * t),
    })
}

/// Riemannian log map at `base`: the tangent vector pointing to `target`
/// with length equal to their distance.
pub fn log_map(base: &UnitCompositionPoint, target: &UnitCompositionPoint) -> Result<Vec<f64>> {
    check_dims(base, target)?;
    let theta = angle(&base.coords, &target.coords);
    let v = tangent_projection(&target.coords, &base.coords);
    let nv = norm(&v);
    if theta == 0.0 || nv == 0.0 {
        if theta > std::f64::consts::FRAC_PI_2 {
            // antipodal: no unique minimising direction
            return Err(Error::DegenerateTangent { norm: nv });
        }
        return Ok(vec![0.0; base.dim()]);
    }
    Ok(v.into_iter().map(|x| theta * x / nv).collect())
}

/// Riemannian exp map at `base`.
pub fn exp_map(base: &UnitCompositionPoint, tangent: &[f64]) -> Result<UnitCompositionPoint> {
    if tangent.len() != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: tangent.len(),
        });
    }
    let len = norm(tangent);
    if len == 0.0 {
        return Ok(base.clone());
    }
    let dir: Vec<f64> = tangent.iter().map(|x| x / len).collect();
    Ok(UnitCompositionPoint {
        coords: rotate(&base.coords, &dir, len),
    })
}

/// Result of [`sphere_transport`]; `left_orthant` flags a result outside
/// the positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereTransport {
    pub point: UnitCompositionPoint,
    pub left_orthant: bool,
}

/// Moves `omega` by the angle of `alpha → beta` in the direction of that
/// arc's tangent, projected onto the tangent space at `omega`.
pub fn sphere_transport(
    alpha: &UnitCompositionPoint,
    beta: &UnitCompositionPoint,
    omega: &UnitCompositionPoint,
) -> Result<SphereTransport> {
    check_dims(alpha, beta)?;
    check_dims(alpha, omega)?;
    let theta = angle(&alpha.coords, &beta.coords);
    let v_ab = tangent_projection(&beta.coords, &alpha.coords);
    if theta == 0.0 || norm(&v_ab) == 0.0 {
        return Ok(SphereTransport {
            point: omega.clone(),
            left_orthant: false,
        });
    }
    let v = tangent_projection(&v_ab, &omega.coords);
    let nv = norm(&v);
    if nv < TANGENT_FLOOR {
        return Err(Error::DegenerateTangent { norm: nv });
    }
    let dir: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let point = UnitCompositionPoint {
        coords: rotate(&omega.coords, &dir, theta),
    };
    let left_orthant = !point.in_positive_orthant() && omega.in_positive_orthant();
    Ok(SphereTransport { point, left_orthant })
}

/// Square-root embedding of a composition. Shares are renormalised to sum
/// to one; tiny negative entries (above -1e-8) are clipped to zero.
pub fn embed_composition(shares: &[f64]) -> Result<UnitCompositionPoint> {
    if shares.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((j, s)) = shares
        .iter()
        .enumerate()
        .find(|(_, s)| !s.is_finite() || **s < NEGATIVE_SHARE_FLOOR)
    {
        return Err(Error::InvalidPoint {
            rule: format!("share {j} = {s} is negative"),
        });
    }
    let total: f64 = shares.iter().map(|s| s.max(0.0)).sum();
    if (total - 1.0).abs() > SHARE_SUM_TOLERANCE {
        return Err(Error::InvalidPoint {
            rule: format!("shares sum to {total}, not 1"),
        });
    }
    let coords = shares.iter().map(|s| (s.max(0.0) / total).sqrt()).collect();
    Ok(UnitCompositionPoint { coords })
}

/// Inverse of [`embed_composition`]: squares the coordinates.
pub fn unembed(point: &UnitCompositionPoint) -> Vec<f64> {
    point.coords.iter().map(|c| c * c).collect()
}
