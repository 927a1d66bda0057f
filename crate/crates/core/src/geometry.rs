//! Unique-geodesic-space contract and the algebra of geodesics.
//!
//! A [`SpacePoint`] carries its space tag; every operation checks that its
//! arguments share a space. Geodesics are endpoint pairs evaluated on
//! demand. The difference of two geodesics moves the subtrahend to the
//! minuend's start with the transport map, and the quotient metric compares
//! geodesics by how they transport a fixed reference point.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, MatrixKind, SymmetricMatrixPoint};
use crate::sphere::{self, UnitCompositionPoint};
use crate::wasserstein::{self, QuantileCurve};

/// Two points closer than this in the native metric are considered equal.
pub const POINT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceId {
    Wasserstein,
    Sphere,
    Frobenius,
}

impl SpaceId {
    /// Whether transporting through an intermediate point equals direct
    /// transport (`Γ_{ζ,β} ∘ Γ_{α,ζ} = Γ_{α,β}`). Not assumed for the sphere.
    pub fn is_path_independent(self) -> bool {
        matches!(self, SpaceId::Wasserstein | SpaceId::Frobenius)
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceId::Wasserstein => "wasserstein",
            SpaceId::Sphere => "sphere",
            SpaceId::Frobenius => "frobenius",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpacePoint {
    Wasserstein(QuantileCurve),
    Sphere(UnitCompositionPoint),
    Frobenius(SymmetricMatrixPoint),
}

impl SpacePoint {
    pub fn space_id(&self) -> SpaceId {
        match self {
            SpacePoint::Wasserstein(_) => SpaceId::Wasserstein,
            SpacePoint::Sphere(_) => SpaceId::Sphere,
            SpacePoint::Frobenius(_) => SpaceId::Frobenius,
        }
    }

    /// Grid size, ambient dimension, or matrix order, depending on the space.
    pub fn dimension(&self) -> usize {
        match self {
            SpacePoint::Wasserstein(c) => c.grid_size(),
            SpacePoint::Sphere(p) => p.dim(),
            SpacePoint::Frobenius(m) => m.size(),
        }
    }

    /// Equality up to [`POINT_TOLERANCE`] in the native metric.
    pub fn approx_eq(&self, other: &SpacePoint) -> Result<bool> {
        Ok(distance(self, other)? < POINT_TOLERANCE)
    }

    pub fn as_quantile_curve(&self) -> Option<&QuantileCurve> {
        match self {
            SpacePoint::Wasserstein(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_sphere_point(&self) -> Option<&UnitCompositionPoint> {
        match self {
            SpacePoint::Sphere(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&SymmetricMatrixPoint> {
        match self {
            SpacePoint::Frobenius(m) => Some(m),
            _ => None,
        }
    }
}

impl From<QuantileCurve> for SpacePoint {
    fn from(c: QuantileCurve) -> Self {
        SpacePoint::Wasserstein(c)
    }
}

impl From<UnitCompositionPoint> for SpacePoint {
    fn from(p: UnitCompositionPoint) -> Self {
        SpacePoint::Sphere(p)
    }
}

impl From<SymmetricMatrixPoint> for SpacePoint {
    fn from(m: SymmetricMatrixPoint) -> Self {
        SpacePoint::Frobenius(m)
    }
}

pub(crate) fn check_same_space(a: &SpacePoint, b: &SpacePoint) -> Result<()> {
    if a.space_id() != b.space_id() {
        return Err(Error::SpaceMismatch {
            left: a.space_id(),
            right: b.space_id(),
        });
    }
    Ok(())
}

/// Native metric of the space both points live in.
pub fn distance(a: &SpacePoint, b: &SpacePoint) -> Result<f64> {
    match (a, b) {
        (SpacePoint::Wasserstein(x), SpacePoint::Wasserstein(y)) => wasserstein::w2_distance(x, y),
        (SpacePoint::Sphere(x), SpacePoint::Sphere(y)) => sphere::sphere_distance(x, y),
        (SpacePoint::Frobenius(x), SpacePoint::Frobenius(y)) => matrix::frobenius_distance(x, y),
        _ => Err(Error::SpaceMismatch {
            left: a.space_id(),
            right: b.space_id(),
        }),
    }
}

/// Non-fatal conditions raised while transporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum TransportWarning {
    /// The transported point left the positive orthant of the sphere.
    OrthantExit { min_coordinate: f64 },
    /// The transported matrix no longer satisfies its kind's constraints.
    KindViolation { kind: MatrixKind, rule: String },
}

impl fmt::Display for TransportWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransportWarning::OrthantExit { min_coordinate } => write!(
                f,
                "transported point left the positive orthant (min coordinate {min_coordinate:e})"
            ),
            TransportWarning::KindViolation { kind, rule } => {
                write!(f, "transported {kind} matrix violates its kind: {rule}")
            }
        }
    }
}

/// Geodesic transport map `Γ_{α,β}(ω)` together with any warning raised.
pub fn transport_with_warning(
    alpha: &SpacePoint,
    beta: &SpacePoint,
    omega: &SpacePoint,
) -> Result<(SpacePoint, Option<TransportWarning>)> {
    check_same_space(alpha, beta)?;
    check_same_space(alpha, omega)?;
    match (alpha, beta, omega) {
        (SpacePoint::Wasserstein(a), SpacePoint::Wasserstein(b), SpacePoint::Wasserstein(w)) => {
            Ok((wasserstein::wasserstein_transport(a, b, w)?.into(), None))
        }
        (SpacePoint::Sphere(a), SpacePoint::Sphere(b), SpacePoint::Sphere(w)) => {
            let out = sphere::sphere_transport(a, b, w)?;
            let warning = out.left_orthant.then(|| TransportWarning::OrthantExit {
                min_coordinate: out.point.min_coordinate(),
            });
            Ok((out.point.into(), warning))
        }
        (SpacePoint::Frobenius(a), SpacePoint::Frobenius(b), SpacePoint::Frobenius(w)) => {
            let out = matrix::matrix_transport(a, b, w)?;
            let warning = out
                .kind_violation
                .map(|(kind, rule)| TransportWarning::KindViolation { kind, rule });
            Ok((out.point.into(), warning))
        }
        _ => unreachable!("space tags checked above"),
    }
}

/// Geodesic transport map `Γ_{α,β}(ω)`; warnings are dropped.
pub fn transport(alpha: &SpacePoint, beta: &SpacePoint, omega: &SpacePoint) -> Result<SpacePoint> {
    transport_with_warning(alpha, beta, omega).map(|(p, _)| p)
}

/// Constant-speed geodesic `γ_{start,end}` stored by its endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    start: SpacePoint,
    end: SpacePoint,
}

impl Geodesic {
    pub fn new(start: SpacePoint, end: SpacePoint) -> Result<Self> {
        check_same_space(&start, &end)?;
        Ok(Self { start, end })
    }

    pub fn start(&self) -> &SpacePoint {
        &self.start
    }

    pub fn end(&self) -> &SpacePoint {
        &self.end
    }

    pub fn space_id(&self) -> SpaceId {
        self.start.space_id()
    }

    pub fn into_endpoints(self) -> (SpacePoint, SpacePoint) {
        (self.start, self.end)
    }

    pub fn length(&self) -> Result<f64> {
        distance(&self.start, &self.end)
    }

    /// `γ(t)` for `t ∈ [0, 1]`.
    pub fn evaluate(&self, t: f64) -> Result<SpacePoint> {
        evaluate_geodesic(self, t)
    }

    /// `Γ_{start,end}(omega)`.
    pub fn transport(&self, omega: &SpacePoint) -> Result<SpacePoint> {
        transport(&self.start, &self.end, omega)
    }

    /// The same geodesic traversed backwards.
    pub fn reversed(&self) -> Geodesic {
        Geodesic {
            start: self.end.clone(),
            end: self.start.clone(),
        }
    }

    /// `γ_{start, other.end}` when `other` begins where `self` ends.
    pub fn concat(&self, other: &Geodesic) -> Result<Geodesic> {
        if !self.end.approx_eq(&other.start)? {
            return Err(Error::InvalidPoint {
                rule: "concatenated geodesics must share the junction point".into(),
            });
        }
        Geodesic::new(self.start.clone(), other.end.clone())
    }
}

pub fn evaluate_geodesic(g: &Geodesic, t: f64) -> Result<SpacePoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange { name: "t", value: t });
    }
    match (&g.start, &g.end) {
        (SpacePoint::Wasserstein(a), SpacePoint::Wasserstein(b)) => Ok(wasserstein::interpolate(a, b, t)?.into()),
        (SpacePoint::Sphere(a), SpacePoint::Sphere(b)) => Ok(sphere::slerp(a, b, t)?.into()),
        (SpacePoint::Frobenius(a), SpacePoint::Frobenius(b)) => Ok(matrix::interpolate(a, b, t)?.into()),
        _ => unreachable!("geodesic endpoints share a space"),
    }
}

/// `⊖ sub ⊕ min`: moves `sub` to start at `min.start` and returns the
/// geodesic from the moved endpoint to `min.end`.
pub fn geodesic_difference(sub: &Geodesic, min: &Geodesic) -> Result<Geodesic> {
    Ok(geodesic_difference_with_warning(sub, min)?.0)
}

pub(crate) fn geodesic_difference_with_warning(
    sub: &Geodesic,
    min: &Geodesic,
) -> Result<(Geodesic, Option<TransportWarning>)> {
    let (moved, warning) = transport_with_warning(&sub.start, &sub.end, &min.start)?;
    Ok((Geodesic::new(moved, min.end.clone())?, warning))
}

/// `d_G` with respect to `reference`: the distance between the two
/// geodesics' transports of the reference point.
pub fn quotient_distance(g1: &Geodesic, g2: &Geodesic, reference: &SpacePoint) -> Result<f64> {
    check_same_space(g1.start(), g2.start())?;
    let a = g1.transport(reference)?;
    let b = g2.transport(reference)?;
    distance(&a, &b)
}

/// Equivalence class of geodesics under the transport relation, pinned to
/// the reference point its quotient distance is measured at.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicClass {
    representative: Geodesic,
    reference_point: SpacePoint,
}

impl GeodesicClass {
    pub fn new(representative: Geodesic, reference_point: SpacePoint) -> Result<Self> {
        check_same_space(representative.start(), &reference_point)?;
        Ok(Self {
            representative,
            reference_point,
        })
    }

    pub fn representative(&self) -> &Geodesic {
        &self.representative
    }

    pub fn reference_point(&self) -> &SpacePoint {
        &self.reference_point
    }

    /// Fails with [`Error::ReferenceMismatch`] unless both classes use the
    /// same reference point.
    pub fn distance(&self, other: &GeodesicClass) -> Result<f64> {
        if !self.reference_point.approx_eq(&other.reference_point)? {
            return Err(Error::ReferenceMismatch);
        }
        quotient_distance(&self.representative, &other.representative, &self.reference_point)
    }
}
