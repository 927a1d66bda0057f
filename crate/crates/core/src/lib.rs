//! Difference-in-differences for outcomes in geodesic metric spaces.
//!
//! Outcomes are distributions (2-Wasserstein space of quantile functions),
//! compositions (the positive orthant of the unit sphere) or symmetric
//! matrices (Frobenius geometry). Group means are Fréchet means, trends are
//! geodesics, and the parallel-trends counterfactual is obtained by
//! transporting the control group's trend onto the treated group's
//! pre-period mean. The estimated effect is a geodesic, not a number.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod did;
pub mod error;
pub mod frechet;
pub mod geometry;
pub mod io;
pub mod matrix;
pub mod normal;
pub mod panel;
pub mod simulate;
pub mod sphere;
pub mod staggered;
pub mod wasserstein;

pub use did::{estimate_gatt, placebo_pretrend, GattEstimate, GroupMeans};
pub use error::{Error, Result};
pub use frechet::{frechet_mean, FrechetResult};
pub use geometry::{
    distance, geodesic_difference, quotient_distance, transport, Geodesic, GeodesicClass, SpaceId, SpacePoint,
    TransportWarning,
};
pub use matrix::{MatrixKind, SymmetricMatrixPoint};
pub use panel::{PanelDataset, UnitSelector};
pub use sphere::UnitCompositionPoint;
pub use staggered::{
    estimate_all_cells, estimate_group_time_gatt, Comparison, EstimatorForm, GroupTimeCell, GroupTimeGatt,
};
pub use wasserstein::QuantileCurve;
