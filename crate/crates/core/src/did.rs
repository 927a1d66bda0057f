//! Two-period geodesic difference-in-differences.
//!
//! The four group-period Fréchet means are estimated, the control group's
//! trend `γ_{ν̂₀₀, ν̂₀₁}` is transported onto the treated pre-period mean
//! `ν̂₁₀`, and the effect is the geodesic from that counterfactual to the
//! treated post-period mean `ν̂₁₁`.

use crate::error::{Error, Result};
use crate::frechet::{frechet_mean_of, FrechetResult};
use crate::geometry::{distance, transport_with_warning, Geodesic, SpacePoint, TransportWarning};
use crate::panel::PanelDataset;

/// The four group-period Fréchet means `ν̂_{d,t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeans {
    pub control_pre: SpacePoint,
    pub control_post: SpacePoint,
    pub treated_pre: SpacePoint,
    pub treated_post: SpacePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GattEstimate {
    /// `γ_{ν̂′₁₁, ν̂₁₁}`; the estimated effect is this geodesic.
    pub effect: Geodesic,
    /// Length of `effect`, a scalar summary only.
    pub magnitude: f64,
    pub means: GroupMeans,
    pub n_treated: usize,
    pub n_control: usize,
    pub warnings: Vec<TransportWarning>,
}

impl GattEstimate {
    /// `ν̂′₁₁ = Γ_{ν̂₀₀, ν̂₀₁}(ν̂₁₀)`.
    pub fn counterfactual_start(&self) -> &SpacePoint {
        self.effect.start()
    }
}

fn group_mean(panel: &PanelDataset, units: &[usize], period: usize, label: &str) -> Result<FrechetResult> {
    if units.is_empty() {
        return Err(Error::EmptyGroup {
            group: label.to_string(),
            period,
        });
    }
    let points: Vec<&SpacePoint> = units.iter().map(|&i| panel.outcome(i, period)).collect();
    frechet_mean_of(&points, None)
}

/// Geodesic DID between periods `pre` and `post`, with the treated group
/// given by `treated(unit)`.
pub fn estimate_between(
    panel: &PanelDataset,
    pre: usize,
    post: usize,
    treated: impl Fn(usize) -> bool,
) -> Result<GattEstimate> {
    if pre >= panel.n_periods() || post >= panel.n_periods() {
        return Err(Error::InvalidPanel(format!(
            "periods ({pre}, {post}) out of range for a panel with {} periods",
            panel.n_periods()
        )));
    }
    let (treated_units, control_units): (Vec<usize>, Vec<usize>) = (0..panel.n_units()).partition(|&i| treated(i));

    let ((control_pre, control_post), (treated_pre, treated_post)) = rayon::join(
        || {
            rayon::join(
                || group_mean(panel, &control_units, pre, "control"),
                || group_mean(panel, &control_units, post, "control"),
            )
        },
        || {
            rayon::join(
                || group_mean(panel, &treated_units, pre, "treated"),
                || group_mean(panel, &treated_units, post, "treated"),
            )
        },
    );
    let means = GroupMeans {
        control_pre: control_pre?.mean,
        control_post: control_post?.mean,
        treated_pre: treated_pre?.mean,
        treated_post: treated_post?.mean,
    };

    let (counterfactual, warning) = transport_with_warning(&means.control_pre, &means.control_post, &means.treated_pre)?;
    let effect = Geodesic::new(counterfactual, means.treated_post.clone())?;
    let magnitude = distance(effect.start(), effect.end())?;
    Ok(GattEstimate {
        effect,
        magnitude,
        means,
        n_treated: treated_units.len(),
        n_control: control_units.len(),
        warnings: warning.into_iter().collect(),
    })
}

/// GATT estimate on a two-period panel; `D_i = D_{i,1}`.
pub fn estimate_gatt(panel: &PanelDataset) -> Result<GattEstimate> {
    if panel.n_periods() != 2 {
        return Err(Error::InvalidPanel(format!(
            "the two-period estimator needs exactly 2 periods, found {}",
            panel.n_periods()
        )));
    }
    estimate_between(panel, 0, 1, |i| panel.is_treated(i, 1))
}

/// Pre-trend check: runs the estimator on two untreated periods
/// `pre_a < pre_b`, contrasting eventually-treated units with never-treated
/// ones. A small magnitude is consistent with parallel trends.
pub fn placebo_pretrend(panel: &PanelDataset, pre_a: usize, pre_b: usize) -> Result<GattEstimate> {
    if pre_a >= pre_b {
        return Err(Error::InvalidPanel(format!(
            "placebo periods must be increasing, got ({pre_a}, {pre_b})"
        )));
    }
    if pre_b >= panel.n_periods() {
        return Err(Error::InvalidPanel(format!("period {pre_b} is out of range")));
    }
    if let Some(i) = (0..panel.n_units()).find(|&i| panel.is_treated(i, pre_b)) {
        return Err(Error::InvalidPanel(format!(
            "unit {} is already treated at placebo period {pre_b}",
            panel.unit_ids()[i]
        )));
    }
    estimate_between(panel, pre_a, pre_b, |i| panel.first_treated(i).is_some())
}
