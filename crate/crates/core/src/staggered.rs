//! Group-time effects under staggered adoption.
//!
//! For a cohort first treated at `g`, anticipation horizon `δ` and
//! evaluation period `t`, the counterfactual untreated mean is built by
//! starting from the cohort's mean at `g − δ − 1` and transporting it along
//! each consecutive step of the comparison cohort's trend up to `t`. When the
//! space's transport is path-independent the chain collapses to a single
//! transport along `γ_{ν̂₀,g−δ−1, ν̂₀,t}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frechet::group_means;
use crate::geometry::{distance, transport_with_warning, Geodesic, SpacePoint, TransportWarning};
use crate::panel::{PanelDataset, UnitSelector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    NeverTreated,
    NotYetTreated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorForm {
    Recursive,
    Shortcut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupTimeCell {
    pub g: usize,
    pub t: usize,
    pub delta: usize,
    pub comparison: Comparison,
    pub estimator_form: EstimatorForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupTimeGatt {
    pub cell: GroupTimeCell,
    /// `γ_{β̂_t, ν̂_{1,t}}`.
    pub effect: Geodesic,
    pub magnitude: f64,
    /// `β̂_{g−δ−1}, …, β̂_t` for the recursive form; the two endpoints of
    /// the single transport for the shortcut form.
    pub beta_path: Vec<SpacePoint>,
    pub warnings: Vec<TransportWarning>,
}

/// `ḡ`: the last cohort if every unit is eventually treated, else `None` (∞).
pub fn last_cohort(panel: &PanelDataset) -> Option<usize> {
    if panel.has_never_treated() {
        None
    } else {
        panel.cohorts().last().copied()
    }
}

/// Cohorts eligible for estimation: observed cohorts other than `ḡ`,
/// restricted to `{1 + δ, …, T + δ}`.
pub fn eligible_cohorts(panel: &PanelDataset, delta: usize) -> Vec<usize> {
    let g_bar = last_cohort(panel);
    let last = panel.last_period();
    panel
        .cohorts()
        .into_iter()
        .filter(|&g| Some(g) != g_bar && g > delta && g <= last + delta)
        .collect()
}

fn inadmissible(cell: &GroupTimeCell, reason: impl Into<String>) -> Error {
    Error::InadmissibleCell {
        g: cell.g,
        t: cell.t,
        reason: reason.into(),
    }
}

/// Checks the identification side conditions for `cell`.
pub fn check_admissible(panel: &PanelDataset, cell: &GroupTimeCell) -> Result<()> {
    let (g, t, delta) = (cell.g, cell.t, cell.delta);
    let last = panel.last_period();
    if !eligible_cohorts(panel, delta).contains(&g) {
        return Err(inadmissible(cell, format!("{g} is not an eligible cohort for delta = {delta}")));
    }
    if t < 1 || t + delta > last {
        return Err(inadmissible(cell, format!("t must lie in 1..={}", last.saturating_sub(delta))));
    }
    if t + delta < g {
        return Err(inadmissible(cell, "t precedes the anticipation window, where no effect is estimated"));
    }
    if cell.comparison == Comparison::NotYetTreated {
        if let Some(g_bar) = last_cohort(panel) {
            if t + delta >= g_bar {
                return Err(inadmissible(
                    cell,
                    format!("no not-yet-treated units remain at t + delta (last cohort {g_bar})"),
                ));
            }
        }
    }
    if cell.estimator_form == EstimatorForm::Shortcut && !panel.space().is_path_independent() {
        return Err(inadmissible(
            cell,
            format!("the {} space has no path-independent transport; use the recursive form", panel.space()),
        ));
    }
    Ok(())
}

/// Default estimator form for a panel's space.
pub fn default_form(panel: &PanelDataset) -> EstimatorForm {
    if panel.space().is_path_independent() {
        EstimatorForm::Shortcut
    } else {
        EstimatorForm::Recursive
    }
}

/// All admissible `(g, t)` cells for one comparison scheme, in `(g, t)` order.
pub fn enumerate_cells(
    panel: &PanelDataset,
    delta: usize,
    comparison: Comparison,
    estimator_form: EstimatorForm,
) -> Vec<GroupTimeCell> {
    let last = panel.last_period();
    let mut cells = Vec::new();
    for g in eligible_cohorts(panel, delta) {
        for t in 1..=last.saturating_sub(delta) {
            let cell = GroupTimeCell {
                g,
                t,
                delta,
                comparison,
                estimator_form,
            };
            if check_admissible(panel, &cell).is_ok() {
                cells.push(cell);
            }
        }
    }
    cells
}

fn comparison_selector(cell: &GroupTimeCell) -> UnitSelector {
    match cell.comparison {
        Comparison::NeverTreated => UnitSelector::NeverTreated,
        Comparison::NotYetTreated => UnitSelector::NotYetTreated {
            untreated_at: cell.t + cell.delta,
            excluding_cohort: cell.g,
        },
    }
}

fn comparison_mean(panel: &PanelDataset, cell: &GroupTimeCell, period: usize) -> Result<SpacePoint> {
    group_means(panel, period, &comparison_selector(cell))
        .map(|r| r.mean)
        .map_err(|e| match e {
            Error::EmptyGroup { period, .. } => Error::EmptyCohort { period },
            other => other,
        })
}

/// Estimates the group-time effect `τ(g, t)` for one admissible cell.
pub fn estimate_group_time_gatt(panel: &PanelDataset, cell: &GroupTimeCell) -> Result<GroupTimeGatt> {
    check_admissible(panel, cell)?;
    let base = cell.g - cell.delta - 1;
    let cohort = UnitSelector::Cohort(cell.g);
    let treated_base = group_means(panel, base, &cohort)?.mean;
    let treated_now = group_means(panel, cell.t, &cohort)?.mean;

    let mut warnings = Vec::new();
    let beta_path = match cell.estimator_form {
        EstimatorForm::Recursive => {
            let mut path = vec![treated_base];
            let mut prev = comparison_mean(panel, cell, base)?;
            for s in (base + 1)..=cell.t {
                let next = comparison_mean(panel, cell, s)?;
                let (beta, warning) = transport_with_warning(&prev, &next, path.last().unwrap())?;
                warnings.extend(warning);
                path.push(beta);
                prev = next;
            }
            path
        }
        EstimatorForm::Shortcut => {
            let from = comparison_mean(panel, cell, base)?;
            let to = comparison_mean(panel, cell, cell.t)?;
            let (beta, warning) = transport_with_warning(&from, &to, &treated_base)?;
            warnings.extend(warning);
            vec![treated_base, beta]
        }
    };
    let effect = Geodesic::new(beta_path.last().unwrap().clone(), treated_now)?;
    let magnitude = distance(effect.start(), effect.end())?;
    Ok(GroupTimeGatt {
        cell: *cell,
        effect,
        magnitude,
        beta_path,
        warnings,
    })
}

/// Estimates every admissible cell in parallel; each cell's outcome is
/// reported separately so one empty cohort does not sink the rest.
pub fn estimate_all_cells(
    panel: &PanelDataset,
    delta: usize,
    comparison: Comparison,
    estimator_form: EstimatorForm,
) -> Vec<(GroupTimeCell, Result<GroupTimeGatt>)> {
    enumerate_cells(panel, delta, comparison, estimator_form)
        .into_par_iter()
        .map(|cell| {
            let result = estimate_group_time_gatt(panel, &cell);
            (cell, result)
        })
        .collect()
}
