//! Panel data: per-unit outcome sequences with staggered treatment.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{SpaceId, SpacePoint};

/// Outcomes `Y_{i,t}` for units `i` and periods `t = 0..=T`, with
/// treatment indicators `D_{i,t}`.
///
/// Treatment is irreversible and absent at period 0; every outcome lives
/// in one space with one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    unit_ids: Vec<String>,
    outcomes: Vec<Vec<SpacePoint>>,
    treatment: Vec<Vec<bool>>,
    space: SpaceId,
}

impl PanelDataset {
    pub fn new(unit_ids: Vec<String>, outcomes: Vec<Vec<SpacePoint>>, treatment: Vec<Vec<bool>>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidPanel("panel has no units".into()));
        }
        let n = outcomes.len();
        if unit_ids.len() != n || treatment.len() != n {
            return Err(Error::InvalidPanel(format!(
                "{} unit ids, {} outcome rows and {} treatment rows",
                unit_ids.len(),
                n,
                treatment.len()
            )));
        }
        let periods = outcomes[0].len();
        if periods == 0 {
            return Err(Error::InvalidPanel("panel has no periods".into()));
        }
        let space = outcomes[0][0].space_id();
        let dim = outcomes[0][0].dimension();
        for (i, (row, d)) in outcomes.iter().zip(&treatment).enumerate() {
            let id = &unit_ids[i];
            if row.len() != periods || d.len() != periods {
                return Err(Error::InvalidPanel(format!(
                    "unit {id}: expected {periods} periods of outcomes and treatment"
                )));
            }
            for (t, y) in row.iter().enumerate() {
                if y.space_id() != space || y.dimension() != dim {
                    return Err(Error::InvalidPanel(format!(
                        "unit {id}, period {t}: outcome is not a {space} point of dimension {dim}"
                    )));
                }
            }
            if d[0] {
                return Err(Error::InvalidPanel(format!("unit {id} is treated at period 0")));
            }
            if let Some(t) = (1..periods).find(|&t| d[t - 1] && !d[t]) {
                return Err(Error::InvalidPanel(format!(
                    "unit {id}: treatment reverts at period {t}"
                )));
            }
        }
        Ok(Self {
            unit_ids,
            outcomes,
            treatment,
            space,
        })
    }

    /// Two-period panel `{(Y_{i,0}, Y_{i,1}, D_i)}` with `D_{i,1} = D_i`.
    pub fn two_period(pre: Vec<SpacePoint>, post: Vec<SpacePoint>, treated: Vec<bool>) -> Result<Self> {
        if pre.len() != post.len() || pre.len() != treated.len() {
            return Err(Error::InvalidPanel("pre, post and treatment lengths differ".into()));
        }
        let ids = (0..pre.len()).map(|i| i.to_string()).collect();
        let outcomes = pre.into_iter().zip(post).map(|(a, b)| vec![a, b]).collect();
        let treatment = treated.into_iter().map(|d| vec![false, d]).collect();
        Self::new(ids, outcomes, treatment)
    }

    /// Panel whose treatment follows first-treatment periods (`None` = never).
    pub fn from_groups(unit_ids: Vec<String>, outcomes: Vec<Vec<SpacePoint>>, groups: &[Option<usize>]) -> Result<Self> {
        let periods = outcomes.first().map_or(0, Vec::len);
        let treatment = groups
            .iter()
            .map(|g| (0..periods).map(|t| g.is_some_and(|g| t >= g)).collect())
            .collect();
        Self::new(unit_ids, outcomes, treatment)
    }

    pub fn space(&self) -> SpaceId {
        self.space
    }

    pub fn n_units(&self) -> usize {
        self.outcomes.len()
    }

    /// Number of periods, `T + 1`.
    pub fn n_periods(&self) -> usize {
        self.outcomes[0].len()
    }

    /// Index of the last period, `T`.
    pub fn last_period(&self) -> usize {
        self.n_periods() - 1
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    pub fn outcome(&self, unit: usize, period: usize) -> &SpacePoint {
        &self.outcomes[unit][period]
    }

    pub fn outcomes(&self) -> &[Vec<SpacePoint>] {
        &self.outcomes
    }

    pub fn treatment(&self) -> &[Vec<bool>] {
        &self.treatment
    }

    pub fn is_treated(&self, unit: usize, period: usize) -> bool {
        self.treatment[unit][period]
    }

    /// `G_i`: first treated period, `None` for never-treated units.
    pub fn first_treated(&self, unit: usize) -> Option<usize> {
        self.treatment[unit].iter().position(|&d| d)
    }

    /// Distinct treated cohorts in increasing order.
    pub fn cohorts(&self) -> Vec<usize> {
        let mut gs: Vec<usize> = (0..self.n_units()).filter_map(|i| self.first_treated(i)).collect();
        gs.sort_unstable();
        gs.dedup();
        gs
    }

    pub fn has_never_treated(&self) -> bool {
        (0..self.n_units()).any(|i| self.first_treated(i).is_none())
    }

    /// Units matched by `selector`.
    pub fn select(&self, selector: &UnitSelector) -> Vec<usize> {
        (0..self.n_units()).filter(|&i| selector.includes(self, i)).collect()
    }

    /// Restricts the panel to the given periods, in the given order.
    pub fn restrict_periods(&self, periods: &[usize]) -> Result<Self> {
        if let Some(&t) = periods.iter().find(|&&t| t >= self.n_periods()) {
            return Err(Error::InvalidPanel(format!("period {t} is out of range")));
        }
        let outcomes = self
            .outcomes
            .iter()
            .map(|row| periods.iter().map(|&t| row[t].clone()).collect())
            .collect();
        let treatment = self
            .treatment
            .iter()
            .map(|row| periods.iter().map(|&t| row[t]).collect())
            .collect();
        Self::new(self.unit_ids.clone(), outcomes, treatment)
    }

    /// The same panel with units reordered by `order` (a permutation).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_units()];
        for &i in order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPanel("not a permutation of the units".into()));
            }
        }
        if order.len() != self.n_units() {
            return Err(Error::InvalidPanel("not a permutation of the units".into()));
        }
        Self::new(
            order.iter().map(|&i| self.unit_ids[i].clone()).collect(),
            order.iter().map(|&i| self.outcomes[i].clone()).collect(),
            order.iter().map(|&i| self.treatment[i].clone()).collect(),
        )
    }
}

/// Which units enter a group-conditional Fréchet mean.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnitSelector {
    All,
    /// `D_{i,t} = 1`.
    TreatedAt(usize),
    /// `D_{i,t} = 0`.
    UntreatedAt(usize),
    /// `G_i = g`.
    Cohort(usize),
    /// `G_i = ∞`.
    NeverTreated,
    /// `G_i < ∞`.
    EverTreated,
    /// `D_{i,s} = 0` and `G_i ≠ g`.
    NotYetTreated { untreated_at: usize, excluding_cohort: usize },
}

impl UnitSelector {
    pub fn includes(&self, panel: &PanelDataset, unit: usize) -> bool {
        match *self {
            UnitSelector::All => true,
            UnitSelector::TreatedAt(t) => panel.is_treated(unit, t),
            UnitSelector::UntreatedAt(t) => !panel.is_treated(unit, t),
            UnitSelector::Cohort(g) => panel.first_treated(unit) == Some(g),
            UnitSelector::NeverTreated => panel.first_treated(unit).is_none(),
            UnitSelector::EverTreated => panel.first_treated(unit).is_some(),
            UnitSelector::NotYetTreated {
                untreated_at,
                excluding_cohort,
            } => !panel.is_treated(unit, untreated_at) && panel.first_treated(unit) != Some(excluding_cohort),
        }
    }
}

impl fmt::Display for UnitSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitSelector::All => write!(f, "all units"),
            UnitSelector::TreatedAt(t) => write!(f, "treated at period {t}"),
            UnitSelector::UntreatedAt(t) => write!(f, "untreated at period {t}"),
            UnitSelector::Cohort(g) => write!(f, "cohort first treated at {g}"),
            UnitSelector::NeverTreated => write!(f, "never treated"),
            UnitSelector::EverTreated => write!(f, "ever treated"),
            UnitSelector::NotYetTreated {
                untreated_at,
                excluding_cohort,
            } => write!(f, "untreated at {untreated_at}, outside cohort {excluding_cohort}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymmetricMatrixPoint;

    fn s(x: f64) -> SpacePoint {
        SymmetricMatrixPoint::scalar(x).unwrap().into()
    }

    fn staggered() -> PanelDataset {
        let outcomes = (0..4).map(|i| (0..3).map(|t| s((i * 10 + t) as f64)).collect()).collect();
        PanelDataset::from_groups(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            outcomes,
            &[Some(1), Some(2), None, Some(2)],
        )
        .unwrap()
    }

    #[test]
    fn groups_and_selectors() {
        let p = staggered();
        assert_eq!(p.n_periods(), 3);
        assert_eq!(p.last_period(), 2);
        assert_eq!(p.first_treated(0), Some(1));
        assert_eq!(p.first_treated(2), None);
        assert_eq!(p.cohorts(), vec![1, 2]);
        assert!(p.has_never_treated());
        assert_eq!(p.select(&UnitSelector::Cohort(2)), vec![1, 3]);
        assert_eq!(p.select(&UnitSelector::NeverTreated), vec![2]);
        assert_eq!(p.select(&UnitSelector::TreatedAt(1)), vec![0]);
        assert_eq!(
            p.select(&UnitSelector::NotYetTreated {
                untreated_at: 1,
                excluding_cohort: 1
            }),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn rejects_reverting_or_initial_treatment() {
        let outcomes = vec![vec![s(0.0), s(1.0), s(2.0)]];
        let ids = vec!["u".to_string()];
        assert!(PanelDataset::new(ids.clone(), outcomes.clone(), vec![vec![false, true, false]]).is_err());
        assert!(PanelDataset::new(ids.clone(), outcomes.clone(), vec![vec![true, true, true]]).is_err());
        assert!(PanelDataset::new(ids, outcomes, vec![vec![false, false, true]]).is_ok());
    }

    #[test]
    fn rejects_mixed_spaces_and_ragged_rows() {
        let curve = crate::wasserstein::QuantileCurve::gaussian(0.0, 1.0, 4).unwrap();
        let mixed = PanelDataset::two_period(vec![s(0.0), curve.into()], vec![s(0.0), s(1.0)], vec![false, true]);
        assert!(mixed.is_err());
        let ragged = PanelDataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![s(0.0), s(1.0)], vec![s(0.0)]],
            vec![vec![false, false], vec![false]],
        );
        assert!(ragged.is_err());
    }

    #[test]
    fn restriction_and_permutation() {
        let p = staggered();
        let r = p.restrict_periods(&[0, 2]).unwrap();
        assert_eq!(r.n_periods(), 2);
        assert_eq!(r.outcome(1, 1), p.outcome(1, 2));
        let q = p.permuted(&[3, 2, 1, 0]).unwrap();
        assert_eq!(q.unit_ids()[0], "d");
        assert!(p.permuted(&[0, 0, 1, 2]).is_err());
        assert!(p.restrict_periods(&[5]).is_err());
    }
}
