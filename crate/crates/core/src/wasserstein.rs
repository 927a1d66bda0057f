//! One-dimensional Wasserstein space.
//!
//! A distribution is stored as its quantile function sampled on the midpoint
//! grid `p_k = (k + 0.5) / M`. Distances use the midpoint rule, geodesics are
//! entrywise linear interpolation of quantile functions, and the transport map
//! `F_β⁻¹ ∘ F_α` is evaluated through piecewise-linear interpolation of the
//! curves in both directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::POINT_TOLERANCE;
use crate::normal::standard_normal_quantile;

pub const DEFAULT_GRID_SIZE: usize = 100;

/// Probability level of grid point `k` on an `m`-point midpoint grid.
pub fn grid_probability(k: usize, m: usize) -> f64 {
    (k as f64 + 0.5) / m as f64
}

/// Quantile function on the midpoint grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileCurve {
    values: Vec<f64>,
}

impl QuantileCurve {
    /// Validates finiteness and monotonicity (up to the point tolerance).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint {
                rule: format!("quantile value at grid index {k} is not finite"),
            });
        }
        if let Some(k) = first_violation(&values) {
            return Err(Error::InvalidPoint {
                rule: format!(
                    "quantile curve decreases between grid indices {k} and {}",
                    k + 1
                ),
            });
        }
        Ok(Self { values })
    }

    /// Like [`QuantileCurve::new`], but projects a non-monotone input onto
    /// the monotone cone (pool-adjacent-violators) instead of failing.
    pub fn repaired(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Self::new(values);
        }
        if first_violation(&values).is_some() {
            return Self::new(pool_adjacent_violators(&values));
        }
        Self::new(values)
    }

    /// Samples `quantile` at the `m` grid probabilities.
    pub fn from_fn(m: usize, quantile: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|k| quantile(grid_probability(k, m))).collect())
    }

    /// Quantile curve of N(mean, sd²).
    pub fn gaussian(mean: f64, sd: f64, m: usize) -> Result<Self> {
        if !(sd >= 0.0) || !sd.is_finite() {
            return Err(Error::OutOfRange { name: "sd", value: sd });
        }
        Self::from_fn(m, |p| mean + sd * standard_normal_quantile(p))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> {
        let m = self.grid_size();
        (0..m).map(move |k| grid_probability(k, m))
    }

    fn is_constant(&self) -> bool {
        self.values[self.values.len() - 1] - self.values[0] <= 0.0
    }

    /// Fractional grid index in `[0, M-1]` at which the curve reaches `x`.
    ///
    /// Flat stretches resolve to their leftmost index; values outside the
    /// curve's range clamp to the first or last grid point.
    fn cdf_position(&self, x: f64) -> f64 {
        let v = &self.values;
        let last = v.len() - 1;
        if x <= v[0] {
            return 0.0;
        }
        if x >= v[last] {
            // leftmost index attaining the maximum
            return v.partition_point(|&q| q < v[last]) as f64;
        }
        // v[0] < x < v[last]: first index with v[k] >= x lies in 1..=last
        let k = v.partition_point(|&q| q < x);
        if v[k] == x {
            return k as f64;
        }
        let (lo, hi) = (v[k - 1], v[k]);
        (k - 1) as f64 + (x - lo) / (hi - lo)
    }

    fn value_at_position(&self, pos: f64) -> f64 {
        let v = &self.values;
        let last = v.len() - 1;
        let pos = pos.clamp(0.0, last as f64);
        let k = pos.floor() as usize;
        if k >= last {
            return v[last];
        }
        let frac = pos - k as f64;
        if frac == 0.0 {
            v[k]
        } else {
            v[k] + frac * (v[k + 1] - v[k])
        }
    }

    /// F(x): piecewise-linear inverse of the quantile curve, clamped to
    /// `[p_0, p_{M-1}]`.
    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf_position(x) + 0.5) / self.grid_size() as f64
    }

    /// F⁻¹(u) by linear interpolation between grid points; `u` is clamped
    /// to `[p_0, p_{M-1}]`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.value_at_position(u * self.grid_size() as f64 - 0.5)
    }
}

impl TryFrom<Vec<f64>> for QuantileCurve {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<QuantileCurve> for Vec<f64> {
    fn from(curve: QuantileCurve) -> Self {
        curve.values
    }
}

fn first_violation(values: &[f64]) -> Option<usize> {
    values
        .windows(2)
        .position(|w| w[0] > w[1] + POINT_TOLERANCE)
}

/// Least-squares projection onto non-decreasing sequences.
pub fn pool_adjacent_violators(values: &[f64]) -> Vec<f64> {
    // blocks of (mean, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().unwrap() = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, c)| std::iter::repeat_n(m, c))
        .collect()
}

fn check_grids(a: &QuantileCurve, b: &QuantileCurve) -> Result<()> {
    if a.grid_size() != b.grid_size() {
        return Err(Error::DimensionMismatch {
            expected: a.grid_size(),
            found: b.grid_size(),
        });
    }
    Ok(())
}

/// W₂ distance by the midpoint rule on the shared grid.
pub fn w2_distance(a: &QuantileCurve, b: &QuantileCurve) -> Result<f64> {
    check_grids(a, b)?;
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum / a.grid_size() as f64).sqrt())
}

/// McCann interpolant: linear in quantile functions.
pub fn interpolate(a: &QuantileCurve, b: &QuantileCurve, t: f64) -> Result<QuantileCurve> {
    check_grids(a, b)?;
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (1.0 - t) * x + t * y)
        .collect();
    Ok(QuantileCurve { values })
}

/// Optimal-transport push of `omega` along `alpha → beta`:
/// the result has quantile function `F_β⁻¹ ∘ F_α ∘ F_ω⁻¹`.
pub fn wasserstein_transport(
    alpha: &QuantileCurve,
    beta: &QuantileCurve,
    omega: &QuantileCurve,
) -> Result<QuantileCurve> {
    check_grids(alpha, beta)?;
    check_grids(alpha, omega)?;
    if alpha.is_constant() {
        return Err(Error::DegenerateTransport);
    }
    // F_α⁻¹ ∘ F_α is the identity; skip the clamped composition so points
    // outside α's support are not pulled in.
    if alpha.values == beta.values {
        return Ok(omega.clone());
    }
    let mut values: Vec<f64> = omega
        .values
        .iter()
        .map(|&x| beta.value_at_position(alpha.cdf_position(x)))
        .collect();
    // composition of monotone maps; clean up rounding-level inversions
    for k in 1..values.len() {
        if values[k] < values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    Ok(QuantileCurve { values })
}

/// Empirical quantiles at the grid probabilities, linear interpolation
/// between order statistics (`h = (n - 1) p`).
pub fn quantile_from_samples(samples: &[f64], m: usize) -> Result<QuantileCurve> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            found: samples.len(),
        });
    }
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidPoint {
            rule: format!("sample {x} is not finite"),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let values = (0..m)
        .map(|k| {
            let h = (n - 1) as f64 * grid_probability(k, m);
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            if lo + 1 >= n || frac == 0.0 {
                sorted[lo.min(n - 1)]
            } else {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            }
        })
        .collect();
    QuantileCurve::repaired(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(v: &[f64]) -> QuantileCurve {
        QuantileCurve::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_decreasing_and_non_finite() {
        assert!(QuantileCurve::new(vec![0.0, -1.0]).is_err());
        assert!(QuantileCurve::new(vec![0.0, f64::NAN]).is_err());
        assert!(QuantileCurve::new(vec![]).is_err());
        // within tolerance
        assert!(QuantileCurve::new(vec![1.0, 1.0 - 1e-12]).is_ok());
    }

    #[test]
    fn repair_projects_onto_monotone_cone() {
        let c = QuantileCurve::repaired(vec![0.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(c.values(), &[0.0, 1.5, 1.5, 3.0]);
        assert_eq!(pool_adjacent_violators(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn distance_examples() {
        let a = QuantileCurve::gaussian(0.0, 1.0, 1000).unwrap();
        let b = QuantileCurve::gaussian(1.0, 1.0, 1000).unwrap();
        let c = QuantileCurve::gaussian(0.0, 2.0, 1000).unwrap();
        assert_eq!(w2_distance(&a, &a).unwrap(), 0.0);
        assert!((w2_distance(&a, &b).unwrap() - 1.0).abs() < 1e-6);
        assert!((w2_distance(&a, &c).unwrap() - 1.0).abs() < 1e-3);
        let short = QuantileCurve::gaussian(0.0, 1.0, 10).unwrap();
        assert!(matches!(
            w2_distance(&a, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cdf_inverts_quantile_on_grid() {
        let c = QuantileCurve::gaussian(0.3, 1.7, 100).unwrap();
        for (k, p) in c.probabilities().enumerate() {
            assert!((c.cdf(c.values()[k]) - p).abs() < 1e-8);
            assert!((c.quantile(p) - c.values()[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn cdf_ties_resolve_left_and_clamp() {
        let c = curve(&[0.0, 1.0, 1.0, 1.0, 2.0]);
        assert_eq!(c.cdf(1.0), grid_probability(1, 5));
        assert_eq!(c.cdf(-5.0), grid_probability(0, 5));
        assert_eq!(c.cdf(9.0), grid_probability(4, 5));
        assert!((c.cdf(0.5) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn transport_examples() {
        let m = 1000;
        let alpha = QuantileCurve::gaussian(0.0, 1.0, m).unwrap();
        let beta = QuantileCurve::gaussian(1.0, 1.0, m).unwrap();
        let omega = QuantileCurve::gaussian(0.0, 2.0, m).unwrap();
        assert_eq!(wasserstein_transport(&alpha, &beta, &alpha).unwrap(), beta);
        let expected = QuantileCurve::gaussian(1.0, 2.0, m).unwrap();
        let got = wasserstein_transport(&alpha, &beta, &omega).unwrap();
        // interior grid points: omega stays inside alpha's range there
        let lo = m / 10;
        let sup = got.values()[lo..m - lo]
            .iter()
            .zip(&expected.values()[lo..m - lo])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-3, "sup = {sup}");
    }

    #[test]
    fn location_family_transport_is_a_shift() {
        let m = 200;
        let alpha = QuantileCurve::gaussian(0.0, 1.0, m).unwrap();
        let beta = QuantileCurve::gaussian(2.5, 1.0, m).unwrap();
        let omega = QuantileCurve::gaussian(0.4, 0.7, m).unwrap();
        let got = wasserstein_transport(&alpha, &beta, &omega).unwrap();
        for (g, w) in got.values().iter().zip(omega.values()) {
            assert!((g - (w + 2.5)).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_source_is_degenerate() {
        let alpha = curve(&[1.0, 1.0, 1.0]);
        let beta = curve(&[0.0, 1.0, 2.0]);
        assert_eq!(
            wasserstein_transport(&alpha, &beta, &beta),
            Err(Error::DegenerateTransport)
        );
    }

    #[test]
    fn interpolation_is_entrywise_linear() {
        let a = curve(&[0.0, 1.0, 4.0]);
        let b = curve(&[2.0, 3.0, 4.0]);
        let mid = interpolate(&a, &b, 0.25).unwrap();
        assert_eq!(mid.values(), &[0.5, 1.5, 4.0]);
        assert_eq!(interpolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate(&a, &b, 1.0).unwrap(), b);
    }

    #[test]
    fn empirical_quantiles() {
        let c = quantile_from_samples(&[1.0, 0.0], 2).unwrap();
        assert_eq!(c.values(), &[0.25, 0.75]);
        let c = quantile_from_samples(&[3.0; 7], 5).unwrap();
        assert!(c.values().iter().all(|&v| v == 3.0));
        assert!(matches!(
            quantile_from_samples(&[1.0], 4),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(quantile_from_samples(&[], 4).is_err());
    }

    #[test]
    fn empirical_quantiles_match_brute_force() {
        let samples: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        let c = quantile_from_samples(&samples, 100).unwrap();
        for (k, p) in c.probabilities().enumerate() {
            // brute force: h = 99 p, between the floor(h)-th and ceil(h)-th order stats
            let h = 99.0 * p;
            let expected = 1.0 + h;
            assert!((c.values()[k] - expected).abs() < 1e-12, "k={k}");
        }
    }
}
