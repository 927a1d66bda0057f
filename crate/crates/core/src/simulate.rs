//! Monte Carlo convergence studies.
//!
//! Two data-generating processes are provided: Gaussian outcome
//! distributions observed through finite samples (Wasserstein space), and
//! weighted two-block stochastic block model graphs summarised by their
//! Laplacians (Frobenius space). Each run draws a two-period panel, fits
//! the GATT, and scores it against the population GATT in the quotient
//! metric with the true counterfactual start as reference. The slope of
//! log mean error on log `n` estimates the convergence rate.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use rand::distr::{Bernoulli, Distribution, Open01, Uniform};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::did::estimate_gatt;
use crate::error::{Error, Result};
use crate::geometry::{quotient_distance, transport, Geodesic, SpacePoint};
use crate::matrix::{laplacian_from_adjacency, MatrixKind, SymmetricMatrixPoint};
use crate::normal::standard_normal_quantile;
use crate::panel::PanelDataset;
use crate::wasserstein::{quantile_from_samples, QuantileCurve, DEFAULT_GRID_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimSpace {
    Wasserstein,
    Network,
}

impl fmt::Display for SimSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimSpace::Wasserstein => "wasserstein",
            SimSpace::Network => "network",
        })
    }
}

/// Parameters shared by both DGPs; each DGP reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta: f64,
    /// Draws per outcome distribution (Wasserstein DGP).
    pub sample_size_per_dist: usize,
    /// Block sizes of the two communities (network DGP).
    pub m1: usize,
    pub m2: usize,
    /// Edge probabilities within and between blocks (network DGP).
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl Default for DgpParams {
    fn default() -> Self {
        Self {
            alpha1: 1.0,
            alpha2: 1.0,
            alpha3: 1.0,
            beta: 1.0,
            sample_size_per_dist: 100,
            m1: 5,
            m2: 5,
            p11: 0.5,
            p12: 0.2,
            p21: 0.2,
            p22: 0.5,
        }
    }
}

impl DgpParams {
    fn block_probability(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 0) => self.p11,
            (1, 1) => self.p22,
            (0, _) => self.p12,
            _ => self.p21,
        }
    }

    fn block_of(&self, node: usize) -> usize {
        usize::from(node >= self.m1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub space: SimSpace,
    /// Units per simulated panel.
    pub n: usize,
    /// Monte Carlo runs.
    pub q: usize,
    pub treat_prob: f64,
    pub seed: u64,
    pub dgp: DgpParams,
    /// Quantile grid size for the Wasserstein DGP.
    pub grid_size: usize,
}

impl SimConfig {
    pub fn new(space: SimSpace, n: usize, q: usize, seed: u64) -> Self {
        Self {
            space,
            n,
            q,
            treat_prob: 0.25,
            seed,
            dgp: DgpParams::default(),
            grid_size: DEFAULT_GRID_SIZE,
        }
    }

    /// One config per sample size, otherwise identical to `self`.
    pub fn for_sizes(&self, sizes: &[usize]) -> Vec<SimConfig> {
        sizes.iter().map(|&n| SimConfig { n, ..self.clone() }).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.treat_prob > 0.0 && self.treat_prob < 1.0) {
            return bad(format!("treat_prob must lie in (0, 1), got {}", self.treat_prob));
        }
        if self.n < 4 {
            return bad(format!("n must be at least 4, got {}", self.n));
        }
        if self.q < 1 {
            return bad("at least one Monte Carlo run is required".into());
        }
        let d = &self.dgp;
        if [d.alpha1, d.alpha2, d.alpha3, d.beta].iter().any(|x| !x.is_finite()) {
            return bad("DGP coefficients must be finite".into());
        }
        match self.space {
            SimSpace::Wasserstein => {
                if d.sample_size_per_dist < 2 {
                    return bad("sample_size_per_dist must be at least 2".into());
                }
                if self.grid_size == 0 {
                    return bad("grid_size must be positive".into());
                }
                if !(d.alpha1 > 0.0 && d.alpha1 + d.beta > 0.0) {
                    return bad("standard deviations alpha1 and alpha1 + beta must be positive".into());
                }
            }
            SimSpace::Network => {
                if d.m1 + d.m2 < 2 {
                    return bad("the graph needs at least two nodes".into());
                }
                for p in [d.p11, d.p12, d.p21, d.p22] {
                    if !(0.0..=1.0).contains(&p) {
                        return bad(format!("edge probability {p} is outside [0, 1]"));
                    }
                }
                if d.p12 != d.p21 {
                    return bad(format!(
                        "graphs are undirected, so p12 and p21 must agree (got {} and {})",
                        d.p12, d.p21
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Seed of run `run`: a base word drawn from `seed`, XOR the run index.
///
/// XOR-ing the user seed directly would make small seeds permute one shared
/// set of run seeds (seeds 1 and 2 over runs `0..200` give the same set),
/// so distinct seeds first map to unrelated base words.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    ChaCha8Rng::seed_from_u64(seed).next_u64() ^ run as u64
}

/// Generator for one run; the stream separates sample sizes.
pub fn run_rng(seed: u64, run: usize, n: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(seed, run));
    rng.set_stream(n as u64);
    rng
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    standard_normal_quantile(rng.sample(Open01))
}

fn draw_treatment<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Vec<bool> {
    let coin = Bernoulli::new(config.treat_prob).expect("validated probability");
    (0..config.n).map(|_| coin.sample(rng)).collect()
}

fn gaussian_outcome<R: Rng + ?Sized>(config: &SimConfig, mu: f64, sigma: f64, rng: &mut R) -> Result<SpacePoint> {
    let samples: Vec<f64> = (0..config.dgp.sample_size_per_dist)
        .map(|_| mu + sigma * standard_normal(rng))
        .collect();
    Ok(quantile_from_samples(&samples, config.grid_size)?.into())
}

/// Population GATT of the Wasserstein DGP. Group means have quantile
/// functions `α₂t + σ_{d,t} Φ⁻¹`, and the start is the transport of the
/// treated pre-period mean along the control trend.
pub fn wasserstein_true_gatt(config: &SimConfig) -> Result<Geodesic> {
    let d = &config.dgp;
    let m = config.grid_size;
    let curve = |mean: f64, sd: f64| -> Result<SpacePoint> { Ok(QuantileCurve::gaussian(mean, sd, m)?.into()) };
    let nu00 = curve(0.0, d.alpha1)?;
    let nu01 = curve(d.alpha2, d.alpha1)?;
    let nu10 = curve(0.0, d.alpha1)?;
    let nu11 = curve(d.alpha2, d.alpha1 + d.beta)?;
    Geodesic::new(transport(&nu00, &nu01, &nu10)?, nu11)
}

/// Two-period Wasserstein panel: `μ_{i,t} ~ N(α₂t, 1)`,
/// `σ_{i,t} = α₁ + βD_i t`, each outcome observed through
/// `sample_size_per_dist` draws from `N(μ_{i,t}, σ²_{i,t})`.
pub fn generate_wasserstein_panel_with_rng<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<(PanelDataset, Geodesic)> {
    config.validate()?;
    let d = &config.dgp;
    let treated = draw_treatment(config, rng);
    let mut pre = Vec::with_capacity(config.n);
    let mut post = Vec::with_capacity(config.n);
    for &treated_unit in &treated {
        let effect = if treated_unit { d.beta } else { 0.0 };
        for (t, out) in [(0.0, &mut pre), (1.0, &mut post)] {
            let mu = d.alpha2 * t + standard_normal(rng);
            let sigma = d.alpha1 + effect * t;
            out.push(gaussian_outcome(config, mu, sigma, rng)?);
        }
    }
    let panel = PanelDataset::two_period(pre, post, treated)?;
    Ok((panel, wasserstein_true_gatt(config)?))
}

pub fn generate_wasserstein_panel(config: &SimConfig) -> Result<(PanelDataset, Geodesic)> {
    generate_wasserstein_panel_with_rng(config, &mut ChaCha8Rng::seed_from_u64(config.seed))
}

/// Pre-trend panel for the Wasserstein DGP with three periods: the
/// baseline period observed twice, then one post-treatment period.
///
/// Each unit keeps its latent location `μ_i` across the two baseline
/// observations while the finite-sample noise is drawn afresh, so the
/// placebo contrast between periods 0 and 1 has no trend difference by
/// construction.
pub fn generate_wasserstein_placebo_panel_with_rng<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<PanelDataset> {
    config.validate()?;
    let d = &config.dgp;
    let treated = draw_treatment(config, rng);
    let mut outcomes = Vec::with_capacity(config.n);
    for &treated_unit in &treated {
        let mu0 = standard_normal(rng);
        let first = gaussian_outcome(config, mu0, d.alpha1, rng)?;
        let second = gaussian_outcome(config, mu0, d.alpha1, rng)?;
        let sigma = d.alpha1 + if treated_unit { d.beta } else { 0.0 };
        let post = gaussian_outcome(config, d.alpha2 + standard_normal(rng), sigma, rng)?;
        outcomes.push(vec![first, second, post]);
    }
    let ids = (0..config.n).map(|i| i.to_string()).collect();
    let groups: Vec<Option<usize>> = treated.iter().map(|&t| t.then_some(2)).collect();
    PanelDataset::from_groups(ids, outcomes, &groups)
}

/// Population mean Laplacian: off-diagonal `−p_{ll′} · w̄`, with the mean
/// weight `w̄` shared by every edge.
fn mean_laplacian(config: &SimConfig, mean_weight: f64) -> Result<SpacePoint> {
    let d = &config.dgp;
    let m = d.m1 + d.m2;
    let mut entries = DMatrix::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            if j != k {
                entries[(j, k)] = -d.block_probability(d.block_of(j), d.block_of(k)) * mean_weight;
            }
        }
    }
    for j in 0..m {
        entries[(j, j)] = -entries.row(j).sum();
    }
    Ok(SymmetricMatrixPoint::new(entries, MatrixKind::Free)?.into())
}

/// Population GATT of the network DGP.
pub fn network_true_gatt(config: &SimConfig) -> Result<Geodesic> {
    let d = &config.dgp;
    let nu00 = mean_laplacian(config, d.alpha1)?;
    let nu01 = mean_laplacian(config, d.alpha1 + d.alpha2)?;
    let nu10 = mean_laplacian(config, d.alpha1 + d.alpha3)?;
    let nu11 = mean_laplacian(config, d.alpha1 + d.alpha2 + d.alpha3 + d.beta)?;
    Geodesic::new(transport(&nu00, &nu01, &nu10)?, nu11)
}

fn network_outcome<R: Rng + ?Sized>(config: &SimConfig, shift: f64, rng: &mut R) -> Result<SpacePoint> {
    let d = &config.dgp;
    let m = d.m1 + d.m2;
    let noise = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut weights = DMatrix::zeros(m, m);
    for j in 0..m {
        for k in (j + 1)..m {
            let p = d.block_probability(d.block_of(j), d.block_of(k));
            if rng.random_bool(p) {
                let w = shift + noise.sample(rng);
                weights[(j, k)] = w;
                weights[(k, j)] = w;
            }
        }
    }
    let point = if weights.iter().all(|&w| w >= 0.0) {
        laplacian_from_adjacency(&weights)?
    } else {
        // negative weights are possible for some parameter choices; the
        // matrix D − W is still the outcome, it is just not a Laplacian
        let mut lap = -weights.clone();
        for j in 0..m {
            lap[(j, j)] = weights.row(j).sum();
        }
        SymmetricMatrixPoint::new(lap, MatrixKind::Free)?
    };
    Ok(point.into())
}

/// Two-period weighted-SBM panel: each period redraws every edge with its
/// block probability, weighted `α₁ + α₂t + α₃D_i + βD_i t + ε` with
/// `ε ~ U[−1, 1]` per edge; the outcome is the graph Laplacian.
pub fn generate_network_panel_with_rng<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<(PanelDataset, Geodesic)> {
    config.validate()?;
    let d = &config.dgp;
    let treated = draw_treatment(config, rng);
    let mut pre = Vec::with_capacity(config.n);
    let mut post = Vec::with_capacity(config.n);
    for &treated_unit in &treated {
        let dv = if treated_unit { 1.0 } else { 0.0 };
        for (t, out) in [(0.0, &mut pre), (1.0, &mut post)] {
            let shift = d.alpha1 + d.alpha2 * t + d.alpha3 * dv + d.beta * dv * t;
            out.push(network_outcome(config, shift, rng)?);
        }
    }
    let panel = PanelDataset::two_period(pre, post, treated)?;
    Ok((panel, network_true_gatt(config)?))
}

pub fn generate_network_panel(config: &SimConfig) -> Result<(PanelDataset, Geodesic)> {
    generate_network_panel_with_rng(config, &mut ChaCha8Rng::seed_from_u64(config.seed))
}

pub fn generate_panel_with_rng<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<(PanelDataset, Geodesic)> {
    match config.space {
        SimSpace::Wasserstein => generate_wasserstein_panel_with_rng(config, rng),
        SimSpace::Network => generate_network_panel_with_rng(config, rng),
    }
}

/// Estimation error `d_G(τ̂, τ)` for one simulated run.
pub fn simulate_run(config: &SimConfig, run: usize) -> Result<f64> {
    let mut rng = run_rng(config.seed, run, config.n);
    let (panel, truth) = generate_panel_with_rng(config, &mut rng)?;
    let estimate = estimate_gatt(&panel)?;
    quotient_distance(&estimate.effect, &truth, truth.start())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub run: usize,
    /// Generator seed from [`run_seed`]; the generator stream is `n`.
    pub seed: u64,
    /// `None` when the run failed; see `failure`.
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub completed: usize,
    pub failed: usize,
    pub mean_error: f64,
    pub median_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub space: SimSpace,
    pub configs: Vec<SimConfig>,
    pub summaries: Vec<SizeSummary>,
    /// Least-squares fit of `ln(mean error)` on `ln n`; absent with fewer
    /// than two sample sizes.
    pub fit: Option<SlopeFit>,
    pub runs: Vec<RunRecord>,
}

impl SimReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.slope)
    }

    /// Writes `(n, run, seed, error)` rows; failed runs have an empty error.
    pub fn write_errors_csv<W: Write>(&self, writer: W) -> std::result::Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["n", "run", "seed", "error"])?;
        for r in &self.runs {
            out.write_record([
                r.n.to_string(),
                r.run.to_string(),
                r.seed.to_string(),
                r.error.map(|e| e.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn summarize(n: usize, records: &[RunRecord]) -> SizeSummary {
    let mut errors: Vec<f64> = records.iter().filter_map(|r| r.error).collect();
    // sorted before reduction so the summary does not depend on run order
    errors.sort_by(f64::total_cmp);
    let completed = errors.len();
    let (mean_error, median_error) = if completed == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let mean = errors.iter().sum::<f64>() / completed as f64;
        let mid = completed / 2;
        let median = if completed % 2 == 1 {
            errors[mid]
        } else {
            0.5 * (errors[mid - 1] + errors[mid])
        };
        (mean, median)
    };
    SizeSummary {
        n,
        completed,
        failed: records.len() - completed,
        mean_error,
        median_error,
    }
}

/// Runs every config for its `q` replications in parallel. Per-run
/// failures are recorded and excluded from the summaries.
pub fn run_monte_carlo(configs: &[SimConfig]) -> Result<SimReport> {
    let first = configs.first().ok_or(Error::EmptyInput)?;
    for c in configs {
        c.validate()?;
        if c.space != first.space {
            return Err(Error::InvalidConfig("all configs must simulate the same space".into()));
        }
    }
    let jobs: Vec<(usize, usize)> = configs
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..c.q).map(move |run| (ci, run)))
        .collect();
    let runs: Vec<RunRecord> = jobs
        .into_par_iter()
        .map(|(ci, run)| {
            let c = &configs[ci];
            let outcome = simulate_run(c, run);
            RunRecord {
                n: c.n,
                run,
                seed: run_seed(c.seed, run),
                error: outcome.as_ref().ok().copied(),
                failure: outcome.err().map(|e| e.to_string()),
            }
        })
        .collect();

    let mut summaries = Vec::with_capacity(configs.len());
    let mut offset = 0;
    for c in configs {
        summaries.push(summarize(c.n, &runs[offset..offset + c.q]));
        offset += c.q;
    }
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .filter(|s| s.completed > 0 && s.mean_error > 0.0)
        .map(|s| ((s.n as f64).ln(), s.mean_error.ln()))
        .collect();
    let fit = slope_regression(&points).ok();
    Ok(SimReport {
        space: first.space,
        configs: configs.to_vec(),
        summaries,
        fit,
        runs,
    })
}

/// Ordinary least squares `y = intercept + slope · x`.
pub fn slope_regression(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateRegression);
    }
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateRegression);
    }
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;

    fn small(space: SimSpace, n: usize) -> SimConfig {
        SimConfig::new(space, n, 3, 11)
    }

    #[test]
    fn regression_examples() {
        let line: Vec<(f64, f64)> = [50.0f64, 200.0, 1000.0].iter().map(|n| (n.ln(), 2.0 - 0.5 * n.ln())).collect();
        let fit = slope_regression(&line[..2]).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        let fit = slope_regression(&line).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && (fit.intercept - 2.0).abs() < 1e-12);
        // hand OLS: x̄ = 1, ȳ = 4/3, Sxx = 2, Sxy = 3 → slope 1.5, intercept −1/6
        let fit = slope_regression(&[(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(slope_regression(&[(1.0, 2.0)]), Err(Error::DegenerateRegression));
        assert_eq!(slope_regression(&[(1.0, 2.0), (1.0, 3.0)]), Err(Error::DegenerateRegression));
    }

    #[test]
    fn wasserstein_truth_with_unit_parameters() {
        let config = small(SimSpace::Wasserstein, 10);
        let truth = wasserstein_true_gatt(&config).unwrap();
        let start = truth.start().as_quantile_curve().unwrap();
        let end = truth.end().as_quantile_curve().unwrap();
        for (k, p) in start.probabilities().enumerate() {
            let z = standard_normal_quantile(p);
            assert!((start.values()[k] - (1.0 + z)).abs() < 1e-12);
            assert!((end.values()[k] - (1.0 + 2.0 * z)).abs() < 1e-12);
        }
        let mut no_effect = config;
        no_effect.dgp.beta = 0.0;
        assert!(wasserstein_true_gatt(&no_effect).unwrap().length().unwrap() < 1e-12);
    }

    #[test]
    fn network_truth_with_unit_parameters() {
        let config = small(SimSpace::Network, 10);
        let truth = network_true_gatt(&config).unwrap();
        let start = truth.start().as_matrix().unwrap().entries();
        let end = truth.end().as_matrix().unwrap().entries();
        assert!((start[(0, 1)] + 1.5).abs() < 1e-12);
        assert!((end[(0, 1)] + 2.0).abs() < 1e-12);
        assert!((start[(6, 7)] + 1.5).abs() < 1e-12);
        // across blocks p = 0.2
        assert!((start[(0, 9)] + 0.2 * 3.0).abs() < 1e-12);
        // rows sum to zero
        assert!(start.row(3).sum().abs() < 1e-12);
        let mut no_effect = config;
        no_effect.dgp.beta = 0.0;
        assert!(network_true_gatt(&no_effect).unwrap().length().unwrap() < 1e-12);
    }

    #[test]
    fn panels_are_reproducible() {
        for space in [SimSpace::Wasserstein, SimSpace::Network] {
            let config = small(space, 12);
            let (a, ta) = generate_panel_with_rng(&config, &mut run_rng(5, 1, 12)).unwrap();
            let (b, tb) = generate_panel_with_rng(&config, &mut run_rng(5, 1, 12)).unwrap();
            assert_eq!(a, b);
            assert_eq!(ta, tb);
            let (c, _) = generate_panel_with_rng(&config, &mut run_rng(5, 2, 12)).unwrap();
            assert_ne!(a, c);
            assert_eq!(a.n_units(), 12);
            assert_eq!(a.n_periods(), 2);
        }
    }

    #[test]
    fn network_outcomes_are_laplacian_shaped() {
        let config = small(SimSpace::Network, 6);
        let (panel, _) = generate_network_panel(&config).unwrap();
        for row in panel.outcomes() {
            for y in row {
                let m = y.as_matrix().unwrap().entries();
                assert_eq!(m.nrows(), 10);
                for j in 0..10 {
                    assert!(m.row(j).sum().abs() < 1e-12);
                    for k in 0..10 {
                        if j != k {
                            assert!(m[(j, k)] <= 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn placebo_panel_shape() {
        let config = small(SimSpace::Wasserstein, 8);
        let panel = generate_wasserstein_placebo_panel_with_rng(&config, &mut run_rng(1, 0, 8)).unwrap();
        assert_eq!(panel.n_periods(), 3);
        for i in 0..panel.n_units() {
            assert!(!panel.is_treated(i, 1));
            // same latent location, different sampling noise
            let gap = distance(panel.outcome(i, 0), panel.outcome(i, 1)).unwrap();
            assert!(gap > 0.0 && gap < 1.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small(SimSpace::Network, 3);
        assert!(c.validate().is_err());
        c.n = 4;
        assert!(c.validate().is_ok());
        c.treat_prob = 1.0;
        assert!(c.validate().is_err());
        c.treat_prob = 0.25;
        c.dgp.p12 = 0.3;
        assert!(c.validate().is_err());
        c.q = 0;
        assert!(run_monte_carlo(&[c]).is_err());
        assert!(run_monte_carlo(&[]).is_err());
    }

    #[test]
    fn monte_carlo_report() {
        let base = SimConfig::new(SimSpace::Network, 0, 4, 3);
        let report = run_monte_carlo(&base.for_sizes(&[20, 80])).unwrap();
        assert_eq!(report.runs.len(), 8);
        assert_eq!(report.summaries.len(), 2);
        assert!(report.runs.iter().all(|r| r.error.is_some_and(|e| e.is_finite() && e >= 0.0)));
        assert!(report.slope().is_some());
        assert_eq!(report.runs[5].seed, run_seed(3, 1));
        assert_eq!(run_seed(3, 1) ^ run_seed(3, 0), 1);
        let again = run_monte_carlo(&base.for_sizes(&[20, 80])).unwrap();
        assert_eq!(report, again);

        let single = run_monte_carlo(&base.for_sizes(&[20])).unwrap();
        assert!(single.fit.is_none());

        let mut csv = Vec::new();
        report.write_errors_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("n,run,seed,error"));
    }
}
