//! Monte Carlo harness: performance estimates, model comparisons and the
//! threshold-correction regression.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{ddm_et_er, AnalysisError};
use crate::dynamics::{coupled_ddm, coupled_ou, ou_certainty_index, reduced_ddm, reduced_ou, DynamicsError, ModelSpec};
use crate::graph::{ensemble_graph, spectrum, CertaintyIndex, Graph, GraphError};
use crate::pde::{solve_reduced_pde, PdeConfig, PdeError, Quantity};
use crate::simulate::{run_ensemble, Decision, SimConfig, SimError, StoppingRule, ThresholdWatch, TrialOutcome};
use crate::stats::{mean_se, proportion_se};
use crate::thresholds::{corrected_performance, ThresholdError};

/// Minimum ensemble size accepted by [`estimate_performance`].
pub const MIN_TRIALS: u64 = 100;
/// Largest timeout fraction tolerated before an estimate is rejected.
pub const MAX_TIMEOUT_FRACTION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("{fraction:.3} of trials timed out at node {node}; increase max_t")]
    TooManyTimeouts { node: usize, fraction: f64 },
    #[error("error rate {0} has no finite log-likelihood ratio")]
    DegenerateEr(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no watch on node {0} in the stopping rule")]
    UnknownNode(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// `ceil(√trials)` equal-width bins over the observed range.
    fn build(times: &[f64], trials: u64) -> Histogram {
        let bins = ((trials as f64).sqrt().ceil() as usize).max(1);
        if times.is_empty() {
            return Histogram { edges: vec![0.0, 0.0], counts: vec![0] };
        }
        let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let w = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * w }).collect();
        let mut counts = vec![0u64; bins];
        for &t in times {
            let b = (((t - lo) / w) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Histogram { edges, counts }
    }
}

/// Monte Carlo summary of one watch of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceEstimate {
    pub node: usize,
    pub trials: u64,
    pub decided: u64,
    /// Fraction of wrong decisions among decided trials.
    pub er_hat: f64,
    pub er_se: f64,
    /// Mean decision time of decided trials.
    pub et_hat: f64,
    pub et_se: f64,
    pub timeout_fraction: f64,
    pub fpt_histogram: Histogram,
}

/// Wrong decisions: the lower boundary (drift taken positive) or any race
/// alternative other than 0.
pub fn is_error(d: Decision) -> bool {
    matches!(d, Decision::Lower) || matches!(d, Decision::Alternative(a) if a != 0)
}

/// Decision times of the decided trials of one watch.
pub fn decided_times(outcomes: &[TrialOutcome], watcher: usize) -> Vec<f64> {
    outcomes
        .iter()
        .filter(|o| o.watcher == watcher && o.decision != Decision::Timeout)
        .map(|o| o.decision_time)
        .collect()
}

/// Summarize the outcomes of one watch.
pub fn summarize(outcomes: &[TrialOutcome], watcher: usize) -> Result<PerformanceEstimate, ExperimentError> {
    let mine: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.watcher == watcher).collect();
    let node = mine.first().map(|o| o.node).ok_or(ExperimentError::InsufficientData("no outcomes".into()))?;
    let trials = mine.len() as u64;
    let times = decided_times(outcomes, watcher);
    let decided = times.len() as u64;
    let timeout_fraction = 1.0 - decided as f64 / trials as f64;
    if timeout_fraction > MAX_TIMEOUT_FRACTION {
        return Err(ExperimentError::TooManyTimeouts { node, fraction: timeout_fraction });
    }
    let errors = mine.iter().filter(|o| is_error(o.decision)).count();
    let (er_hat, er_se) = proportion_se(errors, decided as usize);
    let (et_hat, et_se) = mean_se(&times);
    Ok(PerformanceEstimate {
        node,
        trials,
        decided,
        er_hat,
        er_se,
        et_hat,
        et_se,
        timeout_fraction,
        fpt_histogram: Histogram::build(&times, trials),
    })
}

/// Estimates for every watch of `rule` from one shared ensemble.
pub fn estimate_all(
    spec: &ModelSpec,
    rule: &StoppingRule,
    trials: u64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<(Vec<PerformanceEstimate>, Vec<TrialOutcome>), ExperimentError> {
    if trials < MIN_TRIALS {
        return Err(ExperimentError::TooFewTrials(trials));
    }
    let outcomes = run_ensemble(spec, rule, cfg, trials, seed)?;
    let est = (0..rule.watcher_count()).map(|w| summarize(&outcomes, w)).collect::<Result<Vec<_>, _>>()?;
    Ok((est, outcomes))
}

/// Estimate the performance of the first watch on `node`.
pub fn estimate_performance(
    spec: &ModelSpec,
    rule: &StoppingRule,
    node: usize,
    trials: u64,
    cfg: &SimConfig,
    seed: u64,
) -> Result<PerformanceEstimate, ExperimentError> {
    if trials < MIN_TRIALS {
        return Err(ExperimentError::TooFewTrials(trials));
    }
    let watcher = watch_nodes(rule).iter().position(|&k| k == node).ok_or(ExperimentError::UnknownNode(node))?;
    let outcomes = run_ensemble(spec, rule, cfg, trials, seed)?;
    summarize(&outcomes, watcher)
}

fn watch_nodes(rule: &StoppingRule) -> Vec<usize> {
    match rule {
        StoppingRule::SymmetricThreshold { watches } | StoppingRule::UpperThreshold { watches } => {
            watches.iter().map(|w| w.node).collect()
        }
        StoppingRule::RaceMargin { watches } => watches.iter().map(|w| w.node).collect(),
        StoppingRule::None => Vec::new(),
    }
}

/// `log((1 - er)/er)`.
pub fn log_likelihood_no_error(er: f64) -> Result<f64, ExperimentError> {
    if !(er > 0.0 && er < 1.0) {
        return Err(ExperimentError::DegenerateEr(er));
    }
    Ok(((1.0 - er) / er).ln())
}

/// Derive independent sub-seeds from a master seed.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionPoint {
    pub graph: usize,
    pub node: usize,
    pub n: usize,
    pub mu: f64,
    pub inv_sqrt_mu: f64,
    pub beta_delta_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRegression {
    pub points: Vec<CorrectionPoint>,
    pub slope: f64,
    pub residual_rms: f64,
    pub beta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionConfig {
    pub beta: f64,
    pub eta: f64,
    pub graphs: usize,
    pub trials: u64,
    pub seed: u64,
    pub sim: SimConfig,
}

/// Least-squares slope through the origin and the RMS residual.
pub fn fit_through_origin(xy: &[(f64, f64)]) -> (f64, f64) {
    let sxy: f64 = xy.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| x * x).sum();
    let slope = sxy / sxx;
    let rms = (xy.iter().map(|(x, y)| (y - slope * x).powi(2)).sum::<f64>() / xy.len() as f64).sqrt();
    (slope, rms)
}

/// For each node of `graphs` random graphs, `β ΔT_k` with
/// `ΔT_k = ET_centralized(η) - ET_k` (analytic minus simulated), regressed
/// on `1/√μ_k` through the origin.
pub fn correction_experiment(cfg: &CorrectionConfig) -> Result<CorrectionRegression, ExperimentError> {
    if !(cfg.beta > 0.0) || !(cfg.eta > 0.0) {
        return Err(ExperimentError::InsufficientData("beta and eta must be positive".into()));
    }
    let per_graph: Vec<Vec<CorrectionPoint>> = (0..cfg.graphs)
        .into_par_iter()
        .map(|gi| {
            let g = ensemble_graph(sub_seed(cfg.seed, 2 * gi as u64))?;
            let n = g.node_count();
            let mu = CertaintyIndex::from_spectrum(&spectrum(&g)?);
            let spec = coupled_ddm(&g, cfg.beta, 1.0)?;
            let nodes: Vec<usize> = (0..n).collect();
            let rule = StoppingRule::symmetric(&nodes, cfg.eta);
            let (est, _) = estimate_all(&spec, &rule, cfg.trials, &cfg.sim, sub_seed(cfg.seed, 2 * gi as u64 + 1))?;
            let (et_cen, _) = ddm_et_er(cfg.beta, 1.0 / (n as f64).sqrt(), cfg.eta)?;
            Ok(est
                .iter()
                .enumerate()
                .map(|(k, e)| CorrectionPoint {
                    graph: gi,
                    node: k,
                    n,
                    mu: mu.get(k),
                    inv_sqrt_mu: 1.0 / mu.get(k).sqrt(),
                    beta_delta_t: cfg.beta * (et_cen - e.et_hat),
                })
                .collect())
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let points: Vec<CorrectionPoint> = per_graph.into_iter().flatten().collect();
    if points.len() < 10 {
        return Err(ExperimentError::InsufficientData(format!("{} points; need at least 10", points.len())));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.inv_sqrt_mu, p.beta_delta_t)).collect();
    let (slope, residual_rms) = fit_through_origin(&xy);
    Ok(CorrectionRegression { points, slope, residual_rms, beta: cfg.beta, eta: cfg.eta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparedModel {
    Coupled,
    Reduced,
    Centralized,
    Corrected,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelFamily {
    Ddm,
    Ou { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub eta: f64,
    pub model: ComparedModel,
    pub er: f64,
    /// Standard errors are zero for analytic and PDE rows.
    pub er_se: f64,
    pub et: f64,
    pub et_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub rows: Vec<ComparisonRow>,
    /// Decided first-passage times per threshold, coupled then reduced model.
    pub coupled_fpt: Vec<Vec<f64>>,
    pub reduced_fpt: Vec<Vec<f64>>,
}

impl ModelComparison {
    pub fn row(&self, eta: f64, model: ComparedModel) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.model == model && r.eta == eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub family: ModelFamily,
    pub trials: u64,
    pub seed: u64,
    pub sim: SimConfig,
    /// PDE rows are produced only when set (DDM family only).
    pub pde: Option<PdeConfig>,
}

/// Performance of node `node` over a list of thresholds under the coupled
/// model, its reduced surrogate and, for the DDM family, the centralized,
/// threshold-corrected and PDE predictions.
pub fn compare_models(
    graph: &Graph,
    node: usize,
    beta: f64,
    etas: &[f64],
    cfg: &CompareConfig,
) -> Result<ModelComparison, ExperimentError> {
    if etas.is_empty() {
        return Err(ExperimentError::InsufficientData("empty threshold list".into()));
    }
    let n = graph.node_count();
    if node >= n {
        return Err(GraphError::NodeOutOfRange { node, n }.into());
    }
    let s = spectrum(graph)?;
    let mu = CertaintyIndex::from_spectrum(&s).get(node);
    let (coupled, reduced) = match cfg.family {
        ModelFamily::Ddm => (coupled_ddm(graph, beta, 1.0)?, reduced_ddm(mu, beta, n)?),
        ModelFamily::Ou { theta } => {
            (coupled_ou(graph, beta, theta)?, reduced_ou(ou_certainty_index(&s, theta, node)?, beta, theta, n)?)
        }
    };
    let watches = |coord: usize| StoppingRule::SymmetricThreshold {
        watches: etas.iter().map(|&threshold| ThresholdWatch { node, coord, threshold }).collect(),
    };
    let (c_est, c_out) = estimate_all(&coupled, &watches(node), cfg.trials, &cfg.sim, sub_seed(cfg.seed, 0))?;
    let (r_est, r_out) = estimate_all(&reduced, &watches(0), cfg.trials, &cfg.sim, sub_seed(cfg.seed, 1))?;

    let mut rows = Vec::new();
    for (w, &eta) in etas.iter().enumerate() {
        for (model, e) in [(ComparedModel::Coupled, &c_est[w]), (ComparedModel::Reduced, &r_est[w])] {
            rows.push(ComparisonRow { eta, model, er: e.er_hat, er_se: e.er_se, et: e.et_hat, et_se: e.et_se });
        }
        if cfg.family == ModelFamily::Ddm {
            let (et, er) = ddm_et_er(beta, 1.0 / (n as f64).sqrt(), eta)?;
            rows.push(ComparisonRow { eta, model: ComparedModel::Centralized, er, er_se: 0.0, et, et_se: 0.0 });
            let (et, er) = corrected_performance(eta, beta, mu, n)?;
            rows.push(ComparisonRow { eta, model: ComparedModel::Corrected, er, er_se: 0.0, et, et_se: 0.0 });
            if let Some(pcfg) = &cfg.pde {
                let et = solve_reduced_pde(mu, beta, n, eta, pcfg, Quantity::ExpectedTime)?.at_origin();
                let er = solve_reduced_pde(mu, beta, n, eta, pcfg, Quantity::ErrorRate)?.at_origin();
                rows.push(ComparisonRow { eta, model: ComparedModel::Pde, er, er_se: 0.0, et, et_se: 0.0 });
            }
        }
    }
    Ok(ModelComparison {
        rows,
        coupled_fpt: (0..etas.len()).map(|w| decided_times(&c_out, w)).collect(),
        reduced_fpt: (0..etas.len()).map(|w| decided_times(&r_out, w)).collect(),
    })
}
