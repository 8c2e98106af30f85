use std::path::PathBuf;

use netddm::dynamics::{centralized_ddm, coupled_ddm, coupled_ou, coupled_race, reduced_ddm, reduced_ou, ModelSpec};
use netddm::graph::{benchmark_graph, ensemble_edge_probability, erdos_renyi, spectrum, CertaintyIndex, Graph};
use netddm::simulate::{SimConfig, StoppingRule, ThresholdWatch};
use netddm::thresholds::{apply_policy, bayes_threshold, reward_rate_threshold, ThresholdPolicy};
use serde::{Deserialize, Serialize};

use crate::output::{CliError, Context};

/// Where the interaction graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    /// Only `paper9` is available.
    Builtin { name: String },
    /// Edge-list text file (0-indexed node ids).
    File { path: PathBuf },
    /// Connected G(n, p); `p` defaults to `1.1 ln(n) / n`.
    ErdosRenyi {
        n: usize,
        #[serde(default)]
        p: Option<f64>,
        seed: u64,
    },
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph, CliError> {
        match self {
            GraphSource::Builtin { name } if name == "paper9" => Ok(benchmark_graph()),
            GraphSource::Builtin { name } => {
                Err(CliError::validation(format!("unknown builtin graph `{name}` (have: paper9)")))
            }
            GraphSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
                Graph::from_edge_list(&text).op("graph parsing")
            }
            GraphSource::ErdosRenyi { n, p, seed } => {
                erdos_renyi(*n, p.unwrap_or_else(|| ensemble_edge_probability(*n)), *seed).op("graph generation")
            }
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Model family and parameters. `node` ids are 1-indexed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    CoupledDdm {
        beta: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
    CentralizedDdm {
        beta: f64,
    },
    CoupledOu {
        beta: f64,
        theta: f64,
    },
    ReducedDdm {
        beta: f64,
        node: usize,
    },
    ReducedOu {
        beta: f64,
        theta: f64,
        node: usize,
    },
    CoupledRace {
        betas: Vec<f64>,
        #[serde(default = "one")]
        sigma: f64,
    },
}

/// Either a threshold policy for two-alternative models or one race
/// threshold per alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThresholdConfig {
    Policy(ThresholdPolicy),
    Race(Vec<f64>),
}

/// Input of `netddm simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub model: ModelConfig,
    pub thresholds: ThresholdConfig,
    /// Watched nodes (1-indexed) for coupled models; all nodes when absent.
    #[serde(default)]
    pub nodes: Option<Vec<usize>>,
    #[serde(default)]
    pub sim: SimConfig,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn template() -> Self {
        RunConfig {
            graph: GraphSource::Builtin { name: "paper9".into() },
            model: ModelConfig::CoupledDdm { beta: 0.1, sigma: 1.0 },
            thresholds: ThresholdConfig::Policy(ThresholdPolicy::Fixed { eta: 3.0 }),
            nodes: Some(vec![1, 2, 6]),
            sim: SimConfig::default(),
            trials: 1000,
            seed: 1,
        }
    }
}

/// Everything a run needs, derived from a [`RunConfig`].
pub struct ResolvedRun {
    pub spec: ModelSpec,
    pub rule: StoppingRule,
    pub n: usize,
    pub mu: Vec<f64>,
    /// `(node, threshold)` per watch, 0-indexed nodes.
    pub watches: Vec<(usize, f64)>,
}

fn to_index(node: usize, n: usize) -> Result<usize, CliError> {
    if node == 0 || node > n {
        return Err(CliError::validation(format!("node {node} out of range 1..={n}")));
    }
    Ok(node - 1)
}

fn single_threshold(
    policy: &ThresholdPolicy,
    beta: f64,
    n: usize,
    mu: &CertaintyIndex,
    k: Option<usize>,
) -> Result<f64, CliError> {
    match k {
        Some(k) => Ok(apply_policy(policy, mu, beta).op("threshold policy")?[k]),
        // centralized model: no threshold correction
        None => match policy {
            ThresholdPolicy::Fixed { eta } => Ok(*eta),
            ThresholdPolicy::Wald { alpha, per_node: None } => {
                if !(*alpha > 0.0 && *alpha < 0.5) {
                    return Err(CliError::validation("alpha must lie in (0, 1/2)"));
                }
                Ok(((1.0 - alpha) / alpha).ln() / (2.0 * beta * n as f64))
            }
            ThresholdPolicy::Bayes { cost, per_node: None } => bayes_threshold(*cost, beta, n).op("bayes threshold"),
            ThresholdPolicy::RewardRate { d, d_penalty, t_motor, per_node: None } => {
                reward_rate_threshold(*d, *d_penalty, *t_motor, beta, n).op("reward-rate threshold")
            }
            _ => Err(CliError::validation("per_node overrides need a networked model")),
        },
    }
}

pub fn resolve(cfg: &RunConfig) -> Result<ResolvedRun, CliError> {
    cfg.sim.validate().op("simulation config")?;
    let g = cfg.graph.load()?;
    let n = g.node_count();
    let mu = CertaintyIndex::from_spectrum(&spectrum(&g).op("spectrum")?);
    let watched = |default_all: bool| -> Result<Vec<usize>, CliError> {
        match &cfg.nodes {
            Some(v) if v.is_empty() => Err(CliError::validation("nodes must not be empty")),
            Some(v) => v.iter().map(|&k| to_index(k, n)).collect(),
            None if default_all => Ok((0..n).collect()),
            None => Ok(vec![0]),
        }
    };
    let policy = |what: &str| match &cfg.thresholds {
        ThresholdConfig::Policy(p) => Ok(p.clone()),
        ThresholdConfig::Race(_) => {
            Err(CliError::validation(format!("{what} needs a threshold policy, not race thresholds")))
        }
    };
    let (spec, rule, watches) = match &cfg.model {
        ModelConfig::CoupledDdm { beta, sigma } => {
            let p = policy("coupled-ddm")?;
            let etas = apply_policy(&p, &mu, *beta).op("threshold policy")?;
            let nodes = watched(true)?;
            let w: Vec<(usize, f64)> = nodes.iter().map(|&k| (k, etas[k])).collect();
            (coupled_ddm(&g, *beta, *sigma).op("model")?, symmetric(&w), w)
        }
        ModelConfig::CoupledOu { beta, theta } => {
            let p = policy("coupled-ou")?;
            let etas = apply_policy(&p, &mu, *beta).op("threshold policy")?;
            let nodes = watched(true)?;
            let w: Vec<(usize, f64)> = nodes.iter().map(|&k| (k, etas[k])).collect();
            (coupled_ou(&g, *beta, *theta).op("model")?, symmetric(&w), w)
        }
        ModelConfig::CentralizedDdm { beta } => {
            let eta = single_threshold(&policy("centralized-ddm")?, *beta, n, &mu, None)?;
            (centralized_ddm(n, *beta).op("model")?, StoppingRule::scalar(0, eta), vec![(0, eta)])
        }
        ModelConfig::ReducedDdm { beta, node } => {
            let k = to_index(*node, n)?;
            let eta = single_threshold(&policy("reduced-ddm")?, *beta, n, &mu, Some(k))?;
            (reduced_ddm(mu.get(k), *beta, n).op("model")?, StoppingRule::scalar(k, eta), vec![(k, eta)])
        }
        ModelConfig::ReducedOu { beta, theta, node } => {
            let k = to_index(*node, n)?;
            let eta = single_threshold(&policy("reduced-ou")?, *beta, n, &mu, Some(k))?;
            // the reduced O-U error rate uses the O-U certainty index of the node
            let s = spectrum(&g).op("spectrum")?;
            let mu_hat = netddm::dynamics::ou_certainty_index(&s, *theta, k).op("certainty index")?;
            (reduced_ou(mu_hat, *beta, *theta, n).op("model")?, StoppingRule::scalar(k, eta), vec![(k, eta)])
        }
        ModelConfig::CoupledRace { betas, sigma } => {
            let ThresholdConfig::Race(th) = &cfg.thresholds else {
                return Err(CliError::validation("coupled-race needs `race` thresholds"));
            };
            if th.len() != betas.len() {
                return Err(CliError::validation(format!(
                    "{} race thresholds for {} alternatives",
                    th.len(),
                    betas.len()
                )));
            }
            let nodes = watched(true)?;
            let spec = coupled_race(&g, betas, *sigma).op("model")?;
            let w = nodes.iter().map(|&k| (k, th[0])).collect();
            (spec, StoppingRule::race(&nodes, th), w)
        }
    };
    rule.validate(spec.dim()).op("stopping rule")?;
    Ok(ResolvedRun { spec, rule, n, mu: mu.as_slice().to_vec(), watches })
}

fn symmetric(w: &[(usize, f64)]) -> StoppingRule {
    StoppingRule::SymmetricThreshold {
        watches: w.iter().map(|&(k, threshold)| ThresholdWatch { node: k, coord: k, threshold }).collect(),
    }
}
