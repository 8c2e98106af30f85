//! Euler–Maruyama integration with first-passage stopping rules.
//!
//! Every trial draws its Wiener increments from its own counter-based
//! ChaCha stream keyed by `(seed, trial)`, so ensembles are reproducible and
//! independent of how trials are scheduled across threads.
//!
//! Paths are never stopped early for a single watcher: all watched nodes see
//! the same evolving state, and the trial ends once every watcher has
//! decided (or at `max_t`).

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ModelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation setting: {0}")]
    InvalidConfig(String),
}

fn bad(msg: impl Into<String>) -> SimError {
    SimError::InvalidConfig(msg.into())
}

/// Identifies one reproducible stream of standard normal draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    pub seed: u64,
    pub stream: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        NoiseStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// `steps` Wiener increment vectors of dimension `noise_dim` over `dt`.
    pub fn increments(&self, noise_dim: usize, dt: f64, steps: usize) -> Vec<Vec<f64>> {
        let mut rng = self.rng();
        let sdt = dt.sqrt();
        (0..steps).map(|_| (0..noise_dim).map(|_| sdt * normal(&mut rng)).collect()).collect()
    }

    /// Uniform in `[0, 1)` addressed by `(coord, step)` within this stream.
    /// Used for sub-step crossing tests so that the normal draws are not
    /// perturbed by whether a test was needed.
    fn uniform_at(&self, coord: usize, step: u64) -> f64 {
        let mut h = splitmix(self.seed ^ 0x5851_f42d_4c95_7f2d);
        h = splitmix(h ^ self.stream);
        h = splitmix(h ^ coord as u64);
        h = splitmix(h ^ step);
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[inline]
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sparse row-compressed form of a [`ModelSpec`] for fast stepping.
#[derive(Debug, Clone)]
pub struct Integrator {
    dim: usize,
    noise_dim: usize,
    offset: Vec<f64>,
    a_ptr: Vec<usize>,
    a_idx: Vec<usize>,
    a_val: Vec<f64>,
    b_ptr: Vec<usize>,
    b_idx: Vec<usize>,
    b_val: Vec<f64>,
    variance_rate: Vec<f64>,
}

impl Integrator {
    pub fn new(spec: &ModelSpec) -> Self {
        let dim = spec.dim();
        let (a_ptr, a_idx, a_val) = compress(spec.drift_matrix());
        let (b_ptr, b_idx, b_val) = compress(spec.diffusion());
        Integrator {
            dim,
            noise_dim: spec.noise_dim(),
            offset: spec.drift_offset().iter().copied().collect(),
            a_ptr,
            a_idx,
            a_val,
            b_ptr,
            b_idx,
            b_val,
            variance_rate: (0..dim).map(|i| spec.variance_rate(i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    /// `out = x + (b - A x) dt + B dw`.
    #[inline]
    pub fn step_into(&self, x: &[f64], dt: f64, dw: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            let mut drift = self.offset[i];
            for p in self.a_ptr[i]..self.a_ptr[i + 1] {
                drift -= self.a_val[p] * x[self.a_idx[p]];
            }
            let mut noise = 0.0;
            for p in self.b_ptr[i]..self.b_ptr[i + 1] {
                noise += self.b_val[p] * dw[self.b_idx[p]];
            }
            out[i] = x[i] + drift * dt + noise;
        }
    }
}

fn compress(m: &nalgebra::DMatrix<f64>) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut ptr = vec![0];
    let mut idx = Vec::new();
    let mut val = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if v != 0.0 {
                idx.push(c);
                val.push(v);
            }
        }
        ptr.push(idx.len());
    }
    (ptr, idx, val)
}

/// One Euler–Maruyama step `x + (b - A x) dt + B dW`.
pub fn step(spec: &ModelSpec, x: &[f64], dt: f64, dw: &[f64]) -> Result<Vec<f64>, SimError> {
    if !(dt > 0.0) {
        return Err(bad("dt must be positive"));
    }
    if x.len() != spec.dim() || dw.len() != spec.noise_dim() {
        return Err(bad("state or increment dimension mismatch"));
    }
    let mut out = vec![0.0; x.len()];
    Integrator::new(spec).step_into(x, dt, dw, &mut out);
    Ok(out)
}

/// Integrate from the origin with caller-supplied increments; returns the
/// state after each step (the initial zero state is not included).
pub fn integrate_with_increments(
    spec: &ModelSpec,
    dt: f64,
    increments: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>, SimError> {
    let integ = Integrator::new(spec);
    let mut x = vec![0.0; spec.dim()];
    let mut out = Vec::with_capacity(increments.len());
    for dw in increments {
        if dw.len() != spec.noise_dim() {
            return Err(bad("increment dimension mismatch"));
        }
        let mut next = vec![0.0; x.len()];
        integ.step_into(&x, dt, dw, &mut next);
        out.push(next.clone());
        x = next;
    }
    Ok(out)
}

/// States at the requested times (rounded to the step grid), starting from
/// the origin and driven by `stream`.
pub fn sample_states(spec: &ModelSpec, dt: f64, times: &[f64], stream: NoiseStream) -> Result<Vec<Vec<f64>>, SimError> {
    if !(dt > 0.0) {
        return Err(bad("dt must be positive"));
    }
    let integ = Integrator::new(spec);
    let mut rng = stream.rng();
    let sdt = dt.sqrt();
    let mut targets: Vec<(usize, u64)> = times.iter().map(|t| (t / dt).round() as u64).enumerate().collect();
    targets.sort_by_key(|&(_, s)| s);
    let mut out = vec![Vec::new(); times.len()];
    let mut x = vec![0.0; integ.dim];
    let mut next = x.clone();
    let mut dw = vec![0.0; integ.noise_dim];
    let mut done = 0u64;
    for (slot, target) in targets {
        while done < target {
            for w in dw.iter_mut() {
                *w = sdt * normal(&mut rng);
            }
            integ.step_into(&x, dt, &dw, &mut next);
            std::mem::swap(&mut x, &mut next);
            done += 1;
        }
        out[slot] = x.clone();
    }
    Ok(out)
}

/// Symmetric threshold `+-threshold` on one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdWatch {
    pub node: usize,
    pub coord: usize,
    pub threshold: f64,
}

/// Race margin rule on a group of per-alternative coordinates: alternative
/// `a` wins once `x_a - max_{j != a} x_j >= thresholds[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceWatch {
    pub node: usize,
    pub coords: Vec<usize>,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StoppingRule {
    SymmetricThreshold {
        watches: Vec<ThresholdWatch>,
    },
    /// First passage to `+threshold` only.
    UpperThreshold {
        watches: Vec<ThresholdWatch>,
    },
    RaceMargin {
        watches: Vec<RaceWatch>,
    },
    None,
}

impl StoppingRule {
    /// Same threshold on the evidence coordinate of each listed node
    /// (coordinate index equals node id).
    pub fn symmetric(nodes: &[usize], threshold: f64) -> Self {
        StoppingRule::SymmetricThreshold {
            watches: nodes.iter().map(|&k| ThresholdWatch { node: k, coord: k, threshold }).collect(),
        }
    }

    /// Threshold on coordinate 0, labelled as `node` (reduced and scalar models).
    pub fn scalar(node: usize, threshold: f64) -> Self {
        StoppingRule::SymmetricThreshold { watches: vec![ThresholdWatch { node, coord: 0, threshold }] }
    }

    /// One-sided threshold on coordinate 0.
    pub fn upper(node: usize, threshold: f64) -> Self {
        StoppingRule::UpperThreshold { watches: vec![ThresholdWatch { node, coord: 0, threshold }] }
    }

    /// Race rule for every listed node of an `m`-alternative node-major model.
    pub fn race(nodes: &[usize], thresholds: &[f64]) -> Self {
        let m = thresholds.len();
        StoppingRule::RaceMargin {
            watches: nodes
                .iter()
                .map(|&k| RaceWatch {
                    node: k,
                    coords: (0..m).map(|a| k * m + a).collect(),
                    thresholds: thresholds.to_vec(),
                })
                .collect(),
        }
    }

    pub fn watcher_count(&self) -> usize {
        match self {
            StoppingRule::SymmetricThreshold { watches } | StoppingRule::UpperThreshold { watches } => watches.len(),
            StoppingRule::RaceMargin { watches } => watches.len(),
            StoppingRule::None => 0,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), SimError> {
        let pos = |t: f64| t.is_finite() && t > 0.0;
        match self {
            StoppingRule::SymmetricThreshold { watches } | StoppingRule::UpperThreshold { watches } => {
                for w in watches {
                    if w.coord >= dim {
                        return Err(bad(format!("watched coordinate {} outside state dimension {dim}", w.coord)));
                    }
                    if !pos(w.threshold) {
                        return Err(bad(format!("threshold must be positive, got {}", w.threshold)));
                    }
                }
            }
            StoppingRule::RaceMargin { watches } => {
                for w in watches {
                    if w.coords.len() < 2 || w.coords.len() != w.thresholds.len() {
                        return Err(bad("race watch needs >= 2 coordinates with one threshold each"));
                    }
                    if w.coords.iter().any(|&c| c >= dim) {
                        return Err(bad("race coordinate outside state dimension"));
                    }
                    if !w.thresholds.iter().all(|&t| pos(t)) {
                        return Err(bad("race thresholds must be positive"));
                    }
                }
            }
            StoppingRule::None => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Upper,
    Lower,
    Alternative(usize),
    Timeout,
}

impl Decision {
    pub fn label(&self) -> String {
        match self {
            Decision::Upper => "upper".into(),
            Decision::Lower => "lower".into(),
            Decision::Alternative(a) => format!("alt{a}"),
            Decision::Timeout => "timeout".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    /// Position of the watch in the stopping rule.
    pub watcher: usize,
    pub node: usize,
    pub decision: Decision,
    pub decision_time: f64,
    pub steps: u64,
}

/// How threshold crossings are detected between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    /// Cross only when a grid value is beyond the threshold.
    Grid,
    /// Additionally test for an excursion between grid points with the
    /// Brownian-bridge crossing probability
    /// `exp(-2 (eta - x0)(eta - x1) / (v dt))` of the watched coordinate.
    /// Threshold rules only; race rules always use grid detection.
    #[default]
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub max_t: f64,
    pub detection: Detection,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-3, max_t: 500.0, detection: Detection::Bridge }
    }
}

impl SimConfig {
    pub fn with_dt(dt: f64) -> Self {
        SimConfig { dt, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(bad("dt must be positive"));
        }
        if !(self.max_t.is_finite() && self.max_t >= self.dt) {
            return Err(bad("max_t must be at least dt"));
        }
        Ok(())
    }

    fn max_steps(&self) -> u64 {
        (self.max_t / self.dt - 1e-9).ceil() as u64
    }
}

/// Bridge crossing probability, with the exponential skipped when it is
/// negligibly small.
#[inline]
fn bridge_probability(gap0: f64, gap1: f64, var_dt: f64) -> f64 {
    let e = 2.0 * gap0 * gap1 / var_dt;
    if e > 40.0 {
        0.0
    } else {
        (-e).exp()
    }
}

/// Run one trial until every watch has decided or `max_t` is reached.
/// Outcomes are returned in watch order.
pub fn run_trial(
    spec: &ModelSpec,
    rule: &StoppingRule,
    cfg: &SimConfig,
    stream: NoiseStream,
) -> Result<Vec<TrialOutcome>, SimError> {
    cfg.validate()?;
    rule.validate(spec.dim())?;
    Ok(run_trial_compiled(&Integrator::new(spec), rule, cfg, stream))
}

fn run_trial_compiled(
    integ: &Integrator,
    rule: &StoppingRule,
    cfg: &SimConfig,
    stream: NoiseStream,
) -> Vec<TrialOutcome> {
    let watchers = rule.watcher_count();
    let trial = stream.stream;
    let mut outcomes: Vec<Option<TrialOutcome>> = vec![None; watchers];
    let max_steps = cfg.max_steps();
    let dt = cfg.dt;
    let sdt = dt.sqrt();
    let bridge = cfg.detection == Detection::Bridge;
    let mut rng = stream.rng();
    let mut x = vec![0.0; integ.dim];
    let mut next = vec![0.0; integ.dim];
    let mut dw = vec![0.0; integ.noise_dim];
    let mut pending = watchers;

    let mut step_no = 0u64;
    while pending > 0 && step_no < max_steps {
        for w in dw.iter_mut() {
            *w = sdt * normal(&mut rng);
        }
        integ.step_into(&x, dt, &dw, &mut next);
        step_no += 1;
        let t = step_no as f64 * dt;

        match rule {
            StoppingRule::SymmetricThreshold { watches } | StoppingRule::UpperThreshold { watches } => {
                let two_sided = matches!(rule, StoppingRule::SymmetricThreshold { .. });
                for (i, w) in watches.iter().enumerate() {
                    if outcomes[i].is_some() {
                        continue;
                    }
                    let (x0, x1, eta) = (x[w.coord], next[w.coord], w.threshold);
                    let mut decision = if x1 >= eta {
                        Some(Decision::Upper)
                    } else if two_sided && x1 <= -eta {
                        Some(Decision::Lower)
                    } else {
                        None
                    };
                    if decision.is_none() && bridge {
                        let var_dt = integ.variance_rate[w.coord] * dt;
                        let p_up = bridge_probability(eta - x0, eta - x1, var_dt);
                        let p_dn = if two_sided { bridge_probability(eta + x0, eta + x1, var_dt) } else { 0.0 };
                        if p_up > 0.0 || p_dn > 0.0 {
                            let u = stream.uniform_at(w.coord, step_no);
                            if u < p_up {
                                decision = Some(Decision::Upper);
                            } else if 1.0 - u < p_dn {
                                decision = Some(Decision::Lower);
                            }
                        }
                    }
                    if let Some(decision) = decision {
                        outcomes[i] = Some(TrialOutcome {
                            trial,
                            watcher: i,
                            node: w.node,
                            decision,
                            decision_time: t,
                            steps: step_no,
                        });
                        pending -= 1;
                    }
                }
            }
            StoppingRule::RaceMargin { watches } => {
                for (i, w) in watches.iter().enumerate() {
                    if outcomes[i].is_some() {
                        continue;
                    }
                    if let Some(a) = race_winner(&next, w) {
                        outcomes[i] = Some(TrialOutcome {
                            trial,
                            watcher: i,
                            node: w.node,
                            decision: Decision::Alternative(a),
                            decision_time: t,
                            steps: step_no,
                        });
                        pending -= 1;
                    }
                }
            }
            StoppingRule::None => {}
        }
        std::mem::swap(&mut x, &mut next);
    }

    let nodes: Vec<usize> = match rule {
        StoppingRule::SymmetricThreshold { watches } | StoppingRule::UpperThreshold { watches } => {
            watches.iter().map(|w| w.node).collect()
        }
        StoppingRule::RaceMargin { watches } => watches.iter().map(|w| w.node).collect(),
        StoppingRule::None => Vec::new(),
    };
    outcomes
        .into_iter()
        .enumerate()
        .map(|(i, o)| {
            o.unwrap_or(TrialOutcome {
                trial,
                watcher: i,
                node: nodes[i],
                decision: Decision::Timeout,
                decision_time: max_steps as f64 * dt,
                steps: max_steps,
            })
        })
        .collect()
}

/// Lowest alternative whose margin over the best competitor meets its
/// threshold.
fn race_winner(x: &[f64], w: &RaceWatch) -> Option<usize> {
    for (a, &ca) in w.coords.iter().enumerate() {
        let rival =
            w.coords.iter().enumerate().filter(|&(j, _)| j != a).map(|(_, &c)| x[c]).fold(f64::NEG_INFINITY, f64::max);
        if x[ca] - rival >= w.thresholds[a] {
            return Some(a);
        }
    }
    None
}

/// Run `trials` independent trials; trial `i` uses `NoiseStream(seed, i)`.
/// Outcomes are ordered by trial, then by watch.
pub fn run_ensemble(
    spec: &ModelSpec,
    rule: &StoppingRule,
    cfg: &SimConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialOutcome>, SimError> {
    if trials == 0 {
        return Err(bad("trials must be at least 1"));
    }
    cfg.validate()?;
    rule.validate(spec.dim())?;
    let integ = Integrator::new(spec);
    let per_trial: Vec<Vec<TrialOutcome>> =
        (0..trials).into_par_iter().map(|i| run_trial_compiled(&integ, rule, cfg, NoiseStream::new(seed, i))).collect();
    Ok(per_trial.into_iter().flatten().collect())
}

/// Write outcomes as `trial,node,decision,decision_time,steps`.
pub fn write_outcomes_csv<W: Write>(mut w: W, outcomes: &[TrialOutcome], node_offset: usize) -> io::Result<()> {
    writeln!(w, "trial,node,decision,decision_time,steps")?;
    for o in outcomes {
        writeln!(w, "{},{},{},{},{}", o.trial, o.node + node_offset, o.decision.label(), o.decision_time, o.steps)?;
    }
    Ok(())
}
