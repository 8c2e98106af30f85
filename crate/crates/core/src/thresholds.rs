//! Threshold selection and the threshold-corrected centralized model.
//!
//! A node with certainty index `μ_k` behaves approximately like the
//! centralized DDM (diffusion `1/√n`) run with the smaller threshold
//! `η - K̄(β)/√μ_k`, where `K̄` is an empirical fit of the observed shift.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ddm_et_er;
use crate::graph::CertaintyIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no root found: {0}")]
    NoRoot(String),
    #[error("error bound R = {r} must lie in (0, {max}) for {m} alternatives")]
    InvalidR { r: f64, m: usize, max: f64 },
}

fn invalid(msg: impl Into<String>) -> ThresholdError {
    ThresholdError::InvalidParameter(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), ThresholdError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Empirical threshold-shift constant `K̄(β) = e^{-1/(4√β)} / (√β (1 + β/3))`.
pub fn kbar(beta: f64) -> Result<f64, ThresholdError> {
    positive("beta", beta)?;
    let r = beta.sqrt();
    Ok((-1.0 / (4.0 * r)).exp() / (r * (1.0 + beta / 3.0)))
}

/// `max(0, η - K̄(β)/√μ)`.
pub fn corrected_threshold(eta: f64, beta: f64, mu: f64) -> Result<f64, ThresholdError> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid("eta must be non-negative"));
    }
    positive("mu", mu)?;
    Ok((eta - kbar(beta)? / mu.sqrt()).max(0.0))
}

/// ET and ER of the centralized DDM at the corrected threshold.
pub fn corrected_performance(eta: f64, beta: f64, mu: f64, n: usize) -> Result<(f64, f64), ThresholdError> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let h = corrected_threshold(eta, beta, mu)?;
    ddm_et_er(beta, 1.0 / (n as f64).sqrt(), h).map_err(|e| invalid(e.to_string()))
}

fn check_alpha(alpha: f64) -> Result<(), ThresholdError> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0, 1/2), got {alpha}")))
    }
}

/// Node threshold meeting error probability `α` (approximate form).
pub fn wald_threshold(alpha: f64, beta: f64, n: usize, mu: f64) -> Result<f64, ThresholdError> {
    check_alpha(alpha)?;
    positive("mu", mu)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let log_term = ((1.0 - alpha) / alpha).ln() / (2.0 * beta * n as f64);
    Ok(kbar(beta)? / mu.sqrt() + log_term)
}

/// `((1 - 2α)/β) · wald_threshold(α, β, n, μ)`.
pub fn wald_expected_time(alpha: f64, beta: f64, n: usize, mu: f64) -> Result<f64, ThresholdError> {
    Ok((1.0 - 2.0 * alpha) / beta * wald_threshold(alpha, beta, n, mu)?)
}

/// Bisection for a sign change of `f` on `[lo, hi]`, run to machine
/// resolution; returns the endpoint with the smaller residual.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Bayes-risk residual `2cβ²n - 4βnη + e^{-2βnη} - e^{2βnη}`.
pub fn bayes_residual(eta: f64, cost: f64, beta: f64, n: usize) -> f64 {
    let bn = beta * n as f64;
    2.0 * cost * beta * beta * n as f64 - 4.0 * bn * eta + (-2.0 * bn * eta).exp() - (2.0 * bn * eta).exp()
}

/// Corrected threshold minimizing Bayes risk for error cost `c`.
pub fn bayes_threshold(cost: f64, beta: f64, n: usize) -> Result<f64, ThresholdError> {
    positive("cost", cost)?;
    positive("beta", beta)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let f = |eta: f64| bayes_residual(eta, cost, beta, n);
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(ThresholdError::NoRoot(format!("no sign change below 1e3 for c = {cost}")));
        }
    }
    Ok(bisect(f, 0.0, hi))
}

/// Reward-rate residual `e^{2βnη} - 1 - 2β²n(D + D_p + T_m - η/β)`.
pub fn reward_rate_residual(eta: f64, d: f64, d_penalty: f64, t_motor: f64, beta: f64, n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * beta * nf * eta).exp() - 1.0 - 2.0 * beta * beta * nf * (d + d_penalty + t_motor - eta / beta)
}

/// Corrected threshold maximizing reward rate with inter-trial delay `D`,
/// error penalty delay `D_p` and motor time `T_m`.
pub fn reward_rate_threshold(d: f64, d_penalty: f64, t_motor: f64, beta: f64, n: usize) -> Result<f64, ThresholdError> {
    positive("beta", beta)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let total = d + d_penalty + t_motor;
    if !(total > 0.0 && total.is_finite()) {
        return Err(ThresholdError::NoRoot(format!("D + D_p + T_motor = {total} must be positive")));
    }
    let f = |eta: f64| reward_rate_residual(eta, d, d_penalty, t_motor, beta, n);
    Ok(bisect(f, 0.0, beta * total))
}

/// Race-model threshold `log((m - 1)/(m R))` bounding the error probability
/// by `R` for `m` alternatives.
pub fn race_threshold(m: usize, r: f64) -> Result<f64, ThresholdError> {
    if m < 2 {
        return Err(invalid("need at least two alternatives"));
    }
    let max = (m as f64 - 1.0) / m as f64;
    if !(r > 0.0 && r < max) {
        return Err(ThresholdError::InvalidR { r, m, max });
    }
    Ok(((m as f64 - 1.0) / (m as f64 * r)).ln())
}

/// Threshold selection rule. The optional `per_node` vectors override the
/// shared parameter node by node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThresholdPolicy {
    Fixed {
        eta: f64,
    },
    Wald {
        alpha: f64,
        #[serde(default)]
        per_node: Option<Vec<f64>>,
    },
    Bayes {
        cost: f64,
        #[serde(default)]
        per_node: Option<Vec<f64>>,
    },
    RewardRate {
        d: f64,
        d_penalty: f64,
        t_motor: f64,
        #[serde(default)]
        per_node: Option<Vec<f64>>,
    },
}

fn node_param(shared: f64, per_node: &Option<Vec<f64>>, k: usize, n: usize) -> Result<f64, ThresholdError> {
    match per_node {
        None => Ok(shared),
        Some(v) if v.len() == n => Ok(v[k]),
        Some(v) => Err(invalid(format!("per_node has {} entries for {n} nodes", v.len()))),
    }
}

/// Per-node thresholds. Bayes and reward-rate solve for the corrected
/// threshold and add `K̄(β)/√μ_k` back.
pub fn apply_policy(policy: &ThresholdPolicy, mu: &CertaintyIndex, beta: f64) -> Result<Vec<f64>, ThresholdError> {
    let n = mu.len();
    if n == 0 {
        return Err(invalid("empty certainty index"));
    }
    let kb = kbar(beta)?;
    (0..n)
        .map(|k| {
            let m = mu.get(k);
            let eta = match policy {
                ThresholdPolicy::Fixed { eta } => {
                    if !(*eta >= 0.0 && eta.is_finite()) {
                        return Err(invalid("fixed threshold must be non-negative"));
                    }
                    *eta
                }
                ThresholdPolicy::Wald { alpha, per_node } => {
                    wald_threshold(node_param(*alpha, per_node, k, n)?, beta, n, m)?
                }
                ThresholdPolicy::Bayes { cost, per_node } => {
                    bayes_threshold(node_param(*cost, per_node, k, n)?, beta, n)? + kb / m.sqrt()
                }
                ThresholdPolicy::RewardRate { d, d_penalty, t_motor, per_node } => {
                    reward_rate_threshold(node_param(*d, per_node, k, n)?, *d_penalty, *t_motor, beta, n)?
                        + kb / m.sqrt()
                }
            };
            Ok(eta)
        })
        .collect()
}
