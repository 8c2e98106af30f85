//! Closed-form decision performance and first-passage bounds.
//!
//! The scalar error surrogate is the O-U process `dε = -(μ/2) ε dt + dW`
//! started at zero. Its mean first passage time to a level `η` is written in
//! terms of
//!
//! ```text
//! φ(z) = ∫_0^z e^{τ²} dτ
//! ψ(z) = ∫_0^z e^{τ²} ∫_0^τ e^{-s²} ds dτ
//! ```
//!
//! evaluated at `z = η √(μ/2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest argument accepted by [`phi`] and [`psi`].
pub const MAX_ARGUMENT: f64 = 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("argument {z} exceeds the supported range z <= 6")]
    DomainOverflow { z: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bounds need eta > K/sqrt(mu): {0}")]
    InvalidRegime(String),
}

fn invalid(msg: impl Into<String>) -> AnalysisError {
    AnalysisError::InvalidParameter(msg.into())
}

/// Expected decision time and error rate of `dx = β dt + σ dW` with
/// thresholds `±η`, started at zero.
pub fn ddm_et_er(beta: f64, sigma: f64, eta: f64) -> Result<(f64, f64), AnalysisError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma must be positive"));
    }
    if !(eta >= 0.0 && eta.is_finite()) || !beta.is_finite() {
        return Err(invalid("eta must be non-negative and beta finite"));
    }
    if beta == 0.0 {
        return Ok((eta * eta / (sigma * sigma), 0.5));
    }
    let a = beta * eta / (sigma * sigma);
    let et = (eta / beta) * a.tanh();
    let er = 1.0 / (1.0 + (2.0 * a).exp());
    Ok((et, er))
}

fn check_argument(z: f64) -> Result<(), AnalysisError> {
    if !(z >= 0.0) {
        return Err(invalid(format!("argument must be non-negative, got {z}")));
    }
    if z > MAX_ARGUMENT {
        return Err(AnalysisError::DomainOverflow { z });
    }
    Ok(())
}

/// `∫_0^z e^{τ²} dτ` by its power series.
pub fn phi(z: f64) -> Result<f64, AnalysisError> {
    check_argument(z)?;
    let z2 = z * z;
    // power = z^{2k+1}/k!
    let mut power = z;
    let mut sum = 0.0;
    let mut k = 0u32;
    loop {
        let term = power / (2 * k + 1) as f64;
        sum += term;
        k += 1;
        power *= z2 / k as f64;
        // terms decrease once k > z², after which the tail is geometric
        if k as f64 > z2 && term < 1e-17 * sum {
            break;
        }
        if k > 2000 {
            break;
        }
    }
    Ok(sum)
}

fn psi_integrand(t: f64) -> f64 {
    (t * t).exp() * 0.5 * std::f64::consts::PI.sqrt() * libm::erf(t)
}

/// `∫_0^z e^{τ²} ∫_0^τ e^{-s²} ds dτ`, reduced to one dimension with erf and
/// integrated adaptively.
pub fn psi(z: f64) -> Result<f64, AnalysisError> {
    check_argument(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(adaptive_simpson(psi_integrand, 0.0, z, 1e-13))
}

/// Adaptive Simpson quadrature with a relative tolerance on the total.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn check_ou(mu: f64, eta: f64) -> Result<(), AnalysisError> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu must be positive"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta must be positive"));
    }
    Ok(())
}

/// Mean first passage time of `dε = -(μ/2) ε dt + dW` from 0 to `η`:
/// `(2/μ)(√π φ(z) + 2 ψ(z))` with `z = η √(μ/2)`.
pub fn ou_mean_fpt(mu: f64, eta: f64) -> Result<f64, AnalysisError> {
    check_ou(mu, eta)?;
    let z = eta * (mu / 2.0).sqrt();
    let value = std::f64::consts::PI.sqrt() * phi(z)? + 2.0 * psi(z)?;
    Ok(2.0 / mu * value)
}

/// Exponential approximation `(1/T̄) e^{-t/T̄}` of the first passage density.
pub fn ou_fpt_density(mu: f64, eta: f64, t: f64) -> Result<f64, AnalysisError> {
    if !(t >= 0.0) {
        return Err(invalid("t must be non-negative"));
    }
    let mean = ou_mean_fpt(mu, eta)?;
    Ok((-t / mean).exp() / mean)
}

/// Lower and upper bounds on [`ou_mean_fpt`] built from elementary bounds on
/// φ and ψ. They enclose the mean for `η √(μ/2) >= 1`.
pub fn ou_mean_fpt_bounds(mu: f64, eta: f64) -> Result<(f64, f64), AnalysisError> {
    check_ou(mu, eta)?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let growth = (eta * eta * mu / 2.0).exp();
    let high = 3.0 * sqrt_pi * eta / (2.0 * mu).sqrt() * growth;
    let low = 2.0 / mu
        * (sqrt_pi * (growth - 1.0) / (std::f64::consts::SQRT_2 * eta * mu.sqrt())
            + (growth - 1.0) / (2.0 * eta * eta * mu)
            - 0.5);
    Ok((low, high))
}

/// `exp(-t / L)` where `L` is the lower mean-passage bound at `η = K/√μ`:
/// a lower bound on the probability that the error stays below `K/√μ` up to
/// time `t`. Returns 0 when `L <= 0` (small `K`), where no bound is available.
pub fn p_lower(k: f64, mu: f64, t: f64) -> Result<f64, AnalysisError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid("K must be positive"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t must be non-negative"));
    }
    let (low, _) = ou_mean_fpt_bounds(mu, k / mu.sqrt())?;
    if low <= 0.0 {
        return Ok(0.0);
    }
    Ok((-t / low).exp())
}

/// One-sided: [`p_lower`]. Two-sided (`|ε| <= K/√μ`): `2 p_lower - 1`,
/// reported raw, so it may be negative when the bound is vacuous. The bound
/// is meant for large `K` (roughly `K >= 2`).
pub fn ou_uniform_bound(k: f64, mu: f64, t: f64, two_sided: bool) -> Result<f64, AnalysisError> {
    let p = p_lower(k, mu, t)?;
    Ok(if two_sided { 2.0 * p - 1.0 } else { p })
}

/// Interval for a node's decision performance in the reduced model when the
/// error stays within `±K/√μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceBounds {
    pub et_low: f64,
    pub et_high: f64,
    pub er_low: f64,
    pub er_high: f64,
    /// `2 p_lower(K, μ, et_high) - 1`; informative only when positive.
    pub confidence: f64,
    pub k: f64,
}

/// Performance sandwich for a node with certainty index `μ` in a network of
/// `n` nodes with drift `β` and threshold `η > K/√μ`.
pub fn reduced_perf_bounds(eta: f64, k: f64, mu: f64, beta: f64, n: usize) -> Result<PerformanceBounds, AnalysisError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta must be positive"));
    }
    if !(mu > 0.0 && mu.is_finite()) || n == 0 {
        return Err(invalid("mu must be positive and n >= 1"));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(invalid("K must be non-negative"));
    }
    let shift = k / mu.sqrt();
    if !(eta > shift) {
        return Err(AnalysisError::InvalidRegime(format!("eta = {eta}, K/sqrt(mu) = {shift}")));
    }
    let nf = n as f64;
    let et = |h: f64| (h / beta) * (beta * nf * h).tanh();
    let er = |h: f64| 1.0 / (1.0 + (2.0 * beta * nf * h).exp());
    let et_high = et(eta + shift);
    let confidence = if k > 0.0 { 2.0 * p_lower(k, mu, et_high)? - 1.0 } else { -1.0 };
    Ok(PerformanceBounds {
        et_low: et(eta - shift),
        et_high,
        er_low: er(eta + shift),
        er_high: er(eta - shift),
        confidence,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson with `m` panels (m even).
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
        let h = (b - a) / m as f64;
        let mut s = f(a) + f(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    /// Oracle for ψ: the double integral done by nested quadrature, no erf.
    fn psi_nested(z: f64) -> f64 {
        simpson(|t| (t * t).exp() * simpson(|s| (-s * s).exp(), 0.0, t, 400), 0.0, z, 2000)
    }

    #[test]
    fn ddm_closed_form() {
        assert_eq!(ddm_et_er(0.1, 1.0, 0.0).unwrap(), (0.0, 0.5));
        let (et, er) = ddm_et_er(0.1, 1.0, 3.0).unwrap();
        assert!((et - 30.0 * 0.3_f64.tanh()).abs() < 1e-12);
        assert!((et - 8.7394).abs() < 1e-4);
        assert!((er - 0.35434).abs() < 1e-5);
        let (et, er) = ddm_et_er(1e6, 1.0, 1.0).unwrap();
        assert!(et > 0.0 && et < 1e-5 && er == 0.0);
        assert_eq!(ddm_et_er(0.0, 2.0, 3.0).unwrap(), (2.25, 0.5));
        let (et, _) = ddm_et_er(1e-9, 2.0, 3.0).unwrap();
        assert!((et - 2.25).abs() < 1e-8);
        assert!(ddm_et_er(0.1, 0.0, 1.0).is_err());
        assert!(ddm_et_er(0.1, 1.0, -1.0).is_err());
    }

    #[test]
    fn centralized_limits() {
        // with σ = 1/√n, ET approaches η/β and ER approaches e^{-2βnη}
        let (beta, n) = (0.1, 9.0);
        let sigma = 1.0 / f64::sqrt(n);
        let (et, er) = ddm_et_er(beta, sigma, 20.0).unwrap();
        assert!((et / (20.0 / beta) - 1.0).abs() < 1e-9);
        assert!((er / (-2.0 * beta * n * 20.0_f64).exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert!((phi(1.0).unwrap() - 1.4626517459071816).abs() < 1e-13);
        for z in [0.3, 1.0, 2.5, 4.0, 6.0] {
            let oracle = simpson(|t| (t * t).exp(), 0.0, z, 200_000);
            assert!((phi(z).unwrap() / oracle - 1.0).abs() < 1e-10, "z = {z}");
        }
        for z in [0.5, 1.0, 2.0] {
            let p = phi(z).unwrap();
            let e = (z * z).exp();
            assert!((e - 1.0) / (2.0 * z) <= p && p <= z * e);
        }
        assert!(matches!(phi(6.5), Err(AnalysisError::DomainOverflow { .. })));
        assert!(phi(-1.0).is_err());
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        let oracle = psi_nested(1.0);
        assert!((psi(1.0).unwrap() - oracle).abs() < 1e-9);
        assert!((psi(1.0).unwrap() - 0.7226228).abs() < 1e-6);
        for z in [0.5, 2.0, 3.5] {
            assert!((psi(z).unwrap() / psi_nested(z) - 1.0).abs() < 1e-8, "z = {z}");
        }
        for z in [1.0, 2.0] {
            let p = psi(z).unwrap();
            let e = (z * z).exp();
            assert!(p <= 0.5 * std::f64::consts::PI.sqrt() * z * e);
            assert!(p >= (e - 1.0) / (4.0 * z * z) - 0.5);
        }
        assert!(matches!(psi(7.0), Err(AnalysisError::DomainOverflow { .. })));
    }

    /// Mean exit time from the ODE `T''/2 - (μ/2) x T' = -1` on `(-∞, η)`.
    fn mean_fpt_oracle(mu: f64, eta: f64) -> f64 {
        // T(0) = 2 ∫_0^η e^{μy²/2} ∫_{-∞}^y e^{-μs²/2} ds dy
        let inner = |y: f64| {
            let lo = -12.0 / mu.sqrt();
            simpson(|s| (-mu * s * s / 2.0).exp(), lo, y, 4000)
        };
        2.0 * simpson(|y| (mu * y * y / 2.0).exp() * inner(y), 0.0, eta, 1000)
    }

    #[test]
    fn mean_fpt_matches_ode_solution() {
        for (mu, eta) in [(2.0, 1.0), (1.0, 2.0), (1.0, 3.0), (4.0, 0.5)] {
            let got = ou_mean_fpt(mu, eta).unwrap();
            let want = mean_fpt_oracle(mu, eta);
            assert!((got / want - 1.0).abs() < 1e-6, "({mu}, {eta}): {got} vs {want}");
        }
        assert!((ou_mean_fpt(2.0, 1.0).unwrap() - 4.03773).abs() < 1e-4);
        assert!((ou_mean_fpt(1.0, 2.0).unwrap() - 20.8568).abs() < 1e-3);
    }

    #[test]
    fn mean_fpt_scaling() {
        let base = ou_mean_fpt(1.0, 1.0).unwrap();
        for mu in [0.5, 4.0] {
            let v = ou_mean_fpt(mu, 1.0 / f64::sqrt(mu)).unwrap();
            assert!((v - base / mu).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn density_shape() {
        let mean = ou_mean_fpt(1.0, 3.0).unwrap();
        assert!((ou_fpt_density(1.0, 3.0, 0.0).unwrap() - 1.0 / mean).abs() < 1e-15);
        let total = simpson(|t| ou_fpt_density(1.0, 3.0, t).unwrap(), 0.0, 60.0 * mean, 20_000);
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mean_fpt_sandwich() {
        for mu in [1.0, 2.0] {
            for eta in [1.5, 2.0, 3.0] {
                let (lo, hi) = ou_mean_fpt_bounds(mu, eta).unwrap();
                let t = ou_mean_fpt(mu, eta).unwrap();
                assert!(lo <= t && t <= hi, "({mu}, {eta}): {lo} {t} {hi}");
            }
        }
        let (_, hi) = ou_mean_fpt_bounds(2.0, 2.0).unwrap();
        assert!((hi - 3.0 * std::f64::consts::PI.sqrt() * 4.0_f64.exp()).abs() < 1e-9);
        assert!((hi - 290.3).abs() < 0.05);
        let ratios: Vec<f64> = [4.0, 6.0, 8.0]
            .iter()
            .map(|&eta| {
                let (lo, hi) = ou_mean_fpt_bounds(1.0, eta).unwrap();
                hi / lo
            })
            .collect();
        let (lo, _) = ou_mean_fpt_bounds(1.0, 8.0).unwrap();
        assert!(lo > 1e12);
        // the ratio grows only like η², never exponentially
        assert!(ratios.iter().zip([4.0, 6.0, 8.0]).all(|(r, eta)| *r < 3.0 * eta * eta));
    }

    #[test]
    fn p_lower_properties() {
        assert_eq!(p_lower(3.0, 1.6, 0.0).unwrap(), 1.0);
        let p = p_lower(3.0, 1.6, 10.0).unwrap();
        let (lo, _) = ou_mean_fpt_bounds(1.6, 3.0 / f64::sqrt(1.6)).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert!((p - (-10.0 / lo).exp()).abs() < 1e-12);
        assert!(p_lower(3.0, 1.6, 20.0).unwrap() < p);
        assert!(p_lower(3.5, 1.6, 10.0).unwrap() > p);
        assert_eq!(p_lower(0.01, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(ou_uniform_bound(3.0, 1.0, 0.0, true).unwrap(), 1.0);
    }

    #[test]
    fn perf_bounds_example() {
        let mu: f64 = 4.0;
        let b = reduced_perf_bounds(3.0, 2.0, mu, 0.1, 9).unwrap();
        assert!((b.et_low - 20.0 * 1.8_f64.tanh()).abs() < 1e-12);
        assert!((b.et_high - 40.0 * 3.6_f64.tanh()).abs() < 1e-12);
        assert!((b.et_low - 18.94).abs() < 0.01 && (b.et_high - 39.94).abs() < 0.01);
        assert!((b.er_low - 7.46e-4).abs() < 1e-6);
        assert!((b.er_high - 0.0266).abs() < 1e-4);
        let zero = reduced_perf_bounds(3.0, 0.0, mu, 0.1, 9).unwrap();
        let (et, er) = ddm_et_er(0.1, 1.0 / 3.0, 3.0).unwrap();
        assert!((zero.et_low - et).abs() < 1e-12 && (zero.et_high - et).abs() < 1e-12);
        assert!((zero.er_low - er).abs() < 1e-12 && (zero.er_high - er).abs() < 1e-12);
        assert!(matches!(reduced_perf_bounds(1.0, 2.0, mu, 0.1, 9), Err(AnalysisError::InvalidRegime(_))));
        assert!(reduced_perf_bounds(3.0, 1.0, mu, 0.0, 9).is_err());
    }

    proptest! {
        #[test]
        fn phi_psi_increasing(a in 0.0f64..5.9, d in 1e-3f64..0.1) {
            let b = (a + d).min(6.0);
            prop_assert!(phi(b).unwrap() > phi(a).unwrap());
            prop_assert!(psi(b).unwrap() > psi(a).unwrap());
            prop_assert!(phi(a).unwrap() >= a);
            prop_assert!(psi(a).unwrap() >= 0.0);
        }

        #[test]
        fn mean_fpt_sandwich_in_range(mu in 0.2f64..5.0, z in 1.0f64..4.0) {
            let eta = z / (mu / 2.0).sqrt();
            let (lo, hi) = ou_mean_fpt_bounds(mu, eta).unwrap();
            let t = ou_mean_fpt(mu, eta).unwrap();
            prop_assert!(lo <= t && t <= hi);
        }

        #[test]
        fn perf_bounds_ordered_and_nested(eta in 2.0f64..6.0, k1 in 0.5f64..2.0, dk in 0.0f64..1.0,
                                          mu in 1.0f64..9.0, beta in 0.01f64..0.5, n in 2usize..20) {
            let k2 = k1 + dk;
            prop_assume!(eta > k2 / mu.sqrt());
            let a = reduced_perf_bounds(eta, k1, mu, beta, n).unwrap();
            let b = reduced_perf_bounds(eta, k2, mu, beta, n).unwrap();
            prop_assert!(a.et_low <= a.et_high && a.er_low <= a.er_high);
            prop_assert!(b.et_low <= a.et_low && a.et_high <= b.et_high);
            prop_assert!(b.er_low <= a.er_low && a.er_high <= b.er_high);
            prop_assert!(a.confidence <= 1.0);
        }

        #[test]
        fn one_sided_dominates_two_sided(k in 0.1f64..6.0, mu in 0.1f64..10.0, t in 0.0f64..100.0) {
            let one = ou_uniform_bound(k, mu, t, false).unwrap();
            let two = ou_uniform_bound(k, mu, t, true).unwrap();
            prop_assert!(one >= two);
        }

        #[test]
        fn p_lower_monotone(k in 0.5f64..5.0, mu in 0.5f64..5.0, t in 0.0f64..50.0, dt in 0.01f64..10.0) {
            prop_assert!(p_lower(k, mu, t + dt).unwrap() <= p_lower(k, mu, t).unwrap());
            prop_assert!(p_lower(k + 0.1, mu, t).unwrap() >= p_lower(k, mu, t).unwrap());
        }
    }
}
