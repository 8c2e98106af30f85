//! Acceptance suite: one check per criterion, one PASS/FAIL line each.
//!
//! Run everything with `cargo test -p netddm --test acceptance`. Arguments
//! select criteria by number (`-- 2 5`) or by substring of their slug
//! (`-- pde`). Failed checks are reported as FAIL lines; the exit status is
//! non-zero on failure only with `--strict` or `ACCEPTANCE_STRICT=1`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rayon::prelude::*;

use netddm::analysis::{ddm_et_er, ou_mean_fpt, ou_mean_fpt_bounds, reduced_perf_bounds};
use netddm::dynamics::{coupled_ddm, coupled_ddm_moments, coupled_race, error_ou, reduced_ddm};
use netddm::experiments::{
    compare_models, correction_experiment, decided_times, estimate_all, estimate_performance, log_likelihood_no_error,
    summarize, CompareConfig, ComparedModel, CorrectionConfig, ModelComparison, ModelFamily,
};
use netddm::graph::{benchmark_graph, spectrum, CertaintyIndex, Graph};
use netddm::pde::{solve_ddm_1d, solve_reduced_pde, PdeConfig, Quantity};
use netddm::simulate::{
    integrate_with_increments, run_ensemble, sample_states, NoiseStream, SimConfig, StoppingRule, ThresholdWatch,
};
use netddm::stats::{ks_one_sample, ks_two_sample};
use netddm::thresholds::{
    apply_policy, bayes_residual, bayes_threshold, corrected_performance, kbar, race_threshold, reward_rate_residual,
    reward_rate_threshold, wald_expected_time, ThresholdPolicy,
};

type Check = Result<String, String>;

struct Criterion {
    id: usize,
    slug: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn benchmark_mu() -> CertaintyIndex {
    CertaintyIndex::from_spectrum(&spectrum(&benchmark_graph()).unwrap())
}

/// Representatives of the three centrality classes (nodes 1, 2 and 6).
const CLASSES: [usize; 3] = [0, 1, 5];

fn certainty_fingerprint() -> Check {
    let mu = benchmark_mu();
    let want = [8.1, 4.26, 4.26, 4.26, 4.26, 1.6, 1.6, 1.6, 1.6];
    let worst = mu.as_slice().iter().zip(want).map(|(m, w)| (m - w).abs()).fold(0.0, f64::max);
    ensure(worst <= 0.05, format!("mu = {:?}, max deviation {worst:.4}", rounded(mu.as_slice())))
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}

fn ddm_closed_form() -> Check {
    let spec = netddm::dynamics::ddm(0.1, 1.0).unwrap();
    let e =
        estimate_performance(&spec, &StoppingRule::scalar(0, 3.0), 0, 100_000, &SimConfig::with_dt(1e-3), 20_240_601)
            .map_err(|e| e.to_string())?;
    let (et, er) = ddm_et_er(0.1, 1.0, 3.0).unwrap();
    let zt = (e.et_hat - et) / e.et_se;
    let zr = (e.er_hat - er) / e.er_se;
    ensure(
        zt.abs() <= 3.0 && zr.abs() <= 3.0,
        format!("ET {:.4} vs {et:.4} ({zt:+.2} s.e.); ER {:.5} vs {er:.5} ({zr:+.2} s.e.)", e.et_hat, e.er_hat),
    )
}

fn moment_oracle() -> Check {
    let g = benchmark_graph();
    let n = g.node_count();
    let spec = coupled_ddm(&g, 0.1, 1.0).unwrap();
    let times = [0.5, 1.0, 2.0];
    let paths = 10_000u64;
    let states: Vec<Vec<Vec<f64>>> = (0..paths)
        .into_par_iter()
        .map(|i| sample_states(&spec, 1e-3, &times, NoiseStream::new(77, i)).unwrap())
        .collect();
    let s = spectrum(&g).unwrap();
    let curve = coupled_ddm_moments(&s, 0.1, 1.0, &times).unwrap();
    let mut worst: f64 = 0.0;
    for (ti, _) in times.iter().enumerate() {
        let mut mean = vec![0.0; n];
        for p in &states {
            for k in 0..n {
                mean[k] += p[ti][k] / paths as f64;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(n, n);
        for p in &states {
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += (p[ti][i] - mean[i]) * (p[ti][j] - mean[j]) / (paths as f64 - 1.0);
                }
            }
        }
        let c = &curve.covariance[ti];
        for i in 0..n {
            // mean of x_i has standard error sqrt(C_ii / N)
            let zm = (mean[i] - curve.mean[ti][i]) / (c[(i, i)] / paths as f64).sqrt();
            worst = worst.max(zm.abs());
            for j in 0..=i {
                // Gaussian sample covariance: Var = (C_ii C_jj + C_ij²) / N
                let se = ((c[(i, i)] * c[(j, j)] + c[(i, j)].powi(2)) / paths as f64).sqrt();
                worst = worst.max(((cov[(i, j)] - c[(i, j)]) / se).abs());
            }
        }
    }
    ensure(worst <= 4.0, format!("largest deviation over 3 times x 45 covariances and 9 means: {worst:.2} s.e."))
}

/// Shared tolerance contract of the reduced-vs-coupled comparisons.
fn agreement(c: &ModelComparison, etas: &[f64], ks_eta: f64) -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (w, &eta) in etas.iter().enumerate() {
        let cp = c.row(eta, ComparedModel::Coupled).unwrap();
        let rd = c.row(eta, ComparedModel::Reduced).unwrap();
        let er_tol = 3.0 * (cp.er_se.powi(2) + rd.er_se.powi(2)).sqrt() + 0.02;
        let er_gap = (cp.er - rd.er).abs();
        let et_rel = (cp.et - rd.et).abs() / cp.et;
        let mut line = format!(
            "eta {eta}: ER {:.4}/{:.4} (gap {er_gap:.4} <= {er_tol:.4}), ET {:.2}/{:.2} (rel {:.1}%)",
            cp.er,
            rd.er,
            cp.et,
            rd.et,
            100.0 * et_rel
        );
        ok &= er_gap <= er_tol && et_rel <= 0.10;
        if eta == ks_eta {
            let ks = ks_two_sample(&c.coupled_fpt[w], &c.reduced_fpt[w]);
            line += &format!(", K-S {ks:.3}");
            ok &= ks <= 0.08;
        }
        lines.push(line);
    }
    ensure(ok, lines.join("; "))
}

fn reduced_vs_coupled() -> Check {
    let etas = [2.0, 3.0, 4.0];
    let cfg =
        CompareConfig { family: ModelFamily::Ddm, trials: 40_000, seed: 4, sim: SimConfig::with_dt(1e-3), pde: None };
    let c = compare_models(&benchmark_graph(), 5, 0.1, &etas, &cfg).map_err(|e| e.to_string())?;
    agreement(&c, &etas, 3.0)
}

fn pde_validation() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    let (et, er) = ddm_et_er(0.1, 1.0, 3.0).unwrap();
    let et1 = solve_ddm_1d(0.1, 1.0, 3.0, 401, Quantity::ExpectedTime).map_err(|e| e.to_string())?;
    let er1 = solve_ddm_1d(0.1, 1.0, 3.0, 401, Quantity::ErrorRate).map_err(|e| e.to_string())?;
    let (d_et, d_er) = ((et1 / et - 1.0).abs(), (er1 / er - 1.0).abs());
    ok &= d_et <= 5e-3 && d_er <= 5e-3;
    notes.push(format!("1D: ET {:.3}% ER {:.3}% off", 100.0 * d_et, 100.0 * d_er));

    let (mu, beta, n, eta) = (1.6, 0.1, 9, 3.0);
    let fine = PdeConfig::default();
    let coarse = PdeConfig::with_resolution(101);
    let solve = |cfg: &PdeConfig, q| solve_reduced_pde(mu, beta, n, eta, cfg, q).map_err(|e| e.to_string());
    let et_f = solve(&fine, Quantity::ExpectedTime)?;
    let er_f = solve(&fine, Quantity::ErrorRate)?;
    let et_c = solve(&coarse, Quantity::ExpectedTime)?.at_origin();
    let er_c = solve(&coarse, Quantity::ErrorRate)?.at_origin();
    let (et_p, er_p) = (et_f.at_origin(), er_f.at_origin());
    let conv = ((et_p / et_c - 1.0).abs(), (er_p / er_c - 1.0).abs());
    ok &= conv.0 < 0.01 && conv.1 < 0.01;
    notes.push(format!("101->201: ET {:.3}% ER {:.3}%", 100.0 * conv.0, 100.0 * conv.1));
    ok &= et_f.clipped < 1e-5 && er_f.clipped < 1e-5;

    let spec = reduced_ddm(mu, beta, n).unwrap();
    let mc = estimate_performance(&spec, &StoppingRule::scalar(5, eta), 5, 20_000, &SimConfig::with_dt(1e-3), 55)
        .map_err(|e| e.to_string())?;
    let et_gap = (et_p / mc.et_hat - 1.0).abs();
    let er_gap = (er_p - mc.er_hat).abs();
    ok &= et_gap <= 0.05 && er_gap <= 3.0 * mc.er_se + 0.01;
    notes.push(format!(
        "2D vs MC: ET {et_p:.3}/{:.3} ({:.2}%), ER {er_p:.4}/{:.4}",
        mc.et_hat,
        100.0 * et_gap,
        mc.er_hat
    ));
    ensure(ok, notes.join("; "))
}

fn first_passage_suite() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut sandwich = 0;
    for mu in [0.5, 1.0, 2.0, 4.0] {
        for i in 0..=12 {
            let z = 1.0 + 0.25 * i as f64;
            let eta = z / (mu / 2.0_f64).sqrt();
            let (lo, hi) = ou_mean_fpt_bounds(mu, eta).unwrap();
            let t = ou_mean_fpt(mu, eta).unwrap();
            if lo <= t && t <= hi {
                sandwich += 1;
            } else {
                ok = false;
            }
        }
    }
    notes.push(format!("sandwich {sandwich}/52"));
    let spec = error_ou(1.0).unwrap();
    let cfg = SimConfig { dt: 1e-2, max_t: 5000.0, ..SimConfig::default() };
    for eta in [2.0, 3.0] {
        let out = run_ensemble(&spec, &StoppingRule::upper(0, eta), &cfg, 10_000, 606 + eta as u64)
            .map_err(|e| e.to_string())?;
        let e = summarize(&out, 0).map_err(|e| e.to_string())?;
        let mean = ou_mean_fpt(1.0, eta).unwrap();
        let z = (e.et_hat - mean) / e.et_se;
        ok &= z.abs() <= 3.0;
        let mut note = format!("eta {eta}: mean {:.2} vs {mean:.2} ({z:+.2} s.e.)", e.et_hat);
        if eta == 3.0 {
            let ks = ks_one_sample(&decided_times(&out, 0), |t| 1.0 - (-t / mean).exp());
            ok &= ks <= 0.05;
            note += &format!(", K-S {ks:.3}");
        }
        notes.push(note);
    }
    ensure(ok, notes.join("; "))
}

fn performance_sandwich() -> Check {
    let (mu, beta, n, eta, k) = (4.26, 0.1, 9, 4.0, 3.0);
    let b = reduced_perf_bounds(eta, k, mu, beta, n).map_err(|e| e.to_string())?;
    let spec = reduced_ddm(mu, beta, n).unwrap();
    let e = estimate_performance(&spec, &StoppingRule::scalar(1, eta), 1, 10_000, &SimConfig::with_dt(1e-3), 7)
        .map_err(|e| e.to_string())?;
    ensure(
        b.et_low <= e.et_hat && e.et_hat <= b.et_high && b.er_low <= e.er_hat && e.er_hat <= b.er_high,
        format!(
            "ET {:.2} in [{:.2}, {:.2}], ER {:.5} in [{:.2e}, {:.4}]",
            e.et_hat, b.et_low, b.et_high, e.er_hat, b.er_low, b.er_high
        ),
    )
}

fn correction_regression() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for beta in [0.05, 0.1, 0.2] {
        let cfg =
            CorrectionConfig { beta, eta: 3.0, graphs: 30, trials: 20_000, seed: 8, sim: SimConfig::with_dt(1e-2) };
        let r = correction_experiment(&cfg).map_err(|e| e.to_string())?;
        let kb = kbar(beta).unwrap();
        let ratio = r.slope / kb;
        ok &= (ratio - 1.0).abs() <= 0.2;
        notes.push(format!("beta {beta}: slope {:.3} vs {kb:.3} ({} points)", r.slope, r.points.len()));
    }
    ensure(ok, notes.join("; "))
}

fn corrected_model() -> Check {
    let g = benchmark_graph();
    let mu = benchmark_mu();
    let spec = coupled_ddm(&g, 0.1, 1.0).unwrap();
    let etas = [3.0, 3.5, 4.0, 4.5, 5.0];
    let watches: Vec<ThresholdWatch> = CLASSES
        .iter()
        .flat_map(|&k| etas.iter().map(move |&threshold| ThresholdWatch { node: k, coord: k, threshold }))
        .collect();
    let rule = StoppingRule::SymmetricThreshold { watches: watches.clone() };
    let (est, _) = estimate_all(&spec, &rule, 200_000, &SimConfig::with_dt(1e-2), 9).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut worst_et: f64 = 0.0;
    let mut notes = Vec::new();
    for &k in &CLASSES {
        let (mut worst_llr, mut at) = (0.0_f64, (0.0, 0.0, 0.0));
        for (w, e) in watches.iter().zip(&est).filter(|(w, _)| w.node == k) {
            let (et, er) = corrected_performance(w.threshold, 0.1, mu.get(k), g.node_count()).unwrap();
            let rel = (et - e.et_hat).abs() / e.et_hat;
            let llr = (log_likelihood_no_error(er).unwrap()
                - log_likelihood_no_error(e.er_hat).map_err(|e| e.to_string())?)
            .abs();
            ok &= rel <= 0.15 && llr <= 0.3;
            worst_et = worst_et.max(rel);
            if llr >= worst_llr {
                (worst_llr, at) = (llr, (w.threshold, e.er_hat, er));
            }
        }
        notes.push(format!(
            "node {}: max log-LR gap {worst_llr:.3} at eta {} (ER {:.5} simulated, {:.5} corrected)",
            k + 1,
            at.0,
            at.1,
            at.2
        ));
    }
    notes.push(format!("max ET gap {:.1}%", 100.0 * worst_et));
    ensure(ok, notes.join("; "))
}

/// Independent bisection on `[0, hi]` written without the library helper.
fn oracle_root(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let (mut a, mut b) = (0.0_f64, hi);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn transcendental_solvers() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let beta = 0.02 + 0.02 * i as f64;
            let n = 3 + j;
            let c = 1.0 + 3.0 * j as f64;
            let eta = bayes_threshold(c, beta, n).map_err(|e| e.to_string())?;
            worst = worst.max(bayes_residual(eta, c, beta, n).abs());
            let d = 0.5 + 0.4 * i as f64;
            let eta = reward_rate_threshold(d, 1.0, 0.5, beta, n).map_err(|e| e.to_string())?;
            if eta < 0.0 || eta > beta * (d + 1.5) {
                return Err(format!("reward-rate root {eta} outside its bracket"));
            }
            worst = worst.max(reward_rate_residual(eta, d, 1.0, 0.5, beta, n).abs());
        }
    }
    let root = bayes_threshold(10.0, 0.1, 9).unwrap();
    let oracle = oracle_root(
        |h| {
            let a = 2.0 * 0.1 * 9.0;
            2.0 * 10.0 * 0.01 * 9.0 - 2.0 * a * h + (-a * h).exp() - (a * h).exp()
        },
        1.0,
    );
    ensure(
        worst <= 1e-10 && (root - oracle).abs() <= 1e-6 && (root - 0.246).abs() < 5e-4,
        format!("max residual {worst:.1e}; Bayes root {root:.7} vs oracle {oracle:.7}"),
    )
}

fn strictly_ordered(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] })
}

fn constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-9 * w[0].abs().max(1e-300))
}

fn policy_trends() -> Check {
    let mu = benchmark_mu();
    let n = mu.len();
    let beta = 0.1;
    // classes listed in increasing centrality: node 6, node 2, node 1
    let order = [5usize, 1, 0];
    let perf = |etas: &[f64]| -> (Vec<f64>, Vec<f64>) {
        order.iter().map(|&k| corrected_performance(etas[k], beta, mu.get(k), n).unwrap()).map(|(t, r)| (r, t)).unzip()
    };
    let pick = |etas: &[f64]| order.iter().map(|&k| etas[k]).collect::<Vec<f64>>();
    let mut results = Vec::new();

    let fixed = apply_policy(&ThresholdPolicy::Fixed { eta: 3.0 }, &mu, beta).unwrap();
    let (er, et) = perf(&fixed);
    results.push(("fixed: ER decreases", strictly_ordered(&er, false)));
    results.push(("fixed: ET increases", strictly_ordered(&et, true)));

    let wald = apply_policy(&ThresholdPolicy::Wald { alpha: 0.01, per_node: None }, &mu, beta).unwrap();
    let (er, _) = perf(&wald);
    let wald_et: Vec<f64> = order.iter().map(|&k| wald_expected_time(0.01, beta, n, mu.get(k)).unwrap()).collect();
    results.push(("wald: ER constant", constant(&er)));
    results.push(("wald: ET decreases", strictly_ordered(&wald_et, false)));

    let bayes = apply_policy(&ThresholdPolicy::Bayes { cost: 10.0, per_node: None }, &mu, beta).unwrap();
    let (er, et) = perf(&bayes);
    results.push(("bayes: ER and ET constant", constant(&er) && constant(&et)));
    results.push(("bayes: eta decreases", strictly_ordered(&pick(&bayes), false)));

    let rr = ThresholdPolicy::RewardRate { d: 1.0, d_penalty: 1.0, t_motor: 0.5, per_node: None };
    let rr = apply_policy(&rr, &mu, beta).unwrap();
    let (er, et) = perf(&rr);
    results.push(("reward rate: ER and ET constant", constant(&er) && constant(&et)));
    results.push(("reward rate: eta decreases", strictly_ordered(&pick(&rr), false)));

    let failed: Vec<&str> = results.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    ensure(
        failed.is_empty(),
        format!(
            "{}/8 trends hold{}",
            8 - failed.len(),
            if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
        ),
    )
}

fn ou_extension() -> Check {
    let etas = [2.0, 3.0, 4.0];
    let cfg = CompareConfig {
        family: ModelFamily::Ou { theta: 0.1 },
        trials: 40_000,
        seed: 12,
        sim: SimConfig::with_dt(1e-2),
        pde: None,
    };
    let c = compare_models(&benchmark_graph(), 5, 0.1, &etas, &cfg).map_err(|e| e.to_string())?;
    agreement(&c, &etas, 3.0)
}

fn race_equivalence() -> Check {
    let g: Graph = benchmark_graph();
    let n = g.node_count();
    let betas = [0.1, 0.0, -0.05];
    let m = betas.len();
    let race = coupled_race(&g, &betas, 1.0).unwrap();
    let ddms: Vec<_> = betas.iter().map(|&b| coupled_ddm(&g, b, 1.0).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let incs = NoiseStream::new(1300 + seed, 0).increments(n * m, 1e-3, 3000);
        let path = integrate_with_increments(&race, 1e-3, &incs).unwrap();
        for (a, ddm) in ddms.iter().enumerate() {
            let sub: Vec<Vec<f64>> = incs.iter().map(|dw| (0..n).map(|k| dw[k * m + a]).collect()).collect();
            let p = integrate_with_increments(ddm, 1e-3, &sub).unwrap();
            for (r, d) in path.iter().zip(&p) {
                for k in 0..n {
                    worst = worst.max((r[k * m + a] - d[k]).abs());
                }
            }
        }
    }
    let t2 = race_threshold(2, 0.05).unwrap();
    let t3 = race_threshold(3, 0.1).unwrap();
    let hand = ((t2 - (1.0_f64 / (2.0 * 0.05)).ln()).abs()).max((t3 - (2.0_f64 / 0.3).ln()).abs());
    ensure(
        worst <= 1e-12 && hand <= 1e-12 && (t2 - std::f64::consts::LN_10).abs() < 1e-12 && (t3 - 1.897120).abs() < 1e-6,
        format!("max path deviation {worst:.1e}; thresholds {t2:.6}, {t3:.6}"),
    )
}

fn criteria() -> Vec<Criterion> {
    let s = Duration::from_secs;
    vec![
        Criterion { id: 1, slug: "certainty-fingerprint", budget: s(1), run: certainty_fingerprint },
        Criterion { id: 2, slug: "ddm-closed-form", budget: s(30), run: ddm_closed_form },
        Criterion { id: 3, slug: "moment-oracle", budget: s(120), run: moment_oracle },
        Criterion { id: 4, slug: "reduced-vs-coupled", budget: s(300), run: reduced_vs_coupled },
        Criterion { id: 5, slug: "pde-validation", budget: s(120), run: pde_validation },
        Criterion { id: 6, slug: "first-passage", budget: s(120), run: first_passage_suite },
        Criterion { id: 7, slug: "performance-sandwich", budget: s(60), run: performance_sandwich },
        Criterion { id: 8, slug: "correction-regression", budget: s(1200), run: correction_regression },
        Criterion { id: 9, slug: "corrected-model", budget: s(300), run: corrected_model },
        Criterion { id: 10, slug: "transcendental-solvers", budget: s(1), run: transcendental_solvers },
        Criterion { id: 11, slug: "policy-trends", budget: s(1), run: policy_trends },
        Criterion { id: 12, slug: "ou-extension", budget: s(300), run: ou_extension },
        Criterion { id: 13, slug: "race-equivalence", budget: s(10), run: race_equivalence },
    ]
}

fn selected(c: &Criterion, args: &[String]) -> bool {
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    filters.is_empty()
        || filters
            .iter()
            .any(|f| f.parse::<usize>().map(|id| id == c.id).unwrap_or(false) || c.slug.contains(f.as_str()))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut failures = 0;
    let mut ran = 0;
    for c in criteria().iter().filter(|c| selected(c, &args)) {
        ran += 1;
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let over = if took > c.budget { format!(", over budget {:?}", c.budget) } else { String::new() };
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {}: {detail} ({:.1?}{over})", c.id, c.slug, took),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {:>2} {}: {detail} ({:.1?}{over})", c.id, c.slug, took);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", ran - failures);
    let strict = args.iter().any(|a| a == "--strict") || std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failures == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
