//! `netddm`: command-line front end for the networked drift-diffusion toolkit.
//!
//! Data (CSV) goes to stdout or `--out`; metadata and the resolved
//! configuration go to a `<out>.json` sidecar or stderr. Node ids are
//! 1-indexed on the command line and in all CSV output.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use netddm::analysis::{ou_mean_fpt, ou_mean_fpt_bounds, ou_uniform_bound, p_lower, reduced_perf_bounds};
use netddm::dynamics::{coupled_ddm_moments, coupled_ou_moments, error_moments};
use netddm::experiments::{
    compare_models, correction_experiment, summarize, CompareConfig, CorrectionConfig, ModelFamily,
};
use netddm::graph::{spectrum, CertaintyIndex, Graph};
use netddm::pde::{solve_reduced_pde, PdeConfig, Quantity};
use netddm::simulate::{run_ensemble, write_outcomes_csv, Detection, SimConfig};
use netddm::thresholds::{
    apply_policy, bayes_threshold, kbar, race_threshold, reward_rate_threshold, wald_expected_time, wald_threshold,
    ThresholdPolicy,
};

use config::{resolve, GraphSource, RunConfig};
use output::{CliError, Context, Sink};

#[derive(Parser)]
#[command(
    name = "netddm",
    version,
    about = "Networked drift-diffusion decision models: simulation, analysis and PDE solvers"
)]
struct Cli {
    /// Worker threads for Monte Carlo ensembles (default: all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write data here instead of stdout; metadata goes to `<out>.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Laplacian spectrum or node certainty indices of a graph.
    Graph(GraphCmd),
    /// Mean and covariance of a linear model on a time grid.
    Moments(MomentsCmd),
    /// Monte Carlo decision ensemble from a JSON run config.
    Simulate(SimulateCmd),
    /// Solve the reduced-model boundary value problem for ET or ER.
    Pde(PdeCmd),
    /// Analytic first-passage and performance bounds.
    Bounds(BoundsCmd),
    /// Threshold selection rules.
    Thresholds(ThresholdsCmd),
    /// Threshold-correction regression over a random-graph ensemble.
    Correction(CorrectionCmd),
    /// Coupled vs reduced (and analytic) performance at one node.
    Compare(CompareCmd),
}

/// Graph selection shared by several subcommands.
#[derive(Args, Clone)]
struct GraphArgs {
    /// Built-in graph (`paper9`, the nine-node benchmark).
    #[arg(long, value_name = "NAME", conflicts_with_all = ["edges", "erdos_renyi"])]
    builtin: Option<String>,
    /// Edge-list file: header `n <count>`, then `u v [w]` lines, 0-indexed.
    #[arg(long, value_name = "FILE", conflicts_with = "erdos_renyi")]
    edges: Option<PathBuf>,
    /// Connected Erdős–Rényi graph on N nodes.
    #[arg(long, value_name = "N")]
    erdos_renyi: Option<usize>,
    /// Edge probability for --erdos-renyi (default 1.1 ln(N)/N).
    #[arg(long, requires = "erdos_renyi")]
    p: Option<f64>,
    /// Seed for --erdos-renyi.
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl GraphArgs {
    fn source(&self) -> GraphSource {
        if let Some(path) = &self.edges {
            GraphSource::File { path: path.clone() }
        } else if let Some(n) = self.erdos_renyi {
            GraphSource::ErdosRenyi { n, p: self.p, seed: self.graph_seed }
        } else {
            GraphSource::Builtin { name: self.builtin.clone().unwrap_or_else(|| "paper9".into()) }
        }
    }
}

#[derive(Args)]
struct GraphCmd {
    #[command(flatten)]
    graph: GraphArgs,
    /// Print `node,mu` certainty indices instead of the spectrum.
    #[arg(long)]
    certainty: bool,
    /// Print the graph in edge-list format instead of CSV.
    #[arg(long, conflicts_with = "certainty")]
    emit_edges: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentModel {
    CoupledDdm,
    CoupledOu,
    Error,
}

#[derive(Args)]
struct MomentsCmd {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "coupled-ddm")]
    model: MomentModel,
    /// Drift (evidence per unit time).
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Noise intensity (coupled-ddm only).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Leak rate (coupled-ou only).
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    times: Vec<f64>,
    /// Emit `t,i,j,covariance` for every pair instead of `t,node,mean,variance`.
    #[arg(long)]
    covariance: bool,
}

#[derive(Args)]
struct SimulateCmd {
    /// Run config (JSON). See `schemas/run_config.schema.json`.
    #[arg(long, required_unless_present = "emit_config")]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print a template config and exit.
    #[arg(long)]
    emit_config: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Et,
    Er,
}

#[derive(Args)]
struct PdeCmd {
    /// Certainty index of the node.
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Network size.
    #[arg(long, default_value_t = 9)]
    n: usize,
    /// Decision threshold.
    #[arg(long)]
    eta: f64,
    #[arg(long, value_enum, default_value = "et")]
    quantity: QuantityArg,
    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Half-width of the error axis (default 6/sqrt(mu)).
    #[arg(long)]
    eta_bar: Option<f64>,
    /// Also write the little-endian binary dump here.
    #[arg(long)]
    binary: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsCmd {
    #[command(subcommand)]
    which: BoundsKind,
}

#[derive(Subcommand)]
enum BoundsKind {
    /// ET/ER sandwich of the reduced model given an error bound K.
    Perf {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 9)]
        n: usize,
    },
    /// Mean first-passage time of the error process and its bounds.
    Fpt {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        eta: f64,
    },
    /// Probability the error stays inside K/sqrt(mu) up to time t.
    Uniform {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        t: f64,
        /// Two-sided band instead of one-sided.
        #[arg(long)]
        two_sided: bool,
    },
}

#[derive(Args)]
struct ThresholdsCmd {
    #[command(subcommand)]
    which: ThresholdKind,
}

#[derive(Subcommand)]
enum ThresholdKind {
    /// Threshold for error probability alpha at certainty index mu.
    Wald {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 9)]
        n: usize,
        #[arg(long)]
        mu: f64,
    },
    /// Corrected threshold minimizing Bayes risk with error cost c.
    Bayes {
        #[arg(long)]
        cost: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 9)]
        n: usize,
    },
    /// Corrected threshold maximizing reward rate (times in seconds).
    RewardRate {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 0.0)]
        d_penalty: f64,
        #[arg(long, default_value_t = 0.0)]
        t_motor: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 9)]
        n: usize,
    },
    /// Race threshold bounding the error probability by R.
    Race {
        #[arg(long)]
        m: usize,
        #[arg(long = "R")]
        r: f64,
    },
    /// Threshold-shift constant K̄(β).
    Kbar {
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
    },
    /// Per-node thresholds of a JSON policy on a graph.
    Policy {
        #[command(flatten)]
        graph: GraphArgs,
        /// e.g. '{"kind":"bayes","cost":10}'
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectionArg {
    Grid,
    Bridge,
}

/// Simulation controls shared by Monte Carlo subcommands.
#[derive(Args)]
struct SimArgs {
    /// Trials per ensemble.
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    /// Integration step (time units).
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    /// Trial horizon (time units).
    #[arg(long, default_value_t = 500.0)]
    max_t: f64,
    #[arg(long, value_enum, default_value = "bridge")]
    detection: DetectionArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl SimArgs {
    fn sim(&self) -> SimConfig {
        let detection = match self.detection {
            DetectionArg::Grid => Detection::Grid,
            DetectionArg::Bridge => Detection::Bridge,
        };
        SimConfig { dt: self.dt, max_t: self.max_t, detection }
    }
}

#[derive(Args)]
struct CorrectionCmd {
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 3.0)]
    eta: f64,
    /// Number of random graphs.
    #[arg(long, default_value_t = 30)]
    graphs: usize,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ddm,
    Ou,
}

#[derive(Args)]
struct CompareCmd {
    #[command(flatten)]
    graph: GraphArgs,
    /// Node (1-indexed).
    #[arg(long)]
    node: usize,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 3.0, 4.0])]
    etas: Vec<f64>,
    #[arg(long, value_enum, default_value = "ddm")]
    family: FamilyArg,
    /// Leak rate for the O-U family.
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    /// Add PDE rows at this grid resolution (DDM family only).
    #[arg(long)]
    pde_points: Option<usize>,
    #[command(flatten)]
    sim: SimArgs,
}

fn log(msg: impl AsRef<str>) {
    eprintln!("netddm: {}", msg.as_ref());
}

fn load_graph(args: &GraphArgs) -> Result<(GraphSource, Graph), CliError> {
    let src = args.source();
    let g = src.load()?;
    Ok((src, g))
}

fn meta(command: &str, config: Value, results: Value) -> Value {
    json!({ "command": command, "version": env!("CARGO_PKG_VERSION"), "config": config, "results": results })
}

fn cmd_graph(c: &GraphCmd, sink: &Sink) -> Result<(), CliError> {
    let (src, g) = load_graph(&c.graph)?;
    if c.emit_edges {
        let text = g.to_edge_list();
        return sink.write_data(|w| w.write_all(text.as_bytes()));
    }
    let s = spectrum(&g).op("spectrum")?;
    if c.certainty {
        let mu = CertaintyIndex::from_spectrum(&s);
        sink.write_data(|w| {
            writeln!(w, "node,mu")?;
            for (k, m) in mu.as_slice().iter().enumerate() {
                writeln!(w, "{},{m}", k + 1)?;
            }
            Ok(())
        })?;
    } else {
        sink.write_data(|w| {
            writeln!(w, "index,eigenvalue")?;
            for (p, l) in s.eigenvalues().iter().enumerate() {
                writeln!(w, "{},{l}", p + 1)?;
            }
            Ok(())
        })?;
    }
    sink.write_meta(&meta("graph", json!({ "graph": src }), json!({ "nodes": g.node_count(), "lambda2": s.lambda2() })))
}

fn cmd_moments(c: &MomentsCmd, sink: &Sink) -> Result<(), CliError> {
    let (src, g) = load_graph(&c.graph)?;
    let s = spectrum(&g).op("spectrum")?;
    let curve = match c.model {
        MomentModel::CoupledDdm => coupled_ddm_moments(&s, c.beta, c.sigma, &c.times),
        MomentModel::CoupledOu => coupled_ou_moments(&s, c.beta, c.theta, &c.times),
        MomentModel::Error => error_moments(&s, &c.times),
    }
    .op("moments")?;
    let n = g.node_count();
    sink.write_data(|w| {
        if c.covariance {
            writeln!(w, "t,i,j,covariance")?;
        } else {
            writeln!(w, "t,node,mean,variance")?;
        }
        for (ti, t) in curve.times.iter().enumerate() {
            let cov = &curve.covariance[ti];
            for i in 0..n {
                if c.covariance {
                    for j in 0..n {
                        writeln!(w, "{t},{},{},{}", i + 1, j + 1, cov[(i, j)])?;
                    }
                } else {
                    writeln!(w, "{t},{},{},{}", i + 1, curve.mean[ti][i], cov[(i, i)])?;
                }
            }
        }
        Ok(())
    })?;
    let model = match c.model {
        MomentModel::CoupledDdm => json!({ "kind": "coupled-ddm", "beta": c.beta, "sigma": c.sigma }),
        MomentModel::CoupledOu => json!({ "kind": "coupled-ou", "beta": c.beta, "theta": c.theta }),
        MomentModel::Error => json!({ "kind": "error" }),
    };
    sink.write_meta(&meta("moments", json!({ "graph": src, "model": model, "times": c.times }), Value::Null))
}

fn cmd_simulate(c: &SimulateCmd, sink: &Sink) -> Result<(), CliError> {
    if c.emit_config {
        let text = serde_json::to_string_pretty(&RunConfig::template()).expect("template serializes");
        return sink.write_data(|w| writeln!(w, "{text}"));
    }
    let path = c.config.as_ref().expect("clap requires --config");
    let text = std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let mut cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e} (see schemas/run_config.schema.json)", path.display())))?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let run = resolve(&cfg)?;
    log(format!("{} trials, {} watches, dim {}", cfg.trials, run.watches.len(), run.spec.dim()));
    let outcomes = run_ensemble(&run.spec, &run.rule, &cfg.sim, cfg.trials, cfg.seed).op("simulation")?;
    sink.write_data(|w| write_outcomes_csv(w, &outcomes, 1))?;
    let estimates: Vec<Value> = (0..run.watches.len())
        .map(|w| match summarize(&outcomes, w) {
            Ok(mut e) => {
                e.node += 1;
                json!({ "threshold": run.watches[w].1, "estimate": e })
            }
            Err(err) => {
                json!({ "node": run.watches[w].0 + 1, "threshold": run.watches[w].1, "error": err.to_string() })
            }
        })
        .collect();
    sink.write_meta(&meta(
        "simulate",
        serde_json::to_value(&cfg).unwrap(),
        json!({ "n": run.n, "mu": run.mu, "watches": estimates }),
    ))
}

fn cmd_pde(c: &PdeCmd, sink: &Sink) -> Result<(), CliError> {
    let cfg = PdeConfig { eta_bar: c.eta_bar, ..PdeConfig::with_resolution(c.points) };
    let which = match c.quantity {
        QuantityArg::Et => Quantity::ExpectedTime,
        QuantityArg::Er => Quantity::ErrorRate,
    };
    let sol = solve_reduced_pde(c.mu, c.beta, c.n, c.eta, &cfg, which).op("pde solve")?;
    for w in &sol.warnings {
        log(format!("warning: {w}"));
    }
    log(format!("value at origin {} after {} sweeps", sol.at_origin(), sol.sweeps));
    if let Some(p) = &c.binary {
        let f = std::fs::File::create(p).map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?;
        sol.write_binary(std::io::BufWriter::new(f))?;
    }
    sink.write_data(|w| sol.write_csv(w))?;
    sink.write_meta(&meta(
        "pde",
        json!({ "mu": c.mu, "beta": c.beta, "n": c.n, "eta": c.eta, "quantity": which, "pde": cfg }),
        json!({ "origin": sol.at_origin(), "residual": sol.residual, "sweeps": sol.sweeps, "clipped": sol.clipped, "grid": sol.grid }),
    ))
}

fn cmd_bounds(c: &BoundsCmd, sink: &Sink) -> Result<(), CliError> {
    match &c.which {
        BoundsKind::Perf { eta, k, mu, beta, n } => {
            let b = reduced_perf_bounds(*eta, *k, *mu, *beta, *n).op("performance bounds")?;
            sink.write_data(|w| {
                writeln!(w, "et_low,et_high,er_low,er_high,confidence")?;
                writeln!(w, "{},{},{},{},{}", b.et_low, b.et_high, b.er_low, b.er_high, b.confidence)
            })
        }
        BoundsKind::Fpt { mu, eta } => {
            let t = ou_mean_fpt(*mu, *eta).op("mean first-passage time")?;
            let (lo, hi) = ou_mean_fpt_bounds(*mu, *eta).op("first-passage bounds")?;
            sink.write_data(|w| {
                writeln!(w, "mean,low,high")?;
                writeln!(w, "{t},{lo},{hi}")
            })
        }
        BoundsKind::Uniform { k, mu, t, two_sided } => {
            let p = ou_uniform_bound(*k, *mu, *t, *two_sided).op("uniform bound")?;
            let pl = p_lower(*k, *mu, *t).op("p_lower")?;
            sink.write_data(|w| {
                writeln!(w, "probability,p_lower")?;
                writeln!(w, "{p},{pl}")
            })
        }
    }
}

fn scalar(sink: &Sink, v: f64) -> Result<(), CliError> {
    sink.write_data(|w| writeln!(w, "{v}"))
}

fn cmd_thresholds(c: &ThresholdsCmd, sink: &Sink) -> Result<(), CliError> {
    match &c.which {
        ThresholdKind::Wald { alpha, beta, n, mu } => {
            let eta = wald_threshold(*alpha, *beta, *n, *mu).op("wald threshold")?;
            let et = wald_expected_time(*alpha, *beta, *n, *mu).op("wald expected time")?;
            sink.write_data(|w| {
                writeln!(w, "threshold,expected_time")?;
                writeln!(w, "{eta},{et}")
            })
        }
        ThresholdKind::Bayes { cost, beta, n } => {
            scalar(sink, bayes_threshold(*cost, *beta, *n).op("bayes threshold")?)
        }
        ThresholdKind::RewardRate { d, d_penalty, t_motor, beta, n } => {
            scalar(sink, reward_rate_threshold(*d, *d_penalty, *t_motor, *beta, *n).op("reward-rate threshold")?)
        }
        ThresholdKind::Race { m, r } => scalar(sink, race_threshold(*m, *r).op("race threshold")?),
        ThresholdKind::Kbar { beta } => scalar(sink, kbar(*beta).op("kbar")?),
        ThresholdKind::Policy { graph, policy, beta } => {
            let p: ThresholdPolicy =
                serde_json::from_str(policy).map_err(|e| CliError::validation(format!("policy: {e}")))?;
            let (_, g) = load_graph(graph)?;
            let mu = CertaintyIndex::from_spectrum(&spectrum(&g).op("spectrum")?);
            let etas = apply_policy(&p, &mu, *beta).op("threshold policy")?;
            sink.write_data(|w| {
                writeln!(w, "node,mu,threshold")?;
                for (k, eta) in etas.iter().enumerate() {
                    writeln!(w, "{},{},{eta}", k + 1, mu.get(k))?;
                }
                Ok(())
            })
        }
    }
}

fn cmd_correction(c: &CorrectionCmd, sink: &Sink) -> Result<(), CliError> {
    let cfg = CorrectionConfig {
        beta: c.beta,
        eta: c.eta,
        graphs: c.graphs,
        trials: c.sim.trials,
        seed: c.sim.seed,
        sim: c.sim.sim(),
    };
    let r = correction_experiment(&cfg).op("correction experiment")?;
    let kb = kbar(c.beta).op("kbar")?;
    log(format!("slope {:.4} (K̄ = {kb:.4}) over {} points", r.slope, r.points.len()));
    sink.write_data(|w| {
        writeln!(w, "graph,node,n,mu,inv_sqrt_mu,beta_delta_t")?;
        for p in &r.points {
            writeln!(w, "{},{},{},{},{},{}", p.graph + 1, p.node + 1, p.n, p.mu, p.inv_sqrt_mu, p.beta_delta_t)?;
        }
        Ok(())
    })?;
    sink.write_meta(&meta(
        "correction",
        serde_json::to_value(cfg).unwrap(),
        json!({ "slope": r.slope, "residual_rms": r.residual_rms, "kbar": kb }),
    ))
}

fn cmd_compare(c: &CompareCmd, sink: &Sink) -> Result<(), CliError> {
    let (src, g) = load_graph(&c.graph)?;
    if c.node == 0 || c.node > g.node_count() {
        return Err(CliError::validation(format!("node {} out of range 1..={}", c.node, g.node_count())));
    }
    let family = match c.family {
        FamilyArg::Ddm => ModelFamily::Ddm,
        FamilyArg::Ou => ModelFamily::Ou { theta: c.theta },
    };
    let cfg = CompareConfig {
        family,
        trials: c.sim.trials,
        seed: c.sim.seed,
        sim: c.sim.sim(),
        pde: c.pde_points.map(PdeConfig::with_resolution),
    };
    let cmp = compare_models(&g, c.node - 1, c.beta, &c.etas, &cfg).op("model comparison")?;
    sink.write_data(|w| {
        writeln!(w, "eta,model,er,er_se,et,et_se")?;
        for r in &cmp.rows {
            let model = serde_json::to_value(r.model).unwrap();
            writeln!(w, "{},{},{},{},{},{}", r.eta, model.as_str().unwrap(), r.er, r.er_se, r.et, r.et_se)?;
        }
        Ok(())
    })?;
    let ks: Vec<f64> =
        cmp.coupled_fpt.iter().zip(&cmp.reduced_fpt).map(|(a, b)| netddm::stats::ks_two_sample(a, b)).collect();
    sink.write_meta(&meta(
        "compare",
        json!({ "graph": src, "node": c.node, "beta": c.beta, "etas": c.etas, "compare": cfg }),
        json!({ "ks_coupled_reduced": ks }),
    ))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::validation(format!("--threads: {e}")))?;
    }
    let sink = Sink::new(cli.out);
    match &cli.command {
        Command::Graph(c) => cmd_graph(c, &sink),
        Command::Moments(c) => cmd_moments(c, &sink),
        Command::Simulate(c) => cmd_simulate(c, &sink),
        Command::Pde(c) => cmd_pde(c, &sink),
        Command::Bounds(c) => cmd_bounds(c, &sink),
        Command::Thresholds(c) => cmd_thresholds(c, &sink),
        Command::Correction(c) => cmd_correction(c, &sink),
        Command::Compare(c) => cmd_compare(c, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log(e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
