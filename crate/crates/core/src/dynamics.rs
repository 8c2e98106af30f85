//! Linear SDE models of evidence aggregation and their Gaussian moments.
//!
//! Every model is stored in the affine form
//!
//! ```text
//! dx = (b - A x) dt + B dW
//! ```
//!
//! with `A` square, `b` a vector and `B` a `dim x noise_dim` matrix applied
//! to independent standard Wiener increments. The moment formulas below are
//! evaluated from the Laplacian spectrum, never by integrating the model, so
//! they can serve as oracles for the simulator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{sorted_symmetric_eigen, CertaintyIndex, Graph, GraphError, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn invalid(msg: impl Into<String>) -> DynamicsError {
    DynamicsError::InvalidParameter(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ddm,
    CoupledDdm,
    CentralizedDdm,
    ErrorDynamics,
    ErrorOu,
    ReducedDdm,
    CoupledOu,
    ReducedOu,
    CoupledRace,
}

/// Semantic tag of one state coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum CoordLabel {
    /// Evidence held by a network node.
    Evidence {
        node: usize,
    },
    /// Evidence of a decoupled per-node surrogate (reduced models).
    ReducedEvidence,
    CentralizedEvidence,
    Error {
        node: Option<usize>,
    },
    Alternative {
        node: usize,
        alternative: usize,
    },
}

impl CoordLabel {
    fn is_evidence(&self) -> bool {
        !matches!(self, CoordLabel::Error { .. })
    }
}

/// Affine SDE specification `dx = (b - A x) dt + B dW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelWire", into = "ModelWire")]
pub struct ModelSpec {
    kind: ModelKind,
    drift_matrix: DMatrix<f64>,
    drift_offset: DVector<f64>,
    diffusion: DMatrix<f64>,
    labels: Vec<CoordLabel>,
}

/// Row-major JSON representation of a [`ModelSpec`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelWire {
    kind: ModelKind,
    dim: usize,
    noise_dim: usize,
    drift_matrix: Vec<Vec<f64>>,
    drift_offset: Vec<f64>,
    diffusion: Vec<Vec<f64>>,
    labels: Vec<CoordLabel>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>, DynamicsError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(DynamicsError::Malformed(format!("{what} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

impl From<ModelSpec> for ModelWire {
    fn from(m: ModelSpec) -> Self {
        ModelWire {
            kind: m.kind,
            dim: m.dim(),
            noise_dim: m.noise_dim(),
            drift_matrix: rows_of(&m.drift_matrix),
            drift_offset: m.drift_offset.iter().copied().collect(),
            diffusion: rows_of(&m.diffusion),
            labels: m.labels,
        }
    }
}

impl TryFrom<ModelWire> for ModelSpec {
    type Error = DynamicsError;

    fn try_from(w: ModelWire) -> Result<Self, Self::Error> {
        let a = matrix_from_rows(&w.drift_matrix, w.dim, w.dim, "drift_matrix")?;
        let b = matrix_from_rows(&w.diffusion, w.dim, w.noise_dim, "diffusion")?;
        if w.drift_offset.len() != w.dim {
            return Err(DynamicsError::Malformed("drift_offset length must equal dim".into()));
        }
        ModelSpec::new(w.kind, a, DVector::from_vec(w.drift_offset), b, w.labels)
    }
}

impl ModelSpec {
    pub fn new(
        kind: ModelKind,
        drift_matrix: DMatrix<f64>,
        drift_offset: DVector<f64>,
        diffusion: DMatrix<f64>,
        labels: Vec<CoordLabel>,
    ) -> Result<Self, DynamicsError> {
        let dim = drift_offset.len();
        if dim == 0 {
            return Err(DynamicsError::Malformed("empty state".into()));
        }
        if drift_matrix.shape() != (dim, dim) || diffusion.nrows() != dim || labels.len() != dim {
            return Err(DynamicsError::Malformed("inconsistent dimensions".into()));
        }
        let finite = drift_matrix.iter().chain(drift_offset.iter()).chain(diffusion.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(DynamicsError::Malformed("non-finite entry".into()));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_evidence() && diffusion.row(i).iter().all(|&x| x == 0.0) {
                return Err(DynamicsError::Malformed(format!("evidence coordinate {i} has no noise")));
            }
        }
        Ok(ModelSpec { kind, drift_matrix, drift_offset, diffusion, labels })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.drift_offset.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.diffusion.ncols()
    }

    /// The matrix `A` of the drift `b - A x`.
    pub fn drift_matrix(&self) -> &DMatrix<f64> {
        &self.drift_matrix
    }

    /// The offset `b` of the drift `b - A x`.
    pub fn drift_offset(&self) -> &DVector<f64> {
        &self.drift_offset
    }

    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.diffusion
    }

    pub fn labels(&self) -> &[CoordLabel] {
        &self.labels
    }

    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.drift_offset - &self.drift_matrix * x
    }

    /// Instantaneous variance rate `(B B^T)_ii` of coordinate `i`.
    pub fn variance_rate(&self, i: usize) -> f64 {
        self.diffusion.row(i).iter().map(|b| b * b).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DynamicsError> {
        serde_json::from_str(s).map_err(|e| DynamicsError::Malformed(e.to_string()))
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), DynamicsError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<(), DynamicsError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn evidence_labels(n: usize) -> Vec<CoordLabel> {
    (0..n).map(|node| CoordLabel::Evidence { node }).collect()
}

/// Single-agent DDM `dx = beta dt + sigma dW`.
pub fn ddm(beta: f64, sigma: f64) -> Result<ModelSpec, DynamicsError> {
    check_finite("beta", beta)?;
    check_positive("sigma", sigma)?;
    ModelSpec::new(
        ModelKind::Ddm,
        DMatrix::zeros(1, 1),
        DVector::from_element(1, beta),
        DMatrix::from_element(1, 1, sigma),
        vec![CoordLabel::Evidence { node: 0 }],
    )
}

/// Networked DDM `dx = (beta 1 - L x) dt + sigma dW`.
pub fn coupled_ddm(g: &Graph, beta: f64, sigma: f64) -> Result<ModelSpec, DynamicsError> {
    check_finite("beta", beta)?;
    check_positive("sigma", sigma)?;
    let n = g.node_count();
    ModelSpec::new(
        ModelKind::CoupledDdm,
        g.laplacian(),
        DVector::from_element(n, beta),
        DMatrix::identity(n, n) * sigma,
        evidence_labels(n),
    )
}

/// Fusion-centre DDM: drift `beta`, diffusion `1/sqrt(n)`.
pub fn centralized_ddm(n: usize, beta: f64) -> Result<ModelSpec, DynamicsError> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    check_finite("beta", beta)?;
    ModelSpec::new(
        ModelKind::CentralizedDdm,
        DMatrix::zeros(1, 1),
        DVector::from_element(1, beta),
        DMatrix::from_element(1, 1, 1.0 / (n as f64).sqrt()),
        vec![CoordLabel::CentralizedEvidence],
    )
}

/// Consensus error `d eps = -L eps dt + (I - 11^T/n) dW`.
pub fn error_dynamics(g: &Graph) -> Result<ModelSpec, DynamicsError> {
    let n = g.node_count();
    let projector = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    ModelSpec::new(
        ModelKind::ErrorDynamics,
        g.laplacian(),
        DVector::zeros(n),
        projector,
        (0..n).map(|k| CoordLabel::Error { node: Some(k) }).collect(),
    )
}

/// Scalar O-U error surrogate `d eps = -(mu/2) eps dt + dW`.
pub fn error_ou(mu: f64) -> Result<ModelSpec, DynamicsError> {
    check_positive("mu", mu)?;
    ModelSpec::new(
        ModelKind::ErrorOu,
        DMatrix::from_element(1, 1, mu / 2.0),
        DVector::zeros(1),
        DMatrix::from_element(1, 1, 1.0),
        vec![CoordLabel::Error { node: None }],
    )
}

fn reduced_diffusion(n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0 / (n as f64).sqrt(), 1.0, 0.0, 1.0])
}

/// Decoupled per-node model on the state `(y, eps)`:
///
/// ```text
/// dy   = (beta - mu eps / 2) dt + dW1 / sqrt(n) + dW2
/// deps = -(mu eps / 2) dt + dW2
/// ```
pub fn reduced_ddm(mu: f64, beta: f64, n: usize) -> Result<ModelSpec, DynamicsError> {
    check_positive("mu", mu)?;
    check_finite("beta", beta)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    ModelSpec::new(
        ModelKind::ReducedDdm,
        DMatrix::from_row_slice(2, 2, &[0.0, mu / 2.0, 0.0, mu / 2.0]),
        DVector::from_vec(vec![beta, 0.0]),
        reduced_diffusion(n),
        vec![CoordLabel::ReducedEvidence, CoordLabel::Error { node: None }],
    )
}

/// Networked O-U model `dx = (beta 1 - (L + theta I) x) dt + dW`.
pub fn coupled_ou(g: &Graph, beta: f64, theta: f64) -> Result<ModelSpec, DynamicsError> {
    check_finite("beta", beta)?;
    check_positive("theta", theta)?;
    let n = g.node_count();
    ModelSpec::new(
        ModelKind::CoupledOu,
        g.laplacian() + DMatrix::identity(n, n) * theta,
        DVector::from_element(n, beta),
        DMatrix::identity(n, n),
        evidence_labels(n),
    )
}

/// Decoupled per-node O-U model on `(y, eps)` with the O-U certainty index
/// `mu_hat`:
///
/// ```text
/// dy   = (beta - theta y + (theta - mu_hat/2) eps) dt + dW1 / sqrt(n) + dW2
/// deps = -(mu_hat / 2) eps dt + dW2
/// ```
pub fn reduced_ou(mu_hat: f64, beta: f64, theta: f64, n: usize) -> Result<ModelSpec, DynamicsError> {
    check_positive("mu_hat", mu_hat)?;
    check_finite("beta", beta)?;
    check_positive("theta", theta)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    ModelSpec::new(
        ModelKind::ReducedOu,
        DMatrix::from_row_slice(2, 2, &[theta, mu_hat / 2.0 - theta, 0.0, mu_hat / 2.0]),
        DVector::from_vec(vec![beta, 0.0]),
        reduced_diffusion(n),
        vec![CoordLabel::ReducedEvidence, CoordLabel::Error { node: None }],
    )
}

/// O-U certainty index: `1/mu_hat_k = sum_{p>=2} u_k^(p)^2 / (2 (lambda_p + theta))`.
pub fn ou_certainty_index(s: &Spectrum, theta: f64, k: usize) -> Result<f64, DynamicsError> {
    check_positive("theta", theta)?;
    if k >= s.node_count() {
        return Err(GraphError::NodeOutOfRange { node: k, n: s.node_count() }.into());
    }
    let inv: f64 = (1..s.node_count()).map(|p| s.component(k, p).powi(2) / (2.0 * (s.eigenvalues()[p] + theta))).sum();
    Ok(1.0 / inv)
}

/// Coupled race model on `m = betas.len()` alternatives with node-major
/// coordinates: entry `k * m + a` is node `k`'s evidence for alternative `a`.
pub fn coupled_race(g: &Graph, betas: &[f64], sigma: f64) -> Result<ModelSpec, DynamicsError> {
    let m = betas.len();
    if m < 2 {
        return Err(invalid("race model needs at least 2 alternatives"));
    }
    for &b in betas {
        check_finite("beta", b)?;
    }
    check_positive("sigma", sigma)?;
    let n = g.node_count();
    let l = g.laplacian();
    let dim = n * m;
    let a = DMatrix::from_fn(dim, dim, |r, c| if r % m == c % m { l[(r / m, c / m)] } else { 0.0 });
    let b = DVector::from_fn(dim, |r, _| betas[r % m]);
    let labels = (0..dim).map(|r| CoordLabel::Alternative { node: r / m, alternative: r % m }).collect();
    ModelSpec::new(ModelKind::CoupledRace, a, b, DMatrix::identity(dim, dim) * sigma, labels)
}

/// Mean and covariance of a linear model on a time grid.
#[derive(Debug, Clone)]
pub struct MomentCurve {
    pub times: Vec<f64>,
    pub mean: Vec<DVector<f64>>,
    pub covariance: Vec<DMatrix<f64>>,
}

fn check_times(times: &[f64]) -> Result<(), DynamicsError> {
    if times.iter().all(|t| t.is_finite() && *t >= 0.0) {
        Ok(())
    } else {
        Err(invalid("times must be finite and non-negative"))
    }
}

/// `(1 - exp(-2 r t)) / (2 r)`, continuous at `r = 0` where it equals `t`.
fn saturating(r: f64, t: f64) -> f64 {
    let x = 2.0 * r * t;
    if x.abs() < 1e-12 {
        t
    } else {
        -(-x).exp_m1() / (2.0 * r)
    }
}

/// Covariance `sum_p w_p(t) u^(p) u^(p)^T` over the chosen spectral modes.
fn spectral_covariance(s: &Spectrum, modes: std::ops::Range<usize>, weight: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = s.node_count();
    let u = s.eigenvectors();
    let mut cov = DMatrix::zeros(n, n);
    for p in modes {
        let w = weight(s.eigenvalues()[p]);
        let col = u.column(p);
        cov += col * col.transpose() * w;
    }
    cov
}

/// Gaussian moments of the coupled DDM started at zero.
pub fn coupled_ddm_moments(s: &Spectrum, beta: f64, sigma: f64, times: &[f64]) -> Result<MomentCurve, DynamicsError> {
    check_finite("beta", beta)?;
    check_positive("sigma", sigma)?;
    check_times(times)?;
    let n = s.node_count();
    let s2 = sigma * sigma;
    let mut curve = MomentCurve { times: times.to_vec(), mean: Vec::new(), covariance: Vec::new() };
    for &t in times {
        curve.mean.push(DVector::from_element(n, beta * t));
        let cov =
            spectral_covariance(s, 1..n, |l| saturating(l, t)) * s2 + DMatrix::from_element(n, n, s2 * t / n as f64);
        curve.covariance.push(cov);
    }
    Ok(curve)
}

/// Gaussian moments of the consensus error dynamics started at zero.
pub fn error_moments(s: &Spectrum, times: &[f64]) -> Result<MomentCurve, DynamicsError> {
    check_times(times)?;
    let n = s.node_count();
    let mut curve = MomentCurve { times: times.to_vec(), mean: Vec::new(), covariance: Vec::new() };
    for &t in times {
        curve.mean.push(DVector::zeros(n));
        curve.covariance.push(spectral_covariance(s, 1..n, |l| saturating(l, t)));
    }
    Ok(curve)
}

/// Gaussian moments of the coupled O-U model started at zero.
pub fn coupled_ou_moments(s: &Spectrum, beta: f64, theta: f64, times: &[f64]) -> Result<MomentCurve, DynamicsError> {
    check_finite("beta", beta)?;
    check_positive("theta", theta)?;
    check_times(times)?;
    let n = s.node_count();
    let mut curve = MomentCurve { times: times.to_vec(), mean: Vec::new(), covariance: Vec::new() };
    for &t in times {
        let m = -beta * (-theta * t).exp_m1() / theta;
        curve.mean.push(DVector::from_element(n, m));
        curve.covariance.push(spectral_covariance(s, 0..n, |l| saturating(l + theta, t)));
    }
    Ok(curve)
}

fn laplacian_from_spectrum(s: &Spectrum) -> DMatrix<f64> {
    let u = s.eigenvectors();
    u * DMatrix::from_diagonal(&DVector::from_column_slice(s.eigenvalues())) * u.transpose()
}

/// Steady-state correlation between the coupled error `eps_k` and its O-U
/// surrogate, in the closed form
/// `mu_k sum_p (u~_k^(p))^2 / (2 lambda~_p) - 2/n` where `(lambda~, u~)` is
/// the spectrum of `L + diag(mu)/2`.
pub fn approx_error_correlation(s: &Spectrum, mu: &CertaintyIndex, k: usize) -> Result<f64, DynamicsError> {
    let n = s.node_count();
    if mu.len() != n {
        return Err(invalid("certainty index length must match the spectrum"));
    }
    if k >= n {
        return Err(GraphError::NodeOutOfRange { node: k, n }.into());
    }
    let mut m = laplacian_from_spectrum(s);
    for i in 0..n {
        m[(i, i)] += mu.get(i) / 2.0;
    }
    let (vals, vecs) = sorted_symmetric_eigen(m)?;
    let sum: f64 = (0..n).map(|p| vecs[(k, p)].powi(2) / (2.0 * vals[p])).sum();
    Ok(mu.get(k) * sum - 2.0 / n as f64)
}

/// Exact steady-state correlation between `eps_k` and the O-U surrogate of
/// rate `mu_k / 2` driven by the same node noise:
/// `mu_k sum_{p>=2} (u_k^(p))^2 / (lambda_p + mu_k / 2)`.
pub fn exact_error_correlation(s: &Spectrum, mu: &CertaintyIndex, k: usize) -> Result<f64, DynamicsError> {
    let n = s.node_count();
    if k >= n || mu.len() != n {
        return Err(GraphError::NodeOutOfRange { node: k, n }.into());
    }
    let half = mu.get(k) / 2.0;
    let sum: f64 = (1..n).map(|p| s.component(k, p).powi(2) / (s.eigenvalues()[p] + half)).sum();
    Ok(mu.get(k) * sum)
}
