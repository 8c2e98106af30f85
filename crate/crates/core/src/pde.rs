//! Finite-difference solution of the backward equations of the reduced DDM.
//!
//! For a node with certainty index `μ` in a network of `n` nodes, the
//! expected decision time `ET(y, ε)` and error rate `ER(y, ε)` satisfy
//!
//! ```text
//! (β - με/2) ∂_y u - (με/2) ∂_ε u + ½[((n+1)/n) ∂_yy u + 2 ∂_yε u + ∂_εε u] = f
//! ```
//!
//! with `f = -1` for ET and `f = 0` for ER on `[-η, η] × [-η̄, η̄]`. The
//! decision boundaries are `y = ±η` (ET = 0; ER = 0 at `+η`, 1 at `-η`), and
//! `ε = ±η̄` is a far-field cut with ET = 0, ER = 0 at `+η̄` and 1 at `-η̄`.
//!
//! Second derivatives are central and the mixed derivative uses the
//! four-corner stencil. First derivatives are central where the cell Péclet
//! number allows and upwinded elsewhere: the diffusion matrix is close to
//! singular along `y = -ε`, so pure upwinding adds numerical diffusion of the
//! same size as the physical one and converges very slowly. The linear system is solved by
//! SOR, falling back to Gauss–Seidel if SOR diverges.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magic bytes opening a binary grid dump.
pub const BINARY_MAGIC: &[u8; 8] = b"RDDMPDE1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid domain or grid: {0}")]
    InvalidDomain(String),
    #[error("solver did not converge: residual {residual:e} after {sweeps} sweeps")]
    SolverDivergence { residual: f64, sweeps: usize },
    #[error("point ({y}, {eps}) lies outside the grid")]
    OutOfDomain { y: f64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    #[serde(rename = "et")]
    ExpectedTime,
    #[serde(rename = "er")]
    ErrorRate,
}

/// Uniform tensor grid; `y` is the row index of stored values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub ne: usize,
}

impl PdeGrid {
    pub fn new(eta: f64, eta_bar: f64, ny: usize, ne: usize) -> Result<Self, PdeError> {
        if !(eta > 0.0 && eta.is_finite() && eta_bar > 0.0 && eta_bar.is_finite()) {
            return Err(PdeError::InvalidDomain("eta and eta_bar must be positive".into()));
        }
        if ny < 3 || ne < 3 || ny.is_multiple_of(2) || ne.is_multiple_of(2) {
            return Err(PdeError::InvalidDomain(format!("grid sizes must be odd and >= 3, got {ny} x {ne}")));
        }
        Ok(PdeGrid { y_min: -eta, y_max: eta, ny, e_min: -eta_bar, e_max: eta_bar, ne })
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn he(&self) -> f64 {
        (self.e_max - self.e_min) / (self.ne - 1) as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        if i == self.ny - 1 {
            self.y_max
        } else {
            self.y_min + i as f64 * self.hy()
        }
    }

    pub fn eps(&self, j: usize) -> f64 {
        if j == self.ne - 1 {
            self.e_max
        } else {
            self.e_min + j as f64 * self.he()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeConfig {
    /// Far-field half-width; `None` means `6/√μ`.
    pub eta_bar: Option<f64>,
    pub ny: usize,
    pub ne: usize,
    pub omega: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig { eta_bar: None, ny: 201, ne: 201, omega: 1.7, tolerance: 1e-8, max_sweeps: 400_000 }
    }
}

impl PdeConfig {
    pub fn with_resolution(points: usize) -> Self {
        PdeConfig { ny: points, ne: points, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSolution {
    pub grid: PdeGrid,
    pub which: Quantity,
    /// Row-major `ny x ne` values.
    pub values: Vec<f64>,
    /// Max-norm of the discrete residual at interior nodes.
    pub residual: f64,
    pub sweeps: usize,
    /// Largest excursion outside `[0, 1]` (ER) or below 0 (ET) removed after
    /// the solve. The mixed-derivative stencil is not monotone, so the raw
    /// discrete solution can overshoot slightly near the corners.
    pub clipped: f64,
    pub warnings: Vec<String>,
}

impl PdeSolution {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ne + j]
    }

    /// Bilinear interpolation at `(y, ε)`.
    pub fn evaluate(&self, y: f64, eps: f64) -> Result<f64, PdeError> {
        let g = &self.grid;
        let inside = |v: f64, lo: f64, hi: f64| v >= lo - 1e-12 * hi.abs() && v <= hi + 1e-12 * hi.abs();
        if !(inside(y, g.y_min, g.y_max) && inside(eps, g.e_min, g.e_max)) {
            return Err(PdeError::OutOfDomain { y, eps });
        }
        let (i, fy) = cell(y, g.y_min, g.hy(), g.ny);
        let (j, fe) = cell(eps, g.e_min, g.he(), g.ne);
        let v = |di: usize, dj: usize| self.at(i + di, j + dj);
        let low = if fe == 0.0 { v(0, 0) } else { (1.0 - fe) * v(0, 0) + fe * v(0, 1) };
        if fy == 0.0 {
            return Ok(low);
        }
        let high = if fe == 0.0 { v(1, 0) } else { (1.0 - fe) * v(1, 0) + fe * v(1, 1) };
        Ok((1.0 - fy) * low + fy * high)
    }

    /// Value at the origin, the usual starting state.
    pub fn at_origin(&self) -> f64 {
        self.at(self.grid.ny / 2, self.grid.ne / 2)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "y,epsilon,value")?;
        for i in 0..self.grid.ny {
            for j in 0..self.grid.ne {
                writeln!(w, "{},{},{}", self.grid.y(i), self.grid.eps(j), self.at(i, j))?;
            }
        }
        Ok(())
    }

    /// Header `RDDMPDE1`, `ny`, `ne` (u64), `y_min`, `y_max`, `e_min`,
    /// `e_max` (f64), then the row-major values; all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let g = &self.grid;
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(g.ny as u64).to_le_bytes())?;
        w.write_all(&(g.ne as u64).to_le_bytes())?;
        for x in [g.y_min, g.y_max, g.e_min, g.e_max] {
            w.write_all(&x.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Read a binary grid dump back into its grid and values.
pub fn read_binary<R: Read>(mut r: R) -> io::Result<(PdeGrid, Vec<f64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let mut b8 = [0u8; 8];
    let mut u = |r: &mut R| -> io::Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let ny = u(&mut r)? as usize;
    let ne = u(&mut r)? as usize;
    let f = |r: &mut R| -> io::Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let (y_min, y_max, e_min, e_max) = (f(&mut r)?, f(&mut r)?, f(&mut r)?, f(&mut r)?);
    let mut values = Vec::with_capacity(ny * ne);
    for _ in 0..ny * ne {
        values.push(f(&mut r)?);
    }
    Ok((PdeGrid { y_min, y_max, ny, e_min, e_max, ne }, values))
}

fn cell(v: f64, lo: f64, h: f64, n: usize) -> (usize, f64) {
    let s = ((v - lo) / h).clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    let f = s - i as f64;
    if f.abs() < 1e-12 {
        (i, 0.0)
    } else if (1.0 - f).abs() < 1e-12 {
        if i + 1 == n - 1 {
            (i, 1.0)
        } else {
            (i + 1, 0.0)
        }
    } else {
        (i, f)
    }
}

/// Linear system on a structured grid. Each unknown couples to its 3x3
/// neighbourhood. In 2D the outer ring of nodes is fixed; in 1D (`ne == 1`)
/// the two end points are.
struct StencilSystem {
    ny: usize,
    ne: usize,
    /// `coeff[k][3 * (di + 1) + (dj + 1)]`
    coeff: Vec<[f64; 9]>,
    rhs: Vec<f64>,
}

impl StencilSystem {
    fn interior(&self) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        if self.ne == 1 {
            (1..self.ny - 1, 0..1)
        } else {
            (1..self.ny - 1, 1..self.ne - 1)
        }
    }

    #[inline]
    fn off_diagonal(&self, u: &[f64], k: usize) -> f64 {
        let c = &self.coeff[k];
        if self.ne == 1 {
            return c[1] * u[k - 1] + c[7] * u[k + 1];
        }
        let ne = self.ne;
        let (dn, up) = (k - ne, k + ne);
        c[0] * u[dn - 1]
            + c[1] * u[dn]
            + c[2] * u[dn + 1]
            + c[3] * u[k - 1]
            + c[5] * u[k + 1]
            + c[6] * u[up - 1]
            + c[7] * u[up]
            + c[8] * u[up + 1]
    }

    fn residual(&self, u: &[f64]) -> f64 {
        let (ri, rj) = self.interior();
        let mut worst: f64 = 0.0;
        for i in ri {
            for j in rj.clone() {
                let k = i * self.ne + j;
                let r = self.off_diagonal(u, k) + self.coeff[k][4] * u[k] - self.rhs[k];
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    fn sweep(&self, u: &mut [f64], omega: f64) {
        let (ri, rj) = self.interior();
        for i in ri {
            for j in rj.clone() {
                let k = i * self.ne + j;
                let gs = (self.rhs[k] - self.off_diagonal(u, k)) / self.coeff[k][4];
                u[k] += omega * (gs - u[k]);
            }
        }
    }

    /// SOR at `omega`; on divergence restart with Gauss–Seidel.
    fn solve(&self, init: &[f64], omega: f64, tol: f64, max_sweeps: usize) -> Result<(Vec<f64>, f64, usize), PdeError> {
        match self.iterate(init, omega, tol, max_sweeps) {
            Ok(done) => Ok(done),
            Err(_) if omega != 1.0 => self.iterate(init, 1.0, tol, max_sweeps),
            Err(e) => Err(e),
        }
    }

    fn iterate(
        &self,
        init: &[f64],
        omega: f64,
        tol: f64,
        max_sweeps: usize,
    ) -> Result<(Vec<f64>, f64, usize), PdeError> {
        let mut u = init.to_vec();
        let start = self.residual(&u).max(tol);
        let check_every = 50;
        let mut sweeps = 0;
        loop {
            for _ in 0..check_every {
                self.sweep(&mut u, omega);
            }
            sweeps += check_every;
            let r = self.residual(&u);
            if r <= tol {
                return Ok((u, r, sweeps));
            }
            if !r.is_finite() || r > 1e6 * start || sweeps >= max_sweeps {
                return Err(PdeError::SolverDivergence { residual: r, sweeps });
            }
        }
    }
}

/// Adds the first-derivative term `v ∂u` along one axis to `w` at
/// `(minus, plus)`: central when the cell Péclet number `|v| h / diff` is at
/// most 2, upwind otherwise.
fn advection(w: &mut [f64; 9], minus: usize, plus: usize, v: f64, h: f64, diff: f64) {
    if v.abs() * h <= 2.0 * diff {
        w[plus] += v / (2.0 * h);
        w[minus] -= v / (2.0 * h);
    } else if v > 0.0 {
        w[plus] += v / h;
        w[4] -= v / h;
    } else {
        w[minus] -= v / h;
        w[4] += v / h;
    }
}

/// Coefficients of `a u_yy + b u_yε + c u_εε + p u_y + q u_ε` at one node.
/// With `he == 0` only the `y` terms are assembled.
#[allow(clippy::too_many_arguments)]
fn stencil(a: f64, b: f64, c: f64, p: f64, q: f64, hy: f64, he: f64) -> [f64; 9] {
    let mut w = [0.0; 9];
    let (ym, yp, em, ep, mid) = (1, 7, 3, 5, 4);
    w[ym] += a / (hy * hy);
    w[yp] += a / (hy * hy);
    w[mid] -= 2.0 * a / (hy * hy);
    advection(&mut w, ym, yp, p, hy, a);
    if he > 0.0 {
        w[em] += c / (he * he);
        w[ep] += c / (he * he);
        w[mid] -= 2.0 * c / (he * he);
        let x = b / (4.0 * hy * he);
        w[8] += x;
        w[0] += x;
        w[2] -= x;
        w[6] -= x;
        advection(&mut w, em, ep, q, he, c);
    }
    w
}

fn rhs_value(which: Quantity) -> f64 {
    match which {
        Quantity::ExpectedTime => -1.0,
        Quantity::ErrorRate => 0.0,
    }
}

/// Solve for ET or ER of the reduced DDM on the configured grid.
pub fn solve_reduced_pde(
    mu: f64,
    beta: f64,
    n: usize,
    eta: f64,
    cfg: &PdeConfig,
    which: Quantity,
) -> Result<PdeSolution, PdeError> {
    if !(mu > 0.0 && mu.is_finite()) || !beta.is_finite() || n == 0 {
        return Err(PdeError::InvalidDomain("mu must be positive, beta finite and n >= 1".into()));
    }
    if cfg.ny < 51 || cfg.ne < 51 {
        return Err(PdeError::InvalidDomain("resolution must be at least 51 x 51".into()));
    }
    let eta_bar = cfg.eta_bar.unwrap_or(6.0 / mu.sqrt());
    let grid = PdeGrid::new(eta, eta_bar, cfg.ny, cfg.ne)?;
    let mut warnings = Vec::new();
    if eta_bar < 4.0 / mu.sqrt() {
        warnings.push(format!("eta_bar = {eta_bar} is below 4/sqrt(mu); the far-field cut may bias the solution"));
    }
    let (ny, ne) = (grid.ny, grid.ne);
    let (hy, he) = (grid.hy(), grid.he());
    let a = 0.5 * (n as f64 + 1.0) / n as f64;
    let mut sys = StencilSystem { ny, ne, coeff: vec![[0.0; 9]; ny * ne], rhs: vec![0.0; ny * ne] };
    let mut u = vec![0.0; ny * ne];
    let interior_guess = match which {
        Quantity::ExpectedTime => 0.0,
        Quantity::ErrorRate => 0.5,
    };
    for i in 0..ny {
        for j in 0..ne {
            let k = i * ne + j;
            let boundary = i == 0 || i == ny - 1 || j == 0 || j == ne - 1;
            if boundary {
                u[k] = match which {
                    Quantity::ExpectedTime => 0.0,
                    Quantity::ErrorRate => {
                        if i == ny - 1 {
                            0.0
                        } else if i == 0 {
                            1.0
                        } else if j == ne - 1 {
                            0.0
                        } else {
                            1.0
                        }
                    }
                };
            } else {
                let e = grid.eps(j);
                sys.coeff[k] = stencil(a, 1.0, 0.5, beta - mu * e / 2.0, -mu * e / 2.0, hy, he);
                sys.rhs[k] = rhs_value(which);
                u[k] = interior_guess;
            }
        }
    }
    let (mut values, residual, sweeps) = sys.solve(&u, cfg.omega, cfg.tolerance, cfg.max_sweeps)?;
    let hi = match which {
        Quantity::ExpectedTime => f64::INFINITY,
        Quantity::ErrorRate => 1.0,
    };
    let mut clipped: f64 = 0.0;
    for v in values.iter_mut() {
        let c = v.clamp(0.0, hi);
        clipped = clipped.max((c - *v).abs());
        *v = c;
    }
    Ok(PdeSolution { grid, which, values, residual, sweeps, clipped, warnings })
}

/// The same stencils applied to the scalar DDM generator
/// `β u' + (σ²/2) u'' = f` on `[-η, η]` with `points` nodes; returns the
/// solution at 0.
pub fn solve_ddm_1d(beta: f64, sigma: f64, eta: f64, points: usize, which: Quantity) -> Result<f64, PdeError> {
    if !(sigma > 0.0) || !beta.is_finite() {
        return Err(PdeError::InvalidDomain("sigma must be positive and beta finite".into()));
    }
    let grid = PdeGrid::new(eta, 1.0, points, 3)?;
    let h = grid.hy();
    let mut sys = StencilSystem { ny: points, ne: 1, coeff: vec![[0.0; 9]; points], rhs: vec![0.0; points] };
    let mut u = vec![0.0; points];
    // lower boundary counts as the wrong decision
    if which == Quantity::ErrorRate {
        u[0] = 1.0;
    }
    for i in 1..points - 1 {
        sys.coeff[i] = stencil(0.5 * sigma * sigma, 0.0, 0.0, beta, 0.0, h, 0.0);
        sys.rhs[i] = rhs_value(which);
    }
    let (values, _, _) = sys.solve(&u, 1.7, 1e-9, 2_000_000)?;
    Ok(values[points / 2])
}
