//! Evidence accumulation on networks: coupled drift-diffusion and
//! Ornstein–Uhlenbeck models, their spectral moments, first-passage
//! analysis, a reduced-model PDE solver, threshold design and a seeded
//! Monte Carlo harness.
//!
//! Node ids are 0-based throughout the library.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod experiments;
pub mod graph;
pub mod pde;
pub mod simulate;
pub mod stats;
pub mod thresholds;
