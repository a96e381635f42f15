//! Simulation and verification toolkit for systems of ordered particles
//! with singular pairwise repulsion H_ij(x_i, x_j) / (x_i - x_j).
//!
//! Such systems (Dyson Brownian motion, beta-Wishart, Jacobi, hyperbolic
//! and nearest-neighbor particle families) keep their particles strictly
//! ordered, but the raw SDE cannot be integrated from a colliding or fully
//! degenerate initial state: the drift blows up. Rewriting the dynamics in
//! elementary-symmetric-polynomial coordinates removes every singularity,
//! and recovering the particles as ordered real roots turns that into a
//! practical integration scheme for arbitrary starting points in the
//! closed Weyl chamber.
//!
//! The crate provides:
//!
//! - [`coefficients`]: preset particle families and custom systems;
//! - [`conditions`]: exact and sampled checks of the hypotheses under
//!   which non-collision and non-explosion hold;
//! - [`sympoly`]: symmetric-polynomial machinery, root recovery, and the
//!   collision-safe squared-gap dynamics;
//! - [`integrate`]: Euler-Maruyama in particle space and in polynomial
//!   space, a hybrid stepper, and reproducible ensembles;
//! - [`analysis`]: collision diagnostics, moment laws, a random-matrix
//!   oracle and a two-sample Kolmogorov-Smirnov distance;
//! - [`validate`]: the full verification suite with a machine-readable
//!   scorecard;
//! - [`config`] and [`cli`]: the run-config format and the `check`,
//!   `run`, `ensemble`, `validate` subcommands.
//!
//! See the crate examples for one runnable program per capability.

pub mod analysis;
pub mod cli;
pub mod coefficients;
pub mod conditions;
pub mod config;
pub mod error;
pub mod expr;
pub mod integrate;
pub mod rng;
pub mod sympoly;
pub mod validate;

pub use coefficients::{build_preset, CoefficientSet, PresetParams};
pub use error::{Error, Result};
pub use sympoly::{ChamberPoint, PolyPoint};
