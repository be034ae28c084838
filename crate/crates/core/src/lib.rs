//! Steady states of heterogeneous FitzHugh–Nagumo systems
//!
//! ```text
//! -Δu + c(x) v = f(x, u)
//! -Δv + b(x) v = a(x) u        c = β a
//! ```
//!
//! on a box `[-L, L]^d` with zero Dirichlet data. The second equation is
//! solved for `v = S_b u`, leaving a single nonlocal equation whose energy
//! is minimaxed for mountain-pass and sign-definite solutions.

pub mod cli;
pub mod coefficients;
pub mod config;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod nonlinearity;
pub mod nonlocal;
pub mod parallel;
pub mod random;
pub mod solvers;
pub mod spectral;
pub mod verify;

pub use coefficients::CoefficientSet;
pub use energy::{EnergyProblem, Metric};
pub use error::{Error, Result};
pub use grid::{Grid, ScalarField};
pub use nonlinearity::NonlinearitySpec;
pub use nonlocal::ReducedOperator;
pub use solvers::SolverConfig;
pub use verify::{SignClass, SolutionReport};
