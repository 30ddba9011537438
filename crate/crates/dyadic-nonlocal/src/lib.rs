//! Numerical calculus for the dyadic nonlocal Schrödinger equation
//! `i ∂u/∂t = D^β u` on piecewise-constant grid functions.
//!
//! The building blocks:
//!
//! * [`dyadic`] — exact dyadic-interval arithmetic, the ultrametric `δ`, and
//!   the level-set geometry every quadrature rests on.
//! * [`grid`] — the universal [`GridFunction`] representation, sample
//!   generators, and CSV serialization.
//! * [`haar`] — Haar evaluation and O(n) analysis/synthesis transforms.
//! * [`besov`] — dyadic Besov seminorms computed two independent ways
//!   (double-integral quadrature vs. weighted coefficient sums).
//! * [`nonlocal`] — the fractional operator `D^β` in spectral and
//!   integral-kernel form, plus the near/far tail split.
//! * [`evolution`] — the unitary semigroup `u(t)`, continuity moduli, and the
//!   PDE residual.
//! * [`maximal`] — Hardy–Littlewood and sharp maximal functions, oscillatory
//!   partial sums, and the pointwise convergence-rate bounds.
//! * [`report`] — machine-readable verification reports.
//!
//! Everything is exact on grid functions: cells are dyadic, `δ` is constant on
//! distinct cell pairs, and all kernels are powers of two, so the identities
//! the library verifies hold at machine precision rather than up to
//! discretization error.

pub mod besov;
pub mod dyadic;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod haar;
pub mod maximal;
pub mod nonlocal;
pub mod report;

mod par;

pub use besov::{besov_norm, besov_weight, equivalence_ratio};
pub use dyadic::{dyadic_distance, DyadicInterval, GridPoint};
pub use error::{Error, Result};
pub use evolution::{evolve, evolve_pointwise, pde_residual, EvolutionState};
pub use grid::{
    generate_besov_sample, generate_lipschitz_sample, project_p0, BesovParams, GridFunction,
};
pub use haar::{analyze, partial_sum, synthesize, HaarCoefficients};
pub use maximal::{
    convergence_rate_bound, hardy_littlewood_dyadic, oscillatory_partial_sum,
    sharp_maximal_dyadic, sharp_maximal_grid, star_maximal,
};
pub use nonlocal::{dbeta_integral, dbeta_spectral, dbeta_tail_split};
pub use report::{CaseResult, VerificationReport};
