//! Monte Carlo samplers and analytic oracles for characteristic polynomials
//! of Haar-random unitary and even special orthogonal matrices.
//!
//! The library is organized in layers:
//!
//! * [`specfun`] — log-gamma, polygamma, the normal CDF, and a
//!   cancellation-free cross ratio of log-gamma values that every analytic
//!   oracle is built on.
//! * [`rng`] — seedable, stream-splittable counter-based RNG wrapper so that
//!   parallel runs are reproducible draw-for-draw.
//! * [`dist`] — gamma, beta, and angular-factor samplers together with their
//!   densities.
//! * [`samplers`] — the product-form samplers for `log det(I - V)` on the
//!   unitary group and on SO(2n), the joint modulus/angle sampler, and
//!   running-sum trajectories.
//! * [`matrix`] — the brute-force oracle: explicit Haar matrices via QR or
//!   the recursive construction, with characteristic polynomials evaluated
//!   from eigenvalues.
//! * [`analytics`] — exact moment formulas, cumulants, variance sums,
//!   Lyapunov ratios, KS statistics, and empirical-moment reducers.
//! * [`suites`] — named validation suites that pit the samplers against the
//!   oracles and return machine-readable reports.

pub mod analytics;
pub mod dist;
pub mod error;
pub mod matrix;
pub mod quad;
pub mod report;
pub mod rng;
pub mod samplers;
pub mod specfun;
pub mod stats;
pub mod suites;

pub use error::{Error, Result};
