//! Exact Bayesian beliefs: finite scalar support, per-row Dirichlet, and
//! Gaussian linear regression.

pub mod dirichlet;
pub mod finite;
pub mod gaussian;

pub use dirichlet::DirichletBelief;
pub use finite::FiniteBelief;
pub use gaussian::GaussianLinearBelief;
