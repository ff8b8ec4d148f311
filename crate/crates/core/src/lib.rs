//! Numerical laboratory for Liouville-type theorems of the weighted
//! reaction–diffusion equation u_t = Δ_f u + F(u) on model manifolds.

pub mod cli;
pub mod config;
pub mod estimates;
pub mod geometry;
pub mod liouville;
pub mod nonlinearity;
pub mod solver;
pub mod tridiag;
