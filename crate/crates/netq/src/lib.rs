//! Boltzmann Q-learning on network polymatrix games.
//!
//! Agents sit on the nodes of an undirected graph and play a bimatrix
//! game against each neighbor; each agent updates a vector of action
//! values toward the expected reward of its current neighborhood and
//! plays a Boltzmann (softmax) strategy at its own exploration rate.
//! The crate provides:
//!
//! - [`graph`]: Erdős–Rényi and stochastic block sampling, spectral
//!   radii, and closed-form high-probability bounds on them;
//! - [`game`]: polymatrix game construction (Shapley, Sato, Conflict,
//!   and custom bimatrix families) with rewards and payoffs;
//! - [`dynamics`]: the discrete Q-learning map and its continuous-time
//!   counterpart, plus the convergence assessment used by experiments;
//! - [`equilibrium`]: quantal response equilibria, the pseudo-Jacobian
//!   of the regularized payoff field, and the spectral sufficient
//!   condition for a unique, globally stable equilibrium;
//! - [`experiments`]: seeded, parallel parameter sweeps (heatmaps,
//!   convergence boundaries, per-community variation histograms) with
//!   CSV export.
//!
//! Everything downstream of a seed is deterministic: graphs, payoff
//! orientation coin flips, initial strategies, and sweep scheduling all
//! derive from named ChaCha streams, so any reported number can be
//! regenerated from its manifest.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod game;
pub mod graph;
mod linalg;
pub mod seed;

pub use error::{Error, Result};
