//! Quantal response equilibria and monotonicity certificates.
//!
//! A QRE at exploration rates `T_k` is a fixed point of the logit
//! response map `x_k -> boltzmann(r_k(x_{-k}), T_k)`. This module finds
//! QRE by damped fixed-point iteration, and certifies the uniqueness
//! regime numerically: the symmetrized pseudo-Jacobian
//!
//! ```text
//!   J(x) = D(x) + N,   D_k = T_k diag(1/x_k),   N_{kl} = -A^{kl},
//! ```
//!
//! has smallest eigenvalue at least `min_k T_k - delta * rho(G)` at
//! every interior point, where `delta` is the game's coupling strength
//! and `rho(G)` the interaction graph's spectral radius. Whenever that
//! bound is positive the QRE is unique and learning converges to it.

use crate::error::{Error, Result};
use crate::dynamics::{boltzmann, BOUNDARY_FLOOR};
use crate::game::{GameFamily, JointStrategy, PolymatrixGame};
use crate::graph::{
    sb_bound, sb_bound_general, spectral_radius, AdjacencyMatrix, NetworkModel,
};
use crate::linalg;
use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Iterations ignored by the residual-monotonicity anomaly check.
const ANOMALY_BURN_IN: usize = 10;

/// Solver parameters for [`qre_fixed_point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QreOptions {
    /// Step fraction toward the logit response, in `(0, 1]`.
    pub damping: f64,
    /// Residual below which the iterate counts as a fixed point.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for QreOptions {
    fn default() -> Self {
        QreOptions {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

impl QreOptions {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!(
                "damping {} outside (0, 1]",
                self.damping
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive and finite"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of the fixed-point iteration. `converged` implies
/// `residual < tol`; otherwise the best iterate seen is returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QreResult {
    pub strategy: JointStrategy,
    /// `max_abs_diff` between the strategy and its logit response.
    pub residual: f64,
    /// Damped updates performed before stopping.
    pub iterations: usize,
    pub converged: bool,
}

/// Every agent's Boltzmann best response to the current rewards:
/// `boltzmann(r_k(x_{-k}), T_k)` per agent.
pub fn logit_response(
    game: &PolymatrixGame,
    x: &JointStrategy,
    temperatures: &[f64],
) -> Result<JointStrategy> {
    if temperatures.len() != game.agents() {
        return Err(Error::contract(format!(
            "{} exploration rates for {} agents",
            temperatures.len(),
            game.agents()
        )));
    }
    let rewards = game.rewards(x)?;
    let mut parts = Vec::with_capacity(rewards.len());
    for (r, &t) in rewards.iter().zip(temperatures.iter()) {
        parts.push(boltzmann(r, t)?);
    }
    Ok(JointStrategy::new_unchecked(parts))
}

/// Runs damped fixed-point iteration
/// `x <- (1 - damping) x + damping * logit_response(x)` from `x0`,
/// stopping as soon as the residual drops below `opts.tol`. Never
/// errors on non-convergence: the result carries `converged = false`
/// and the lowest-residual iterate instead.
///
/// In the provably unique regime the residual should shrink
/// monotonically; a sustained increase after burn-in is logged as an
/// anomaly but not treated as an error.
pub fn qre_fixed_point(
    game: &PolymatrixGame,
    temperatures: &[f64],
    x0: &JointStrategy,
    opts: &QreOptions,
) -> Result<QreResult> {
    opts.validate()?;
    if x0.action_counts() != game.action_counts() {
        return Err(Error::contract(format!(
            "start point shaped {:?}, game has action counts {:?}",
            x0.action_counts(),
            game.action_counts()
        )));
    }
    if x0.min_entry() <= 0.0 {
        return Err(Error::domain("start point must be interior"));
    }

    let mut x = x0.clone();
    let mut best = x.clone();
    let mut best_residual = f64::INFINITY;
    let mut previous_residual = f64::INFINITY;
    let mut warned = false;

    for iteration in 0..=opts.max_iter {
        let response = logit_response(game, &x, temperatures)?;
        let residual = x.max_abs_diff(&response);
        if residual < best_residual {
            best_residual = residual;
            best = x.clone();
        }
        if iteration > ANOMALY_BURN_IN
            && residual > previous_residual * (1.0 + 1e-12)
            && !warned
        {
            warn!(
                "logit iteration residual rose from {previous_residual:.3e} to {residual:.3e} \
                 at iteration {iteration}; outside the contraction regime"
            );
            warned = true;
        }
        previous_residual = residual;
        if residual < opts.tol {
            return Ok(QreResult {
                strategy: x,
                residual,
                iterations: iteration,
                converged: true,
            });
        }
        if iteration == opts.max_iter {
            break;
        }
        let parts: Vec<Vec<f64>> = x
            .parts()
            .iter()
            .zip(response.parts().iter())
            .map(|(old, new)| {
                old.iter()
                    .zip(new.iter())
                    .map(|(o, n)| (1.0 - opts.damping) * o + opts.damping * n)
                    .collect()
            })
            .collect();
        x = JointStrategy::new_unchecked(parts);
    }
    Ok(QreResult {
        strategy: best,
        residual: best_residual,
        iterations: opts.max_iter,
        converged: false,
    })
}

fn check_interior(game: &PolymatrixGame, x: &JointStrategy) -> Result<()> {
    if x.action_counts() != game.action_counts() {
        return Err(Error::contract(format!(
            "point shaped {:?}, game has action counts {:?}",
            x.action_counts(),
            game.action_counts()
        )));
    }
    if x.min_entry() <= BOUNDARY_FLOOR {
        return Err(Error::domain(
            "operation undefined on the simplex boundary",
        ));
    }
    Ok(())
}

fn check_temperatures(game: &PolymatrixGame, temperatures: &[f64]) -> Result<()> {
    if temperatures.len() != game.agents() {
        return Err(Error::contract(format!(
            "{} exploration rates for {} agents",
            temperatures.len(),
            game.agents()
        )));
    }
    if temperatures.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid(
            "exploration rates must be positive and finite",
        ));
    }
    Ok(())
}

/// Entropy-regularized payoff of agent `k` at raw (not necessarily
/// normalized) positive coordinates; kept private as the
/// finite-difference reference surface for the gradient and Jacobian.
#[cfg(test)]
fn regularized_payoff(
    game: &PolymatrixGame,
    k: usize,
    parts: &[Vec<f64>],
    temperature: f64,
) -> f64 {
    let mut bilinear = 0.0;
    for l in 0..game.agents() {
        if let Some(m) = game.payoff_matrix(k, l) {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    bilinear += parts[k][i] * m.get(i, j) * parts[l][j];
                }
            }
        }
    }
    let entropy: f64 = parts[k].iter().map(|&v| v * v.ln()).sum();
    bilinear - temperature * entropy
}

fn gradient_core(game: &PolymatrixGame, parts: &[Vec<f64>], temperatures: &[f64]) -> Vec<f64> {
    let mut rewards: Vec<Vec<f64>> = game
        .action_counts()
        .iter()
        .map(|&m| vec![0.0; m])
        .collect();
    game.rewards_into(parts, &mut rewards);
    let mut out = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for (k, part) in parts.iter().enumerate() {
        let t = temperatures[k];
        for (i, &v) in part.iter().enumerate() {
            out.push(t * (v.ln() + 1.0) - rewards[k][i]);
        }
    }
    out
}

/// The map whose zeros (restricted to the product of simplices) are
/// the QRE: `F_{ki}(x) = T_k (ln x_{ki} + 1) - r_{ki}(x_{-k})`,
/// flattened agent-major.
pub fn pseudo_gradient(
    game: &PolymatrixGame,
    temperatures: &[f64],
    x: &JointStrategy,
) -> Result<Vec<f64>> {
    check_temperatures(game, temperatures)?;
    check_interior(game, x)?;
    Ok(gradient_core(game, x.parts(), temperatures))
}

/// [`pseudo_gradient`] on raw positive coordinates that need not sum
/// to one. The formula extends smoothly off the simplex, and the
/// pseudo-Jacobian is its derivative in this ambient space, so
/// finite-difference probes perturb one coordinate at a time here.
pub fn pseudo_gradient_raw(
    game: &PolymatrixGame,
    temperatures: &[f64],
    parts: &[Vec<f64>],
) -> Result<Vec<f64>> {
    check_temperatures(game, temperatures)?;
    if parts.len() != game.agents()
        || parts
            .iter()
            .zip(game.action_counts())
            .any(|(p, &m)| p.len() != m)
    {
        return Err(Error::contract("coordinate shape does not match the game"));
    }
    if parts
        .iter()
        .flatten()
        .any(|&v| !(v.is_finite() && v > 0.0))
    {
        return Err(Error::domain(
            "raw coordinates must be strictly positive and finite",
        ));
    }
    Ok(gradient_core(game, parts, temperatures))
}

/// Derivative of [`pseudo_gradient`]: block-diagonal part
/// `T_k diag(1/x_k)` plus constant off-diagonal blocks `-A^{kl}` on
/// edges. Side length is the total coordinate count.
pub fn pseudo_jacobian(
    game: &PolymatrixGame,
    temperatures: &[f64],
    x: &JointStrategy,
) -> Result<DMatrix<f64>> {
    check_temperatures(game, temperatures)?;
    check_interior(game, x)?;
    let counts = game.action_counts();
    let mut offsets = Vec::with_capacity(counts.len());
    let mut total = 0;
    for &m in counts {
        offsets.push(total);
        total += m;
    }
    let mut j = DMatrix::zeros(total, total);
    for (k, part) in x.parts().iter().enumerate() {
        for (i, &v) in part.iter().enumerate() {
            j[(offsets[k] + i, offsets[k] + i)] = temperatures[k] / v;
        }
    }
    for (from, to, m) in game.half_edges() {
        for i in 0..m.rows() {
            for jj in 0..m.cols() {
                j[(offsets[from] + i, offsets[to] + jj)] = -m.get(i, jj);
            }
        }
    }
    Ok(j)
}

/// Numerical witness of the monotonicity margin at one interior point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCertificate {
    /// Smallest eigenvalue of the symmetrized pseudo-Jacobian at
    /// `point`.
    pub min_eig: f64,
    /// The closed-form floor `min_k T_k - delta * rho(G)`.
    pub bound: f64,
    pub point: JointStrategy,
}

/// Evaluates the certificate `min_eig((J(x) + J(x)^T) / 2)` against the
/// closed-form bound; the eigenvalue never falls below the bound (up to
/// eigensolver tolerance), and a positive bound certifies uniqueness.
pub fn monotonicity_margin(
    game: &PolymatrixGame,
    temperatures: &[f64],
    x: &JointStrategy,
) -> Result<MonotonicityCertificate> {
    let j = pseudo_jacobian(game, temperatures, x)?;
    let sym = (&j + j.transpose()) * 0.5;
    let min_eig = linalg::min_symmetric_eigenvalue(&sym);
    let min_t = temperatures.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = min_t - game.delta_identical_interests() * spectral_radius(game.graph());
    Ok(MonotonicityCertificate {
        min_eig,
        bound,
        point: x.clone(),
    })
}

/// Network description accepted by [`theoretical_threshold`]: either a
/// concrete graph (exact spectral radius) or a random model (bound
/// holding with probability `1 - epsilon`).
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Exact(AdjacencyMatrix),
    Random(NetworkModel),
}

impl NetworkSpec {
    /// The spectral-radius term: exact for concrete graphs, the
    /// closed-form high-probability bound for random models (the
    /// general-sizes variant when communities are unequal).
    pub fn rho_term(&self, epsilon: f64) -> Result<f64> {
        match self {
            NetworkSpec::Exact(g) => Ok(spectral_radius(g)),
            NetworkSpec::Random(NetworkModel::Er(p)) => {
                Ok(crate::graph::er_bound(p.n, p.p, epsilon)?.value)
            }
            NetworkSpec::Random(NetworkModel::Sb(p)) => {
                let bound = if p.equal_size().is_some() {
                    sb_bound(p, epsilon)?
                } else {
                    sb_bound_general(p, epsilon)?
                };
                Ok(bound.value)
            }
        }
    }
}

/// Exploration-rate threshold predicted for a family on a network:
/// `delta * rho_term` by default, or the bare `rho_term` when
/// `literal` is set (the printed theorem statements omit the coupling
/// factor; the flag allows comparing against them verbatim).
pub fn theoretical_threshold(
    family: &GameFamily,
    network: &NetworkSpec,
    epsilon: f64,
    literal: bool,
) -> Result<f64> {
    let rho = network.rho_term(epsilon)?;
    if literal {
        return Ok(rho);
    }
    Ok(family.delta_identical_interests()? * rho)
}
