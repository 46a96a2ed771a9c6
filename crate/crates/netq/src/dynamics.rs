//! Discrete Boltzmann Q-learning and its continuous-time limit.
//!
//! The discrete algorithm updates every agent synchronously from the
//! same joint strategy:
//!
//! ```text
//!   Q_{ki}(t+1) = (1 - a_k) Q_{ki}(t) + a_k r_{ki}(x_{-k}(t)),
//!   x_k(t+1)    = boltzmann(Q_k(t+1), T_k),
//! ```
//!
//! with expected rewards rather than sampled actions, so runs are fully
//! deterministic given the initial state. The continuous counterpart is
//! the vector field
//!
//! ```text
//!   dx_{ki}/dt = x_{ki} ( r_{ki} - <x_k, r_k>
//!                         + T_k ( sum_j x_{kj} ln x_{kj} - ln x_{ki} ) ),
//! ```
//!
//! integrated with fixed-step RK4 plus a floor-and-renormalize
//! projection that keeps iterates inside the simplex.
//!
//! Convergence of a trajectory is judged on its last `tail` snapshots:
//! the mean per-component variance must stay below `var_threshold` and
//! the worst componentwise relative difference `(max - min) / max`
//! below `rel_threshold`.

use crate::error::{Error, Result};
use crate::game::{JointStrategy, PolymatrixGame};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Default iteration count for discrete runs.
pub const DEFAULT_STEPS: usize = 4000;
/// Default analysis window: the last 300 recorded strategies.
pub const DEFAULT_TAIL: usize = 300;
/// Default mean-variance threshold for convergence.
pub const DEFAULT_VAR_THRESHOLD: f64 = 1e-2;
/// Default relative-difference threshold for convergence.
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-5;
/// Default learning rate for every agent.
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
/// Default RK4 step size.
pub const DEFAULT_DT: f64 = 0.01;
/// Smallest strategy coordinate kept by the ODE projection.
pub const STRATEGY_FLOOR: f64 = 1e-12;
/// Coordinates at or below this count as "on the boundary" for the
/// vector field's domain check.
pub const BOUNDARY_FLOOR: f64 = 1e-300;

/// Softmax of `q / t` with max-subtraction, so adding a constant to
/// every entry of `q` cannot change the result and large magnitudes do
/// not overflow.
pub fn boltzmann(q: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "exploration rate must be positive and finite, got {t}"
        )));
    }
    if q.is_empty() {
        return Err(Error::invalid("empty Q-vector"));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Q-vector entries must be finite"));
    }
    let mut out = vec![0.0; q.len()];
    boltzmann_into(q, t, &mut out);
    Ok(out)
}

fn boltzmann_into(q: &[f64], t: f64, out: &mut [f64]) {
    let q_max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &qi) in out.iter_mut().zip(q.iter()) {
        let e = ((qi - q_max) / t).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Run parameters shared by the discrete algorithm and the ODE
/// integrator. `dt` only matters in continuous mode; `learning_rates`
/// only in discrete mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Per-agent exploration rates `T_k > 0`.
    pub temperatures: Vec<f64>,
    /// Per-agent learning rates `a_k` in `(0, 1)`.
    pub learning_rates: Vec<f64>,
    /// Number of update iterations (or ODE steps).
    pub steps: usize,
    /// Length of the convergence-analysis window.
    pub tail: usize,
    /// RK4 step size.
    pub dt: f64,
}

impl DynamicsConfig {
    /// Standard configuration: one shared exploration rate, learning
    /// rate 0.1, 4000 steps, 300-step analysis window, dt 0.01.
    pub fn uniform(agents: usize, temperature: f64) -> Self {
        DynamicsConfig {
            temperatures: vec![temperature; agents],
            learning_rates: vec![DEFAULT_LEARNING_RATE; agents],
            steps: DEFAULT_STEPS,
            tail: DEFAULT_TAIL,
            dt: DEFAULT_DT,
        }
    }

    pub fn validate(&self, agents: usize) -> Result<()> {
        if self.temperatures.len() != agents || self.learning_rates.len() != agents {
            return Err(Error::contract(format!(
                "config sized for {} temperature / {} learning-rate entries, game has {agents} agents",
                self.temperatures.len(),
                self.learning_rates.len()
            )));
        }
        if self.temperatures.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("exploration rates must be positive and finite"));
        }
        if self.learning_rates.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::invalid("learning rates must lie in (0, 1)"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("step count must be positive"));
        }
        if self.tail == 0 || self.tail > self.steps {
            return Err(Error::invalid(format!(
                "analysis window {} must lie in 1..={} (steps)",
                self.tail, self.steps
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("ODE step size must be positive and finite"));
        }
        Ok(())
    }
}

/// Learner state: per-agent Q-values plus the strategies they induce.
/// The strategy part always equals `boltzmann(Q_k, T_k)` for the
/// exploration rates the state was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    q: Vec<Vec<f64>>,
    x: JointStrategy,
}

impl QState {
    /// Builds a state from raw Q-values; strategies are derived.
    pub fn from_q(q: Vec<Vec<f64>>, temperatures: &[f64]) -> Result<Self> {
        if q.len() != temperatures.len() {
            return Err(Error::contract(format!(
                "{} Q-vectors but {} exploration rates",
                q.len(),
                temperatures.len()
            )));
        }
        let mut parts = Vec::with_capacity(q.len());
        for (qk, &t) in q.iter().zip(temperatures.iter()) {
            parts.push(boltzmann(qk, t)?);
        }
        Ok(QState {
            q,
            x: JointStrategy::new_unchecked(parts),
        })
    }

    /// Builds the state whose strategy part reproduces `x`: sets
    /// `Q_k = T_k ln x_k`, which requires `x` strictly interior.
    pub fn from_strategy(x: &JointStrategy, temperatures: &[f64]) -> Result<Self> {
        if x.agents() != temperatures.len() {
            return Err(Error::contract(format!(
                "{} agents but {} exploration rates",
                x.agents(),
                temperatures.len()
            )));
        }
        if x.min_entry() <= 0.0 {
            return Err(Error::domain(
                "strategy must be interior to initialize Q-values from logarithms",
            ));
        }
        let q: Vec<Vec<f64>> = x
            .parts()
            .iter()
            .zip(temperatures.iter())
            .map(|(part, &t)| part.iter().map(|&v| t * v.ln()).collect())
            .collect();
        QState::from_q(q, temperatures)
    }

    /// Standard random initialization: strategies drawn uniformly from
    /// the simplex interior, Q-values set consistently.
    pub fn random<R: Rng + ?Sized>(
        action_counts: &[usize],
        temperatures: &[f64],
        rng: &mut R,
    ) -> Result<Self> {
        let x = JointStrategy::random_interior(action_counts, rng);
        QState::from_strategy(&x, temperatures)
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn strategy(&self) -> &JointStrategy {
        &self.x
    }
}

/// One synchronous update of every agent's Q-values and strategy. The
/// caller guarantees that `state` matches the game's action counts and
/// that the config is sized for the game (as [`run_discrete`]'s
/// validation establishes).
pub fn q_step(game: &PolymatrixGame, state: &QState, config: &DynamicsConfig) -> QState {
    debug_assert_eq!(state.x.action_counts(), game.action_counts());
    debug_assert_eq!(config.temperatures.len(), game.agents());
    let mut q = state.q.clone();
    let mut parts: Vec<Vec<f64>> = state.x.parts().to_vec();
    let mut rewards: Vec<Vec<f64>> = game
        .action_counts()
        .iter()
        .map(|&m| vec![0.0; m])
        .collect();
    step_in_place(game, config, &mut q, &mut parts, &mut rewards);
    QState {
        q,
        x: JointStrategy::new_unchecked(parts),
    }
}

fn step_in_place(
    game: &PolymatrixGame,
    config: &DynamicsConfig,
    q: &mut [Vec<f64>],
    parts: &mut [Vec<f64>],
    rewards: &mut [Vec<f64>],
) {
    game.rewards_into(parts, rewards);
    for (k, qk) in q.iter_mut().enumerate() {
        let a = config.learning_rates[k];
        for (qv, &rv) in qk.iter_mut().zip(rewards[k].iter()) {
            *qv = (1.0 - a) * *qv + a * rv;
        }
        boltzmann_into(qk, config.temperatures[k], &mut parts[k]);
    }
}

/// Time-indexed strategies produced by a run: the snapshot after each
/// of the `steps` updates, with the initial condition kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    initial: JointStrategy,
    states: Vec<JointStrategy>,
}

impl Trajectory {
    /// Assembles a trajectory from explicit snapshots (mainly for
    /// tests and offline analysis); shapes must agree throughout.
    pub fn from_states(initial: JointStrategy, states: Vec<JointStrategy>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("trajectory needs at least one snapshot"));
        }
        let counts = initial.action_counts();
        if states.iter().any(|s| s.action_counts() != counts) {
            return Err(Error::contract("trajectory snapshots have mixed shapes"));
        }
        Ok(Trajectory { initial, states })
    }

    /// Number of recorded (post-update) snapshots.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> &JointStrategy {
        &self.initial
    }

    pub fn states(&self) -> &[JointStrategy] {
        &self.states
    }

    pub fn last(&self) -> &JointStrategy {
        self.states.last().expect("trajectory is never empty")
    }

    /// The final `n` snapshots.
    pub fn tail(&self, n: usize) -> Result<&[JointStrategy]> {
        if n == 0 {
            return Err(Error::invalid("analysis window must be non-empty"));
        }
        if n > self.states.len() {
            return Err(Error::invalid(format!(
                "analysis window {n} exceeds trajectory length {}",
                self.states.len()
            )));
        }
        Ok(&self.states[self.states.len() - n..])
    }

    /// CSV export: header `step,agent,action,probability`, one row per
    /// coordinate per recorded step, steps numbered from 1.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(32 * self.states.len());
        out.push_str("step,agent,action,probability\n");
        for (t, state) in self.states.iter().enumerate() {
            for (agent, part) in state.parts().iter().enumerate() {
                for (action, &p) in part.iter().enumerate() {
                    let _ = writeln!(out, "{},{agent},{action},{p}", t + 1);
                }
            }
        }
        out
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}

/// Runs the discrete algorithm for `config.steps` synchronous updates,
/// recording the strategy after each one. Deterministic: the update
/// uses expected rewards, so the initial state fixes the whole
/// trajectory.
pub fn run_discrete(
    game: &PolymatrixGame,
    config: &DynamicsConfig,
    init: &QState,
) -> Result<Trajectory> {
    config.validate(game.agents())?;
    if init.x.action_counts() != game.action_counts() {
        return Err(Error::contract(format!(
            "initial state shaped {:?}, game has action counts {:?}",
            init.x.action_counts(),
            game.action_counts()
        )));
    }
    // Re-derive the strategies from the Q-values at the configured
    // exploration rates: catches states initialized for different
    // temperatures.
    for (k, (qk, &t)) in init.q.iter().zip(config.temperatures.iter()).enumerate() {
        let derived = boltzmann(qk, t)?;
        let drift = derived
            .iter()
            .zip(init.x.part(k).iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if drift > 1e-12 {
            return Err(Error::contract(format!(
                "agent {k}: state strategies drift {drift:.2e} from the Boltzmann map of its Q-values"
            )));
        }
    }

    let mut q = init.q.clone();
    let mut parts: Vec<Vec<f64>> = init.x.parts().to_vec();
    let mut rewards: Vec<Vec<f64>> = game
        .action_counts()
        .iter()
        .map(|&m| vec![0.0; m])
        .collect();
    let mut states = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        step_in_place(game, config, &mut q, &mut parts, &mut rewards);
        if q.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                message: "Q-values left the finite range".to_string(),
                step,
            });
        }
        states.push(JointStrategy::new_unchecked(parts.clone()));
    }
    Ok(Trajectory {
        initial: init.x.clone(),
        states,
    })
}

/// The continuous-time learning field at an interior point. Each
/// agent's component is tangent to its simplex: the coordinates of
/// `dx_k/dt` sum to zero.
pub fn qld_vector_field(
    game: &PolymatrixGame,
    x: &JointStrategy,
    temperatures: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if x.action_counts() != game.action_counts() {
        return Err(Error::contract(format!(
            "strategy shaped {:?}, game has action counts {:?}",
            x.action_counts(),
            game.action_counts()
        )));
    }
    if temperatures.len() != game.agents() {
        return Err(Error::contract(format!(
            "{} exploration rates for {} agents",
            temperatures.len(),
            game.agents()
        )));
    }
    if temperatures.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("exploration rates must be positive and finite"));
    }
    if x.min_entry() <= BOUNDARY_FLOOR {
        return Err(Error::domain(
            "vector field undefined on the simplex boundary",
        ));
    }
    let mut rewards: Vec<Vec<f64>> = game
        .action_counts()
        .iter()
        .map(|&m| vec![0.0; m])
        .collect();
    let mut out = rewards.clone();
    field_into(game, x.parts(), temperatures, &mut rewards, &mut out);
    Ok(out)
}

fn field_into(
    game: &PolymatrixGame,
    parts: &[Vec<f64>],
    temperatures: &[f64],
    rewards: &mut [Vec<f64>],
    out: &mut [Vec<f64>],
) {
    game.rewards_into(parts, rewards);
    for (k, part) in parts.iter().enumerate() {
        let r = &rewards[k];
        let mut mean_reward = 0.0;
        let mut entropy_sum = 0.0;
        for (&xi, &ri) in part.iter().zip(r.iter()) {
            mean_reward += xi * ri;
            entropy_sum += xi * xi.ln();
        }
        let t = temperatures[k];
        for (i, o) in out[k].iter_mut().enumerate() {
            *o = part[i] * (r[i] - mean_reward + t * (entropy_sum - part[i].ln()));
        }
    }
}

/// Clips every coordinate to at least [`STRATEGY_FLOOR`] and
/// renormalizes each agent's part to sum to one.
fn project(parts: &mut [Vec<f64>]) {
    for part in parts.iter_mut() {
        let mut sum = 0.0;
        for v in part.iter_mut() {
            if *v < STRATEGY_FLOOR {
                *v = STRATEGY_FLOOR;
            }
            sum += *v;
        }
        for v in part.iter_mut() {
            *v /= sum;
        }
    }
}

/// Integrates the continuous field with fixed-step RK4 for
/// `config.steps` steps of size `config.dt`, projecting every stage
/// point and every accepted step back into the (floored) simplex.
pub fn integrate_qld(
    game: &PolymatrixGame,
    config: &DynamicsConfig,
    x0: &JointStrategy,
) -> Result<Trajectory> {
    config.validate(game.agents())?;
    if x0.action_counts() != game.action_counts() {
        return Err(Error::contract(format!(
            "initial strategy shaped {:?}, game has action counts {:?}",
            x0.action_counts(),
            game.action_counts()
        )));
    }
    if x0.min_entry() <= 0.0 {
        return Err(Error::domain("initial strategy must be interior"));
    }
    let counts = game.action_counts().to_vec();
    let zeros = || -> Vec<Vec<f64>> { counts.iter().map(|&m| vec![0.0; m]).collect() };
    let mut parts: Vec<Vec<f64>> = x0.parts().to_vec();
    project(&mut parts);
    let mut rewards = zeros();
    let (mut k1, mut k2, mut k3, mut k4, mut stage) =
        (zeros(), zeros(), zeros(), zeros(), zeros());
    let temps = &config.temperatures;
    let dt = config.dt;
    let mut states = Vec::with_capacity(config.steps);

    let blend = |base: &[Vec<f64>], dir: &[Vec<f64>], h: f64, out: &mut [Vec<f64>]| {
        for (k, ok) in out.iter_mut().enumerate() {
            for (i, o) in ok.iter_mut().enumerate() {
                *o = base[k][i] + h * dir[k][i];
            }
        }
    };

    for step in 1..=config.steps {
        field_into(game, &parts, temps, &mut rewards, &mut k1);
        blend(&parts, &k1, dt / 2.0, &mut stage);
        project(&mut stage);
        field_into(game, &stage, temps, &mut rewards, &mut k2);
        blend(&parts, &k2, dt / 2.0, &mut stage);
        project(&mut stage);
        field_into(game, &stage, temps, &mut rewards, &mut k3);
        blend(&parts, &k3, dt, &mut stage);
        project(&mut stage);
        field_into(game, &stage, temps, &mut rewards, &mut k4);
        for (k, pk) in parts.iter_mut().enumerate() {
            for (i, p) in pk.iter_mut().enumerate() {
                *p += dt / 6.0 * (k1[k][i] + 2.0 * k2[k][i] + 2.0 * k3[k][i] + k4[k][i]);
            }
        }
        if parts.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                message: "ODE step produced non-finite strategies".to_string(),
                step,
            });
        }
        project(&mut parts);
        states.push(JointStrategy::new_unchecked(parts.clone()));
    }
    Ok(Trajectory {
        initial: x0.clone(),
        states,
    })
}

/// Verdict of the tail-window analysis of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Mean over coordinates of the per-coordinate variance across the
    /// analysis window.
    pub mean_variance: f64,
    /// Worst coordinatewise `(max - min) / max` across the window.
    pub relative_difference: f64,
    /// Per agent: the largest absolute range `max - min` any of its
    /// coordinates shows across the window.
    pub per_agent_max_abs_variation: Vec<f64>,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Analyzes the last `tail` snapshots of a trajectory. The run counts
/// as converged when the mean component variance stays below
/// `var_threshold` and the worst componentwise relative difference
/// below `rel_threshold`; coordinates that are identically zero across
/// the window contribute zero relative difference.
pub fn assess_convergence(
    traj: &Trajectory,
    tail: usize,
    var_threshold: f64,
    rel_threshold: f64,
) -> Result<ConvergenceReport> {
    if !(var_threshold.is_finite() && var_threshold > 0.0)
        || !(rel_threshold.is_finite() && rel_threshold > 0.0)
    {
        return Err(Error::invalid("convergence thresholds must be positive"));
    }
    let window = traj.tail(tail)?;
    let counts = traj.initial.action_counts();
    let agents = counts.len();
    let inv_len = 1.0 / window.len() as f64;

    let mut variance_sum = 0.0;
    let mut coords = 0usize;
    let mut relative_difference: f64 = 0.0;
    let mut per_agent = vec![0.0f64; agents];

    for k in 0..agents {
        for i in 0..counts[k] {
            let series = window.iter().map(|s| s.part(k)[i]);
            // Shift by the first sample so a constant series has
            // variance exactly zero instead of a cancellation residue.
            let origin = window[0].part(k)[i];
            let shifted = series.clone().map(|v| v - origin);
            let mean: f64 = shifted.clone().sum::<f64>() * inv_len;
            let var: f64 = shifted
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                * inv_len;
            let max = series.clone().fold(f64::NEG_INFINITY, f64::max);
            let min = series.fold(f64::INFINITY, f64::min);
            variance_sum += var;
            coords += 1;
            let range = max - min;
            if max > 0.0 {
                relative_difference = relative_difference.max(range / max);
            }
            per_agent[k] = per_agent[k].max(range);
        }
    }
    let mean_variance = variance_sum / coords as f64;
    Ok(ConvergenceReport {
        converged: mean_variance < var_threshold && relative_difference < rel_threshold,
        mean_variance,
        relative_difference,
        per_agent_max_abs_variation: per_agent,
    })
}
