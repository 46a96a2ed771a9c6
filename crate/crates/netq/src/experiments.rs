//! Seeded batch experiments over game/network/temperature grids.
//!
//! Three experiment families are provided:
//!
//! * **Heatmaps** ([`run_heatmap`]): for every `(N, p[, q], T)` cell,
//!   sample `runs_per_cell` independent (graph, payoff orientation,
//!   initial condition) triples, run the discrete dynamics, and record
//!   the proportion of runs that fail the convergence test.
//! * **Boundary curves** ([`run_boundary`]): per `(N, p[, q])`, scan an
//!   ascending temperature grid and report the first `T` at which every
//!   run converges.
//! * **Community histograms** ([`run_histogram`]): on a stochastic
//!   block network with per-community edge densities, pool each agent's
//!   tail strategy variation by community across many simulations.
//!
//! Every result is a pure function of its config: cell seeds are
//! derived by hashing the cell indices, run index, and base seed, so
//! re-running a config reproduces outputs byte for byte regardless of
//! worker-pool scheduling. Runs whose Q-values overflow count as
//! diverged (that is the failure mode being measured), and in
//! histograms such runs contribute the maximal variation of 1.

use crate::dynamics::{
    assess_convergence, run_discrete, DynamicsConfig, QState, DEFAULT_DT, DEFAULT_LEARNING_RATE,
    DEFAULT_REL_THRESHOLD, DEFAULT_STEPS, DEFAULT_TAIL, DEFAULT_VAR_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::game::GameFamily;
use crate::graph::{er_bound, sb_bound, ErParams, NetworkModel, SbParams};
use crate::seed::derive_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Discrete-dynamics parameters shared by every run of an experiment;
/// the per-cell temperature is supplied by the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSettings {
    pub learning_rate: f64,
    pub steps: usize,
    pub tail: usize,
    pub var_threshold: f64,
    pub rel_threshold: f64,
}

impl Default for DynamicsSettings {
    fn default() -> Self {
        DynamicsSettings {
            learning_rate: DEFAULT_LEARNING_RATE,
            steps: DEFAULT_STEPS,
            tail: DEFAULT_TAIL,
            var_threshold: DEFAULT_VAR_THRESHOLD,
            rel_threshold: DEFAULT_REL_THRESHOLD,
        }
    }
}

impl DynamicsSettings {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return Err(Error::invalid("learning rate must lie in (0, 1)"));
        }
        if self.steps == 0 || self.tail == 0 || self.tail > self.steps {
            return Err(Error::invalid(format!(
                "need 1 <= tail ({}) <= steps ({})",
                self.tail, self.steps
            )));
        }
        if !(self.var_threshold > 0.0) || !(self.rel_threshold > 0.0) {
            return Err(Error::invalid("convergence thresholds must be positive"));
        }
        Ok(())
    }

    fn to_config(&self, agents: usize, temperature: f64) -> DynamicsConfig {
        DynamicsConfig {
            temperatures: vec![temperature; agents],
            learning_rates: vec![self.learning_rate; agents],
            steps: self.steps,
            tail: self.tail,
            dt: DEFAULT_DT,
        }
    }
}

/// Which random-network axis a sweep walks: plain G(n, p), or a
/// stochastic block model with fixed community size where `p` plays the
/// within-community role and `q_values` adds a between-community axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SweepNetwork {
    Er,
    Sb {
        community_size: usize,
        q_values: Vec<f64>,
    },
}

/// Full description of a heatmap or boundary experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: GameFamily,
    pub network: SweepNetwork,
    pub t_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub n_values: Vec<usize>,
    pub runs_per_cell: usize,
    pub dynamics: DynamicsSettings,
    pub base_seed: u64,
}

/// 22 equidistant exploration rates on `[0.05, 4.25]`.
pub fn default_t_grid() -> Vec<f64> {
    (0..22).map(|i| 0.05 + 0.2 * i as f64).collect()
}

/// 5 equidistant edge probabilities on `[0.05, 0.25]`.
pub fn default_p_grid() -> Vec<f64> {
    (0..5).map(|i| 0.05 + 0.05 * i as f64).collect()
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() || self.p_grid.is_empty() || self.n_values.is_empty() {
            return Err(Error::invalid("sweep grids must be non-empty"));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("exploration grid entries must be positive"));
        }
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("edge probabilities must lie in [0, 1]"));
        }
        if self.n_values.iter().any(|&n| n == 0) {
            return Err(Error::invalid("agent counts must be positive"));
        }
        if self.runs_per_cell == 0 {
            return Err(Error::invalid("runs_per_cell must be at least 1"));
        }
        if let SweepNetwork::Sb {
            community_size,
            q_values,
        } = &self.network
        {
            if *community_size == 0 {
                return Err(Error::invalid("community size must be positive"));
            }
            if q_values.is_empty() || q_values.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(Error::invalid(
                    "between-community probabilities must be a non-empty list in [0, 1]",
                ));
            }
            for &n in &self.n_values {
                if n % community_size != 0 {
                    return Err(Error::invalid(format!(
                        "agent count {n} is not a multiple of the community size {community_size}"
                    )));
                }
            }
        }
        self.dynamics.validate()
    }

    /// The q-axis of the sweep: a single unconstrained entry for ER.
    fn q_axis(&self) -> Vec<Option<f64>> {
        match &self.network {
            SweepNetwork::Er => vec![None],
            SweepNetwork::Sb { q_values, .. } => q_values.iter().copied().map(Some).collect(),
        }
    }

    fn model_for(&self, n: usize, p: f64, q: Option<f64>) -> NetworkModel {
        match &self.network {
            SweepNetwork::Er => NetworkModel::Er(ErParams { n, p }),
            SweepNetwork::Sb { community_size, .. } => NetworkModel::Sb(SbParams::uniform(
                n / community_size,
                *community_size,
                p,
                q.expect("sb cells always carry q"),
            )),
        }
    }
}

/// Runs one (graph, game, initialization) triple and reports whether it
/// diverged. Q-value overflow counts as divergence; anything else
/// propagates as a real error.
fn execute_run(
    family: &GameFamily,
    model: &NetworkModel,
    temperature: f64,
    settings: &DynamicsSettings,
    run_seed: u64,
) -> Result<bool> {
    let graph = model.sample(derive_seed(run_seed, &[0]))?;
    let game = family.build(&graph, derive_seed(run_seed, &[1]))?;
    let config = settings.to_config(game.agents(), temperature);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, &[2]));
    let init = QState::random(game.action_counts(), &config.temperatures, &mut rng)?;
    match run_discrete(&game, &config, &init) {
        Ok(traj) => {
            let report = assess_convergence(
                &traj,
                settings.tail,
                settings.var_threshold,
                settings.rel_threshold,
            )?;
            Ok(!report.converged)
        }
        Err(Error::Numerical { .. }) => Ok(true),
        Err(other) => Err(other),
    }
}

/// One aggregated grid cell of a heatmap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub n: usize,
    pub p: f64,
    /// Between-community probability; absent for ER sweeps.
    pub q: Option<f64>,
    pub t: f64,
    pub runs: usize,
    pub diverged: usize,
    pub proportion: f64,
    /// Per-run seeds, in run order.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapResult {
    pub cells: Vec<HeatmapCell>,
}

impl HeatmapResult {
    /// `N,p,q,T,runs,diverged,proportion` with an empty `q` column for
    /// ER cells; rows follow grid order (N outermost, T innermost).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("N,p,q,T,runs,diverged,proportion\n");
        for c in &self.cells {
            let q = c.q.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{q},{},{},{},{}",
                c.n, c.p, c.t, c.runs, c.diverged, c.proportion
            );
        }
        out
    }
}

/// Divergence proportions over the full `(N, p[, q], T)` grid.
pub fn run_heatmap(config: &SweepConfig) -> Result<HeatmapResult> {
    config.validate()?;
    let q_axis = config.q_axis();
    let mut cell_specs = Vec::new();
    for (ni, &n) in config.n_values.iter().enumerate() {
        for (pi, &p) in config.p_grid.iter().enumerate() {
            for (qi, &q) in q_axis.iter().enumerate() {
                for (ti, &t) in config.t_grid.iter().enumerate() {
                    cell_specs.push((ni, n, pi, p, qi, q, ti, t));
                }
            }
        }
    }
    let cells = cell_specs
        .into_par_iter()
        .map(|(ni, n, pi, p, qi, q, ti, t)| -> Result<HeatmapCell> {
            let model = config.model_for(n, p, q);
            let seeds: Vec<u64> = (0..config.runs_per_cell)
                .map(|run| {
                    derive_seed(
                        config.base_seed,
                        &[ni as u64, pi as u64, qi as u64, ti as u64, run as u64],
                    )
                })
                .collect();
            let mut diverged = 0;
            for &seed in &seeds {
                if execute_run(&config.family, &model, t, &config.dynamics, seed)? {
                    diverged += 1;
                }
            }
            Ok(HeatmapCell {
                n,
                p,
                q,
                t,
                runs: config.runs_per_cell,
                diverged,
                proportion: diverged as f64 / config.runs_per_cell as f64,
                seeds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeatmapResult { cells })
}

/// Convergence boundary for one `(N, p[, q])` combination: the first
/// grid temperature at which every run converged, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub n: usize,
    pub p: f64,
    pub q: Option<f64>,
    pub min_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResult {
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryResult {
    /// `N,p,q,min_T`; both `q` and `min_T` may be empty.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("N,p,q,min_T\n");
        for pt in &self.points {
            let q = pt.q.map(|v| v.to_string()).unwrap_or_default();
            let t = pt.min_t.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{q},{t}", pt.n, pt.p);
        }
        out
    }
}

/// Scans the ascending temperature grid per `(N, p[, q])` and records
/// the first all-runs-converged temperature. The scan stops early
/// within a temperature as soon as one run diverges, and within a
/// combination as soon as a boundary is found; neither shortcut
/// changes the result.
pub fn run_boundary(config: &SweepConfig) -> Result<BoundaryResult> {
    config.validate()?;
    if config.t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "boundary scans need a strictly ascending exploration grid",
        ));
    }
    let q_axis = config.q_axis();
    let mut combos = Vec::new();
    for (ni, &n) in config.n_values.iter().enumerate() {
        for (pi, &p) in config.p_grid.iter().enumerate() {
            for (qi, &q) in q_axis.iter().enumerate() {
                combos.push((ni, n, pi, p, qi, q));
            }
        }
    }
    let points = combos
        .into_par_iter()
        .map(|(ni, n, pi, p, qi, q)| -> Result<BoundaryPoint> {
            let model = config.model_for(n, p, q);
            let mut min_t = None;
            for (ti, &t) in config.t_grid.iter().enumerate() {
                let mut all_converged = true;
                for run in 0..config.runs_per_cell {
                    let seed = derive_seed(
                        config.base_seed,
                        &[ni as u64, pi as u64, qi as u64, ti as u64, run as u64],
                    );
                    if execute_run(&config.family, &model, t, &config.dynamics, seed)? {
                        all_converged = false;
                        break;
                    }
                }
                if all_converged {
                    min_t = Some(t);
                    break;
                }
            }
            Ok(BoundaryPoint { n, p, q, min_t })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryResult { points })
}

/// Description of a community-variation histogram experiment on a
/// stochastic block network: one within-community probability per
/// community, a shared between-community probability, and one
/// temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub family: GameFamily,
    pub p_communities: Vec<f64>,
    pub community_size: usize,
    pub q: f64,
    pub t: f64,
    pub simulations: usize,
    pub dynamics: DynamicsSettings,
    pub base_seed: u64,
}

impl HistogramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_communities.is_empty() {
            return Err(Error::invalid("need at least one community"));
        }
        if self
            .p_communities
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
            || !(0.0..=1.0).contains(&self.q)
        {
            return Err(Error::invalid("edge probabilities must lie in [0, 1]"));
        }
        if self.community_size == 0 {
            return Err(Error::invalid("community size must be positive"));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::invalid("exploration rate must be positive"));
        }
        if self.simulations == 0 {
            return Err(Error::invalid("need at least one simulation"));
        }
        self.dynamics.validate()
    }

    fn params(&self) -> SbParams {
        SbParams {
            community_sizes: vec![self.community_size; self.p_communities.len()],
            p_within: self.p_communities.clone(),
            q_between: self.q,
        }
    }
}

/// One pooled observation: the largest absolute strategy variation one
/// agent showed over the analysis window of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub community: usize,
    pub p_within: f64,
    pub simulation: usize,
    pub agent: usize,
    pub variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    pub rows: Vec<HistogramRow>,
}

impl HistogramResult {
    /// `community,p_c,simulation,agent,variation`, one row per
    /// (community, simulation, agent).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("community,p_c,simulation,agent,variation\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.community, r.p_within, r.simulation, r.agent, r.variation
            );
        }
        out
    }

    /// All pooled variation values of one community.
    pub fn values_for_community(&self, community: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.community == community)
            .map(|r| r.variation)
            .collect()
    }

    /// Median pooled variation of one community.
    pub fn median_for_community(&self, community: usize) -> Option<f64> {
        median(&self.values_for_community(community))
    }
}

/// Midpoint median; `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("variation values are ordered"));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    })
}

/// Pools per-agent tail variations by community across independent
/// simulations. Overflowed runs contribute the maximal variation 1 for
/// every agent.
pub fn run_histogram(config: &HistogramConfig) -> Result<HistogramResult> {
    config.validate()?;
    let params = config.params();
    let model = NetworkModel::Sb(params.clone());
    let rows = (0..config.simulations)
        .into_par_iter()
        .map(|sim| -> Result<Vec<HistogramRow>> {
            let run_seed = derive_seed(config.base_seed, &[sim as u64]);
            let graph = model.sample(derive_seed(run_seed, &[0]))?;
            let game = config.family.build(&graph, derive_seed(run_seed, &[1]))?;
            let dyn_config = config.dynamics.to_config(game.agents(), config.t);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, &[2]));
            let init = QState::random(game.action_counts(), &dyn_config.temperatures, &mut rng)?;
            let variations: Vec<f64> = match run_discrete(&game, &dyn_config, &init) {
                Ok(traj) => {
                    assess_convergence(
                        &traj,
                        config.dynamics.tail,
                        config.dynamics.var_threshold,
                        config.dynamics.rel_threshold,
                    )?
                    .per_agent_max_abs_variation
                }
                Err(Error::Numerical { .. }) => vec![1.0; game.agents()],
                Err(other) => return Err(other),
            };
            Ok(variations
                .into_iter()
                .enumerate()
                .map(|(agent, variation)| {
                    let community = params.community_of(agent);
                    HistogramRow {
                        community,
                        p_within: config.p_communities[community],
                        simulation: sim,
                        agent,
                        variation,
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HistogramResult {
        rows: rows.into_iter().flatten().collect(),
    })
}

/// One joined row of empirical boundary versus predicted threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    pub n: usize,
    pub p: f64,
    pub q: Option<f64>,
    pub empirical_min_t: Option<f64>,
    /// Coupling-scaled threshold `delta * rho-bound`.
    pub threshold: f64,
    /// The bare spectral bound, without the coupling factor.
    pub literal_threshold: f64,
    /// `empirical / threshold` where both are meaningful.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryComparison {
    pub rows: Vec<TheoryRow>,
}

impl TheoryComparison {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("N,p,q,empirical_min_T,threshold,literal_threshold,ratio\n");
        for r in &self.rows {
            let q = r.q.map(|v| v.to_string()).unwrap_or_default();
            let e = r.empirical_min_t.map(|v| v.to_string()).unwrap_or_default();
            let ratio = r.ratio.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{q},{e},{},{},{ratio}",
                r.n, r.p, r.threshold, r.literal_threshold
            );
        }
        out
    }
}

/// Joins a boundary scan against the closed-form thresholds of the
/// sweep's game family, at confidence `1 - epsilon` for the sampled
/// network models.
pub fn compare_to_theory(
    config: &SweepConfig,
    boundary: &BoundaryResult,
    epsilon: f64,
) -> Result<TheoryComparison> {
    let delta = config.family.delta_identical_interests()?;
    let rows = boundary
        .points
        .iter()
        .map(|pt| -> Result<TheoryRow> {
            let bound = match (&config.network, pt.q) {
                (SweepNetwork::Er, _) => er_bound(pt.n, pt.p, epsilon)?,
                (SweepNetwork::Sb { community_size, .. }, Some(q)) => sb_bound(
                    &SbParams::uniform(pt.n / community_size, *community_size, pt.p, q),
                    epsilon,
                )?,
                (SweepNetwork::Sb { .. }, None) => {
                    return Err(Error::contract(
                        "stochastic block boundary point without a q value",
                    ))
                }
            };
            let threshold = delta * bound.value;
            let ratio = match pt.min_t {
                Some(t) if threshold > 0.0 => Some(t / threshold),
                _ => None,
            };
            Ok(TheoryRow {
                n: pt.n,
                p: pt.p,
                q: pt.q,
                empirical_min_t: pt.min_t,
                threshold,
                literal_threshold: bound.value,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryComparison { rows })
}

/// Two-sample Kolmogorov–Smirnov test result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    /// Largest absolute gap between the two empirical CDFs.
    pub statistic: f64,
    /// Asymptotic two-sided p-value (Kolmogorov series with the
    /// standard small-sample correction); approximate for small
    /// samples.
    pub p_value: f64,
}

/// Two-sample KS test with the asymptotic p-value
/// `Q((sqrt(en) + 0.12 + 0.11/sqrt(en)) * D)`, `en = nm/(n+m)`, where
/// `Q` is the Kolmogorov survival series.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<KsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("KS test needs non-empty samples"));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("KS test needs finite samples"));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("finite values compare"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("finite values compare"));
    let (n, m) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut statistic = 0.0f64;
    while i < n && j < m {
        let xa = sa[i];
        let xb = sb[j];
        let cut = xa.min(xb);
        while i < n && sa[i] <= cut {
            i += 1;
        }
        while j < m && sb[j] <= cut {
            j += 1;
        }
        let gap = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        statistic = statistic.max(gap);
    }
    let en = (n * m) as f64 / (n + m) as f64;
    let lambda = (en.sqrt() + 0.12 + 0.11 / en.sqrt()) * statistic;
    Ok(KsTest {
        statistic,
        p_value: kolmogorov_survival(lambda),
    })
}

fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-9 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
