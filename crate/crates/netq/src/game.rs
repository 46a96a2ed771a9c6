//! Network polymatrix games.
//!
//! Each undirected edge `(k, l)` of an interaction graph carries a pair
//! of payoff matrices: `A^{kl}` paying agent `k` against `l`'s mixed
//! strategy and `A^{lk}` paying `l` against `k`. An agent's reward for
//! pure action `i` is the sum over its neighbors of the matching matrix
//! row applied to the neighbor's strategy,
//!
//! ```text
//!   r_{ki}(x_{-k}) = sum_{l : (k,l) in E} sum_j [A^{kl}]_{ij} x_{lj},
//! ```
//!
//! and its payoff is `<x_k, r_k(x)>`.
//!
//! Families provided: the Shapley cycling bimatrix (`beta` in (0, 1)),
//! the Sato rock-paper-scissors bimatrix with per-side internal payoffs
//! `eps_x`, `eps_y`, randomly generated Conflict games, and arbitrary
//! custom bimatrix pairs. Bimatrix families are assigned to each edge
//! with a fair coin choosing which endpoint receives `A`.
//!
//! The coupling strength of a game is measured by
//! `delta = max_{(k,l) in E} || A^{kl} + (A^{lk})^T ||_2`; it is zero
//! exactly when every edge is a pairwise zero-sum interaction, and it
//! scales the spectral-radius term in the convergence threshold.

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::linalg;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Tolerance for accepting that a strategy vector sums to one.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// Dense payoff matrix with finite entries; `rows` are the owner's
/// actions, `cols` the opponent's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("payoff matrix must be non-empty"));
        }
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "payoff matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("payoff matrix entries must be finite"));
        }
        Ok(PayoffMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::contract("ragged payoff matrix rows"));
        }
        PayoffMatrix::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// `-M^T`; pairing any square `A` with `A.neg_transpose()` yields a
    /// pairwise zero-sum edge.
    pub fn neg_transpose(&self) -> PayoffMatrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = -self.get(i, j);
            }
        }
        PayoffMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Accumulates `M * x` into `out` (no allocation; hot path).
    fn accumulate_mul(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            out[i] += acc;
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for PayoffMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        PayoffMatrix::from_rows(&rows)
    }
}

impl From<PayoffMatrix> for Vec<Vec<f64>> {
    fn from(m: PayoffMatrix) -> Self {
        (0..m.rows)
            .map(|i| m.data[i * m.cols..(i + 1) * m.cols].to_vec())
            .collect()
    }
}

/// Concatenation of per-agent mixed strategies, one simplex vector per
/// agent. Entries are nonnegative and each part sums to one within
/// [`SIMPLEX_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct JointStrategy {
    parts: Vec<Vec<f64>>,
}

impl JointStrategy {
    pub fn new(parts: Vec<Vec<f64>>) -> Result<Self> {
        for (k, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(Error::invalid(format!("agent {k}: empty strategy")));
            }
            if part.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::invalid(format!(
                    "agent {k}: strategy entries must be finite and nonnegative"
                )));
            }
            let sum: f64 = part.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
                return Err(Error::invalid(format!(
                    "agent {k}: strategy sums to {sum}, expected 1"
                )));
            }
        }
        Ok(JointStrategy { parts })
    }

    pub(crate) fn new_unchecked(parts: Vec<Vec<f64>>) -> Self {
        debug_assert!(parts.iter().all(|p| {
            !p.is_empty()
                && p.iter().all(|&v| v.is_finite() && v >= 0.0)
                && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9
        }));
        JointStrategy { parts }
    }

    /// Uniform strategy for each agent.
    pub fn uniform(action_counts: &[usize]) -> Self {
        JointStrategy {
            parts: action_counts
                .iter()
                .map(|&m| vec![1.0 / m as f64; m])
                .collect(),
        }
    }

    /// Draws each agent's strategy uniformly from its simplex
    /// (flat Dirichlet) via normalized exponentials; all draws land in
    /// the interior almost surely.
    pub fn random_interior<R: Rng + ?Sized>(action_counts: &[usize], rng: &mut R) -> Self {
        let parts = action_counts
            .iter()
            .map(|&m| {
                let mut e: Vec<f64> = (0..m)
                    .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                    .collect();
                let sum: f64 = e.iter().sum();
                for v in &mut e {
                    *v /= sum;
                }
                e
            })
            .collect();
        JointStrategy { parts }
    }

    pub fn agents(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, k: usize) -> &[f64] {
        &self.parts[k]
    }

    pub fn parts(&self) -> &[Vec<f64>] {
        &self.parts
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.len()).collect()
    }

    /// Total number of strategy coordinates across agents.
    pub fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    /// Concatenates all parts into one vector (agent-major order).
    pub fn flatten(&self) -> Vec<f64> {
        self.parts.concat()
    }

    /// Inverse of [`flatten`] for the given action counts.
    ///
    /// [`flatten`]: JointStrategy::flatten
    pub fn from_flat(action_counts: &[usize], flat: &[f64]) -> Result<Self> {
        if flat.len() != action_counts.iter().sum::<usize>() {
            return Err(Error::contract(format!(
                "flat strategy has {} coordinates, expected {}",
                flat.len(),
                action_counts.iter().sum::<usize>()
            )));
        }
        let mut parts = Vec::with_capacity(action_counts.len());
        let mut offset = 0;
        for &m in action_counts {
            parts.push(flat[offset..offset + m].to_vec());
            offset += m;
        }
        JointStrategy::new(parts)
    }

    /// Largest absolute componentwise difference across all agents.
    pub fn max_abs_diff(&self, other: &JointStrategy) -> f64 {
        debug_assert_eq!(self.action_counts(), other.action_counts());
        let mut worst: f64 = 0.0;
        for (a, b) in self.parts.iter().zip(other.parts.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    /// Smallest strategy coordinate; positive exactly when the joint
    /// strategy is interior.
    pub fn min_entry(&self) -> f64 {
        self.parts
            .iter()
            .flat_map(|p| p.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<Vec<f64>>> for JointStrategy {
    type Error = Error;

    fn try_from(parts: Vec<Vec<f64>>) -> Result<Self> {
        JointStrategy::new(parts)
    }
}

impl From<JointStrategy> for Vec<Vec<f64>> {
    fn from(x: JointStrategy) -> Self {
        x.parts
    }
}

/// Provenance record carried by generated games so a serialized game is
/// reproducible without its generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMeta {
    pub family: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
}

/// A polymatrix game: an interaction graph plus one payoff matrix per
/// directed half-edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame {
    graph: AdjacencyMatrix,
    action_counts: Vec<usize>,
    payoffs: BTreeMap<(usize, usize), PayoffMatrix>,
    meta: Option<GameMeta>,
}

impl PolymatrixGame {
    /// Assembles and validates a game: every undirected edge must carry
    /// payoff matrices for both orientations with shapes matching the
    /// endpoints' action counts, and no off-edge matrices may appear.
    pub fn from_parts(
        graph: AdjacencyMatrix,
        action_counts: Vec<usize>,
        payoffs: BTreeMap<(usize, usize), PayoffMatrix>,
        meta: Option<GameMeta>,
    ) -> Result<Self> {
        if action_counts.len() != graph.n() {
            return Err(Error::contract(format!(
                "{} agents in graph but {} action counts",
                graph.n(),
                action_counts.len()
            )));
        }
        if action_counts.iter().any(|&m| m == 0) {
            return Err(Error::invalid("every agent needs at least one action"));
        }
        for (k, l) in graph.edges() {
            for (from, to) in [(k, l), (l, k)] {
                let m = payoffs.get(&(from, to)).ok_or_else(|| {
                    Error::contract(format!("edge ({k}, {l}): missing payoff matrix {from}->{to}"))
                })?;
                if m.rows() != action_counts[from] || m.cols() != action_counts[to] {
                    return Err(Error::contract(format!(
                        "payoff matrix {from}->{to} is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        action_counts[from],
                        action_counts[to]
                    )));
                }
            }
        }
        for &(k, l) in payoffs.keys() {
            if !graph.has_edge(k, l) {
                return Err(Error::contract(format!(
                    "payoff matrix {k}->{l} has no corresponding edge"
                )));
            }
        }
        Ok(PolymatrixGame {
            graph,
            action_counts,
            payoffs,
            meta,
        })
    }

    pub fn graph(&self) -> &AdjacencyMatrix {
        &self.graph
    }

    pub fn agents(&self) -> usize {
        self.graph.n()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn meta(&self) -> Option<&GameMeta> {
        self.meta.as_ref()
    }

    /// Payoff matrix paying `from` against `to`, if the edge exists.
    pub fn payoff_matrix(&self, from: usize, to: usize) -> Option<&PayoffMatrix> {
        self.payoffs.get(&(from, to))
    }

    /// All directed half-edges `(from, to, matrix)` in deterministic
    /// order.
    pub fn half_edges(&self) -> impl Iterator<Item = (usize, usize, &PayoffMatrix)> {
        self.payoffs.iter().map(|(&(k, l), m)| (k, l, m))
    }

    fn check_strategy(&self, x: &JointStrategy) -> Result<()> {
        if x.action_counts() != self.action_counts {
            return Err(Error::contract(format!(
                "strategy shape {:?} does not match game action counts {:?}",
                x.action_counts(),
                self.action_counts
            )));
        }
        Ok(())
    }

    /// Expected reward of each of agent `k`'s pure actions against the
    /// others' mixed strategies. Isolated agents receive the zero
    /// vector.
    pub fn reward(&self, k: usize, x: &JointStrategy) -> Result<Vec<f64>> {
        self.check_strategy(x)?;
        if k >= self.agents() {
            return Err(Error::contract(format!("agent {k} out of range")));
        }
        let mut out = vec![0.0; self.action_counts[k]];
        for l in 0..self.agents() {
            if let Some(m) = self.payoffs.get(&(k, l)) {
                m.accumulate_mul(x.part(l), &mut out);
            }
        }
        Ok(out)
    }

    /// Rewards for all agents at once (single strategy validation).
    pub fn rewards(&self, x: &JointStrategy) -> Result<Vec<Vec<f64>>> {
        self.check_strategy(x)?;
        let mut out: Vec<Vec<f64>> = self
            .action_counts
            .iter()
            .map(|&m| vec![0.0; m])
            .collect();
        self.rewards_into(x.parts(), &mut out);
        Ok(out)
    }

    /// Hot-path reward accumulation: `out` parts must be zeroed by the
    /// caller unless overwriting is intended.
    pub(crate) fn rewards_into(&self, parts: &[Vec<f64>], out: &mut [Vec<f64>]) {
        for part in out.iter_mut() {
            part.iter_mut().for_each(|v| *v = 0.0);
        }
        for (&(k, l), m) in self.payoffs.iter() {
            m.accumulate_mul(&parts[l], &mut out[k]);
        }
    }

    /// Expected payoff of agent `k`: the bilinear form
    /// `sum_l x_k^T A^{kl} x_l` computed directly (not via
    /// [`reward`], so the inner-product identity is testable).
    ///
    /// [`reward`]: PolymatrixGame::reward
    pub fn payoff(&self, k: usize, x: &JointStrategy) -> Result<f64> {
        self.check_strategy(x)?;
        if k >= self.agents() {
            return Err(Error::contract(format!("agent {k} out of range")));
        }
        let xk = x.part(k);
        let mut total = 0.0;
        for l in 0..self.agents() {
            if let Some(m) = self.payoffs.get(&(k, l)) {
                let xl = x.part(l);
                let mut acc = 0.0;
                for i in 0..m.rows() {
                    let mut row_acc = 0.0;
                    for j in 0..m.cols() {
                        row_acc += m.get(i, j) * xl[j];
                    }
                    acc += xk[i] * row_acc;
                }
                total += acc;
            }
        }
        Ok(total)
    }

    /// Coupling strength `max_{(k,l) in E} || A^{kl} + (A^{lk})^T ||_2`;
    /// zero for edgeless games and exactly zero for pairwise zero-sum
    /// games.
    pub fn delta_identical_interests(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, l) in self.graph.edges() {
            let a_kl = self.payoffs[&(k, l)].to_dmatrix();
            let a_lk = self.payoffs[&(l, k)].to_dmatrix();
            worst = worst.max(linalg::spectral_norm(&(a_kl + a_lk.transpose())));
        }
        worst
    }

    /// Serializes the game (graph edge list, per-half-edge matrices,
    /// metadata) as JSON. Floating-point entries survive the round trip
    /// bit-for-bit.
    pub fn to_json(&self) -> Result<String> {
        let doc = GameDocument {
            n: self.graph.n(),
            action_counts: self.action_counts.clone(),
            edges: self.graph.edges(),
            payoffs: self
                .payoffs
                .iter()
                .map(|(&(from, to), m)| HalfEdgePayoff {
                    from,
                    to,
                    matrix: m.clone(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses and validates the format produced by [`to_json`].
    ///
    /// [`to_json`]: PolymatrixGame::to_json
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GameDocument = serde_json::from_str(text)?;
        let graph = AdjacencyMatrix::from_edges(doc.n, &doc.edges)?;
        let payoffs = doc
            .payoffs
            .into_iter()
            .map(|h| ((h.from, h.to), h.matrix))
            .collect();
        PolymatrixGame::from_parts(graph, doc.action_counts, payoffs, doc.meta)
    }
}

#[derive(Serialize, Deserialize)]
struct GameDocument {
    n: usize,
    action_counts: Vec<usize>,
    edges: Vec<(usize, usize)>,
    payoffs: Vec<HalfEdgePayoff>,
    meta: Option<GameMeta>,
}

#[derive(Serialize, Deserialize)]
struct HalfEdgePayoff {
    from: usize,
    to: usize,
    matrix: PayoffMatrix,
}

/// Shapley's cycling bimatrix pair for `beta` in (0, 1):
/// `A = [[1,0,b],[b,1,0],[0,b,1]]`, `B = [[-b,1,0],[0,-b,1],[1,0,-b]]`.
pub fn make_shapley(beta: f64) -> Result<(PayoffMatrix, PayoffMatrix)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!(
            "shapley beta = {beta} outside (0, 1)"
        )));
    }
    let a = PayoffMatrix::new(
        3,
        3,
        vec![1.0, 0.0, beta, beta, 1.0, 0.0, 0.0, beta, 1.0],
    )?;
    let b = PayoffMatrix::new(
        3,
        3,
        vec![-beta, 1.0, 0.0, 0.0, -beta, 1.0, 1.0, 0.0, -beta],
    )?;
    Ok((a, b))
}

/// Sato's rock-paper-scissors bimatrix pair with internal payoffs
/// `eps_x`, `eps_y` on the diagonals. `A + B^T = (eps_x + eps_y) I`, so
/// the coupling strength is `|eps_x + eps_y|` and vanishes when the
/// internal payoffs cancel.
pub fn make_sato(eps_x: f64, eps_y: f64) -> Result<(PayoffMatrix, PayoffMatrix)> {
    if !eps_x.is_finite() || !eps_y.is_finite() {
        return Err(Error::invalid("sato internal payoffs must be finite"));
    }
    let a = PayoffMatrix::new(
        3,
        3,
        vec![eps_x, -1.0, 1.0, 1.0, eps_x, -1.0, -1.0, 1.0, eps_x],
    )?;
    let b = PayoffMatrix::new(
        3,
        3,
        vec![eps_y, -1.0, 1.0, 1.0, eps_y, -1.0, -1.0, 1.0, eps_y],
    )?;
    Ok((a, b))
}

/// Assigns a bimatrix pair `(A, B)` to every edge of `graph`: a fair
/// coin decides which endpoint receives `A`, the other receives `B`.
/// Edges are visited in sorted order so the seed fully determines the
/// orientation pattern.
pub fn assign_bimatrix(
    graph: &AdjacencyMatrix,
    a: &PayoffMatrix,
    b: &PayoffMatrix,
    seed: u64,
) -> Result<PolymatrixGame> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::invalid(format!(
            "bimatrix assignment needs square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let m = a.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut payoffs = BTreeMap::new();
    for (k, l) in graph.edges() {
        if rng.gen_bool(0.5) {
            payoffs.insert((k, l), a.clone());
            payoffs.insert((l, k), b.clone());
        } else {
            payoffs.insert((k, l), b.clone());
            payoffs.insert((l, k), a.clone());
        }
    }
    PolymatrixGame::from_parts(graph.clone(), vec![m; graph.n()], payoffs, None)
}

/// Intermediate draws of a Conflict game, kept separate so the
/// composition `A^{kl}_{ij} = v_k P^{kl}_{ij} - c^{kl}_i` can be
/// inverted and checked.
pub(crate) struct ConflictDraws {
    pub v: Vec<f64>,
    /// Success probabilities for the lower-indexed endpoint of each
    /// edge; the reverse orientation is `1 - P^T` by construction.
    pub p: BTreeMap<(usize, usize), PayoffMatrix>,
    /// Per-half-edge action cost vectors, indexed by the acting agent.
    pub c: BTreeMap<(usize, usize), Vec<f64>>,
}

pub(crate) fn draw_conflict(
    graph: &AdjacencyMatrix,
    action_counts: &[usize],
    seed: u64,
) -> Result<ConflictDraws> {
    if action_counts.len() != graph.n() {
        return Err(Error::contract(format!(
            "{} agents but {} action counts",
            graph.n(),
            action_counts.len()
        )));
    }
    if action_counts.iter().any(|&m| m == 0) {
        return Err(Error::invalid("every agent needs at least one action"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..graph.n()).map(|_| rng.gen::<f64>()).collect();
    let mut p = BTreeMap::new();
    let mut c = BTreeMap::new();
    for (k, l) in graph.edges() {
        let (nk, nl) = (action_counts[k], action_counts[l]);
        let entries: Vec<f64> = (0..nk * nl)
            .map(|_| rng.gen_range(-5.0..5.0))
            .collect();
        p.insert((k, l), PayoffMatrix::new(nk, nl, entries)?);
        c.insert((k, l), (0..nk).map(|_| rng.gen::<f64>()).collect());
        c.insert((l, k), (0..nl).map(|_| rng.gen::<f64>()).collect());
    }
    Ok(ConflictDraws { v, p, c })
}

/// Generates a Conflict game: on each edge the two agents contest an
/// outcome, with `P^{kl}_{ij}` the success weight of `k`'s action `i`
/// against `l`'s action `j` (and `P^{lk}_{ji} = 1 - P^{kl}_{ij}` for
/// the defender), `v_k` the value agent `k` places on success, and
/// `c^{kl}_i` the cost of deploying action `i` on that edge:
/// `A^{kl}_{ij} = v_k P^{kl}_{ij} - c^{kl}_i`.
pub fn make_conflict(
    graph: &AdjacencyMatrix,
    action_counts: &[usize],
    seed: u64,
) -> Result<PolymatrixGame> {
    let draws = draw_conflict(graph, action_counts, seed)?;
    let mut payoffs = BTreeMap::new();
    for (&(k, l), p_kl) in draws.p.iter() {
        let (nk, nl) = (p_kl.rows(), p_kl.cols());
        let c_kl = &draws.c[&(k, l)];
        let c_lk = &draws.c[&(l, k)];
        let mut fwd = vec![0.0; nk * nl];
        let mut rev = vec![0.0; nl * nk];
        for i in 0..nk {
            for j in 0..nl {
                let pij = p_kl.get(i, j);
                fwd[i * nl + j] = draws.v[k] * pij - c_kl[i];
                rev[j * nk + i] = draws.v[l] * (1.0 - pij) - c_lk[j];
            }
        }
        payoffs.insert((k, l), PayoffMatrix::new(nk, nl, fwd)?);
        payoffs.insert((l, k), PayoffMatrix::new(nl, nk, rev)?);
    }
    let meta = GameMeta {
        family: "conflict".to_string(),
        parameters: serde_json::json!({ "action_counts": action_counts }),
        seed: Some(seed),
    };
    PolymatrixGame::from_parts(
        graph.clone(),
        action_counts.to_vec(),
        payoffs,
        Some(meta),
    )
}

pub const SHAPLEY_DEFAULT_BETA: f64 = 0.2;
pub const SATO_DEFAULT_EPS_X: f64 = 0.5;
pub const SATO_DEFAULT_EPS_Y: f64 = -0.3;

fn default_beta() -> f64 {
    SHAPLEY_DEFAULT_BETA
}

fn default_eps_x() -> f64 {
    SATO_DEFAULT_EPS_X
}

fn default_eps_y() -> f64 {
    SATO_DEFAULT_EPS_Y
}

fn default_actions() -> usize {
    3
}

/// A named way of producing the payoff structure on a given graph.
/// Bimatrix families (everything except `Conflict`) share one `(A, B)`
/// pair across edges; `Conflict` draws fresh payoffs per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GameFamily {
    Shapley {
        #[serde(default = "default_beta")]
        beta: f64,
    },
    Sato {
        #[serde(default = "default_eps_x")]
        eps_x: f64,
        #[serde(default = "default_eps_y")]
        eps_y: f64,
    },
    Conflict {
        #[serde(default = "default_actions")]
        actions: usize,
    },
    Custom {
        a: PayoffMatrix,
        b: PayoffMatrix,
    },
}

impl GameFamily {
    pub fn sato_default() -> Self {
        GameFamily::Sato {
            eps_x: SATO_DEFAULT_EPS_X,
            eps_y: SATO_DEFAULT_EPS_Y,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            GameFamily::Shapley { .. } => "shapley",
            GameFamily::Sato { .. } => "sato",
            GameFamily::Conflict { .. } => "conflict",
            GameFamily::Custom { .. } => "custom",
        }
    }

    /// Number of actions every agent has under this family.
    pub fn action_count(&self) -> usize {
        match self {
            GameFamily::Shapley { .. } | GameFamily::Sato { .. } => 3,
            GameFamily::Conflict { actions } => *actions,
            GameFamily::Custom { a, .. } => a.rows(),
        }
    }

    /// The family's shared bimatrix pair; `Conflict` has none because
    /// its payoffs are drawn per edge.
    pub fn bimatrix(&self) -> Result<(PayoffMatrix, PayoffMatrix)> {
        match self {
            GameFamily::Shapley { beta } => make_shapley(*beta),
            GameFamily::Sato { eps_x, eps_y } => make_sato(*eps_x, *eps_y),
            GameFamily::Custom { a, b } => Ok((a.clone(), b.clone())),
            GameFamily::Conflict { .. } => Err(Error::invalid(
                "conflict games draw payoffs per edge and have no single bimatrix pair",
            )),
        }
    }

    /// Coupling strength `|| A + B^T ||_2` of the family's bimatrix
    /// pair; undefined for `Conflict`.
    pub fn delta_identical_interests(&self) -> Result<f64> {
        let (a, b) = self.bimatrix()?;
        Ok(linalg::spectral_norm(
            &(a.to_dmatrix() + b.to_dmatrix().transpose()),
        ))
    }

    /// Instantiates the family on a graph. The seed drives the per-edge
    /// orientation coin for bimatrix families and all payoff draws for
    /// `Conflict`.
    pub fn build(&self, graph: &AdjacencyMatrix, seed: u64) -> Result<PolymatrixGame> {
        match self {
            GameFamily::Conflict { actions } => {
                make_conflict(graph, &vec![*actions; graph.n()], seed)
            }
            _ => {
                let (a, b) = self.bimatrix()?;
                let game = assign_bimatrix(graph, &a, &b, seed)?;
                let meta = GameMeta {
                    family: self.label().to_string(),
                    parameters: serde_json::to_value(self)?,
                    seed: Some(seed),
                };
                PolymatrixGame::from_parts(
                    game.graph.clone(),
                    game.action_counts.clone(),
                    game.payoffs.clone(),
                    Some(meta),
                )
            }
        }
    }
}
