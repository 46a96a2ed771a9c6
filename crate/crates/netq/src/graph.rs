//! Undirected interaction networks: Erdős–Rényi and stochastic block
//! sampling, spectral radius computation, and closed-form high-probability
//! upper bounds on the spectral radius of sampled graphs.
//!
//! The bounds have the common shape
//!
//! ```text
//!   mean_degree_term + sqrt(2 * variance_term * ln(2N/eps)) + (2/3) ln(2N/eps)
//! ```
//!
//! and hold with probability at least `1 - eps` over the graph draw. For
//! G(n, p) the mean term is `(n-1) p`; for a stochastic block model with
//! `C` equal communities of size `N/C`, within-community probabilities
//! `p_c` and between-community probability `q`, the mean term is
//! `(N - N/C) q + (N/C - 1) max_c p_c` and the variance term uses
//! `max_c p_c (1 - p_c)`. With `C = 1` the block bound collapses to the
//! Erdős–Rényi bound exactly.

use crate::error::{Error, Result};
use crate::linalg;
use crate::seed::derive_seed;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Matrix sizes up to this use a full symmetric eigendecomposition;
/// larger ones fall back to power iteration.
const DENSE_EIGEN_LIMIT: usize = 512;
const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITERS: usize = 10_000;

/// Symmetric binary adjacency matrix of a simple undirected graph.
///
/// Construction enforces symmetry, a zero diagonal, and 0/1 entries, so
/// every held value satisfies those invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<u8>,
}

impl AdjacencyMatrix {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            bits: vec![0; n * n],
        }
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let mut g = AdjacencyMatrix::empty(n);
        for k in 0..n {
            for l in (k + 1)..n {
                g.set_edge(k, l);
            }
        }
        g
    }

    /// Builds a graph from an undirected edge list. Self-loops and
    /// out-of-range endpoints are rejected; duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = AdjacencyMatrix::empty(n);
        for &(k, l) in edges {
            if k >= n || l >= n {
                return Err(Error::invalid(format!(
                    "edge ({k}, {l}) out of range for {n} nodes"
                )));
            }
            if k == l {
                return Err(Error::invalid(format!("self-loop at node {k}")));
            }
            g.set_edge(k, l);
        }
        Ok(g)
    }

    /// Validates a dense 0/1 matrix (square, symmetric, zero diagonal)
    /// and wraps it.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::contract(format!(
                    "adjacency matrix must be square: {n} rows but a row of length {}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            if rows[i][i] != 0 {
                return Err(Error::contract(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..n {
                if rows[i][j] > 1 {
                    return Err(Error::contract(format!(
                        "entry ({i}, {j}) = {} is not 0/1",
                        rows[i][j]
                    )));
                }
                if rows[i][j] != rows[j][i] {
                    return Err(Error::contract(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
            }
        }
        let mut g = AdjacencyMatrix::empty(n);
        for i in 0..n {
            for j in 0..n {
                g.bits[i * n + j] = rows[i][j];
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, k: usize, l: usize) -> bool {
        self.bits[k * self.n + l] != 0
    }

    pub(crate) fn set_edge(&mut self, k: usize, l: usize) {
        debug_assert!(k != l);
        self.bits[k * self.n + l] = 1;
        self.bits[l * self.n + k] = 1;
    }

    pub fn degree(&self, k: usize) -> usize {
        self.bits[k * self.n..(k + 1) * self.n]
            .iter()
            .map(|&b| b as usize)
            .sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|k| self.degree(k)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.degrees().iter().sum::<usize>() as f64 / self.n as f64
    }

    /// Undirected edges as ordered pairs `(k, l)` with `k < l`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.n {
            for l in (k + 1)..self.n {
                if self.has_edge(k, l) {
                    out.push((k, l));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum::<usize>() / 2
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.bits[i * self.n + j] as f64)
    }

    /// Plain-text edge list, one `k l` pair per line, 0-indexed, `k < l`.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::new();
        for (k, l) in self.edges() {
            writeln!(s, "{k} {l}").expect("string write");
        }
        s
    }

    /// Parses the edge-list format produced by [`to_edge_list_string`].
    /// The node count is passed separately because isolated nodes leave
    /// no trace in the list.
    ///
    /// [`to_edge_list_string`]: AdjacencyMatrix::to_edge_list_string
    pub fn from_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let k = it
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing endpoint", lineno + 1)))?;
            let l = it
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing endpoint", lineno + 1)))?;
            if it.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: expected two endpoints",
                    lineno + 1
                )));
            }
            let k: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad node index {k:?}", lineno + 1)))?;
            let l: usize = l
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad node index {l:?}", lineno + 1)))?;
            edges.push((k, l));
        }
        AdjacencyMatrix::from_edges(n, &edges)
    }

    /// Dense CSV: one row per node, comma-separated 0/1 entries.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let row: Vec<&str> = (0..self.n)
                .map(|j| if self.bits[i * self.n + j] != 0 { "1" } else { "0" })
                .collect();
            writeln!(s, "{}", row.join(",")).expect("string write");
        }
        s
    }

    /// Parses the dense CSV format produced by [`to_csv_string`].
    ///
    /// [`to_csv_string`]: AdjacencyMatrix::to_csv_string
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                match field.trim() {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    other => {
                        return Err(Error::Parse(format!(
                            "line {}: expected 0 or 1, got {other:?}",
                            lineno + 1
                        )))
                    }
                }
            }
            rows.push(row);
        }
        AdjacencyMatrix::from_dense(&rows)
    }
}

/// Parameters of the Erdős–Rényi model G(n, p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub n: usize,
    pub p: f64,
}

impl ErParams {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("er: n must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p) || !self.p.is_finite() {
            return Err(Error::invalid(format!(
                "er: edge probability p = {} outside [0, 1]",
                self.p
            )));
        }
        Ok(())
    }
}

/// Parameters of a stochastic block model: `community_sizes[c]` nodes in
/// community `c`, within-community edge probability `p_within[c]`, and a
/// single between-community probability `q_between`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbParams {
    pub community_sizes: Vec<usize>,
    pub p_within: Vec<f64>,
    pub q_between: f64,
}

impl SbParams {
    /// Equal-size convenience constructor: `communities` blocks of
    /// `size` nodes each, all sharing `p_within`.
    pub fn uniform(communities: usize, size: usize, p_within: f64, q_between: f64) -> Self {
        SbParams {
            community_sizes: vec![size; communities],
            p_within: vec![p_within; communities],
            q_between,
        }
    }

    pub fn n(&self) -> usize {
        self.community_sizes.iter().sum()
    }

    pub fn communities(&self) -> usize {
        self.community_sizes.len()
    }

    /// Community index of a node under contiguous block layout: the
    /// first `community_sizes[0]` nodes form community 0, and so on.
    pub fn community_of(&self, node: usize) -> usize {
        let mut acc = 0;
        for (c, &size) in self.community_sizes.iter().enumerate() {
            acc += size;
            if node < acc {
                return c;
            }
        }
        panic!("node {node} out of range for {} nodes", self.n());
    }

    /// Common community size if all communities are equal, else `None`.
    pub fn equal_size(&self) -> Option<usize> {
        let first = *self.community_sizes.first()?;
        if self.community_sizes.iter().all(|&s| s == first) {
            Some(first)
        } else {
            None
        }
    }

    fn validate(&self) -> Result<()> {
        if self.community_sizes.is_empty() {
            return Err(Error::invalid("sb: at least one community required"));
        }
        if self.community_sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid("sb: empty community"));
        }
        if self.p_within.len() != self.community_sizes.len() {
            return Err(Error::invalid(format!(
                "sb: {} communities but {} within-community probabilities",
                self.community_sizes.len(),
                self.p_within.len()
            )));
        }
        for (c, &p) in self.p_within.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::invalid(format!(
                    "sb: p_within[{c}] = {p} outside [0, 1]"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.q_between) || !self.q_between.is_finite() {
            return Err(Error::invalid(format!(
                "sb: q_between = {} outside [0, 1]",
                self.q_between
            )));
        }
        Ok(())
    }
}

/// Samples G(n, p): each of the `n(n-1)/2` possible edges is included
/// independently with probability `p`. Upper-triangle pairs are visited
/// in row-major order, so a seed fully determines the sample.
pub fn sample_er(params: &ErParams, seed: u64) -> Result<AdjacencyMatrix> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = AdjacencyMatrix::empty(params.n);
    for k in 0..params.n {
        for l in (k + 1)..params.n {
            if rng.gen_bool(params.p) {
                g.set_edge(k, l);
            }
        }
    }
    Ok(g)
}

/// Samples a stochastic block graph: within-community pairs use their
/// community's `p_within`, between-community pairs use `q_between`.
/// Visits upper-triangle pairs in the same order as [`sample_er`], so a
/// single-community model reproduces the G(n, p) sample bit-for-bit.
pub fn sample_sb(params: &SbParams, seed: u64) -> Result<AdjacencyMatrix> {
    params.validate()?;
    let n = params.n();
    let community: Vec<usize> = (0..n).map(|v| params.community_of(v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = AdjacencyMatrix::empty(n);
    for k in 0..n {
        for l in (k + 1)..n {
            let p = if community[k] == community[l] {
                params.p_within[community[k]]
            } else {
                params.q_between
            };
            if rng.gen_bool(p) {
                g.set_edge(k, l);
            }
        }
    }
    Ok(g)
}

/// Spectral radius of the adjacency matrix. For a symmetric nonnegative
/// matrix this equals the largest eigenvalue. Dense eigendecomposition
/// up to 512 nodes, shifted power iteration beyond.
pub fn spectral_radius(g: &AdjacencyMatrix) -> f64 {
    let dense = g.to_dense();
    if g.n() <= DENSE_EIGEN_LIMIT {
        linalg::max_symmetric_eigenvalue(&dense).max(0.0)
    } else {
        // Shift by n: degrees are < n, so the spectrum of G + nI lies in
        // (1, 2n) and the target eigenvalue is strictly dominant.
        linalg::power_iteration_max(&dense, g.n() as f64, POWER_TOL, POWER_MAX_ITERS).max(0.0)
    }
}

/// Model tag carried by a [`SpectralBound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundModel {
    Er,
    Sb,
}

/// A high-probability upper bound on the spectral radius of a sampled
/// graph: `P(rho(G) <= value) >= 1 - epsilon` over the model's draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub value: f64,
    pub epsilon: f64,
    pub model: BoundModel,
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!(
            "confidence parameter epsilon = {epsilon} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Shared tail shape of the bounds:
/// `mean + sqrt(2 * variance * L) + (2/3) L` with `L = ln(2n / epsilon)`.
fn bernstein_bound(mean_term: f64, variance_term: f64, n: usize, epsilon: f64) -> f64 {
    let l = (2.0 * n as f64 / epsilon).ln();
    mean_term + (2.0 * variance_term * l).sqrt() + (2.0 / 3.0) * l
}

/// Closed-form bound for G(n, p): holds with probability `>= 1 - epsilon`.
pub fn er_bound(n: usize, p: f64, epsilon: f64) -> Result<SpectralBound> {
    ErParams { n, p }.validate()?;
    validate_epsilon(epsilon)?;
    let nf = n as f64;
    let value = bernstein_bound((nf - 1.0) * p, (nf - 1.0) * (p * (1.0 - p)), n, epsilon);
    Ok(SpectralBound {
        value,
        epsilon,
        model: BoundModel::Er,
    })
}

/// Closed-form bound for a stochastic block model with equal community
/// sizes. Non-uniform sizes are rejected; use [`sb_bound_general`] to
/// opt into the looser variant that covers them.
pub fn sb_bound(params: &SbParams, epsilon: f64) -> Result<SpectralBound> {
    params.validate()?;
    validate_epsilon(epsilon)?;
    if params.equal_size().is_none() {
        return Err(Error::invalid(
            "sb_bound requires equal community sizes; use sb_bound_general for non-uniform sizes",
        ));
    }
    let n = params.n();
    let nf = n as f64;
    let nc = nf / params.communities() as f64;
    let q = params.q_between;
    let p_max = params.p_within.iter().copied().fold(0.0, f64::max);
    let s2_max = params
        .p_within
        .iter()
        .map(|&p| p * (1.0 - p))
        .fold(0.0, f64::max);
    let mean = (nf - nc) * q + (nc - 1.0) * p_max;
    let variance = (nf - nc) * (q * (1.0 - q)) + (nc - 1.0) * s2_max;
    Ok(SpectralBound {
        value: bernstein_bound(mean, variance, n, epsilon),
        epsilon,
        model: BoundModel::Sb,
    })
}

/// Bound variant for arbitrary community sizes: both the mean and the
/// variance term are maximized over blocks, so it dominates the
/// equal-size formula and coincides with it when sizes are uniform.
pub fn sb_bound_general(params: &SbParams, epsilon: f64) -> Result<SpectralBound> {
    params.validate()?;
    validate_epsilon(epsilon)?;
    let n = params.n();
    let nf = n as f64;
    let q = params.q_between;
    let mut mean: f64 = 0.0;
    let mut variance: f64 = 0.0;
    for (c, &size) in params.community_sizes.iter().enumerate() {
        let nc = size as f64;
        let p = params.p_within[c];
        mean = mean.max((nf - nc) * q + (nc - 1.0) * p);
        variance = variance.max((nf - nc) * (q * (1.0 - q)) + (nc - 1.0) * (p * (1.0 - p)));
    }
    Ok(SpectralBound {
        value: bernstein_bound(mean, variance, n, epsilon),
        epsilon,
        model: BoundModel::Sb,
    })
}

/// A random-graph model together with its parameters; dispatches
/// sampling and the matching spectral bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkModel {
    Er(ErParams),
    Sb(SbParams),
}

impl NetworkModel {
    pub fn n(&self) -> usize {
        match self {
            NetworkModel::Er(p) => p.n,
            NetworkModel::Sb(p) => p.n(),
        }
    }

    pub fn sample(&self, seed: u64) -> Result<AdjacencyMatrix> {
        match self {
            NetworkModel::Er(p) => sample_er(p, seed),
            NetworkModel::Sb(p) => sample_sb(p, seed),
        }
    }

    pub fn bound(&self, epsilon: f64) -> Result<SpectralBound> {
        match self {
            NetworkModel::Er(p) => er_bound(p.n, p.p, epsilon),
            NetworkModel::Sb(p) => sb_bound(p, epsilon),
        }
    }
}

/// Fraction of `trials` independent samples whose spectral radius does
/// not exceed the model's `1 - epsilon` bound. For a valid bound the
/// coverage should be at least `1 - epsilon` up to sampling noise.
pub fn empirical_bound_coverage(
    model: &NetworkModel,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials < 100 {
        return Err(Error::invalid(format!(
            "coverage estimate needs at least 100 trials, got {trials}"
        )));
    }
    let bound = model.bound(epsilon)?.value;
    let mut within = 0usize;
    for trial in 0..trials {
        let g = model.sample(derive_seed(seed, &[trial as u64]))?;
        if spectral_radius(&g) <= bound {
            within += 1;
        }
    }
    Ok(within as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent evaluations of the closed-form bounds, frozen before
    // the implementation was written.
    const ER_BOUND_10_01_005: f64 = 8.009782786756102;
    const SB_BOUND_20_4_03_01_005: f64 = 12.567378098088810;

    #[test]
    fn er_bound_matches_frozen_value() {
        let b = er_bound(10, 0.1, 0.05).unwrap();
        assert!(
            (b.value - ER_BOUND_10_01_005).abs() < 1e-9,
            "got {}",
            b.value
        );
    }

    #[test]
    fn er_bound_degenerates_to_log_term_as_p_vanishes() {
        let n = 10;
        let eps = 0.05;
        let tail_only = (2.0 / 3.0) * (2.0 * n as f64 / eps).ln();
        let b = er_bound(n, 1e-15, eps).unwrap();
        assert!((b.value - tail_only).abs() < 1e-6, "got {}", b.value);
    }

    #[test]
    fn er_bound_monotone_in_p() {
        let lo = er_bound(50, 0.1, 0.05).unwrap().value;
        let hi = er_bound(50, 0.2, 0.05).unwrap().value;
        assert!(hi > lo);
    }

    #[test]
    fn er_bound_rejects_bad_parameters() {
        assert!(er_bound(0, 0.1, 0.05).is_err());
        assert!(er_bound(10, -0.1, 0.05).is_err());
        assert!(er_bound(10, 1.5, 0.05).is_err());
        assert!(er_bound(10, 0.1, 0.0).is_err());
        assert!(er_bound(10, 0.1, 1.0).is_err());
    }

    #[test]
    fn sb_bound_matches_frozen_value() {
        let params = SbParams::uniform(4, 5, 0.3, 0.1);
        let b = sb_bound(&params, 0.05).unwrap();
        assert!(
            (b.value - SB_BOUND_20_4_03_01_005).abs() < 1e-9,
            "got {}",
            b.value
        );
    }

    #[test]
    fn sb_bound_with_one_community_collapses_to_er() {
        for (n, p) in [(12, 0.2), (30, 0.05), (7, 0.9)] {
            let sb = sb_bound(&SbParams::uniform(1, n, p, 0.3), 0.05).unwrap();
            let er = er_bound(n, p, 0.05).unwrap();
            assert!(
                (sb.value - er.value).abs() < 1e-12,
                "n={n} p={p}: sb={} er={}",
                sb.value,
                er.value
            );
        }
    }

    #[test]
    fn sb_bound_with_uniform_probabilities_matches_er() {
        // All within- and between-community probabilities equal to p
        // make the model a plain G(n, p), and the bound agrees.
        let p = 0.15;
        let sb = sb_bound(&SbParams::uniform(4, 5, p, p), 0.05).unwrap();
        let er = er_bound(20, p, 0.05).unwrap();
        assert!((sb.value - er.value).abs() < 1e-12);
    }

    #[test]
    fn sb_bound_rejects_unequal_sizes_general_accepts() {
        let params = SbParams {
            community_sizes: vec![3, 5],
            p_within: vec![0.2, 0.4],
            q_between: 0.1,
        };
        assert!(matches!(
            sb_bound(&params, 0.05),
            Err(Error::InvalidParameter(_))
        ));
        let general = sb_bound_general(&params, 0.05).unwrap();
        assert!(general.value.is_finite() && general.value > 0.0);
    }

    #[test]
    fn sb_bound_general_coincides_with_equal_size_formula() {
        let params = SbParams::uniform(3, 4, 0.25, 0.05);
        let a = sb_bound(&params, 0.05).unwrap().value;
        let b = sb_bound_general(&params, 0.05).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn sample_er_is_deterministic_per_seed() {
        let params = ErParams { n: 12, p: 0.5 };
        let a = sample_er(&params, 99).unwrap();
        let b = sample_er(&params, 99).unwrap();
        let c = sample_er(&params, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_er_near_certain_edge() {
        let params = ErParams { n: 2, p: 0.999 };
        let mut present = 0;
        for seed in 0..1000 {
            if sample_er(&params, seed).unwrap().has_edge(0, 1) {
                present += 1;
            }
        }
        assert!(present >= 990, "edge present in only {present}/1000 samples");
    }

    #[test]
    fn sample_er_mean_degree_matches_expectation() {
        // E[degree] = (n-1) p = 2.7; the estimator's standard error over
        // 2000 samples of 10 nodes is about 0.01.
        let params = ErParams { n: 10, p: 0.3 };
        let mut total = 0usize;
        for seed in 0..2000 {
            total += sample_er(&params, seed).unwrap().degrees().iter().sum::<usize>();
        }
        let mean = total as f64 / (2000.0 * 10.0);
        assert!((mean - 2.7).abs() < 0.1, "mean degree {mean}");
    }

    #[test]
    fn sample_sb_single_community_reproduces_er_sample() {
        let er = sample_er(&ErParams { n: 9, p: 0.4 }, 5).unwrap();
        let sb = sample_sb(&SbParams::uniform(1, 9, 0.4, 0.7), 5).unwrap();
        assert_eq!(er, sb);
    }

    #[test]
    fn sample_sb_degree_split_matches_block_probabilities() {
        // Two communities of 3; within degree ~ 2 * 0.9, between ~ 3 * 0.05.
        let params = SbParams::uniform(2, 3, 0.9, 0.05);
        let samples = 5000;
        let mut within = 0usize;
        let mut between = 0usize;
        for seed in 0..samples {
            let g = sample_sb(&params, seed).unwrap();
            for (k, l) in g.edges() {
                if params.community_of(k) == params.community_of(l) {
                    within += 2;
                } else {
                    between += 2;
                }
            }
        }
        let within_deg = within as f64 / (samples as f64 * 6.0);
        let between_deg = between as f64 / (samples as f64 * 6.0);
        assert!((within_deg - 1.8).abs() < 0.05, "within {within_deg}");
        assert!((between_deg - 0.15).abs() < 0.05, "between {between_deg}");
    }

    #[test]
    fn sample_sb_rejects_mismatched_probability_list() {
        let params = SbParams {
            community_sizes: vec![3, 3],
            p_within: vec![0.2],
            q_between: 0.1,
        };
        assert!(sample_sb(&params, 0).is_err());
    }

    #[test]
    fn spectral_radius_of_reference_graphs() {
        assert!((spectral_radius(&AdjacencyMatrix::complete(4)) - 3.0).abs() < 1e-9);
        assert_eq!(spectral_radius(&AdjacencyMatrix::empty(5)), 0.0);
        let path3 = AdjacencyMatrix::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((spectral_radius(&path3) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coverage_meets_confidence_level() {
        let model = NetworkModel::Er(ErParams { n: 30, p: 0.2 });
        let cov = empirical_bound_coverage(&model, 0.05, 300, 7).unwrap();
        assert!(cov >= 0.95, "coverage {cov}");
    }

    #[test]
    fn loose_epsilon_gives_smaller_bound_but_valid_coverage() {
        let model = NetworkModel::Er(ErParams { n: 30, p: 0.2 });
        let tight = model.bound(0.05).unwrap().value;
        let loose = model.bound(0.5).unwrap().value;
        assert!(loose < tight);
        let cov = empirical_bound_coverage(&model, 0.5, 300, 11).unwrap();
        assert!(cov >= 0.5, "coverage {cov}");
    }

    #[test]
    fn coverage_requires_enough_trials() {
        let model = NetworkModel::Er(ErParams { n: 10, p: 0.2 });
        assert!(empirical_bound_coverage(&model, 0.05, 99, 0).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = sample_er(&ErParams { n: 8, p: 0.4 }, 3).unwrap();
        let text = g.to_edge_list_string();
        let back = AdjacencyMatrix::from_edge_list(8, &text).unwrap();
        assert_eq!(g, back);
        // Isolated nodes survive because n travels separately.
        let empty = AdjacencyMatrix::empty(4);
        assert_eq!(
            AdjacencyMatrix::from_edge_list(4, &empty.to_edge_list_string()).unwrap(),
            empty
        );
    }

    #[test]
    fn dense_csv_round_trip() {
        let g = sample_er(&ErParams { n: 7, p: 0.5 }, 21).unwrap();
        let back = AdjacencyMatrix::from_csv(&g.to_csv_string()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn from_dense_rejects_contract_violations() {
        // Asymmetric.
        let rows = vec![vec![0, 1], vec![0, 0]];
        assert!(matches!(
            AdjacencyMatrix::from_dense(&rows),
            Err(Error::ContractViolation(_))
        ));
        // Nonzero diagonal.
        let rows = vec![vec![1, 0], vec![0, 0]];
        assert!(AdjacencyMatrix::from_dense(&rows).is_err());
        // Non-binary entry.
        let rows = vec![vec![0, 2], vec![2, 0]];
        assert!(AdjacencyMatrix::from_dense(&rows).is_err());
    }

    #[test]
    fn from_edges_rejects_self_loops_and_range_errors() {
        assert!(AdjacencyMatrix::from_edges(3, &[(1, 1)]).is_err());
        assert!(AdjacencyMatrix::from_edges(3, &[(0, 3)]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Sampled graphs are symmetric with a zero diagonal, and the
        /// spectral radius is wedged between mean and max degree.
        #[test]
        fn sampled_graph_invariants(n in 1usize..24, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let g = sample_er(&ErParams { n, p }, seed).unwrap();
            for k in 0..n {
                prop_assert!(!g.has_edge(k, k));
                for l in 0..n {
                    prop_assert_eq!(g.has_edge(k, l), g.has_edge(l, k));
                }
            }
            let rho = spectral_radius(&g);
            prop_assert!(rho >= g.mean_degree() - 1e-9);
            prop_assert!(rho <= g.max_degree() as f64 + 1e-9);
        }

        /// The closed-form bound is monotone in n for fixed p.
        #[test]
        fn er_bound_monotone_in_n(n in 2usize..200, p in 0.01f64..0.99) {
            let small = er_bound(n, p, 0.05).unwrap().value;
            let large = er_bound(n + 1, p, 0.05).unwrap().value;
            prop_assert!(large > small);
        }

        /// Edge-list serialization round-trips exactly.
        #[test]
        fn edge_list_round_trip_random(n in 1usize..16, p in 0.0f64..=1.0, seed in any::<u64>()) {
            let g = sample_er(&ErParams { n, p }, seed).unwrap();
            let back = AdjacencyMatrix::from_edge_list(n, &g.to_edge_list_string()).unwrap();
            prop_assert_eq!(g, back);
        }
    }
}
