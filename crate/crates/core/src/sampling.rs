// SPDX-License-Identifier: Apache-2.0

//! Base (untwisted) path-sampling distributions.
//!
//! Three samplers are provided: uniform directed-edge sampling, a Markov
//! chain (random walk or PageRank surfer) started from its stationary law,
//! and the short random walk that picks a start node with probability
//! `k_u / 2m` and then walks one step with probability `beta1` or two steps
//! with probability `beta2`. Only the last one feeds the centralities.
//!
//! Two-step walks may backtrack (`u1 == u3`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};

/// Default cap on the number of enumerated paths.
pub const DEFAULT_PATH_BUDGET: usize = 50_000_000;

const WALK_MIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    beta1: f64,
    beta2: f64,
}

impl WalkConfig {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        let ok = beta1.is_finite()
            && beta2.is_finite()
            && beta1 >= 0.0
            && beta2 >= 0.0
            && (beta1 + beta2 - 1.0).abs() <= WALK_MIX_TOL;
        if !ok {
            return Err(Error::InvalidWalkConfig { beta1, beta2 });
        }
        Ok(WalkConfig { beta1, beta2 })
    }

    /// Length-1 paths only (`beta2 = 0`).
    pub fn single_step() -> Self {
        WalkConfig { beta1: 1.0, beta2: 0.0 }
    }

    /// Length-2 paths only (`beta1 = 0`).
    pub fn two_step() -> Self {
        WalkConfig { beta1: 0.0, beta2: 1.0 }
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    /// Probability of following a link; `1 - lambda` teleports uniformly.
    pub lambda: f64,
    /// L1 bound on the change between successive iterates.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            lambda: 0.85,
            tolerance: 1e-10,
            max_iters: 10_000,
        }
    }
}

/// A walk of one or two hops with its base probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkPath {
    nodes: [NodeId; 3],
    hops: usize,
    pub base_prob: f64,
}

impl WalkPath {
    pub fn edge(u: NodeId, w: NodeId, base_prob: f64) -> Self {
        WalkPath { nodes: [u, w, 0], hops: 1, base_prob }
    }

    pub fn two_hop(u: NodeId, v: NodeId, w: NodeId, base_prob: f64) -> Self {
        WalkPath { nodes: [u, v, w], hops: 2, base_prob }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes[..=self.hops]
    }

    pub fn hops(&self) -> usize {
        self.hops
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn end(&self) -> NodeId {
        self.nodes[self.hops]
    }

    pub fn reversed(&self) -> WalkPath {
        let mut nodes = self.nodes;
        nodes[..=self.hops].reverse();
        WalkPath { nodes, ..*self }
    }
}

/// Probability of directed edge `(u, w)` under uniform sampling of the
/// `2m` directed edges of the symmetrized graph.
pub fn uniform_edge_prob(g: &AttributedGraph, u: NodeId, w: NodeId) -> f64 {
    if g.sign(u, w).is_some() {
        1.0 / (2 * g.edge_count()) as f64
    } else {
        0.0
    }
}

/// Stationary distribution of the PageRank surfer by power iteration.
pub fn pagerank_stationary(g: &AttributedGraph, cfg: &PageRankConfig) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&cfg.lambda) {
        return Err(Error::InvalidPageRank(format!(
            "lambda must lie in [0, 1), got {}",
            cfg.lambda
        )));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidPageRank("graph has no nodes".into()));
    }
    if cfg.lambda > 0.0 {
        if let Some(u) = (0..n).find(|&u| g.degree(u) == 0) {
            return Err(Error::DanglingNode(g.original_id(u)));
        }
    }

    let teleport = (1.0 - cfg.lambda) / n as f64;
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iters {
        next.fill(teleport);
        if cfg.lambda > 0.0 {
            for (w, &mass) in pi.iter().enumerate() {
                let share = cfg.lambda * mass / g.degree(w) as f64;
                for &(u, _) in g.neighbors(w) {
                    next[u] += share;
                }
            }
        }
        residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if residual <= cfg.tolerance {
            return Ok(pi);
        }
    }
    Err(Error::PageRankNotConverged {
        iterations: cfg.max_iters,
        residual,
    })
}

/// Dense row-stochastic transition matrix for small chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    n: usize,
    probs: Vec<f64>,
}

impl Transitions {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        assert_eq!(probs.len(), n * n, "transition matrix must be n x n");
        for row in 0..n {
            let sum: f64 = probs[row * n..(row + 1) * n].iter().sum();
            if (sum - 1.0).abs() > 1e-9 || probs[row * n..(row + 1) * n].iter().any(|&p| p < 0.0) {
                return Err(Error::NotStochastic { row, sum });
            }
        }
        Ok(Transitions { n, probs })
    }

    /// Simple random walk: `p(u, w) = a_uw / k_u`.
    pub fn random_walk(g: &AttributedGraph) -> Result<Self> {
        let n = g.node_count();
        let mut probs = vec![0.0; n * n];
        for u in 0..n {
            let k = g.degree(u);
            if k == 0 {
                return Err(Error::DanglingNode(g.original_id(u)));
            }
            for &(w, _) in g.neighbors(u) {
                probs[u * n + w] = 1.0 / k as f64;
            }
        }
        Self::new(n, probs)
    }

    /// PageRank chain `p(u, w) = (1 - lambda)/n + lambda a_uw / k_u`.
    pub fn pagerank(g: &AttributedGraph, lambda: f64) -> Result<Self> {
        let n = g.node_count();
        let mut probs = vec![(1.0 - lambda) / n as f64; n * n];
        for u in 0..n {
            let k = g.degree(u);
            if k == 0 {
                if lambda > 0.0 {
                    return Err(Error::DanglingNode(g.original_id(u)));
                }
                continue;
            }
            for &(w, _) in g.neighbors(u) {
                probs[u * n + w] += lambda / k as f64;
            }
        }
        Self::new(n, probs)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn prob(&self, u: NodeId, w: NodeId) -> f64 {
        self.probs[u * self.n + w]
    }
}

/// `pi[u1] * p(u1, u2) * ... * p(u_{k-1}, u_k)` for the node sequence `seq`.
pub fn markov_path_prob(pi: &[f64], transitions: &Transitions, seq: &[NodeId]) -> f64 {
    let Some(&first) = seq.first() else {
        return 0.0;
    };
    seq.windows(2)
        .fold(pi[first], |acc, step| acc * transitions.prob(step[0], step[1]))
}

/// Base probability of a one- or two-hop walk; zero when a hop is not an edge.
pub fn base_walk_prob(g: &AttributedGraph, cfg: &WalkConfig, seq: &[NodeId]) -> f64 {
    let two_m = (2 * g.edge_count()) as f64;
    match *seq {
        [u, w] if g.sign(u, w).is_some() => cfg.beta1 / two_m,
        [u, v, w] if g.sign(u, v).is_some() && g.sign(v, w).is_some() => {
            cfg.beta2 / (two_m * g.degree(v) as f64)
        }
        _ => 0.0,
    }
}

/// Number of paths [`enumerate_paths`] would yield.
pub fn path_count(g: &AttributedGraph, cfg: &WalkConfig) -> usize {
    let mut count = 0;
    if cfg.beta1 > 0.0 {
        count += 2 * g.edge_count();
    }
    if cfg.beta2 > 0.0 {
        count += (0..g.node_count()).map(|v| g.degree(v).pow(2)).sum::<usize>();
    }
    count
}

/// Every path with positive base mass, grouped by start node in index order.
pub fn enumerate_paths<'g>(
    g: &'g AttributedGraph,
    cfg: &WalkConfig,
    budget: usize,
) -> Result<impl Iterator<Item = WalkPath> + 'g> {
    let required = path_count(g, cfg);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let cfg = *cfg;
    Ok((0..g.node_count()).flat_map(move |u| paths_from(g, cfg, u)))
}

/// Paths starting at `u`: one-hop paths first, then two-hop paths.
pub fn paths_from(g: &AttributedGraph, cfg: WalkConfig, u: NodeId) -> impl Iterator<Item = WalkPath> + '_ {
    let two_m = (2 * g.edge_count()) as f64;
    let p1 = cfg.beta1 / two_m;
    let single = g
        .neighbors(u)
        .iter()
        .filter(move |_| cfg.beta1 > 0.0)
        .map(move |&(w, _)| WalkPath::edge(u, w, p1));
    let double = g
        .neighbors(u)
        .iter()
        .filter(move |_| cfg.beta2 > 0.0)
        .flat_map(move |&(v, _)| {
            let p2 = cfg.beta2 / (two_m * g.degree(v) as f64);
            g.neighbors(v)
                .iter()
                .map(move |&(w, _)| WalkPath::two_hop(u, v, w, p2))
        });
    single.chain(double)
}
