// SPDX-License-Identifier: Apache-2.0

//! Bivariate node-pair distributions of twisted walks and the centralities
//! read off their marginals.
//!
//! `p_{U,W}(u, w)` is the probability that a twisted walk starts at `u` and
//! ends at `w`. Its start marginal is the centrality of `u`: the influence
//! centrality under the sign-product measure, the trust centrality under
//! the sign-minimum measure, and the advertisement-specific influence
//! centrality under the minimum inner product with an advertisement vector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::TopKSet;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GraphStats, NodeId};
use crate::measure::PathMeasureKind;
use crate::sampling::WalkConfig;
use crate::twisting::{MeasureProfile, TwistConfig, TwistedDistribution};

/// Largest node count for which [`BivariateDistribution::to_dense`] is allowed.
pub const DENSE_NODE_LIMIT: usize = 5_000;

/// Sparse `p_{U,W}`; rows are start nodes, entries sorted by end node.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateDistribution {
    ids: Vec<u64>,
    rows: Vec<Vec<(NodeId, f64)>>,
    log_c: f64,
}

impl BivariateDistribution {
    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn pair_mass(&self, u: NodeId, w: NodeId) -> f64 {
        let row = &self.rows[u];
        row.binary_search_by_key(&w, |&(x, _)| x)
            .map_or(0.0, |i| row[i].1)
    }

    pub fn row(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.rows[u]
    }

    /// `ln C` of the twisted law the distribution was built from.
    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    pub fn total_mass(&self) -> f64 {
        self.rows.iter().flatten().map(|&(_, p)| p).sum()
    }

    /// Number of stored (nonzero) pairs.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(w, p)| (u, w, p)))
    }

    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.node_count();
        if n > DENSE_NODE_LIMIT {
            return Err(Error::TooLargeForDense(n));
        }
        let mut dense = vec![vec![0.0; n]; n];
        for (u, w, p) in self.entries() {
            dense[u][w] = p;
        }
        Ok(dense)
    }

    /// Largest `|p(u, w) - p(w, u)|`.
    pub fn asymmetry(&self) -> f64 {
        self.entries()
            .map(|(u, w, p)| (p - self.pair_mass(w, u)).abs())
            .fold(0.0, f64::max)
    }
}

/// Groups materialized twisted paths by their endpoints.
pub fn bivariate_from_paths(g: &AttributedGraph, twisted: &TwistedDistribution) -> BivariateDistribution {
    let n = g.node_count();
    let mut dense: Vec<std::collections::BTreeMap<NodeId, f64>> = vec![Default::default(); n];
    for p in &twisted.paths {
        *dense[p.path.start()].entry(p.path.end()).or_default() += p.mass;
    }
    BivariateDistribution {
        ids: g.original_ids().to_vec(),
        rows: dense.into_iter().map(|r| r.into_iter().collect()).collect(),
        log_c: twisted.result.log_c,
    }
}

/// Builds `p_{U,W}` by the summation formula
///
/// `p(u, w) = C [ e^{theta f(u,w)} beta1/(2m) a_uw
///            + sum_v e^{theta f(u,v,w)} beta2/(2m) a_uv a_vw / k_v ]`
///
/// without materializing paths. Rows are computed independently (in
/// parallel), each with its own exponent shift, and merged in row order.
pub fn bivariate(g: &AttributedGraph, cfg: &TwistConfig) -> Result<BivariateDistribution> {
    cfg.validate(g)?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let eval = cfg.measure.evaluator(g)?;
    let n = g.node_count();
    let two_m = (2 * g.edge_count()) as f64;
    let (b1, b2) = (cfg.walk.beta1(), cfg.walk.beta2());
    let theta = &cfg.theta;
    let dim = eval.dim();

    // (row shift, entries scaled by exp(-shift))
    let raw: Vec<(f64, Vec<(NodeId, f64)>)> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; n], Vec::<NodeId>::new(), vec![0.0f64; dim]),
            |(acc, touched, f), u| {
                let exponent = |f: &[f64]| -> f64 { theta.iter().zip(f).map(|(t, x)| t * x).sum() };
                let mut shift = f64::NEG_INFINITY;
                if b1 > 0.0 {
                    for &(w, s) in g.neighbors(u) {
                        eval.eval_with_signs(&[u, w], &[s], f);
                        shift = shift.max(exponent(f));
                    }
                }
                if b2 > 0.0 {
                    for &(v, s1) in g.neighbors(u) {
                        for &(w, s2) in g.neighbors(v) {
                            eval.eval_with_signs(&[u, v, w], &[s1, s2], f);
                            shift = shift.max(exponent(f));
                        }
                    }
                }
                if shift == f64::NEG_INFINITY {
                    return (shift, Vec::new());
                }
                let mut add = |w: NodeId, x: f64| {
                    if acc[w] == 0.0 {
                        touched.push(w);
                    }
                    acc[w] += x;
                };
                if b1 > 0.0 {
                    for &(w, s) in g.neighbors(u) {
                        eval.eval_with_signs(&[u, w], &[s], f);
                        add(w, (exponent(f) - shift).exp() * b1 / two_m);
                    }
                }
                if b2 > 0.0 {
                    for &(v, s1) in g.neighbors(u) {
                        let base = b2 / (two_m * g.degree(v) as f64);
                        for &(w, s2) in g.neighbors(v) {
                            eval.eval_with_signs(&[u, v, w], &[s1, s2], f);
                            add(w, (exponent(f) - shift).exp() * base);
                        }
                    }
                }
                touched.sort_unstable();
                let row = touched.iter().map(|&w| (w, acc[w])).collect();
                for &w in touched.iter() {
                    acc[w] = 0.0;
                }
                touched.clear();
                (shift, row)
            },
        )
        .collect();

    let global = raw.iter().map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
    let scale: Vec<f64> = raw.iter().map(|(s, _)| (s - global).exp()).collect();
    let total: f64 = raw
        .iter()
        .zip(&scale)
        .map(|((_, row), k)| k * row.iter().map(|&(_, x)| x).sum::<f64>())
        .sum();
    let rows = raw
        .into_iter()
        .zip(scale)
        .map(|((_, row), k)| row.into_iter().map(|(w, x)| (w, x * k / total)).collect())
        .collect();
    Ok(BivariateDistribution {
        ids: g.original_ids().to_vec(),
        rows,
        log_c: -(global + total.ln()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Start,
    End,
}

/// Scores per node with a deterministic order: descending score, ties by
/// ascending original id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityRanking {
    ids: Vec<u64>,
    scores: Vec<f64>,
    order: Vec<NodeId>,
}

impl CentralityRanking {
    /// `ids` must be ascending, as produced by [`AttributedGraph`].
    pub fn from_scores(ids: Vec<u64>, scores: Vec<f64>) -> Self {
        assert_eq!(ids.len(), scores.len());
        let mut order: Vec<NodeId> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(ids[a].cmp(&ids[b])));
        CentralityRanking { ids, scores, order }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, u: NodeId) -> f64 {
        self.scores[u]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.ids
    }

    /// Node indices, best first.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// `(rank starting at 1, original id, score)`, best first.
    pub fn ranked(&self) -> impl Iterator<Item = (usize, u64, f64)> + '_ {
        self.order
            .iter()
            .enumerate()
            .map(|(i, &u)| (i + 1, self.ids[u], self.scores[u]))
    }

    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn top_k(&self, k: usize) -> TopKSet {
        TopKSet::new(k, self.order.iter().take(k).map(|&u| self.ids[u]))
    }
}

pub fn marginal(b: &BivariateDistribution, side: Side) -> CentralityRanking {
    let mut scores = vec![0.0; b.node_count()];
    for (u, w, p) in b.entries() {
        match side {
            Side::Start => scores[u] += p,
            Side::End => scores[w] += p,
        }
    }
    CentralityRanking::from_scores(b.ids.clone(), scores)
}

/// Influence centrality for single-hop walks:
/// `p_U(u) = (k+_u e^theta + k-_u e^-theta) / (2 (m+ e^theta + m- e^-theta))`.
pub fn influence_closed_beta2_zero(stats: &GraphStats, theta: f64) -> Result<CentralityRanking> {
    if stats.m() == 0 {
        return Err(Error::EmptyGraph);
    }
    // divide through by e^{|theta|} so nothing overflows
    let (wp, wn) = if theta >= 0.0 {
        (1.0, (-2.0 * theta).exp())
    } else {
        ((2.0 * theta).exp(), 1.0)
    };
    let denom = 2.0 * (stats.m_pos as f64 * wp + stats.m_neg as f64 * wn);
    let scores = stats
        .pos_degree
        .iter()
        .zip(&stats.neg_degree)
        .map(|(&kp, &kn)| (kp as f64 * wp + kn as f64 * wn) / denom)
        .collect();
    Ok(CentralityRanking::from_scores(stats.ids.clone(), scores))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CentralityKind {
    Influence,
    Trust,
    /// Advertisement score vector `z`.
    Advertisement(Vec<f64>),
}

impl CentralityKind {
    pub fn measure(&self) -> PathMeasureKind {
        match self {
            CentralityKind::Influence => PathMeasureKind::SignProduct,
            CentralityKind::Trust => PathMeasureKind::SignMin,
            CentralityKind::Advertisement(z) => PathMeasureKind::AdMinInner(z.clone()),
        }
    }
}

/// Merges two advertisements into one score vector (element-wise sum).
pub fn combine_advertisements(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::AdDimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x + y).collect())
}

/// Either a temperature or a target mean measure to solve for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Temperature {
    Theta(f64),
    Gamma(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityOutcome {
    /// Temperature actually used.
    pub theta: f64,
    pub ranking: CentralityRanking,
}

pub fn resolve_theta(
    g: &AttributedGraph,
    measure: &PathMeasureKind,
    walk: &WalkConfig,
    temperature: Temperature,
) -> Result<f64> {
    match temperature {
        Temperature::Theta(t) => {
            if !t.is_finite() {
                return Err(Error::NonFiniteTheta);
            }
            Ok(t)
        }
        Temperature::Gamma(gamma) => {
            let profile = MeasureProfile::build(g, measure, walk)?;
            Ok(profile.solve(&[gamma])?[0])
        }
    }
}

pub fn centrality(
    g: &AttributedGraph,
    kind: &CentralityKind,
    temperature: Temperature,
    walk: &WalkConfig,
) -> Result<CentralityOutcome> {
    let measure = kind.measure();
    measure.validate(g)?;
    let theta = resolve_theta(g, &measure, walk, temperature)?;
    let cfg = TwistConfig::scalar(measure, theta, *walk);
    let b = bivariate(g, &cfg)?;
    Ok(CentralityOutcome {
        theta,
        ranking: marginal(&b, Side::Start),
    })
}
