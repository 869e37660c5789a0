// SPDX-License-Identifier: Apache-2.0

//! Comparing centrality rankings with degree baselines through the Jaccard
//! index of their top-k sets, over a range of temperatures.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{centrality, CentralityKind, CentralityRanking, Temperature};
use crate::graph::{AttributedGraph, GraphStats};
use crate::sampling::WalkConfig;

/// Default top-k for signed-network sweeps.
pub const DEFAULT_K_SIGNED: usize = 100;
/// Default top-k for advertisement sweeps.
pub const DEFAULT_K_ADVERTISEMENT: usize = 250;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKSet {
    pub k: usize,
    pub members: BTreeSet<u64>,
}

impl TopKSet {
    pub fn new(k: usize, members: impl IntoIterator<Item = u64>) -> Self {
        TopKSet {
            k,
            members: members.into_iter().collect(),
        }
    }
}

/// `|A n B| / |A u B|`, with two empty sets counted as identical.
pub fn jaccard(a: &TopKSet, b: &TopKSet) -> f64 {
    let union = a.members.union(&b.members).count();
    if union == 0 {
        return 1.0;
    }
    a.members.intersection(&b.members).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegreeKind {
    Positive,
    Negative,
    Total,
}

/// Ranking by `k+`, `k-` or `k`, normalized to a probability vector (all
/// zeros when every count is zero).
pub fn degree_ranking(stats: &GraphStats, kind: DegreeKind) -> CentralityRanking {
    let counts: Vec<usize> = match kind {
        DegreeKind::Positive => stats.pos_degree.clone(),
        DegreeKind::Negative => stats.neg_degree.clone(),
        DegreeKind::Total => (0..stats.node_count()).map(|u| stats.degree(u)).collect(),
    };
    let total: usize = counts.iter().sum();
    let scores = counts
        .iter()
        .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        .collect();
    CentralityRanking::from_scores(stats.ids.clone(), scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepTarget {
    Gamma(f64),
    Theta(f64),
}

impl From<SweepTarget> for Temperature {
    fn from(t: SweepTarget) -> Self {
        match t {
            SweepTarget::Gamma(g) => Temperature::Gamma(g),
            SweepTarget::Theta(t) => Temperature::Theta(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub jaccard_pos: Option<f64>,
    pub jaccard_neg: Option<f64>,
    pub jaccard_total: Option<f64>,
    /// Set when some compared pair of top-k sets were both empty.
    pub empty_sets: bool,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// One row per target, in target order. A failing target yields a row with
/// its error and does not stop the sweep.
pub fn sweep(
    g: &AttributedGraph,
    kind: &CentralityKind,
    targets: &[SweepTarget],
    walk: &WalkConfig,
    k: usize,
) -> Vec<SweepRow> {
    let stats = g.stats();
    let baselines = [DegreeKind::Positive, DegreeKind::Negative, DegreeKind::Total]
        .map(|d| degree_ranking(&stats, d).top_k(k));

    targets
        .par_iter()
        .map(|&target| {
            let gamma = match target {
                SweepTarget::Gamma(g) => Some(g),
                SweepTarget::Theta(_) => None,
            };
            match centrality(g, kind, target.into(), walk) {
                Ok(out) => {
                    let top = out.ranking.top_k(k);
                    let [pos, neg, total] = baselines.each_ref().map(|b| jaccard(&top, b));
                    let empty_sets = top.members.is_empty()
                        && baselines.iter().any(|b| b.members.is_empty());
                    SweepRow {
                        gamma,
                        theta: Some(out.theta),
                        jaccard_pos: Some(pos),
                        jaccard_neg: Some(neg),
                        jaccard_total: Some(total),
                        empty_sets,
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    gamma,
                    theta: match target {
                        SweepTarget::Theta(t) => Some(t),
                        SweepTarget::Gamma(_) => None,
                    },
                    jaccard_pos: None,
                    jaccard_neg: None,
                    jaccard_total: None,
                    empty_sets: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
