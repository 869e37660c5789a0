// SPDX-License-Identifier: Apache-2.0

//! Dataset cleaning: symmetrize, drop self-loops and parallel edges,
//! optionally inject random negative edges across a node partition, then
//! strip low-degree nodes until every survivor meets the threshold.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttrRecord, AttributedGraph, EdgeRecord, NodeId, Sign};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeInjection {
    pub count: usize,
    pub seed: u64,
    /// Community label per original node id.
    pub partition: BTreeMap<u64, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub input_nodes: usize,
    pub input_records: usize,
    /// Nodes carrying a self-loop record; the loops are dropped.
    pub self_loops: Vec<u64>,
    /// Unordered pairs that appeared in more than one record.
    pub collapsed_edges: Vec<(u64, u64)>,
    pub injected_edges: Vec<(u64, u64)>,
    /// Nodes deleted by the degree filter, in ascending id order.
    pub removed_nodes: Vec<u64>,
    pub min_degree: usize,
    pub output_nodes: usize,
    pub output_edges: usize,
    pub output_positive: usize,
    pub output_negative: usize,
}

/// Cleans a raw (possibly directed) edge list.
///
/// Injection happens before degree filtering, so the number of injected
/// edges that survive depends on the seed.
pub fn preprocess(
    edges: &[EdgeRecord],
    attrs: Option<&[AttrRecord]>,
    min_degree: usize,
    injection: Option<&NegativeInjection>,
) -> Result<(AttributedGraph, PreprocessReport)> {
    clean(&[], edges, attrs, min_degree, injection)
}

/// Runs [`preprocess`] over an already validated graph, isolated nodes included.
pub fn preprocess_graph(
    g: &AttributedGraph,
    min_degree: usize,
    injection: Option<&NegativeInjection>,
) -> Result<(AttributedGraph, PreprocessReport)> {
    let attrs = g.attr_records();
    clean(
        g.original_ids(),
        &g.edge_records(),
        attrs.as_deref(),
        min_degree,
        injection,
    )
}

fn clean(
    nodes: &[u64],
    edges: &[EdgeRecord],
    attrs: Option<&[AttrRecord]>,
    min_degree: usize,
    injection: Option<&NegativeInjection>,
) -> Result<(AttributedGraph, PreprocessReport)> {
    let mut report = PreprocessReport {
        input_records: edges.len(),
        min_degree,
        ..Default::default()
    };
    let attr_map = super::collect_attrs(attrs)?;

    let mut labels: BTreeSet<u64> = nodes.iter().copied().collect();
    labels.extend(attr_map.keys().copied());
    let mut pairs: BTreeMap<(u64, u64), (Sign, usize)> = BTreeMap::new();
    let mut loops = BTreeSet::new();
    for e in edges {
        labels.insert(e.u);
        labels.insert(e.w);
        if e.u == e.w {
            loops.insert(e.u);
            continue;
        }
        let key = (e.u.min(e.w), e.u.max(e.w));
        let entry = pairs.entry(key).or_insert((e.sign, 0));
        if entry.0 != e.sign {
            return Err(Error::ConflictingSign { u: key.0, w: key.1 });
        }
        entry.1 += 1;
    }
    report.input_nodes = labels.len();
    report.self_loops = loops.into_iter().collect();
    report.collapsed_edges = pairs
        .iter()
        .filter(|(_, &(_, count))| count > 1)
        .map(|(&k, _)| k)
        .collect();

    let mut edge_set: BTreeMap<(u64, u64), Sign> =
        pairs.into_iter().map(|(k, (s, _))| (k, s)).collect();

    if let Some(inj) = injection {
        let all: Vec<u64> = labels.iter().copied().collect();
        let injected = inject_negatives(&all, &edge_set, inj)?;
        for &pair in &injected {
            edge_set.insert(pair, Sign::Negative);
        }
        report.injected_edges = injected;
    }

    let survivors = degree_filter(&labels, &edge_set, min_degree);
    report.removed_nodes = labels.difference(&survivors).copied().collect();

    let ids: Vec<u64> = survivors.into_iter().collect();
    let index = |label: u64| ids.binary_search(&label).ok();
    let indexed: Vec<(NodeId, NodeId, Sign)> = edge_set
        .iter()
        .filter_map(|(&(u, w), &s)| Some((index(u)?, index(w)?, s)))
        .collect();
    let mut graph = AttributedGraph::assemble(ids, &indexed);
    graph.set_attrs(&attr_map)?;

    report.output_nodes = graph.node_count();
    report.output_edges = graph.edge_count();
    report.output_positive = graph.positive_edge_count();
    report.output_negative = graph.negative_edge_count();
    Ok((graph, report))
}

fn inject_negatives(
    nodes: &[u64],
    existing: &BTreeMap<(u64, u64), Sign>,
    inj: &NegativeInjection,
) -> Result<Vec<(u64, u64)>> {
    let mut label_of = Vec::with_capacity(nodes.len());
    for &u in nodes {
        let label = inj
            .partition
            .get(&u)
            .ok_or(Error::MissingPartitionLabel(u))?;
        label_of.push(label.as_str());
    }
    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for &l in &label_of {
        *sizes.entry(l).or_default() += 1;
    }
    let n = nodes.len();
    let same: usize = sizes.values().map(|&c| c * (c.saturating_sub(1)) / 2).sum();
    let cross_pairs = n * n.saturating_sub(1) / 2 - same;
    let cross_edges = existing
        .keys()
        .filter(|&&(u, w)| {
            let iu = nodes.binary_search(&u).unwrap();
            let iw = nodes.binary_search(&w).unwrap();
            label_of[iu] != label_of[iw]
        })
        .count();
    let available = cross_pairs - cross_edges;
    if inj.count > available {
        return Err(Error::InjectionExhausted {
            requested: inj.count,
            available,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(inj.seed);
    let mut chosen: BTreeSet<(u64, u64)> = BTreeSet::new();
    let mut order = Vec::with_capacity(inj.count);
    if inj.count * 2 > available {
        // dense request: enumerate candidates and take a seeded sample
        let mut candidates = Vec::with_capacity(available);
        for i in 0..n {
            for j in i + 1..n {
                if label_of[i] != label_of[j] && !existing.contains_key(&(nodes[i], nodes[j])) {
                    candidates.push((nodes[i], nodes[j]));
                }
            }
        }
        for k in 0..inj.count {
            let pick = rng.gen_range(k..candidates.len());
            candidates.swap(k, pick);
            order.push(candidates[k]);
        }
    } else {
        while order.len() < inj.count {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j || label_of[i] == label_of[j] {
                continue;
            }
            let pair = (nodes[i.min(j)], nodes[i.max(j)]);
            if existing.contains_key(&pair) || !chosen.insert(pair) {
                continue;
            }
            order.push(pair);
        }
    }
    order.sort_unstable();
    Ok(order)
}

/// Iteratively deletes nodes whose degree is below `min_degree`.
fn degree_filter(
    labels: &BTreeSet<u64>,
    edges: &BTreeMap<(u64, u64), Sign>,
    min_degree: usize,
) -> BTreeSet<u64> {
    let nodes: Vec<u64> = labels.iter().copied().collect();
    let idx = |l: u64| nodes.binary_search(&l).unwrap();
    let mut adj = vec![Vec::new(); nodes.len()];
    for &(u, w) in edges.keys() {
        let (iu, iw) = (idx(u), idx(w));
        adj[iu].push(iw);
        adj[iw].push(iu);
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = vec![true; nodes.len()];
    let mut stack: Vec<usize> = (0..nodes.len()).filter(|&u| degree[u] < min_degree).collect();
    for &u in &stack {
        alive[u] = false;
    }
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if alive[w] {
                degree[w] -= 1;
                if degree[w] < min_degree {
                    alive[w] = false;
                    stack.push(w);
                }
            }
        }
    }
    nodes
        .into_iter()
        .zip(alive)
        .filter_map(|(l, a)| a.then_some(l))
        .collect()
}
