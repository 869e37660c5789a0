// SPDX-License-Identifier: Apache-2.0

//! Undirected signed graph with optional per-node attribute vectors.
//!
//! Node ids supplied by callers are arbitrary `u64` labels. They are
//! compacted into dense indices `0..n` in ascending label order, so the
//! label of an index can always be recovered and ranking tie-breaks by
//! index coincide with tie-breaks by original label.

mod preprocess;

pub use preprocess::{preprocess, preprocess_graph, NegativeInjection, PreprocessReport};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `0..n`.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn from_int(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

/// One line of an edge list, in caller-supplied labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: u64,
    pub w: u64,
    pub sign: Sign,
}

impl EdgeRecord {
    pub fn new(u: u64, w: u64, sign: Sign) -> Self {
        EdgeRecord { u, w, sign }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttrRecord {
    pub node: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    ids: Vec<u64>,
    adj: Vec<Vec<(NodeId, Sign)>>,
    attr_dim: usize,
    attrs: Vec<f64>,
    m_pos: usize,
    m_neg: usize,
}

impl AttributedGraph {
    /// Validates an edge list (and optional attribute records) into a graph.
    ///
    /// Repeated records of the same unordered pair collapse when their signs
    /// agree and are rejected otherwise. Self-loops are rejected. Nodes that
    /// only appear in the attribute records become isolated nodes; nodes
    /// without an attribute record get the zero vector.
    pub fn load(edges: &[EdgeRecord], attrs: Option<&[AttrRecord]>) -> Result<Self> {
        let mut pairs: BTreeMap<(u64, u64), Sign> = BTreeMap::new();
        let mut labels = BTreeSet::new();
        for e in edges {
            if e.u == e.w {
                return Err(Error::SelfLoop(e.u));
            }
            let key = (e.u.min(e.w), e.u.max(e.w));
            match pairs.get(&key) {
                Some(&s) if s != e.sign => {
                    return Err(Error::ConflictingSign { u: key.0, w: key.1 })
                }
                Some(_) => {}
                None => {
                    pairs.insert(key, e.sign);
                }
            }
            labels.insert(e.u);
            labels.insert(e.w);
        }
        let attr_map = collect_attrs(attrs)?;
        labels.extend(attr_map.keys().copied());

        let ids: Vec<u64> = labels.into_iter().collect();
        let index = |label: u64| ids.binary_search(&label).expect("label registered");
        let indexed: Vec<(NodeId, NodeId, Sign)> = pairs
            .iter()
            .map(|(&(u, w), &s)| (index(u), index(w), s))
            .collect();
        let mut g = Self::assemble(ids.clone(), &indexed);
        g.set_attrs(&attr_map)?;
        Ok(g)
    }

    /// Builds a graph on nodes `0..n` (labels equal indices) from indexed
    /// edges. Same validation as [`AttributedGraph::load`].
    pub fn from_indexed(n: usize, edges: &[(NodeId, NodeId, Sign)]) -> Result<Self> {
        let mut pairs: BTreeMap<(NodeId, NodeId), Sign> = BTreeMap::new();
        for &(u, w, s) in edges {
            assert!(u < n && w < n, "edge ({u}, {w}) out of range for {n} nodes");
            if u == w {
                return Err(Error::SelfLoop(u as u64));
            }
            let key = (u.min(w), u.max(w));
            match pairs.get(&key) {
                Some(&t) if t != s => {
                    return Err(Error::ConflictingSign {
                        u: key.0 as u64,
                        w: key.1 as u64,
                    })
                }
                _ => {
                    pairs.insert(key, s);
                }
            }
        }
        let indexed: Vec<_> = pairs.into_iter().map(|((u, w), s)| (u, w, s)).collect();
        Ok(Self::assemble((0..n as u64).collect(), &indexed))
    }

    /// Attaches a dense `n x dim` row-major attribute matrix.
    pub fn with_attributes(mut self, dim: usize, values: Vec<f64>) -> Result<Self> {
        let n = self.node_count();
        if values.len() != n * dim {
            return Err(Error::RaggedAttributes {
                node: 0,
                expected: n * dim,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteAttribute(self.ids[pos / dim.max(1)]));
        }
        self.attr_dim = dim;
        self.attrs = values;
        Ok(self)
    }

    /// Builds from deduplicated `(u, w, sign)` triples with `u != w`.
    pub(crate) fn assemble(ids: Vec<u64>, edges: &[(NodeId, NodeId, Sign)]) -> Self {
        let n = ids.len();
        let mut adj = vec![Vec::new(); n];
        let (mut m_pos, mut m_neg) = (0, 0);
        for &(u, w, s) in edges {
            adj[u].push((w, s));
            adj[w].push((u, s));
            match s {
                Sign::Positive => m_pos += 1,
                Sign::Negative => m_neg += 1,
            }
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(w, _)| w);
        }
        AttributedGraph {
            ids,
            adj,
            attr_dim: 0,
            attrs: Vec::new(),
            m_pos,
            m_neg,
        }
    }

    pub(crate) fn set_attrs(&mut self, map: &BTreeMap<u64, Vec<f64>>) -> Result<()> {
        let dim = map.values().next().map_or(0, Vec::len);
        let mut attrs = vec![0.0; self.node_count() * dim];
        for (label, values) in map {
            if let Some(u) = self.index_of(*label) {
                attrs[u * dim..(u + 1) * dim].copy_from_slice(values);
            }
        }
        self.attr_dim = dim;
        self.attrs = attrs;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of undirected edges `m`.
    pub fn edge_count(&self) -> usize {
        self.m_pos + self.m_neg
    }

    pub fn positive_edge_count(&self) -> usize {
        self.m_pos
    }

    pub fn negative_edge_count(&self) -> usize {
        self.m_neg
    }

    pub fn original_id(&self, u: NodeId) -> u64 {
        self.ids[u]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn index_of(&self, label: u64) -> Option<NodeId> {
        self.ids.binary_search(&label).ok()
    }

    /// Neighbors of `u` with edge signs, sorted by neighbor index.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, Sign)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adj[u].len()
    }

    pub fn sign(&self, u: NodeId, w: NodeId) -> Option<Sign> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&w, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn attr_dim(&self) -> usize {
        self.attr_dim
    }

    pub fn attrs(&self, u: NodeId) -> &[f64] {
        &self.attrs[u * self.attr_dim..(u + 1) * self.attr_dim]
    }

    /// Each undirected edge once, as `(u, w, sign)` with `u < w`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Sign)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(w, _)| u < w)
                .map(move |&(w, s)| (u, w, s))
        })
    }

    /// Edge records in original labels, suitable for [`AttributedGraph::load`].
    pub fn edge_records(&self) -> Vec<EdgeRecord> {
        self.edges()
            .map(|(u, w, s)| EdgeRecord::new(self.ids[u], self.ids[w], s))
            .collect()
    }

    pub fn attr_records(&self) -> Option<Vec<AttrRecord>> {
        if self.attr_dim == 0 {
            return None;
        }
        Some(
            (0..self.node_count())
                .map(|u| AttrRecord {
                    node: self.ids[u],
                    values: self.attrs(u).to_vec(),
                })
                .collect(),
        )
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.node_count();
        let mut pos = vec![0; n];
        let mut neg = vec![0; n];
        for (u, list) in self.adj.iter().enumerate() {
            for &(_, s) in list {
                match s {
                    Sign::Positive => pos[u] += 1,
                    Sign::Negative => neg[u] += 1,
                }
            }
        }
        GraphStats {
            ids: self.ids.clone(),
            m_pos: self.m_pos,
            m_neg: self.m_neg,
            pos_degree: pos,
            neg_degree: neg,
        }
    }
}

fn collect_attrs(attrs: Option<&[AttrRecord]>) -> Result<BTreeMap<u64, Vec<f64>>> {
    let mut map = BTreeMap::new();
    let Some(records) = attrs else {
        return Ok(map);
    };
    let dim = records.first().map_or(0, |r| r.values.len());
    for r in records {
        if r.values.len() != dim {
            return Err(Error::RaggedAttributes {
                node: r.node,
                expected: dim,
                found: r.values.len(),
            });
        }
        if r.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteAttribute(r.node));
        }
        if map.insert(r.node, r.values.clone()).is_some() {
            return Err(Error::DuplicateAttributes(r.node));
        }
    }
    Ok(map)
}

/// Edge-sign totals `m+` and `m-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCounts {
    pub positive: usize,
    pub negative: usize,
}

/// Degree and sign statistics. Per-node vectors are indexed by [`NodeId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub ids: Vec<u64>,
    pub m_pos: usize,
    pub m_neg: usize,
    pub pos_degree: Vec<usize>,
    pub neg_degree: Vec<usize>,
}

impl GraphStats {
    pub fn m(&self) -> usize {
        self.m_pos + self.m_neg
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.pos_degree[u] + self.neg_degree[u]
    }

    pub fn sign_counts(&self) -> SignCounts {
        SignCounts {
            positive: self.m_pos,
            negative: self.m_neg,
        }
    }
}
