// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures: a seeded corpus of small signed graphs and a brute-force
//! oracle that enumerates every node sequence directly, without going through
//! the library's walk or measure code.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistrank::graph::{AttributedGraph, Sign};
use twistrank::measure::PathMeasureKind;

pub const CORPUS_SEED: u64 = 0x5eed_0001;
pub const ATTR_DIM: usize = 2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph on at most 12 nodes with both edge signs present and
/// two-dimensional node attributes. Isolated nodes may occur.
pub fn random_graph(rng: &mut ChaCha8Rng) -> AttributedGraph {
    loop {
        let n = rng.gen_range(3..=12);
        let density = rng.gen_range(0.2..0.7);
        let neg_share = rng.gen_range(0.15..0.6);
        let mut edges = Vec::new();
        for u in 0..n {
            for w in u + 1..n {
                if rng.gen_bool(density) {
                    let s = if rng.gen_bool(neg_share) { Sign::Negative } else { Sign::Positive };
                    edges.push((u, w, s));
                }
            }
        }
        let pos = edges.iter().any(|e| e.2 == Sign::Positive);
        let neg = edges.iter().any(|e| e.2 == Sign::Negative);
        if !(pos && neg) {
            continue;
        }
        let attrs = (0..n * ATTR_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        return AttributedGraph::from_indexed(n, &edges)
            .unwrap()
            .with_attributes(ATTR_DIM, attrs)
            .unwrap();
    }
}

pub fn corpus(count: usize) -> Vec<AttributedGraph> {
    let mut r = rng(CORPUS_SEED);
    (0..count).map(|_| random_graph(&mut r)).collect()
}

pub fn random_ad(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..ATTR_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn scalar_measures(z: Vec<f64>) -> [PathMeasureKind; 3] {
    [
        PathMeasureKind::SignProduct,
        PathMeasureKind::SignMin,
        PathMeasureKind::AdMinInner(z),
    ]
}

pub const WALKS: [(f64, f64); 3] = [(1.0, 0.0), (0.7, 0.3), (0.0, 1.0)];

/// One walk with its base probability and measure value.
#[derive(Debug, Clone)]
pub struct OraclePath {
    pub nodes: Vec<usize>,
    pub base: f64,
    pub value: f64,
}

fn adjacency(g: &AttributedGraph) -> Vec<Vec<i32>> {
    let n = g.node_count();
    let mut a = vec![vec![0; n]; n];
    for u in 0..n {
        for w in 0..n {
            if let Some(s) = g.sign(u, w) {
                a[u][w] = if s == Sign::Positive { 1 } else { -1 };
            }
        }
    }
    a
}

fn score(g: &AttributedGraph, z: &[f64], u: usize) -> f64 {
    z.iter().zip(g.attrs(u)).map(|(a, b)| a * b).sum()
}

fn value(g: &AttributedGraph, measure: &PathMeasureKind, nodes: &[usize], signs: &[i32]) -> f64 {
    match measure {
        PathMeasureKind::SignProduct => signs.iter().product::<i32>() as f64,
        PathMeasureKind::SignMin => *signs.iter().min().unwrap() as f64,
        PathMeasureKind::AdMinInner(z) => nodes
            .iter()
            .map(|&u| score(g, z, u))
            .fold(f64::INFINITY, f64::min),
        PathMeasureKind::Stack(_) => unimplemented!("oracle handles scalar measures"),
    }
}

/// Every sequence `(u, w)` and `(u, v, w)` of nodes with nonzero base
/// probability, by scanning all pairs and triples.
pub fn oracle_paths(g: &AttributedGraph, measure: &PathMeasureKind, beta1: f64, beta2: f64) -> Vec<OraclePath> {
    let n = g.node_count();
    let a = adjacency(g);
    let deg: Vec<f64> = a.iter().map(|row| row.iter().filter(|&&x| x != 0).count() as f64).collect();
    let two_m: f64 = deg.iter().sum();
    let mut out = Vec::new();
    for u in 0..n {
        for w in 0..n {
            if a[u][w] != 0 && beta1 > 0.0 {
                out.push(OraclePath {
                    nodes: vec![u, w],
                    base: beta1 / two_m,
                    value: value(g, measure, &[u, w], &[a[u][w]]),
                });
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if a[u][v] != 0 && a[v][w] != 0 && beta2 > 0.0 {
                    out.push(OraclePath {
                        nodes: vec![u, v, w],
                        base: beta2 / (two_m * deg[v]),
                        value: value(g, measure, &[u, v, w], &[a[u][v], a[v][w]]),
                    });
                }
            }
        }
    }
    out
}

/// Twisted masses of `paths` at `theta`, normalized with a max shift.
pub fn oracle_masses(paths: &[OraclePath], theta: f64) -> Vec<f64> {
    let logs: Vec<f64> = paths.iter().map(|p| theta * p.value + p.base.ln()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn oracle_free_energy(paths: &[OraclePath], theta: f64) -> f64 {
    let logs: Vec<f64> = paths.iter().map(|p| theta * p.value + p.base.ln()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

pub fn oracle_mean(paths: &[OraclePath], theta: f64) -> f64 {
    oracle_masses(paths, theta).iter().zip(paths).map(|(m, p)| m * p.value).sum()
}

/// Dense endpoint-pair distribution.
pub fn oracle_bivariate(g: &AttributedGraph, measure: &PathMeasureKind, beta1: f64, beta2: f64, theta: f64) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let paths = oracle_paths(g, measure, beta1, beta2);
    let mut out = vec![vec![0.0; n]; n];
    for (p, m) in paths.iter().zip(oracle_masses(&paths, theta)) {
        out[p.nodes[0]][*p.nodes.last().unwrap()] += m;
    }
    out
}

pub fn oracle_start_marginal(g: &AttributedGraph, measure: &PathMeasureKind, beta1: f64, beta2: f64, theta: f64) -> Vec<f64> {
    oracle_bivariate(g, measure, beta1, beta2, theta)
        .iter()
        .map(|row| row.iter().sum())
        .collect()
}

/// Graph with the positive/negative edge totals of the blog network after
/// injection: 863 nodes, 15225 positive and 1425 negative edges, placed by a
/// seeded shuffle of all node pairs.
pub fn blog_stats_graph() -> AttributedGraph {
    use rand::seq::SliceRandom;
    let n = 863;
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |w| (u, w))).collect();
    pairs.shuffle(&mut rng(863));
    let edges: Vec<_> = pairs
        .into_iter()
        .take(15225 + 1425)
        .enumerate()
        .map(|(i, (u, w))| (u, w, if i < 15225 { Sign::Positive } else { Sign::Negative }))
        .collect();
    AttributedGraph::from_indexed(n, &edges).unwrap()
}

pub const REFERENCE_GAMMAS: [f64; 7] = [-0.99, -0.9, -0.5, 0.0, 0.5, 0.9, 0.99];
pub const REFERENCE_THETAS: [f64; 7] = [-3.8310, -2.6566, -1.7337, -1.1844, -0.6351, 0.2878, 1.4623];
