// SPDX-License-Identifier: Apache-2.0

//! Path measures: real-valued functions of the node and edge attributes
//! along a walk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId, Sign};
use crate::sampling::WalkPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PathMeasureKind {
    /// Product of the edge signs along the path.
    SignProduct,
    /// Minimum edge sign along the path.
    SignMin,
    /// Minimum over the path's nodes of `z . h_V(u)` for advertisement `z`.
    AdMinInner(Vec<f64>),
    /// Vector-valued measure whose components are the listed measures.
    Stack(Vec<PathMeasureKind>),
}

impl PathMeasureKind {
    pub fn dim(&self) -> usize {
        match self {
            PathMeasureKind::Stack(parts) => parts.iter().map(Self::dim).sum(),
            _ => 1,
        }
    }

    pub fn validate(&self, g: &AttributedGraph) -> Result<()> {
        match self {
            PathMeasureKind::SignProduct | PathMeasureKind::SignMin => Ok(()),
            PathMeasureKind::AdMinInner(z) => {
                if g.attr_dim() == 0 {
                    return Err(Error::MissingAttributes);
                }
                if z.len() != g.attr_dim() {
                    return Err(Error::AdDimension {
                        expected: g.attr_dim(),
                        found: z.len(),
                    });
                }
                Ok(())
            }
            PathMeasureKind::Stack(parts) => parts.iter().try_for_each(|p| p.validate(g)),
        }
    }

    /// Prepares per-node data so paths can be scored without re-reading
    /// attribute vectors.
    pub fn evaluator<'g>(&self, g: &'g AttributedGraph) -> Result<MeasureEvaluator<'g>> {
        self.validate(g)?;
        let mut components = Vec::with_capacity(self.dim());
        self.flatten(g, &mut components);
        Ok(MeasureEvaluator { graph: g, components })
    }

    fn flatten(&self, g: &AttributedGraph, out: &mut Vec<Component>) {
        match self {
            PathMeasureKind::SignProduct => out.push(Component::SignProduct),
            PathMeasureKind::SignMin => out.push(Component::SignMin),
            PathMeasureKind::AdMinInner(z) => {
                let scores = (0..g.node_count())
                    .map(|u| z.iter().zip(g.attrs(u)).map(|(a, b)| a * b).sum())
                    .collect();
                out.push(Component::NodeMin(scores));
            }
            PathMeasureKind::Stack(parts) => parts.iter().for_each(|p| p.flatten(g, out)),
        }
    }
}

#[derive(Debug, Clone)]
enum Component {
    SignProduct,
    SignMin,
    NodeMin(Vec<f64>),
}

/// A measure bound to one graph.
#[derive(Debug, Clone)]
pub struct MeasureEvaluator<'g> {
    graph: &'g AttributedGraph,
    components: Vec<Component>,
}

impl MeasureEvaluator<'_> {
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Scores a walk whose hop signs are already known. `signs` has one
    /// entry per hop.
    pub fn eval_with_signs(&self, nodes: &[NodeId], signs: &[Sign], out: &mut [f64]) {
        debug_assert_eq!(nodes.len(), signs.len() + 1);
        for (slot, c) in out.iter_mut().zip(&self.components) {
            *slot = match c {
                Component::SignProduct => signs.iter().map(|s| s.value()).product(),
                Component::SignMin => {
                    if signs.contains(&Sign::Negative) {
                        -1.0
                    } else {
                        1.0
                    }
                }
                Component::NodeMin(scores) => nodes
                    .iter()
                    .map(|&u| scores[u])
                    .fold(f64::INFINITY, f64::min),
            };
        }
    }

    /// Scores a walk, looking up its hop signs. Returns `None` when some hop
    /// is not an edge.
    pub fn eval(&self, nodes: &[NodeId], out: &mut [f64]) -> Option<()> {
        let mut signs = [Sign::Positive; 2];
        for (i, hop) in nodes.windows(2).enumerate() {
            signs[i] = self.graph.sign(hop[0], hop[1])?;
        }
        self.eval_with_signs(nodes, &signs[..nodes.len() - 1], out);
        Some(())
    }
}

/// Measure value of a single walk.
pub fn measure_eval(g: &AttributedGraph, kind: &PathMeasureKind, path: &WalkPath) -> Result<Vec<f64>> {
    let eval = kind.evaluator(g)?;
    let mut out = vec![0.0; eval.dim()];
    eval.eval(path.nodes(), &mut out)
        .expect("walk hops must be edges of the graph");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signed_path() -> AttributedGraph {
        // 0 -(-)- 1 -(-)- 2 -(+)- 3
        AttributedGraph::from_indexed(
            4,
            &[(0, 1, Sign::Negative), (1, 2, Sign::Negative), (2, 3, Sign::Positive)],
        )
        .unwrap()
    }

    #[test]
    fn enemy_of_enemy_is_friend() {
        let g = signed_path();
        let p = WalkPath::two_hop(0, 1, 2, 0.1);
        assert_eq!(measure_eval(&g, &PathMeasureKind::SignProduct, &p).unwrap(), vec![1.0]);
        assert_eq!(measure_eval(&g, &PathMeasureKind::SignMin, &p).unwrap(), vec![-1.0]);
    }

    #[test]
    fn sign_min_of_mixed_path() {
        let g = signed_path();
        let p = WalkPath::two_hop(1, 2, 3, 0.1);
        assert_eq!(measure_eval(&g, &PathMeasureKind::SignMin, &p).unwrap(), vec![-1.0]);
        assert_eq!(measure_eval(&g, &PathMeasureKind::SignProduct, &p).unwrap(), vec![-1.0]);
        let p = WalkPath::edge(3, 2, 0.1);
        assert_eq!(measure_eval(&g, &PathMeasureKind::SignMin, &p).unwrap(), vec![1.0]);
    }

    #[test]
    fn ad_min_inner() {
        let g = AttributedGraph::from_indexed(2, &[(0, 1, Sign::Positive)])
            .unwrap()
            .with_attributes(2, vec![0.2, 0.9, 0.5, 0.1])
            .unwrap();
        let kind = PathMeasureKind::AdMinInner(vec![1.0, 0.0]);
        let v = measure_eval(&g, &kind, &WalkPath::edge(0, 1, 0.5)).unwrap();
        assert!((v[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ad_requires_matching_attributes() {
        let bare = AttributedGraph::from_indexed(2, &[(0, 1, Sign::Positive)]).unwrap();
        let kind = PathMeasureKind::AdMinInner(vec![1.0]);
        assert!(matches!(kind.validate(&bare), Err(Error::MissingAttributes)));
        let g = bare.with_attributes(2, vec![0.0; 4]).unwrap();
        assert!(matches!(
            kind.validate(&g),
            Err(Error::AdDimension { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn stacked_measure() {
        let g = signed_path();
        let kind = PathMeasureKind::Stack(vec![PathMeasureKind::SignProduct, PathMeasureKind::SignMin]);
        assert_eq!(kind.dim(), 2);
        let v = measure_eval(&g, &kind, &WalkPath::two_hop(0, 1, 2, 0.1)).unwrap();
        assert_eq!(v, vec![1.0, -1.0]);
    }
}
