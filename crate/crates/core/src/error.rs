// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(u64),

    #[error("edge ({u}, {w}) listed with conflicting signs")]
    ConflictingSign { u: u64, w: u64 },

    #[error("attribute vector for node {node} has length {found}, expected {expected}")]
    RaggedAttributes {
        node: u64,
        expected: usize,
        found: usize,
    },

    #[error("node {0} has more than one attribute record")]
    DuplicateAttributes(u64),

    #[error("non-finite attribute value for node {0}")]
    NonFiniteAttribute(u64),

    #[error("node {0} has no partition label")]
    MissingPartitionLabel(u64),

    #[error("requested {requested} negative edges but only {available} cross-partition non-edges exist")]
    InjectionExhausted { requested: usize, available: usize },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid walk mix: beta1={beta1}, beta2={beta2} (need beta1, beta2 >= 0 and beta1 + beta2 = 1)")]
    InvalidWalkConfig { beta1: f64, beta2: f64 },

    #[error("invalid PageRank parameters: {0}")]
    InvalidPageRank(String),

    #[error("node {0} has out-degree zero under a damped random surfer")]
    DanglingNode(u64),

    #[error("PageRank did not converge in {iterations} iterations (residual {residual:e})")]
    PageRankNotConverged { iterations: usize, residual: f64 },

    #[error("transition matrix row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },

    #[error("path enumeration needs {required} paths, budget is {budget}")]
    BudgetExceeded { required: usize, budget: usize },

    #[error("advertisement vector has dimension {found}, graph attributes have dimension {expected}")]
    AdDimension { expected: usize, found: usize },

    #[error("graph carries no node attributes")]
    MissingAttributes,

    #[error("temperature has dimension {found}, measure has dimension {expected}")]
    ThetaDimension { expected: usize, found: usize },

    #[error("non-finite temperature")]
    NonFiniteTheta,

    #[error("target {gamma} for component {component} is outside the achievable range ({min}, {max})")]
    Unachievable {
        component: usize,
        gamma: f64,
        min: f64,
        max: f64,
    },

    #[error("path measure is constant on the support; the temperature is not identifiable")]
    SingularMeasure,

    #[error("temperature solver stalled after {iterations} iterations (residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("closed-form temperature needs both edge signs present (m+={positive}, m-={negative})")]
    OneSignedGraph { positive: usize, negative: usize },

    #[error("target mean {0} must lie strictly between -1 and 1")]
    GammaOutOfRange(f64),

    #[error("dense storage refused for {0} nodes")]
    TooLargeForDense(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
