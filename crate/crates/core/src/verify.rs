// SPDX-License-Identifier: Apache-2.0

//! Self-checks on a small graph. Every quantity the pipeline computes in
//! closed form is recomputed by brute-force path enumeration and the two are
//! compared.

use serde::Serialize;

use crate::centrality::{bivariate, bivariate_from_paths, influence_closed_beta2_zero, marginal, Side};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::measure::PathMeasureKind;
use crate::sampling::{base_walk_prob, enumerate_paths, WalkConfig, DEFAULT_PATH_BUDGET};
use crate::twisting::{free_energy_gradient, solve_theta_numeric, twist, MeasureProfile, TwistConfig};

pub const THETAS: [f64; 3] = [-2.0, 0.0, 1.5];
pub const EXACT_TOLERANCE: f64 = 1e-12;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-10;
const FD_STEP: f64 = 1e-5;
const MONOTONE_GRID: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// A report whose only entry is a failed input validation.
    pub fn invalid_input(message: impl Into<String>) -> Self {
        VerifyReport {
            checks: vec![PropertyCheck {
                name: "input validation".into(),
                max_error: f64::INFINITY,
                tolerance: 0.0,
                passed: false,
                cases: 1,
                detail: Some(message.into()),
            }],
        }
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:width$}  max_error={:.3e}  tol={:.0e}  cases={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_error,
                c.tolerance,
                c.cases,
            ));
            if let Some(d) = &c.detail {
                out.push_str(&format!("  ({d})"));
            }
            out.push('\n');
        }
        out
    }
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    max_error: f64,
    cases: usize,
    detail: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally { name, tolerance, max_error: 0.0, cases: 0, detail: None }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        // NaN must count as a failure
        if err.is_nan() || err > self.max_error {
            self.max_error = err;
        }
    }

    fn finish(self) -> PropertyCheck {
        PropertyCheck {
            name: self.name.into(),
            passed: self.max_error <= self.tolerance,
            max_error: self.max_error,
            tolerance: self.tolerance,
            cases: self.cases,
            detail: self.detail,
        }
    }
}

pub fn walk_configs() -> [WalkConfig; 3] {
    [
        WalkConfig::single_step(),
        WalkConfig::new(0.7, 0.3).expect("valid walk weights"),
        WalkConfig::two_step(),
    ]
}

/// Scalar measures applicable to `g`; the advertisement measure is included
/// when the graph carries attributes, scored against the all-ones vector.
pub fn measures_for(g: &AttributedGraph) -> Vec<PathMeasureKind> {
    let mut out = vec![PathMeasureKind::SignProduct, PathMeasureKind::SignMin];
    if g.attr_dim() > 0 {
        out.push(PathMeasureKind::AdMinInner(vec![1.0; g.attr_dim()]));
    }
    out
}

pub fn verify_graph(g: &AttributedGraph) -> Result<VerifyReport> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let measures = measures_for(g);
    let walks = walk_configs();
    let mut checks = vec![structure(g)];

    let mut base_norm = Tally::new("base law normalization", EXACT_TOLERANCE);
    let mut base_rev = Tally::new("base law reversibility", EXACT_TOLERANCE);
    for walk in &walks {
        let mut total = 0.0;
        for path in enumerate_paths(g, walk, DEFAULT_PATH_BUDGET)? {
            total += path.base_prob;
            let back = base_walk_prob(g, walk, path.reversed().nodes());
            base_rev.record((path.base_prob - back).abs());
        }
        base_norm.record((total - 1.0).abs());
    }
    checks.push(base_norm.finish());
    checks.push(base_rev.finish());

    let mut norm = Tally::new("twisted law normalization", EXACT_TOLERANCE);
    let mut rev = Tally::new("twisted law reversibility", EXACT_TOLERANCE);
    let mut summation = Tally::new("closed summation vs enumeration", EXACT_TOLERANCE);
    let mut symmetry = Tally::new("start/end marginal symmetry", EXACT_TOLERANCE);
    for measure in &measures {
        for walk in &walks {
            for theta in THETAS {
                let cfg = TwistConfig::scalar(measure.clone(), theta, *walk);
                let t = twist(g, &cfg)?;
                norm.record((t.total_mass() - 1.0).abs());
                // enumeration visits a path and its reverse; compare both ways
                let mut masses = std::collections::HashMap::new();
                for p in &t.paths {
                    masses.insert(p.path.nodes().to_vec(), p.mass);
                }
                for p in &t.paths {
                    let back = masses.get(p.path.reversed().nodes()).copied().unwrap_or(f64::NAN);
                    rev.record((p.mass - back).abs());
                }
                let oracle = bivariate_from_paths(g, &t);
                let fast = bivariate(g, &cfg)?;
                for u in 0..g.node_count() {
                    for w in 0..g.node_count() {
                        summation.record((fast.pair_mass(u, w) - oracle.pair_mass(u, w)).abs());
                    }
                }
                let start = marginal(&fast, Side::Start);
                let end = marginal(&fast, Side::End);
                for (a, b) in start.scores().iter().zip(end.scores()) {
                    symmetry.record((a - b).abs());
                }
            }
        }
    }
    checks.extend([norm.finish(), rev.finish(), summation.finish(), symmetry.finish()]);

    let mut closed = Tally::new("closed-form influence marginal", EXACT_TOLERANCE);
    let stats = g.stats();
    for theta in THETAS {
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, theta, WalkConfig::single_step());
        let pipeline = marginal(&bivariate_from_paths(g, &twist(g, &cfg)?), Side::Start);
        let formula = influence_closed_beta2_zero(&stats, theta)?;
        for (a, b) in pipeline.scores().iter().zip(formula.scores()) {
            closed.record((a - b).abs());
        }
    }
    checks.push(closed.finish());

    checks.extend(calculus(g, &measures, &walks)?);
    Ok(VerifyReport { checks })
}

fn structure(g: &AttributedGraph) -> PropertyCheck {
    let mut t = Tally::new("graph invariants", 0.0);
    let degree_sum: usize = (0..g.node_count()).map(|u| g.degree(u)).sum();
    t.record(degree_sum.abs_diff(2 * g.edge_count()) as f64);
    t.record((g.positive_edge_count() + g.negative_edge_count()).abs_diff(g.edge_count()) as f64);
    for u in 0..g.node_count() {
        for &(w, s) in g.neighbors(u) {
            let ok = u != w && g.sign(w, u) == Some(s);
            t.record(if ok { 0.0 } else { 1.0 });
        }
    }
    t.finish()
}

fn calculus(
    g: &AttributedGraph,
    measures: &[PathMeasureKind],
    walks: &[WalkConfig],
) -> Result<Vec<PropertyCheck>> {
    let mut fd = Tally::new("gradient vs finite differences", GRADIENT_TOLERANCE);
    let mut monotone = Tally::new("gradient monotone in theta", 0.0);
    let mut round_trip = Tally::new("round-trip theta solve", ROUND_TRIP_TOLERANCE);
    let mut skipped = 0;
    for measure in measures {
        for walk in walks {
            let free_energy = |theta: f64| -> Result<f64> {
                Ok(twist(g, &TwistConfig::scalar(measure.clone(), theta, *walk))?.result.free_energy)
            };
            for theta in THETAS {
                let cfg = TwistConfig::scalar(measure.clone(), theta, *walk);
                let grad = free_energy_gradient(g, &cfg)?[0];
                let numeric = (free_energy(theta + FD_STEP)? - free_energy(theta - FD_STEP)?) / (2.0 * FD_STEP);
                fd.record((numeric - grad).abs() / grad.abs().max(1.0));
            }

            let profile = MeasureProfile::build(g, measure, walk)?;
            let mut prev = f64::NEG_INFINITY;
            for i in 0..MONOTONE_GRID {
                let theta = -5.0 + 10.0 * i as f64 / (MONOTONE_GRID - 1) as f64;
                let grad = profile.mean(&[theta])[0];
                monotone.record((prev - grad).max(0.0));
                prev = grad;
            }

            let (lo, hi) = profile.range(0);
            if lo == hi {
                skipped += 1;
                continue;
            }
            for frac in [0.1, 0.5, 0.9] {
                let gamma = lo + frac * (hi - lo);
                let theta = solve_theta_numeric(g, measure, walk, &[gamma])?;
                let cfg = TwistConfig::new(measure.clone(), theta, *walk);
                round_trip.record((free_energy_gradient(g, &cfg)?[0] - gamma).abs());
            }
        }
    }
    if skipped > 0 {
        round_trip.detail = Some(format!("{skipped} constant-measure configurations skipped"));
    }
    Ok(vec![fd.finish(), monotone.finish(), round_trip.finish()])
}
