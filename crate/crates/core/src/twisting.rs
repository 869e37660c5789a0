// SPDX-License-Identifier: Apache-2.0

//! Exponential change of measure on path distributions.
//!
//! Given base path probabilities `p0(r)` and a path measure `f(r)`, the
//! twisted law is `p(r) = C exp(theta . f(r)) p0(r)` with
//! `C = 1 / sum_r exp(theta . f(r)) p0(r)`. Among all laws with mean measure
//! `sum_r f(r) p(r) = gamma` it is the one closest to `p0` in relative
//! entropy. The free energy `F = -ln C` is convex in `theta`, its gradient is
//! the twisted mean of `f` and its Hessian the twisted covariance of `f`, so
//! a target mean is reached by Newton's method on `grad F(theta) = gamma`.
//!
//! All normalizations are done in the log domain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, SignCounts};
use crate::measure::PathMeasureKind;
use crate::sampling::{enumerate_paths, path_count, WalkConfig, WalkPath, DEFAULT_PATH_BUDGET};

/// Residual bound for the temperature solvers.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
const SOLVER_MAX_ITERS: usize = 200;
const BRACKET_MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistConfig {
    pub measure: PathMeasureKind,
    pub theta: Vec<f64>,
    pub walk: WalkConfig,
}

impl TwistConfig {
    pub fn new(measure: PathMeasureKind, theta: Vec<f64>, walk: WalkConfig) -> Self {
        TwistConfig { measure, theta, walk }
    }

    /// Config for a scalar measure.
    pub fn scalar(measure: PathMeasureKind, theta: f64, walk: WalkConfig) -> Self {
        Self::new(measure, vec![theta], walk)
    }

    pub fn validate(&self, g: &AttributedGraph) -> Result<()> {
        self.measure.validate(g)?;
        check_theta(&self.theta, self.measure.dim())
    }
}

fn check_theta(theta: &[f64], dim: usize) -> Result<()> {
    if theta.len() != dim {
        return Err(Error::ThetaDimension {
            expected: dim,
            found: theta.len(),
        });
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFiniteTheta);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistResult {
    /// `ln C`.
    pub log_c: f64,
    /// `F = ln(1/C) = -ln C`.
    pub free_energy: f64,
    pub mean_measure: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistedPath {
    pub path: WalkPath,
    pub measure: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistedDistribution {
    pub result: TwistResult,
    pub paths: Vec<TwistedPath>,
}

impl TwistedDistribution {
    pub fn total_mass(&self) -> f64 {
        self.paths.iter().map(|p| p.mass).sum()
    }

    /// Relative entropy `D(p || p0)` of the twisted law against the base law.
    pub fn kl_divergence(&self) -> f64 {
        self.paths
            .iter()
            .filter(|p| p.mass > 0.0)
            .map(|p| p.mass * (p.mass.ln() - p.path.base_prob.ln()))
            .sum()
    }
}

/// `ln sum_i exp(x_i)`, shifted by the maximum. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Materializes every path with its twisted mass.
pub fn twist(g: &AttributedGraph, cfg: &TwistConfig) -> Result<TwistedDistribution> {
    twist_with_budget(g, cfg, DEFAULT_PATH_BUDGET)
}

pub fn twist_with_budget(
    g: &AttributedGraph,
    cfg: &TwistConfig,
    budget: usize,
) -> Result<TwistedDistribution> {
    cfg.validate(g)?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let eval = cfg.measure.evaluator(g)?;
    let dim = eval.dim();
    let mut paths = Vec::with_capacity(path_count(g, &cfg.walk));
    let mut log_terms = Vec::with_capacity(paths.capacity());
    for path in enumerate_paths(g, &cfg.walk, budget)? {
        let mut f = vec![0.0; dim];
        eval.eval(path.nodes(), &mut f).expect("enumerated hops are edges");
        log_terms.push(dot(&cfg.theta, &f) + path.base_prob.ln());
        paths.push(TwistedPath { path, measure: f, mass: 0.0 });
    }
    let log_z = log_sum_exp(&log_terms);
    let mut mean = vec![0.0; dim];
    for (p, t) in paths.iter_mut().zip(&log_terms) {
        p.mass = (t - log_z).exp();
        for (m, f) in mean.iter_mut().zip(&p.measure) {
            *m += p.mass * f;
        }
    }
    Ok(TwistedDistribution {
        result: TwistResult {
            log_c: -log_z,
            free_energy: log_z,
            mean_measure: mean,
        },
        paths,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Base path mass aggregated by distinct measure value.
///
/// The free energy and all its derivatives depend on the paths only through
/// this table, so solving for a temperature costs `O(#distinct values)` per
/// iteration instead of a pass over every path. The sign measures have at
/// most two distinct values; the advertisement measure at most `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureProfile {
    dim: usize,
    values: Vec<f64>,
    base: Vec<f64>,
}

impl MeasureProfile {
    pub fn build(g: &AttributedGraph, measure: &PathMeasureKind, walk: &WalkConfig) -> Result<Self> {
        Self::build_with_budget(g, measure, walk, DEFAULT_PATH_BUDGET)
    }

    pub fn build_with_budget(
        g: &AttributedGraph,
        measure: &PathMeasureKind,
        walk: &WalkConfig,
        budget: usize,
    ) -> Result<Self> {
        if g.edge_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        let required = path_count(g, walk);
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let eval = measure.evaluator(g)?;
        let dim = eval.dim();
        let two_m = (2 * g.edge_count()) as f64;
        let mut groups: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
        let mut f = vec![0.0; dim];
        let mut add = |f: &[f64], mass: f64| {
            let key = f.iter().map(|v| (v + 0.0).to_bits()).collect();
            groups.entry(key).or_insert_with(|| (f.to_vec(), 0.0)).1 += mass;
        };
        for u in 0..g.node_count() {
            if walk.beta1() > 0.0 {
                for &(w, s) in g.neighbors(u) {
                    eval.eval_with_signs(&[u, w], &[s], &mut f);
                    add(&f, walk.beta1() / two_m);
                }
            }
            if walk.beta2() > 0.0 {
                for &(v, s1) in g.neighbors(u) {
                    let p = walk.beta2() / (two_m * g.degree(v) as f64);
                    for &(w, s2) in g.neighbors(v) {
                        eval.eval_with_signs(&[u, v, w], &[s1, s2], &mut f);
                        add(&f, p);
                    }
                }
            }
        }
        let mut values = Vec::with_capacity(groups.len() * dim);
        let mut base = Vec::with_capacity(groups.len());
        for (f, mass) in groups.into_values() {
            values.extend(f);
            base.push(mass);
        }
        Ok(MeasureProfile { dim, values, base })
    }

    /// Builds a profile from explicit `(value, base mass)` pairs.
    pub fn from_parts(dim: usize, entries: &[(Vec<f64>, f64)]) -> Self {
        let mut values = Vec::new();
        let mut base = Vec::new();
        for (f, mass) in entries {
            assert_eq!(f.len(), dim);
            if *mass > 0.0 {
                values.extend_from_slice(f);
                base.push(*mass);
            }
        }
        MeasureProfile { dim, values, base }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct measure values on the support.
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn total_base_mass(&self) -> f64 {
        self.base.iter().sum()
    }

    fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// `(min, max)` of component `c` over the support.
    pub fn range(&self, c: usize) -> (f64, f64) {
        (0..self.len()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let v = self.value(i)[c];
            (lo.min(v), hi.max(v))
        })
    }

    /// Normalized twisted weights of each group and `ln Z`.
    fn weights(&self, theta: &[f64]) -> (Vec<f64>, f64) {
        let terms: Vec<f64> = (0..self.len())
            .map(|i| dot(theta, self.value(i)) + self.base[i].ln())
            .collect();
        let log_z = log_sum_exp(&terms);
        (terms.iter().map(|t| (t - log_z).exp()).collect(), log_z)
    }

    /// `F(theta) = ln sum_r exp(theta . f(r)) p0(r)`.
    pub fn free_energy(&self, theta: &[f64]) -> f64 {
        self.weights(theta).1
    }

    /// Gradient of the free energy: the twisted mean measure.
    pub fn mean(&self, theta: &[f64]) -> Vec<f64> {
        let (w, _) = self.weights(theta);
        self.mean_from(&w)
    }

    fn mean_from(&self, w: &[f64]) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for (i, wi) in w.iter().enumerate() {
            for (m, f) in mean.iter_mut().zip(self.value(i)) {
                *m += wi * f;
            }
        }
        mean
    }

    /// Hessian of the free energy: the twisted covariance of the measure,
    /// row-major `dim x dim`.
    pub fn covariance(&self, theta: &[f64]) -> Vec<f64> {
        let (w, _) = self.weights(theta);
        let mean = self.mean_from(&w);
        self.covariance_from(&w, &mean)
    }

    fn covariance_from(&self, w: &[f64], mean: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut cov = vec![0.0; d * d];
        for (i, wi) in w.iter().enumerate() {
            let f = self.value(i);
            for a in 0..d {
                let da = f[a] - mean[a];
                for b in 0..d {
                    cov[a * d + b] += wi * da * (f[b] - mean[b]);
                }
            }
        }
        cov
    }

    /// Temperature whose twisted mean equals `gamma`.
    pub fn solve(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        if gamma.len() != self.dim {
            return Err(Error::ThetaDimension {
                expected: self.dim,
                found: gamma.len(),
            });
        }
        for (c, &g) in gamma.iter().enumerate() {
            let (min, max) = self.range(c);
            if min == max {
                return Err(Error::SingularMeasure);
            }
            if !(g > min && g < max) {
                return Err(Error::Unachievable {
                    component: c,
                    gamma: g,
                    min,
                    max,
                });
            }
        }
        if self.dim == 1 {
            self.solve_scalar(gamma[0]).map(|t| vec![t])
        } else {
            self.solve_vector(gamma)
        }
    }

    /// Safeguarded Newton on the increasing map `theta -> mean(theta)`,
    /// falling back to bisection whenever a step leaves the bracket.
    fn solve_scalar(&self, gamma: f64) -> Result<f64> {
        let eval = |t: f64| {
            let (w, _) = self.weights(&[t]);
            let mean = self.mean_from(&w)[0];
            let var = self.covariance_from(&w, &[mean])[0];
            (mean - gamma, var)
        };

        let (r0, _) = eval(0.0);
        if r0 == 0.0 {
            return Ok(0.0);
        }
        // expand outward from zero until the residual changes sign
        let dir = if r0 < 0.0 { 1.0 } else { -1.0 };
        let (mut near, mut far) = (0.0, dir);
        let mut doublings = 0;
        while eval(far).0 * dir < 0.0 {
            near = far;
            far *= 2.0;
            doublings += 1;
            if doublings > BRACKET_MAX_DOUBLINGS {
                return Err(Error::SolverNotConverged {
                    iterations: doublings,
                    residual: eval(far).0,
                });
            }
        }
        let (mut lo, mut hi) = if dir > 0.0 { (near, far) } else { (far, near) };

        let mut x = 0.0;
        let (mut r, mut var) = (r0, eval(0.0).1);
        let mut best = (r.abs(), x);
        for _ in 0..SOLVER_MAX_ITERS {
            if r.abs() <= SOLVER_TOLERANCE * 1e-3 {
                break;
            }
            if r < 0.0 {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }
            let newton = x - r / var;
            let next = if var > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                lo + 0.5 * (hi - lo)
            };
            if next == x {
                break;
            }
            x = next;
            (r, var) = eval(x);
            if r.abs() < best.0 {
                best = (r.abs(), x);
            }
        }
        if best.0 <= SOLVER_TOLERANCE {
            Ok(best.1)
        } else {
            Err(Error::SolverNotConverged {
                iterations: SOLVER_MAX_ITERS,
                residual: best.0,
            })
        }
    }

    /// Damped Newton on the convex dual `F(theta) - theta . gamma`.
    fn solve_vector(&self, gamma: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        let dual = |t: &[f64]| self.free_energy(t) - dot(t, gamma);
        let residual = |t: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let (w, _) = self.weights(t);
            let mean = self.mean_from(&w);
            let cov = self.covariance_from(&w, &mean);
            (mean.iter().zip(gamma).map(|(m, g)| m - g).collect(), cov)
        };
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));

        let mut theta = vec![0.0; d];
        let (mut r, mut cov) = residual(&theta);
        for _ in 0..SOLVER_MAX_ITERS {
            if norm(&r) <= SOLVER_TOLERANCE * 1e-3 {
                break;
            }
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let step = cholesky_solve(&cov, d, &neg).ok_or(Error::SingularMeasure)?;
            let phi0 = dual(&theta);
            let slope = dot(&r, &step);
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                let (rc, cc) = residual(&cand);
                if dual(&cand) <= phi0 + 1e-4 * t * slope || norm(&rc) < norm(&r) {
                    accepted = Some((cand, rc, cc));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, rc, cc)) = accepted else {
                break;
            };
            if cand == theta {
                break;
            }
            theta = cand;
            r = rc;
            cov = cc;
        }
        let res = norm(&r);
        if res <= SOLVER_TOLERANCE {
            Ok(theta)
        } else {
            Err(Error::SolverNotConverged {
                iterations: SOLVER_MAX_ITERS,
                residual: res,
            })
        }
    }
}

/// Solves `a x = b` for symmetric positive definite `a`; `None` when `a` is
/// numerically singular.
fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 1e-13 * a[i * n + i].abs() || s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

/// Twisted mean measure, which is also `dF/dtheta`.
pub fn free_energy_gradient(g: &AttributedGraph, cfg: &TwistConfig) -> Result<Vec<f64>> {
    cfg.validate(g)?;
    Ok(MeasureProfile::build(g, &cfg.measure, &cfg.walk)?.mean(&cfg.theta))
}

/// Temperature for the sign-product measure on single-hop walks, from the
/// edge-sign totals alone: `theta = ln sqrt(m- (1 + gamma) / (m+ (1 - gamma)))`.
pub fn solve_theta_closed(counts: SignCounts, gamma: f64) -> Result<f64> {
    if counts.positive == 0 || counts.negative == 0 {
        return Err(Error::OneSignedGraph {
            positive: counts.positive,
            negative: counts.negative,
        });
    }
    if !(gamma > -1.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let ratio = counts.negative as f64 * (1.0 + gamma) / (counts.positive as f64 * (1.0 - gamma));
    Ok(0.5 * ratio.ln())
}

/// Temperature whose twisted mean measure equals `gamma`.
pub fn solve_theta_numeric(
    g: &AttributedGraph,
    measure: &PathMeasureKind,
    walk: &WalkConfig,
    gamma: &[f64],
) -> Result<Vec<f64>> {
    MeasureProfile::build(g, measure, walk)?.solve(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign;

    fn triangle_one_negative() -> AttributedGraph {
        AttributedGraph::from_indexed(
            3,
            &[(0, 1, Sign::Positive), (1, 2, Sign::Positive), (0, 2, Sign::Negative)],
        )
        .unwrap()
    }

    fn mixed5() -> AttributedGraph {
        AttributedGraph::from_indexed(
            5,
            &[
                (0, 1, Sign::Positive),
                (1, 2, Sign::Negative),
                (2, 3, Sign::Positive),
                (3, 4, Sign::Positive),
                (4, 0, Sign::Negative),
                (1, 3, Sign::Positive),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_twist() {
        let g = mixed5();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignMin, 0.0, WalkConfig::new(0.5, 0.5).unwrap());
        let t = twist(&g, &cfg).unwrap();
        assert!(t.result.log_c.abs() < 1e-15);
        assert!(t.result.free_energy.abs() < 1e-15);
        for p in &t.paths {
            assert!((p.mass - p.path.base_prob).abs() < 1e-16);
        }
        assert!(t.kl_divergence().abs() < 1e-15);
    }

    #[test]
    fn triangle_twist_by_hand() {
        // 4 positive directed edges with weight 2/6, 2 negative with weight (1/2)/6
        // normaliser: 4*2/6 + 2*0.5/6 = 9/6, so masses 2/9 and 1/18
        let g = triangle_one_negative();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, 2f64.ln(), WalkConfig::single_step());
        let t = twist(&g, &cfg).unwrap();
        for p in &t.paths {
            let expected = if g.sign(p.path.start(), p.path.end()) == Some(Sign::Positive) {
                2.0 / 9.0
            } else {
                1.0 / 18.0
            };
            assert!((p.mass - expected).abs() < 1e-15);
        }
        assert!((t.result.log_c - (6.0f64 / 9.0).ln()).abs() < 1e-15);
        assert!((t.result.mean_measure[0] - (8.0 / 9.0 - 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn kl_is_positive_off_identity() {
        let g = mixed5();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, 0.7, WalkConfig::new(0.7, 0.3).unwrap());
        let t = twist(&g, &cfg).unwrap();
        assert!(t.kl_divergence() > 1e-3);
        // D(p || p0) = theta * mean + ln C
        let closed = 0.7 * t.result.mean_measure[0] + t.result.log_c;
        assert!((t.kl_divergence() - closed).abs() < 1e-14);
    }

    #[test]
    fn kl_zero_for_constant_measure() {
        // all-positive graph: sign product is constant, twisting does nothing
        let g = AttributedGraph::from_indexed(3, &[(0, 1, Sign::Positive), (1, 2, Sign::Positive)]).unwrap();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, 3.0, WalkConfig::new(0.5, 0.5).unwrap());
        let t = twist(&g, &cfg).unwrap();
        assert!(t.kl_divergence().abs() < 1e-14);
    }

    #[test]
    fn large_temperature_does_not_overflow() {
        let g = mixed5();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, 800.0, WalkConfig::new(0.7, 0.3).unwrap());
        let t = twist(&g, &cfg).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-12);
        assert!((t.result.mean_measure[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_graph_has_zero_gradient_at_zero() {
        let g = AttributedGraph::from_indexed(
            4,
            &[(0, 1, Sign::Positive), (1, 2, Sign::Negative), (2, 3, Sign::Positive), (3, 0, Sign::Negative)],
        )
        .unwrap();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, 0.0, WalkConfig::single_step());
        assert_eq!(free_energy_gradient(&g, &cfg).unwrap(), vec![0.0]);
    }

    #[test]
    fn gradient_saturates() {
        let g = mixed5();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, 20.0, WalkConfig::new(0.7, 0.3).unwrap());
        let grad = free_energy_gradient(&g, &cfg).unwrap()[0];
        assert!((grad - 1.0).abs() < 1e-6);
    }

    #[test]
    fn profile_agrees_with_paths() {
        let g = mixed5();
        for measure in [PathMeasureKind::SignProduct, PathMeasureKind::SignMin] {
            let cfg = TwistConfig::scalar(measure.clone(), -1.3, WalkConfig::new(0.7, 0.3).unwrap());
            let t = twist(&g, &cfg).unwrap();
            let prof = MeasureProfile::build(&g, &measure, &cfg.walk).unwrap();
            assert!(prof.len() <= 2);
            assert!((prof.free_energy(&cfg.theta) - t.result.free_energy).abs() < 1e-14);
            assert!((prof.mean(&cfg.theta)[0] - t.result.mean_measure[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_temperatures() {
        let counts = SignCounts { positive: 15225, negative: 1425 };
        let t = solve_theta_closed(counts, 0.0).unwrap();
        assert!((t - -1.1844).abs() < 5e-5);
        let t = solve_theta_closed(counts, -0.9).unwrap();
        assert!((t - -2.6566).abs() < 5e-5);
        let t = solve_theta_closed(counts, 0.99).unwrap();
        assert!((t - 1.4623).abs() < 5e-5);
        let balanced = SignCounts { positive: 40, negative: 40 };
        assert_eq!(solve_theta_closed(balanced, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_errors() {
        let one_sided = SignCounts { positive: 10, negative: 0 };
        assert!(matches!(solve_theta_closed(one_sided, 0.0), Err(Error::OneSignedGraph { .. })));
        let counts = SignCounts { positive: 3, negative: 1 };
        assert!(matches!(solve_theta_closed(counts, 1.0), Err(Error::GammaOutOfRange(_))));
        assert!(matches!(solve_theta_closed(counts, -1.5), Err(Error::GammaOutOfRange(_))));
    }

    #[test]
    fn numeric_matches_closed_form() {
        let g = mixed5();
        let counts = g.stats().sign_counts();
        for gamma in [-0.95, -0.3, 0.0, 0.4, 0.97] {
            let closed = solve_theta_closed(counts, gamma).unwrap();
            let numeric =
                solve_theta_numeric(&g, &PathMeasureKind::SignProduct, &WalkConfig::single_step(), &[gamma]).unwrap();
            assert!((closed - numeric[0]).abs() < 1e-10, "gamma {gamma}: {closed} vs {}", numeric[0]);
        }
    }

    #[test]
    fn numeric_fixed_point_at_zero() {
        let g = mixed5();
        let walk = WalkConfig::new(0.7, 0.3).unwrap();
        let base = TwistConfig::scalar(PathMeasureKind::SignMin, 0.0, walk);
        let gamma = free_energy_gradient(&g, &base).unwrap();
        let theta = solve_theta_numeric(&g, &PathMeasureKind::SignMin, &walk, &gamma).unwrap();
        assert!(theta[0].abs() < 1e-10);
    }

    #[test]
    fn numeric_round_trip_sign_min() {
        let g = mixed5();
        let walk = WalkConfig::new(0.5, 0.5).unwrap();
        let theta = solve_theta_numeric(&g, &PathMeasureKind::SignMin, &walk, &[0.5]).unwrap();
        let cfg = TwistConfig::scalar(PathMeasureKind::SignMin, theta[0], walk);
        let mean = free_energy_gradient(&g, &cfg).unwrap()[0];
        assert!((mean - 0.5).abs() < 1e-10);
    }

    #[test]
    fn numeric_rejects_unachievable_and_constant() {
        let g = mixed5();
        let walk = WalkConfig::single_step();
        match solve_theta_numeric(&g, &PathMeasureKind::SignProduct, &walk, &[1.0]) {
            Err(Error::Unachievable { min, max, .. }) => assert_eq!((min, max), (-1.0, 1.0)),
            other => panic!("unexpected {other:?}"),
        }
        let g = AttributedGraph::from_indexed(3, &[(0, 1, Sign::Positive), (1, 2, Sign::Positive)]).unwrap();
        assert!(matches!(
            solve_theta_numeric(&g, &PathMeasureKind::SignProduct, &walk, &[0.5]),
            Err(Error::SingularMeasure)
        ));
    }

    #[test]
    fn vector_measure_round_trip() {
        let g = mixed5();
        let walk = WalkConfig::new(0.5, 0.5).unwrap();
        let measure = PathMeasureKind::Stack(vec![PathMeasureKind::SignProduct, PathMeasureKind::SignMin]);
        let prof = MeasureProfile::build(&g, &measure, &walk).unwrap();
        let target = prof.mean(&[0.8, -0.4]);
        let theta = prof.solve(&target).unwrap();
        let back = prof.mean(&theta);
        for (a, b) in back.iter().zip(&target) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((theta[0] - 0.8).abs() < 1e-6 && (theta[1] + 0.4).abs() < 1e-6);
    }

    #[test]
    fn duplicated_component_is_singular() {
        let g = mixed5();
        let walk = WalkConfig::single_step();
        let measure = PathMeasureKind::Stack(vec![PathMeasureKind::SignProduct, PathMeasureKind::SignProduct]);
        assert!(matches!(
            solve_theta_numeric(&g, &measure, &walk, &[0.1, 0.1]),
            Err(Error::SingularMeasure)
        ));
    }

    #[test]
    fn theta_dimension_checked() {
        let g = mixed5();
        let cfg = TwistConfig::new(PathMeasureKind::SignProduct, vec![0.1, 0.2], WalkConfig::single_step());
        assert!(matches!(twist(&g, &cfg), Err(Error::ThetaDimension { expected: 1, found: 2 })));
    }

    /// Every `q` on a small support with the twisted mean has at least the
    /// twisted law's divergence from `p0`. The free coordinates of `q` run
    /// over a simplex grid; two pivot coordinates are solved from the
    /// normalization and mean constraints.
    #[test]
    fn twisted_law_minimizes_divergence() {
        // path 0 -(+)- 1 -(-)- 2 -(+)- 3 with single hops: 6 paths
        let g = AttributedGraph::from_indexed(
            4,
            &[(0, 1, Sign::Positive), (1, 2, Sign::Negative), (2, 3, Sign::Positive)],
        )
        .unwrap();
        for theta in [-1.2, 0.4, 2.0] {
            let cfg = TwistConfig::scalar(PathMeasureKind::SignProduct, theta, WalkConfig::single_step());
            let t = twist(&g, &cfg).unwrap();
            let s = t.paths.len();
            assert!(s <= 8);
            let f: Vec<f64> = t.paths.iter().map(|p| p.measure[0]).collect();
            let p0: Vec<f64> = t.paths.iter().map(|p| p.path.base_prob).collect();
            let gamma = t.result.mean_measure[0];
            let best = t.kl_divergence();

            let a = 0;
            let b = (0..s).find(|&i| f[i] != f[a]).unwrap();
            let free: Vec<usize> = (0..s).filter(|&i| i != a && i != b).collect();
            let steps = 20usize;
            let mut checked = 0;
            let mut idx = vec![0usize; free.len()];
            loop {
                let used: usize = idx.iter().sum();
                if used <= steps {
                    let mut q = vec![0.0; s];
                    for (k, &i) in free.iter().enumerate() {
                        q[i] = idx[k] as f64 / steps as f64;
                    }
                    let rest = 1.0 - q.iter().sum::<f64>();
                    let rest_mean = gamma - free.iter().map(|&i| q[i] * f[i]).sum::<f64>();
                    // q_a + q_b = rest, f_a q_a + f_b q_b = rest_mean
                    let qb = (rest_mean - f[a] * rest) / (f[b] - f[a]);
                    let qa = rest - qb;
                    if qa >= 0.0 && qb >= 0.0 {
                        q[a] = qa;
                        q[b] = qb;
                        let d: f64 = q
                            .iter()
                            .zip(&p0)
                            .filter(|(qi, _)| **qi > 0.0)
                            .map(|(qi, pi)| qi * (qi / pi).ln())
                            .sum();
                        assert!(d - best >= -1e-6, "theta {theta}: {d} < {best}");
                        checked += 1;
                    }
                }
                // odometer over the free coordinates
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] <= steps {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
            assert!(checked > 50);
        }
    }
}
