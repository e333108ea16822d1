//! Polynomial-exact integration of a PDM over sensor footprints.
//!
//! The unit-disc rule is a polar product rule: Gauss-Legendre in `u = r²`
//! times an equally spaced angular rule. With `degree + 1` angles every
//! monomial `x^a y^b` with `a + b <= degree` is integrated exactly.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::pdm::{seeded_rng, Pdm};
use crate::{dist2, Error, Point, Result};

pub const SUPPORTED_DEGREES: &[u32] = &[3, 5, 7, 9, 11, 13, 15];

pub const DEFAULT_DEGREE: u32 = 7;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Node/weight set on the closed unit disc.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscCubatureRule {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    degree: u32,
}

impl DiscCubatureRule {
    pub fn new(degree: u32) -> Result<Self> {
        if !SUPPORTED_DEGREES.contains(&degree) {
            return Err(Error::UnsupportedDegree { degree, supported: SUPPORTED_DEGREES });
        }
        // Only even radial powers survive the angular sum, so the radial
        // integrand is a polynomial of degree floor(degree / 2) in u.
        let n_radial = (degree as usize / 2) / 2 + 1;
        let n_angle = degree as usize + 1;
        let (u, wu) = gauss_legendre(n_radial);
        let mut nodes = Vec::with_capacity(n_radial * n_angle);
        let mut weights = Vec::with_capacity(n_radial * n_angle);
        for (ui, wi) in u.iter().zip(&wu) {
            // Map u from [-1, 1] to [0, 1]; dA = ½ du dθ.
            let r = (0.5 * (ui + 1.0)).sqrt();
            let w_r = 0.5 * wi * 0.5;
            for k in 0..n_angle {
                let theta = 2.0 * PI * k as f64 / n_angle as f64;
                nodes.push([r * theta.cos(), r * theta.sin()]);
                weights.push(w_r * 2.0 * PI / n_angle as f64);
            }
        }
        Ok(Self { nodes, weights, degree })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫∫ f over the unit disc.
    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(n, w)| w * f(*n)).sum()
    }
}

/// `radius² Σ w_k pdf(center + radius·node_k)`.
pub fn integrate_disc(pdm: &Pdm, center: Point, radius: f64, rule: &DiscCubatureRule) -> f64 {
    if radius <= 0.0 {
        return 0.0;
    }
    let s = radius * radius;
    s * rule.integrate(|n| pdm.pdf([center[0] + radius * n[0], center[1] + radius * n[1]]))
}

/// Sensor coverage model used when accumulating probability along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Footprint {
    /// One disc of the sensor radius at each waypoint.
    #[default]
    Disc,
    /// Every point within the sensor radius of the polyline.
    Corridor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAccumulation {
    pub total: f64,
    pub per_step_gain: Vec<f64>,
}

/// Incremental probability accumulation with double-count suppression.
///
/// A cubature node of a new footprint is dropped when it lies inside the
/// footprint of any earlier step.
#[derive(Debug, Clone)]
pub struct PathAccumulator {
    radius: f64,
    footprint: Footprint,
    disc: DiscCubatureRule,
    // Gauss-Legendre rules for the swept-disc parametrisation of a corridor
    // step: angle over [-π/2, π/2] and offset along the segment.
    sweep_angle: (Vec<f64>, Vec<f64>),
    sweep_offset: (Vec<f64>, Vec<f64>),
    history: Vec<Point>,
    gains: Vec<f64>,
}

impl PathAccumulator {
    pub fn new(radius: f64, rule: &DiscCubatureRule, footprint: Footprint) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("sensor radius must be non-negative, got {radius}")));
        }
        Ok(Self {
            radius,
            footprint,
            disc: rule.clone(),
            sweep_angle: gauss_legendre(rule.degree() as usize + 1),
            sweep_offset: gauss_legendre(rule.degree() as usize / 2 + 1),
            history: Vec::new(),
            gains: Vec::new(),
        })
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.history
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn total(&self) -> f64 {
        self.gains.iter().sum()
    }

    /// Appends a waypoint and returns its new (unseen) probability.
    pub fn push(&mut self, pdm: &Pdm, p: Point) -> f64 {
        let gain = self.gain_after(pdm, self.history.len(), p);
        self.history.push(p);
        self.gains.push(gain);
        gain
    }

    /// Gain that `p` would add after the first `prefix` stored waypoints.
    pub fn gain_after(&self, pdm: &Pdm, prefix: usize, p: Point) -> f64 {
        let history = &self.history[..prefix];
        let r = self.radius;
        if r <= 0.0 {
            return 0.0;
        }
        match (self.footprint, history.last()) {
            (Footprint::Disc, _) | (Footprint::Corridor, None) => {
                let seen = |q: Point| match self.footprint {
                    Footprint::Disc => within_any_point(history, q, r),
                    Footprint::Corridor => within_polyline(history, q, r),
                };
                r * r
                    * self
                        .disc
                        .nodes
                        .iter()
                        .zip(&self.disc.weights)
                        .map(|(n, w)| {
                            let q = [p[0] + r * n[0], p[1] + r * n[1]];
                            if seen(q) {
                                0.0
                            } else {
                                w * pdm.pdf(q)
                            }
                        })
                        .sum::<f64>()
            }
            (Footprint::Corridor, Some(&a)) => self.segment_gain(pdm, history, a, p),
        }
    }

    // Moving the sensor disc from a to p uncovers, in segment coordinates
    // (s along, v across), the strip |v| <= R, w(v) < s <= len + w(v) with
    // w(v) = sqrt(R² - v²). Substituting v = R sin φ, s = R cos φ + τ makes the
    // integrand smooth on [-π/2, π/2] × [0, len] with Jacobian R cos φ.
    // Nodes covered by older parts of the path (turns, crossings) are dropped.
    fn segment_gain(&self, pdm: &Pdm, history: &[Point], a: Point, p: Point) -> f64 {
        let r = self.radius;
        let len = dist2(a, p).sqrt();
        if len == 0.0 {
            return 0.0;
        }
        let e = [(p[0] - a[0]) / len, (p[1] - a[1]) / len];
        let n = [-e[1], e[0]];
        let (phis, wphi) = &self.sweep_angle;
        let (taus, wtau) = &self.sweep_offset;
        let mut acc = 0.0;
        for (x, wp) in phis.iter().zip(wphi) {
            let phi = 0.5 * PI * x;
            let (sin, cos) = phi.sin_cos();
            let w_angle = wp * 0.5 * PI * r * cos;
            for (y, wt) in taus.iter().zip(wtau) {
                let s = r * cos + 0.5 * len * (y + 1.0);
                let v = r * sin;
                let q = [a[0] + s * e[0] + v * n[0], a[1] + s * e[1] + v * n[1]];
                if !within_polyline(history, q, r) {
                    acc += w_angle * wt * 0.5 * len * pdm.pdf(q);
                }
            }
        }
        acc
    }

    pub fn into_accumulation(self) -> PathAccumulation {
        PathAccumulation { total: self.gains.iter().sum(), per_step_gain: self.gains }
    }
}

fn within_any_point(points: &[Point], q: Point, r: f64) -> bool {
    let r2 = r * r;
    points.iter().any(|c| dist2(*c, q) <= r2)
}

/// Squared distance from `q` to the segment `a`–`b`.
pub(crate) fn segment_dist2(a: Point, b: Point, q: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    if l2 == 0.0 {
        return dist2(a, q);
    }
    let t = (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
    dist2([a[0] + t * d[0], a[1] + t * d[1]], q)
}

fn within_polyline(points: &[Point], q: Point, r: f64) -> bool {
    let r2 = r * r;
    match points {
        [] => false,
        [only] => dist2(*only, q) <= r2,
        _ => points.windows(2).any(|w| segment_dist2(w[0], w[1], q) <= r2),
    }
}

/// Accumulated probability of disc footprints at `waypoints`.
pub fn accumulate_path(pdm: &Pdm, waypoints: &[Point], radius: f64, rule: &DiscCubatureRule) -> Result<PathAccumulation> {
    accumulate_path_with(pdm, waypoints, radius, rule, Footprint::Disc)
}

pub fn accumulate_path_with(
    pdm: &Pdm,
    waypoints: &[Point],
    radius: f64,
    rule: &DiscCubatureRule,
    footprint: Footprint,
) -> Result<PathAccumulation> {
    if waypoints.is_empty() {
        return Err(Error::invalid("path has no waypoints"));
    }
    let mut acc = PathAccumulator::new(radius, rule, footprint)?;
    for p in waypoints {
        acc.push(pdm, *p);
    }
    Ok(acc.into_accumulation())
}

/// Monte-Carlo estimate of the mixture mass within `radius` of any center,
/// with its binomial standard error.
pub fn mc_union_mass(pdm: &Pdm, centers: &[Point], radius: f64, n_samples: usize, seed: u64) -> (f64, f64) {
    mc_mass(pdm, n_samples, seed, |q| within_any_point(centers, q, radius))
}

/// Monte-Carlo estimate of the mixture mass within `radius` of the polyline.
pub fn mc_corridor_mass(pdm: &Pdm, waypoints: &[Point], radius: f64, n_samples: usize, seed: u64) -> (f64, f64) {
    mc_mass(pdm, n_samples, seed, |q| within_polyline(waypoints, q, radius))
}

fn mc_mass<F: Fn(Point) -> bool>(pdm: &Pdm, n_samples: usize, seed: u64, hit: F) -> (f64, f64) {
    if n_samples == 0 {
        return (0.0, 0.0);
    }
    let mut rng = seeded_rng(seed);
    // Cholesky factors per component.
    let chol: Vec<(Point, [f64; 3])> = pdm
        .components()
        .iter()
        .map(|c| {
            let [[a, b], [_, d]] = c.cov;
            let l11 = a.sqrt();
            let l21 = b / l11;
            let l22 = (d - l21 * l21).sqrt();
            (c.mean, [l11, l21, l22])
        })
        .collect();
    let cumulative: Vec<f64> = pdm
        .components()
        .iter()
        .scan(0.0, |s, c| {
            *s += c.weight;
            Some(*s)
        })
        .collect();
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let u: f64 = rng.random();
        let k = cumulative.iter().position(|c| u < *c).unwrap_or(cumulative.len() - 1);
        let (m, [l11, l21, l22]) = chol[k];
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let q = [m[0] + l11 * z1, m[1] + l21 * z1 + l22 * z2];
        if hit(q) {
            hits += 1;
        }
    }
    let p = hits as f64 / n_samples as f64;
    (p, (p * (1.0 - p) / n_samples as f64).sqrt())
}
