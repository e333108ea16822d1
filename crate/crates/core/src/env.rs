//! The search MDP.
//!
//! Each step moves the searcher a fixed distance `lambda` along an absolute
//! heading `action · π` (east = 0, counter-clockwise positive). Leaving the
//! search area clamps the position to the boundary and raises the
//! out-of-bounds flag; the episode continues. The reward is
//!
//! ```text
//! r = w_r · g − w_oob · oob − w_0 · [g < epsilon],   g = gain_p / p_step_max
//! ```
//!
//! where `p_step_max` is the best single-footprint probability on the PDM.

use serde::{Deserialize, Serialize};

use crate::cubature::{integrate_disc, DiscCubatureRule, Footprint, PathAccumulator, DEFAULT_DEGREE};
use crate::pdm::{generate_random_pdm_with, seeded_rng, validate_cov, Bounds, Cov2, Pdm};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub bounds: Bounds,
    /// Step size in meters.
    pub lambda: f64,
    /// Sensor radius in meters.
    pub r_buffer: f64,
    pub n_waypoint: usize,
    /// Number of mixture components per PDM.
    pub g: usize,
    pub cov: Cov2,
    pub w_oob: f64,
    pub w_r: f64,
    pub w_0: f64,
    pub epsilon: f64,
    pub rule_degree: u32,
    pub footprint: Footprint,
    /// Fixed start position; drawn uniformly inside the bounds when absent.
    pub start: Option<Point>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            bounds: Bounds::default(),
            lambda: 8.0,
            r_buffer: 2.5,
            n_waypoint: 64,
            g: 4,
            cov: [[500.0, 0.0], [0.0, 500.0]],
            w_oob: 1.0,
            w_r: 0.5,
            w_0: 0.5,
            epsilon: 0.1,
            rule_degree: DEFAULT_DEGREE,
            footprint: Footprint::default(),
            start: None,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        validate_cov(&self.cov)?;
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.r_buffer > 0.0 && self.r_buffer.is_finite()) {
            return Err(Error::invalid(format!("r_buffer must be positive, got {}", self.r_buffer)));
        }
        if self.n_waypoint == 0 || self.g == 0 {
            return Err(Error::invalid("n_waypoint and g must be at least 1"));
        }
        for (name, w) in [("w_oob", self.w_oob), ("w_r", self.w_r), ("w_0", self.w_0), ("epsilon", self.epsilon)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("{name} must be non-negative, got {w}")));
            }
        }
        if let Some(s) = self.start {
            if !self.bounds.contains(s) {
                return Err(Error::invalid(format!("start {s:?} outside bounds")));
            }
        }
        DiscCubatureRule::new(self.rule_degree)?;
        Ok(())
    }

    /// Maximum path length, `lambda · n_waypoint`.
    pub fn d_max(&self) -> f64 {
        self.lambda * self.n_waypoint as f64
    }

    /// Length of the flat observation vector, `2·n_waypoint + 6·g + 4`.
    pub fn observation_len(&self) -> usize {
        2 * self.n_waypoint + 6 * self.g + 4
    }

    /// Normalisation scale for covariance entries: four times the largest
    /// configured variance.
    pub fn cov_scale(&self) -> f64 {
        4.0 * self.cov[0][0].max(self.cov[1][1])
    }
}

/// Episode state; owned by a [`SearchEnv`].
#[derive(Debug, Clone)]
pub struct EnvState {
    pub pdm: Pdm,
    /// Visited positions, starting with the start position.
    pub path: Vec<Point>,
    pub t: usize,
    pub position: Point,
    pub cumulative_p: f64,
    pub done: bool,
    /// Whether the last step was clamped at the boundary.
    pub oob: bool,
    pub p_step_max: f64,
    accumulator: PathAccumulator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Row-major `2 × n_waypoint`: all x values, then all y values.
    pub s_path: Vec<f64>,
    /// Row-major `2 × 3g`; component `i` occupies columns `3i..3i+3` as
    /// `[mean, cov column 0, cov column 1]`.
    pub s_pdm: Vec<f64>,
    pub s_pos: Point,
    pub s_oob: f64,
    pub s_steps: f64,
    /// `[s_path, s_pdm, s_pos, s_oob, s_steps]`.
    pub flat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub gain_p: f64,
    pub oob: bool,
    pub cumulative_p: f64,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Linearly normalised observation for `state`. Values are clipped to
/// `[0, 1]`; only negative covariance off-diagonals are ever affected.
pub fn build_observation(state: &EnvState, config: &EnvConfig) -> Observation {
    let n = config.n_waypoint;
    let b = &config.bounds;
    let mut s_path = vec![0.0; 2 * n];
    for (k, p) in state.path.iter().take(n).enumerate() {
        let q = b.normalize(*p);
        s_path[k] = q[0];
        s_path[n + k] = q[1];
    }
    let g = state.pdm.components().len();
    let c = config.cov_scale();
    let mut s_pdm = vec![0.0; 6 * g];
    for (i, comp) in state.pdm.components().iter().enumerate() {
        let m = b.normalize(comp.mean);
        let cols = [[m[0], m[1]], [comp.cov[0][0] / c, comp.cov[1][0] / c], [comp.cov[0][1] / c, comp.cov[1][1] / c]];
        for (k, col) in cols.iter().enumerate() {
            s_pdm[3 * i + k] = col[0];
            s_pdm[3 * g + 3 * i + k] = col[1];
        }
    }
    let s_pos = b.normalize(state.position);
    let s_oob = if state.oob { 1.0 } else { 0.0 };
    let s_steps = state.t as f64 / n as f64;
    let mut flat = Vec::with_capacity(config.observation_len());
    flat.extend_from_slice(&s_path);
    flat.extend_from_slice(&s_pdm);
    flat.extend_from_slice(&s_pos);
    flat.push(s_oob);
    flat.push(s_steps);
    flat.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Observation { s_path, s_pdm, s_pos, s_oob, s_steps, flat }
}

/// A single search environment. Not shared between threads; run one per
/// connection or worker.
#[derive(Debug, Clone)]
pub struct SearchEnv {
    config: EnvConfig,
    rule: DiscCubatureRule,
    state: Option<EnvState>,
}

impl SearchEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let rule = DiscCubatureRule::new(config.rule_degree)?;
        Ok(Self { config, rule, state: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn rule(&self) -> &DiscCubatureRule {
        &self.rule
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    /// Starts an episode on `generate_random_pdm(seed, ..)`; the start
    /// position comes from the same seeded stream.
    pub fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = seeded_rng(seed);
        let c = &self.config;
        let pdm = generate_random_pdm_with(&mut rng, c.g, c.bounds, c.cov).expect("config validated");
        let drawn = [
            rand::Rng::random_range(&mut rng, c.bounds.x_min..c.bounds.x_max),
            rand::Rng::random_range(&mut rng, c.bounds.y_min..c.bounds.y_max),
        ];
        let start = c.start.unwrap_or(drawn);
        self.reset_with(pdm, start)
    }

    /// Starts an episode on a given PDM and start position.
    pub fn reset_with(&mut self, pdm: Pdm, start: Point) -> Observation {
        let c = &self.config;
        let start = c.bounds.clamp(start);
        let p_step_max = pdm
            .components()
            .iter()
            .map(|comp| integrate_disc(&pdm, comp.mean, c.r_buffer, &self.rule))
            .fold(0.0, f64::max);
        let mut accumulator = PathAccumulator::new(c.r_buffer, &self.rule, c.footprint).expect("config validated");
        let cumulative_p = accumulator.push(&pdm, start);
        let state = EnvState {
            pdm,
            path: vec![start],
            t: 0,
            position: start,
            cumulative_p,
            done: false,
            oob: false,
            p_step_max,
            accumulator,
        };
        let obs = build_observation(&state, c);
        self.state = Some(state);
        obs
    }

    pub fn step(&mut self, action: f64) -> Result<StepResult> {
        if !action.is_finite() {
            return Err(Error::invalid(format!("action must be finite, got {action}")));
        }
        let c = &self.config;
        let state = match self.state.as_mut() {
            Some(s) if !s.done => s,
            _ => return Err(Error::EpisodeNotActive),
        };
        let heading = action.clamp(-1.0, 1.0) * std::f64::consts::PI;
        let candidate = [
            state.position[0] + c.lambda * heading.cos(),
            state.position[1] + c.lambda * heading.sin(),
        ];
        let oob = !c.bounds.contains(candidate);
        let position = c.bounds.clamp(candidate);
        let gain_p = state.accumulator.push(&state.pdm, position);
        let normalized = if state.p_step_max > 0.0 { gain_p / state.p_step_max } else { 0.0 };
        let mut reward = c.w_r * normalized;
        if oob {
            reward -= c.w_oob;
        }
        if normalized < c.epsilon {
            reward -= c.w_0;
        }
        state.position = position;
        state.path.push(position);
        state.t += 1;
        state.oob = oob;
        state.cumulative_p += gain_p;
        state.done = state.t == c.n_waypoint;
        let observation = build_observation(state, c);
        Ok(StepResult {
            observation,
            reward,
            done: state.done,
            info: StepInfo { gain_p, oob, cumulative_p: state.cumulative_p, position },
        })
    }

    /// Per-step gains of the current episode, starting with the start footprint.
    pub fn gains(&self) -> Option<&[f64]> {
        self.state.as_ref().map(|s| s.accumulator.gains())
    }
}
