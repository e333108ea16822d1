//! Baseline path planners: the lawnmower coverage pattern and local hill
//! climbing with global warming and convolution tie-breaking (LHC_GW_CONV).

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::pdm::{Bounds, Cell, Grid};
use crate::{dist, Error, Point, Result};

pub const LAWNMOWER: &str = "lawnmower";
pub const LHC_GW_CONV: &str = "lhc-gw-conv";
pub const LOCAL_HILL_CLIMB: &str = "lhc";

/// Ordered waypoints produced by a planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub algorithm_id: String,
    pub waypoints: Vec<Point>,
}

impl Path {
    pub fn new(algorithm_id: impl Into<String>, waypoints: Vec<Point>) -> Self {
        Self { algorithm_id: algorithm_id.into(), waypoints }
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Cumulative distance at each waypoint.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.waypoints.len());
        let mut acc = 0.0;
        for (k, p) in self.waypoints.iter().enumerate() {
            if k > 0 {
                acc += dist(self.waypoints[k - 1], *p);
            }
            out.push(acc);
        }
        out
    }

    /// Position at arc length `d`, clamped to the path ends.
    pub fn point_at(&self, d: f64) -> Point {
        let cum = self.cumulative();
        point_at_cumulative(&self.waypoints, &cum, d)
    }

    /// The path cut at arc length `d`; the last segment is shortened so the
    /// result ends exactly at `d`.
    pub fn truncate(&self, d: f64) -> Path {
        let cum = self.cumulative();
        let (kept, end) = truncate_cumulative(&self.waypoints, &cum, d);
        let mut waypoints = self.waypoints[..kept].to_vec();
        if let Some(p) = end {
            waypoints.push(p);
        }
        Path { algorithm_id: self.algorithm_id.clone(), waypoints }
    }
}

pub(crate) fn point_at_cumulative(waypoints: &[Point], cum: &[f64], d: f64) -> Point {
    let last = waypoints.len() - 1;
    if d <= 0.0 {
        return waypoints[0];
    }
    if d >= cum[last] {
        return waypoints[last];
    }
    // First index with cum > d.
    let k = cum.partition_point(|c| *c <= d);
    interpolate(waypoints[k - 1], waypoints[k], (d - cum[k - 1]) / (cum[k] - cum[k - 1]))
}

/// Number of whole waypoints within `d` plus the interpolated end point, if
/// `d` falls strictly inside a segment.
pub(crate) fn truncate_cumulative(waypoints: &[Point], cum: &[f64], d: f64) -> (usize, Option<Point>) {
    let kept = cum.partition_point(|c| *c <= d).max(1);
    if kept == waypoints.len() || cum[kept - 1] == d {
        return (kept, None);
    }
    let a = waypoints[kept - 1];
    let b = waypoints[kept];
    let t = (d - cum[kept - 1]) / (cum[kept] - cum[kept - 1]);
    (kept, Some(interpolate(a, b, t)))
}

fn interpolate(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Boustrophedon coverage: tracks parallel to x, the first at half a spacing
/// above `y_min`, alternating direction. Waypoints are placed every `spacing`
/// meters (straight-line distance) along the route and the path stops once
/// its length would exceed `d_max`.
pub fn lawnmower(bounds: &Bounds, spacing: f64, d_max: f64) -> Result<Path> {
    bounds.validate()?;
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
    }
    if !(d_max > 0.0) {
        return Err(Error::invalid(format!("maximum distance must be positive, got {d_max}")));
    }
    let mut route = Vec::new();
    let mut y = bounds.y_min + 0.5 * spacing;
    let mut forward = true;
    while y < bounds.y_max {
        let (a, b) = if forward { (bounds.x_min, bounds.x_max) } else { (bounds.x_max, bounds.x_min) };
        route.push([a, y]);
        route.push([b, y]);
        forward = !forward;
        y += spacing;
    }
    if route.is_empty() {
        route.push([bounds.x_min, bounds.y_min]);
        route.push([bounds.x_max, bounds.y_min]);
    }
    Ok(Path::new(LAWNMOWER, resample_route(&route, spacing, d_max)))
}

/// Walks `route` emitting points at straight-line distance `step` from the
/// previous one, with total chord length at most `d_max`.
fn resample_route(route: &[Point], step: f64, d_max: f64) -> Vec<Point> {
    let mut out = vec![route[0]];
    // Position on the route: segment index and parameter.
    let mut seg = 0usize;
    let mut t = 0.0;
    let mut length = 0.0;
    let eps = 1e-9;
    loop {
        let remaining = d_max - length;
        if remaining <= eps {
            break;
        }
        let r = step.min(remaining);
        let c = *out.last().expect("non-empty");
        match next_on_route(route, seg, t, c, r) {
            Some((s, u, p)) => {
                seg = s;
                t = u;
                out.push(p);
                length += r;
            }
            None => {
                let end = *route.last().expect("non-empty");
                let d = dist(c, end);
                if d > eps {
                    out.push(end);
                }
                break;
            }
        }
    }
    out
}

/// First point after `(seg, t)` on the route at distance `r` from `c`.
fn next_on_route(route: &[Point], seg: usize, t: f64, c: Point, r: f64) -> Option<(usize, f64, Point)> {
    for s in seg..route.len() - 1 {
        let a = route[s];
        let b = route[s + 1];
        let d = [b[0] - a[0], b[1] - a[1]];
        let f = [a[0] - c[0], a[1] - c[1]];
        let qa = d[0] * d[0] + d[1] * d[1];
        if qa == 0.0 {
            continue;
        }
        let qb = 2.0 * (f[0] * d[0] + f[1] * d[1]);
        let qc = f[0] * f[0] + f[1] * f[1] - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        // Exit point of the circle is the larger root.
        let u = (-qb + disc.sqrt()) / (2.0 * qa);
        let lo = if s == seg { t } else { 0.0 };
        if u >= lo && u <= 1.0 {
            return Some((s, u, interpolate(a, b, u)));
        }
    }
    None
}

/// Warming schedule for [`lhc_gw_conv`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwConfig {
    pub n_warming: usize,
    pub floor_fraction: f64,
}

impl Default for GwConfig {
    fn default() -> Self {
        Self { n_warming: 5, floor_fraction: 0.1 }
    }
}

impl GwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_warming == 0 || !(self.floor_fraction > 0.0 && self.floor_fraction < 1.0) {
            return Err(Error::invalid(format!("invalid warming schedule {self:?}")));
        }
        Ok(())
    }
}

/// Result of a grid hill climb.
#[derive(Debug, Clone, PartialEq)]
pub struct HillClimb {
    /// Visited cells in order, starting with the start cell. The last cell may
    /// lie beyond the budget; the path is truncated before reaching it.
    pub cells: Vec<Cell>,
    pub path: Path,
    /// Sum of original grid values over distinct cells reached within budget.
    pub score: f64,
    /// Warming level that produced this climb.
    pub warming_level: usize,
}

/// Neighbour offsets in tie-break order: N, NE, E, SE, S, SW, W, NW.
const NEIGHBOURS: [(isize, isize); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

/// Relative tolerance under which derived sums and differences count as tied.
/// Rounding in those quantities depends on the grid's scale; treating
/// near-equal values as equal keeps climbs unchanged when the grid is rescaled.
const TIE: f64 = 1e-9;

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE * a.abs().max(b.abs())
}

/// 3×3 all-ones convolution with zero padding.
pub fn conv3x3(grid: &Grid) -> Vec<f64> {
    let (nx, ny) = grid.dims();
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let mut s = 0.0;
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    let (x, y) = (i as isize + di, j as isize + dj);
                    if x >= 0 && y >= 0 && (x as usize) < nx && (y as usize) < ny {
                        s += grid.value((x as usize, y as usize));
                    }
                }
            }
            out[j * nx + i] = s;
        }
    }
    out
}

fn check_climb_args(grid: &Grid, start: Cell, budget: f64, spacing: f64) -> Result<()> {
    if !grid.contains_cell(start) {
        return Err(Error::invalid(format!("start cell {start:?} outside grid {:?}", grid.dims())));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::invalid(format!("budget must be finite and non-negative, got {budget}")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
    }
    Ok(())
}

/// Greedy 8-neighbour climb; visited cells are zeroed. Returns the visited
/// cells and the arc length at which each was reached.
fn climb(mut work: Grid, tiebreak: &[f64], start: Cell, budget: f64, spacing: f64) -> (Vec<Cell>, Vec<f64>) {
    let (nx, ny) = work.dims();
    let mut cells = vec![start];
    let mut reached = vec![0.0];
    work.set(start, 0.0);
    let mut cur = start;
    let mut used = 0.0;
    while used < budget {
        let mut best: Option<(Cell, f64, f64, usize)> = None;
        for (k, (di, dj)) in NEIGHBOURS.iter().enumerate() {
            let (x, y) = (cur.0 as isize + di, cur.1 as isize + dj);
            if x < 0 || y < 0 || x as usize >= nx || y as usize >= ny {
                continue;
            }
            let cell = (x as usize, y as usize);
            let v = work.value(cell);
            let c = tiebreak[cell.1 * nx + cell.0];
            let better = match best {
                None => true,
                Some((_, bv, bc, _)) => v > bv || (v == bv && c > bc && !tied(c, bc)),
            };
            if better {
                best = Some((cell, v, c, k));
            }
        }
        let Some((next, _, _, k)) = best else { break };
        used += if k % 2 == 0 { spacing } else { spacing * SQRT_2 };
        work.set(next, 0.0);
        cells.push(next);
        reached.push(used);
        cur = next;
    }
    (cells, reached)
}

fn finish(id: &str, grid: &Grid, cells: Vec<Cell>, reached: &[f64], budget: f64, warming_level: usize) -> HillClimb {
    let waypoints: Vec<Point> = cells.iter().map(|c| grid.center(*c)).collect();
    let path = Path::new(id, waypoints).truncate(budget);
    let mut seen = vec![false; grid.values().len()];
    let nx = grid.dims().0;
    let mut score = 0.0;
    for (c, d) in cells.iter().zip(reached) {
        let idx = c.1 * nx + c.0;
        if *d <= budget + 1e-9 && !seen[idx] {
            seen[idx] = true;
            score += grid.value(*c);
        }
    }
    HillClimb { cells, path, score, warming_level }
}

/// Local hill climb with convolution tie-breaking on the grid itself.
pub fn local_hill_climb(grid: &Grid, start: Cell, budget: f64, spacing: f64) -> Result<HillClimb> {
    check_climb_args(grid, start, budget, spacing)?;
    let conv = conv3x3(grid);
    let (cells, reached) = climb(grid.clone(), &conv, start, budget, spacing);
    Ok(finish(LOCAL_HILL_CLIMB, grid, cells, &reached, budget, 0))
}

/// LHC_GW_CONV: hill climbs on progressively floored copies of the grid,
/// each scored on the original grid; the best climb wins, ties to the
/// lowest warming level.
pub fn lhc_gw_conv(grid: &Grid, start: Cell, budget: f64, spacing: f64, gw: &GwConfig) -> Result<HillClimb> {
    check_climb_args(grid, start, budget, spacing)?;
    gw.validate()?;
    Ok(warming_candidates(grid, start, budget, spacing, gw)
        .into_iter()
        .reduce(|best, c| if c.score > best.score && !tied(c.score, best.score) { c } else { best })
        .expect("n_warming >= 1"))
}

/// Every candidate climb, one per warming level.
pub fn warming_candidates(grid: &Grid, start: Cell, budget: f64, spacing: f64, gw: &GwConfig) -> Vec<HillClimb> {
    let conv = conv3x3(grid);
    let max = grid.max();
    (0..gw.n_warming)
        .map(|k| {
            let floor = k as f64 * gw.floor_fraction * max;
            let mut warmed = grid.clone();
            for cell in grid.cells() {
                let v = grid.value(cell);
                warmed.set(cell, if v <= floor || tied(v, floor) { 0.0 } else { v - floor });
            }
            let (cells, reached) = climb(warmed, &conv, start, budget, spacing);
            finish(LHC_GW_CONV, grid, cells, &reached, budget, k)
        })
        .collect()
}
