//! Continuous probability distribution maps (PDMs).
//!
//! A PDM is a mixture of bivariate Gaussians over a rectangular search area.
//! Mixture components may extend beyond the rectangle, so the mass inside the
//! bounds is generally less than one; [`Pdm::mass_in_bounds`] computes it.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::{Error, Point, Result};

/// 2×2 covariance matrix, row-major.
pub type Cov2 = [[f64; 2]; 2];

/// Grid cell index, `(i, j)` with `i` along x and `j` along y.
pub type Cell = (usize, usize);

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Axis-aligned search area in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { x_min: 0.0, x_max: 150.0, y_min: 0.0, y_max: 150.0 }
    }
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let b = Self { x_min, x_max, y_min, y_max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::invalid(format!("degenerate bounds {self:?}")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    pub fn clamp(&self, p: Point) -> Point {
        [p[0].clamp(self.x_min, self.x_max), p[1].clamp(self.y_min, self.y_max)]
    }

    /// Linear map of `p` onto the unit square.
    pub fn normalize(&self, p: Point) -> Point {
        [(p[0] - self.x_min) / self.width(), (p[1] - self.y_min) / self.height()]
    }
}

/// One weighted bivariate Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Point,
    pub cov: Cov2,
    pub weight: f64,
}

/// Checks symmetry and positive-definiteness.
pub fn validate_cov(cov: &Cov2) -> Result<()> {
    let [[a, b], [c, d]] = *cov;
    if ![a, b, c, d].iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("covariance has non-finite entries"));
    }
    if b != c {
        return Err(Error::invalid(format!("covariance is not symmetric: {b} != {c}")));
    }
    // Sylvester's criterion.
    if a <= 0.0 || a * d - b * b <= 0.0 {
        return Err(Error::invalid(format!("covariance {cov:?} is not positive definite")));
    }
    Ok(())
}

/// Precomputed evaluation terms for one component.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    mean: Point,
    // Inverse covariance entries.
    ia: f64,
    ib: f64,
    ic: f64,
    // weight / (2π √det Σ)
    scale: f64,
}

impl Kernel {
    fn new(c: &GaussianComponent) -> Self {
        let [[a, b], [_, d]] = c.cov;
        let det = a * d - b * b;
        Self {
            mean: c.mean,
            ia: d / det,
            ib: -b / det,
            ic: a / det,
            scale: c.weight / (2.0 * PI * det.sqrt()),
        }
    }

    #[inline]
    fn eval(&self, p: Point) -> f64 {
        let dx = p[0] - self.mean[0];
        let dy = p[1] - self.mean[1];
        let q = self.ia * dx * dx + 2.0 * self.ib * dx * dy + self.ic * dy * dy;
        self.scale * (-0.5 * q).exp()
    }
}

/// Gaussian-mixture probability distribution map.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PdmDoc", into = "PdmDoc")]
pub struct Pdm {
    bounds: Bounds,
    components: Vec<GaussianComponent>,
    kernels: Vec<Kernel>,
}

#[derive(Serialize, Deserialize)]
struct PdmDoc {
    bounds: Bounds,
    components: Vec<GaussianComponent>,
}

impl TryFrom<PdmDoc> for Pdm {
    type Error = Error;

    fn try_from(doc: PdmDoc) -> Result<Self> {
        Pdm::new(doc.components, doc.bounds)
    }
}

impl From<Pdm> for PdmDoc {
    fn from(p: Pdm) -> Self {
        PdmDoc { bounds: p.bounds, components: p.components }
    }
}

impl PartialEq for Pdm {
    fn eq(&self, other: &Self) -> bool {
        self.bounds == other.bounds && self.components == other.components
    }
}

impl Pdm {
    pub fn new(components: Vec<GaussianComponent>, bounds: Bounds) -> Result<Self> {
        bounds.validate()?;
        if components.is_empty() {
            return Err(Error::invalid("a PDM needs at least one component"));
        }
        for c in &components {
            validate_cov(&c.cov)?;
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::invalid(format!("component weight {} outside (0, 1]", c.weight)));
            }
            if !c.mean.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid("component mean is not finite"));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("component weights sum to {total}, expected 1")));
        }
        let kernels = components.iter().map(Kernel::new).collect();
        Ok(Self { bounds, components, kernels })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Mixture density at `p` (1/m²).
    #[inline]
    pub fn pdf(&self, p: Point) -> f64 {
        self.kernels.iter().map(|k| k.eval(p)).sum()
    }

    /// Probability mass of the mixture inside `bounds`.
    ///
    /// Diagonal covariances use products of normal-CDF differences; other
    /// components are integrated numerically over x with the conditional
    /// y-interval probability in closed form.
    pub fn mass_in_bounds(&self, bounds: &Bounds) -> f64 {
        let total: f64 = self.components.iter().map(|c| c.weight * component_mass(c, bounds)).sum();
        total.clamp(0.0, 1.0)
    }

    /// Samples the grid at cell centers; see [`Grid`].
    pub fn discretize(&self, cell_size: f64) -> Result<Grid> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::invalid(format!("cell size must be positive, got {cell_size}")));
        }
        let b = &self.bounds;
        let nx = (b.width() / cell_size).ceil() as usize;
        let ny = (b.height() / cell_size).ceil() as usize;
        let area = cell_size * cell_size;
        let origin = [b.x_min, b.y_min];
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = [origin[0] + (i as f64 + 0.5) * cell_size, origin[1] + (j as f64 + 0.5) * cell_size];
                values.push((self.pdf(c) * area).max(0.0));
            }
        }
        Ok(Grid { values, origin, cell_size, nx, ny })
    }
}

/// Draws a PDM with `g` equally weighted components whose means are uniform
/// inside `bounds`. Identical arguments give a bit-identical PDM.
pub fn generate_random_pdm(seed: u64, g: usize, bounds: Bounds, cov: Cov2) -> Result<Pdm> {
    generate_random_pdm_with(&mut seeded_rng(seed), g, bounds, cov)
}

/// Like [`generate_random_pdm`] but draws from a caller-owned stream.
pub fn generate_random_pdm_with<R: Rng + ?Sized>(rng: &mut R, g: usize, bounds: Bounds, cov: Cov2) -> Result<Pdm> {
    if g == 0 {
        return Err(Error::invalid("component count must be at least 1"));
    }
    bounds.validate()?;
    validate_cov(&cov)?;
    let weight = 1.0 / g as f64;
    let components = (0..g)
        .map(|_| {
            let x = rng.random_range(bounds.x_min..bounds.x_max);
            let y = rng.random_range(bounds.y_min..bounds.y_max);
            GaussianComponent { mean: [x, y], cov, weight }
        })
        .collect::<Vec<_>>();
    // 1/g summed g times can drift from 1 by a few ulps; renormalise the last weight.
    let mut components = components;
    let head: f64 = components[..g - 1].iter().map(|c| c.weight).sum();
    components[g - 1].weight = 1.0 - head;
    Pdm::new(components, bounds)
}

/// Standard normal probability of the interval `[a, b]`, accurate in both tails.
pub(crate) fn normal_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        0.5 * (erfc(a / SQRT_2) - erfc(b / SQRT_2))
    } else {
        0.5 * (erfc(-b / SQRT_2) - erfc(-a / SQRT_2))
    }
}

fn component_mass(c: &GaussianComponent, b: &Bounds) -> f64 {
    let [[sxx, sxy], [_, syy]] = c.cov;
    let [mx, my] = c.mean;
    let sx = sxx.sqrt();
    let sy = syy.sqrt();
    if sxy == 0.0 {
        return normal_interval((b.x_min - mx) / sx, (b.x_max - mx) / sx)
            * normal_interval((b.y_min - my) / sy, (b.y_max - my) / sy);
    }
    // P(x in I, y in J) = ∫_I N(x; mx, sxx) P(y in J | x) dx
    let cond_sd = (syy - sxy * sxy / sxx).sqrt();
    let integrand = |x: f64| {
        let z = (x - mx) / sx;
        let marginal = (-0.5 * z * z).exp() / (sx * (2.0 * PI).sqrt());
        let cm = my + sxy / sxx * (x - mx);
        marginal * normal_interval((b.y_min - cm) / cond_sd, (b.y_max - cm) / cond_sd)
    };
    // Restrict to where the marginal carries mass; beyond ±12σ it is below 1e-32.
    let lo = b.x_min.max(mx - 12.0 * sx);
    let hi = b.x_max.min(mx + 12.0 * sx);
    if lo >= hi {
        return 0.0;
    }
    let panels = 64;
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let a = lo + k as f64 * h;
            adaptive_simpson(&integrand, a, a + h, 1e-14, 30)
        })
        .sum()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Discretised PDM: per-cell probabilities on a regular grid.
///
/// Values are stored row by row, `values[j * nx + i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    values: Vec<f64>,
    origin: Point,
    cell_size: f64,
    nx: usize,
    ny: usize,
}

impl Grid {
    /// Builds a grid from row-major values (`values[j * nx + i]`).
    pub fn from_values(values: Vec<f64>, nx: usize, ny: usize, origin: Point, cell_size: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::invalid(format!("grid of {nx}x{ny} cannot hold {} values", values.len())));
        }
        if !(cell_size > 0.0) {
            return Err(Error::invalid("cell size must be positive"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("grid values must be finite and non-negative"));
        }
        Ok(Self { values, origin, cell_size, nx, ny })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, (i, j): Cell) -> f64 {
        self.values[j * self.nx + i]
    }

    #[inline]
    pub(crate) fn set(&mut self, (i, j): Cell, v: f64) {
        self.values[j * self.nx + i] = v;
    }

    pub fn contains_cell(&self, (i, j): Cell) -> bool {
        i < self.nx && j < self.ny
    }

    pub fn center(&self, (i, j): Cell) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.cell_size,
            self.origin[1] + (j as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Cell containing `p`, if any. Points on the far edge belong to the last cell.
    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let fx = (p[0] - self.origin[0]) / self.cell_size;
        let fy = (p[1] - self.origin[1]) / self.cell_size;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        (fx <= self.nx as f64 && fy <= self.ny as f64).then_some((i, j))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// First cell (row-major) holding the maximum value.
    pub fn argmax(&self) -> Cell {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        (best % self.nx, best / self.nx)
    }

    pub fn scaled(&self, factor: f64) -> Grid {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v *= factor);
        g
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }
}

/// Draws `n` target positions from the categorical distribution over cells
/// using the Gumbel-max trick, then jitters each uniformly inside its cell.
pub fn sample_targets(grid: &Grid, n: usize, seed: u64) -> Result<Vec<Point>> {
    let positive: Vec<(Cell, f64)> =
        grid.cells().filter(|c| grid.value(*c) > 0.0).map(|c| (c, grid.value(c).ln())).collect();
    if positive.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rng = seeded_rng(seed);
    let gumbel = Gumbel::new(0.0, 1.0).expect("unit Gumbel");
    let cs = grid.cell_size();
    let o = grid.origin();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = (positive[0].0, f64::NEG_INFINITY);
        for &(cell, log_v) in &positive {
            let key = log_v + gumbel.sample(&mut rng);
            if key > best.1 {
                best = (cell, key);
            }
        }
        let (i, j) = best.0;
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        out.push([o[0] + (i as f64 + u) * cs, o[1] + (j as f64 + v) * cs]);
    }
    Ok(out)
}
