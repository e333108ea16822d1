//! Evaluation metrics and the experiment runner.
//!
//! One run draws a PDM and start position from a seed, asks each algorithm
//! for a path and scores it with:
//!
//! * the probability-over-distance curve and its final probability
//!   efficiency `e_p = p / mass_in_bounds`,
//! * distance-to-find and percentage-found over targets sampled from the
//!   discretised PDM.
//!
//! Records stream to a newline-delimited JSON file whose first line is a
//! header describing the configuration.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use tracing::{debug, info};

use crate::cubature::{DiscCubatureRule, Footprint, PathAccumulator};
use crate::env::{EnvConfig, SearchEnv};
use crate::pdm::{sample_targets, seeded_rng, Pdm};
use crate::planners::{lawnmower, lhc_gw_conv, point_at_cumulative, truncate_cumulative, GwConfig, Path, LAWNMOWER, LHC_GW_CONV};
use crate::{dist2, Error, Point, Result};

pub const RANDOM_POLICY: &str = "random";
pub const RECORDS_FORMAT: &str = "wisar-runs";
pub const RECORDS_VERSION: u32 = 1;

/// Labels accepted by [`planner_for`].
pub const BUILTIN_ALGORITHMS: &[&str] = &[LAWNMOWER, LHC_GW_CONV, RANDOM_POLICY];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PodPoint {
    pub d: f64,
    pub p: f64,
    pub e_p: f64,
}

/// Ratio of accumulated probability to the PDM mass inside its bounds.
pub fn probability_efficiency(p: f64, pdm: &Pdm) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(Error::invalid(format!("probability must be non-negative, got {p}")));
    }
    let mass = pdm.mass_in_bounds(pdm.bounds());
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(p / mass)
}

/// Probability over distance at `d = (n_steps − i)·D / n_steps` for
/// `i = n_steps, …, 0`, in ascending `d`.
pub fn pod_curve(
    pdm: &Pdm,
    path: &Path,
    n_steps: usize,
    radius: f64,
    rule: &DiscCubatureRule,
    footprint: Footprint,
) -> Result<Vec<PodPoint>> {
    if path.waypoints.is_empty() {
        return Err(Error::invalid("path has no waypoints"));
    }
    if n_steps == 0 {
        return Err(Error::invalid("n_steps must be at least 1"));
    }
    let mass = pdm.mass_in_bounds(pdm.bounds());
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mut acc = PathAccumulator::new(radius, rule, footprint)?;
    for p in &path.waypoints {
        acc.push(pdm, *p);
    }
    // prefix[k] = sum of the first k gains, in path order.
    let mut prefix = Vec::with_capacity(acc.gains().len() + 1);
    prefix.push(0.0);
    let mut s = 0.0;
    for g in acc.gains() {
        s += g;
        prefix.push(s);
    }
    let cum = path.cumulative();
    let total_len = *cum.last().expect("non-empty");
    let mut out = Vec::with_capacity(n_steps + 1);
    for i in (0..=n_steps).rev() {
        let d = (n_steps - i) as f64 * total_len / n_steps as f64;
        let (kept, end) = truncate_cumulative(&path.waypoints, &cum, d);
        let mut p = prefix[kept];
        if let Some(e) = end {
            p += acc.gain_after(pdm, kept, e);
        }
        out.push(PodPoint { d, p, e_p: p / mass });
    }
    Ok(out)
}

/// First-seen walk distance of each target, `None` when never seen.
///
/// The path is sampled at `d_i = i·D / n_walk`, `i = 0..=n_walk`; a target is
/// seen at the first sample within `radius`. Candidate samples are located
/// per segment from the circle intersection and then checked at their exact
/// walk positions, which gives the same answer as testing every sample.
pub fn find_distances(path: &Path, targets: &[Point], radius: f64, n_walk: usize) -> Vec<Option<f64>> {
    let wp = &path.waypoints;
    let cum = path.cumulative();
    let total = *cum.last().expect("non-empty path");
    let n = n_walk.max(1);
    let r2 = radius * radius;
    let sample = |i: usize| i as f64 * total / n as f64;
    let seen_at = |i: usize, q: Point| dist2(point_at_cumulative(wp, &cum, sample(i)), q) <= r2;
    targets
        .iter()
        .map(|&q| {
            if total == 0.0 {
                return (dist2(wp[0], q) <= r2).then_some(0.0);
            }
            for k in 0..wp.len().saturating_sub(1) {
                let (a, b) = (wp[k], wp[k + 1]);
                let len = cum[k + 1] - cum[k];
                if len <= 0.0 {
                    continue;
                }
                let e = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                let rel = [q[0] - a[0], q[1] - a[1]];
                let along = rel[0] * e[0] + rel[1] * e[1];
                let perp2 = (rel[0] * rel[0] + rel[1] * rel[1]) - along * along;
                if perp2 > r2 {
                    continue;
                }
                let half = (r2 - perp2).max(0.0).sqrt();
                let lo = cum[k] + (along - half).max(0.0);
                let hi = cum[k] + (along + half).min(len);
                if lo > hi {
                    continue;
                }
                // Samples near [lo, hi], padded by one to absorb rounding.
                let first = ((lo * n as f64 / total).floor() as usize).saturating_sub(1);
                let last = (((hi * n as f64 / total).ceil() as usize) + 1).min(n);
                if let Some(i) = (first..=last).find(|&i| seen_at(i, q)) {
                    return Some(sample(i));
                }
            }
            None
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtfResult {
    /// Find distances of the targets that were found, in target order.
    pub dtf: Vec<f64>,
    pub n_targets: usize,
    pub pf: f64,
}

impl DtfResult {
    pub fn from_distances(found: &[Option<f64>]) -> Self {
        let dtf: Vec<f64> = found.iter().flatten().copied().collect();
        let n_targets = found.len();
        let pf = if n_targets == 0 { 0.0 } else { dtf.len() as f64 / n_targets as f64 };
        Self { dtf, n_targets, pf }
    }
}

/// Distance to find and percentage found for `n_targets` targets sampled
/// from the PDM discretised at `cell_size`.
pub fn dtf_pf(
    pdm: &Pdm,
    path: &Path,
    n_targets: usize,
    radius: f64,
    n_walk: usize,
    cell_size: f64,
    seed: u64,
) -> Result<DtfResult> {
    if n_targets == 0 {
        return Err(Error::invalid("n_targets must be at least 1"));
    }
    if path.waypoints.is_empty() {
        return Err(Error::invalid("path has no waypoints"));
    }
    let grid = pdm.discretize(cell_size)?;
    let targets = sample_targets(&grid, n_targets, seed)?;
    Ok(DtfResult::from_distances(&find_distances(path, &targets, radius, n_walk)))
}

/// One algorithm on one PDM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm_id: String,
    pub seed: u64,
    pub pdm: Pdm,
    pub path: Path,
    pub pod: Vec<PodPoint>,
    pub e_p_final: f64,
    pub dtf: Vec<f64>,
    pub n_targets: usize,
    pub pf: f64,
}

impl RunRecord {
    pub fn p_final(&self) -> f64 {
        self.pod.last().map_or(0.0, |p| p.p)
    }
}

/// Evaluation knobs that are not part of the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub n_pod_steps: usize,
    pub n_targets: usize,
    pub n_walk: usize,
    pub gw: GwConfig,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self { n_pod_steps: 50, n_targets: 1000, n_walk: 10_000, gw: GwConfig::default() }
    }
}

/// Inputs shared by every algorithm within one run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: EnvConfig,
    pub seed: u64,
    pub pdm: Pdm,
    pub start: Point,
}

impl RunContext {
    /// PDM and start position exactly as `SearchEnv::reset(seed)` draws them.
    pub fn new(config: &EnvConfig, seed: u64) -> Result<Self> {
        let mut env = SearchEnv::new(config.clone())?;
        env.reset(seed);
        let state = env.state().expect("reset");
        Ok(Self { config: config.clone(), seed, pdm: state.pdm.clone(), start: state.position })
    }
}

/// A path generator taking part in an experiment.
pub trait Planner {
    fn id(&self) -> &str;
    fn plan(&mut self, ctx: &RunContext) -> Result<Path>;
}

/// Maps a flat observation to an action in `[-1, 1]`.
pub trait Policy {
    fn act(&mut self, observation: &[f64]) -> Result<f64>;
}

pub struct LawnmowerPlanner;

impl Planner for LawnmowerPlanner {
    fn id(&self) -> &str {
        LAWNMOWER
    }

    fn plan(&mut self, ctx: &RunContext) -> Result<Path> {
        lawnmower(&ctx.config.bounds, ctx.config.lambda, ctx.config.d_max())
    }
}

pub struct LhcGwConvPlanner {
    pub gw: GwConfig,
}

impl Planner for LhcGwConvPlanner {
    fn id(&self) -> &str {
        LHC_GW_CONV
    }

    fn plan(&mut self, ctx: &RunContext) -> Result<Path> {
        let c = &ctx.config;
        let grid = ctx.pdm.discretize(c.lambda)?;
        let start = grid.cell_of(ctx.start).ok_or_else(|| Error::invalid("start outside grid"))?;
        Ok(lhc_gw_conv(&grid, start, c.d_max(), c.lambda, &self.gw)?.path)
    }
}

/// Runs a full episode of a [`Policy`] in the environment and returns the
/// visited positions.
pub struct PolicyPlanner<P> {
    id: String,
    policy: P,
}

impl<P: Policy> PolicyPlanner<P> {
    pub fn new(id: impl Into<String>, policy: P) -> Self {
        Self { id: id.into(), policy }
    }
}

impl<P: Policy> Planner for PolicyPlanner<P> {
    fn id(&self) -> &str {
        &self.id
    }

    fn plan(&mut self, ctx: &RunContext) -> Result<Path> {
        let mut env = SearchEnv::new(ctx.config.clone())?;
        let mut obs = env.reset_with(ctx.pdm.clone(), ctx.start).flat;
        loop {
            let step = env.step(self.policy.act(&obs)?)?;
            obs = step.observation.flat;
            if step.done {
                break;
            }
        }
        Ok(Path::new(self.id.clone(), env.state().expect("episode").path.clone()))
    }
}

/// Uniform random headings, seeded per run.
pub struct RandomPlanner;

impl Planner for RandomPlanner {
    fn id(&self) -> &str {
        RANDOM_POLICY
    }

    fn plan(&mut self, ctx: &RunContext) -> Result<Path> {
        struct Uniform(rand_chacha::ChaCha8Rng);
        impl Policy for Uniform {
            fn act(&mut self, _: &[f64]) -> Result<f64> {
                Ok(self.0.random_range(-1.0..=1.0))
            }
        }
        PolicyPlanner::new(RANDOM_POLICY, Uniform(seeded_rng(ctx.seed ^ 0xA5A5_5A5A))).plan(ctx)
    }
}

pub fn planner_for(label: &str, settings: &EvalSettings) -> Result<Box<dyn Planner>> {
    match label {
        LAWNMOWER => Ok(Box::new(LawnmowerPlanner)),
        LHC_GW_CONV => Ok(Box::new(LhcGwConvPlanner { gw: settings.gw })),
        RANDOM_POLICY => Ok(Box::new(RandomPlanner)),
        other => Err(Error::UnknownAlgorithm(other.to_string())),
    }
}

/// Target sampling seed for a run; shared by all algorithms of that run.
pub fn target_seed(run_seed: u64) -> u64 {
    run_seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Scores `path` on the run's PDM.
pub fn evaluate_path(ctx: &RunContext, path: Path, settings: &EvalSettings) -> Result<RunRecord> {
    let c = &ctx.config;
    let rule = DiscCubatureRule::new(c.rule_degree)?;
    let pod = pod_curve(&ctx.pdm, &path, settings.n_pod_steps, c.r_buffer, &rule, c.footprint)?;
    let e_p_final = pod.last().expect("n_steps >= 1").e_p;
    let dtf = dtf_pf(&ctx.pdm, &path, settings.n_targets, c.r_buffer, settings.n_walk, c.lambda, target_seed(ctx.seed))?;
    Ok(RunRecord {
        algorithm_id: path.algorithm_id.clone(),
        seed: ctx.seed,
        pdm: ctx.pdm.clone(),
        path,
        pod,
        e_p_final,
        dtf: dtf.dtf,
        n_targets: dtf.n_targets,
        pf: dtf.pf,
    })
}

/// First line of a records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordsHeader {
    pub format: String,
    pub version: u32,
    pub config: EnvConfig,
    pub settings: EvalSettings,
}

impl RecordsHeader {
    pub fn new(config: &EnvConfig, settings: &EvalSettings) -> Self {
        Self {
            format: RECORDS_FORMAT.to_string(),
            version: RECORDS_VERSION,
            config: config.clone(),
            settings: settings.clone(),
        }
    }
}

/// Reads a records file written by [`Experiment::run_to_file`].
pub fn read_records(path: &std::path::Path) -> Result<(RecordsHeader, Vec<RunRecord>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header: RecordsHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => return Err(Error::invalid(format!("{} is empty", path.display()))),
    };
    if header.format != RECORDS_FORMAT || header.version != RECORDS_VERSION {
        return Err(Error::invalid(format!("unsupported records format {} v{}", header.format, header.version)));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok((header, records))
}

/// Paired runs of several algorithms over seeded PDMs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: EnvConfig,
    pub settings: EvalSettings,
    pub n_runs: u64,
    pub seed: u64,
}

impl Experiment {
    pub fn new(config: EnvConfig, settings: EvalSettings, n_runs: u64, seed: u64) -> Result<Self> {
        config.validate()?;
        settings.gw.validate()?;
        if settings.n_pod_steps == 0 || settings.n_targets == 0 || settings.n_walk == 0 {
            return Err(Error::invalid("evaluation step and target counts must be positive"));
        }
        Ok(Self { config, settings, n_runs, seed })
    }

    pub fn run_seed(&self, run: u64) -> u64 {
        self.seed.wrapping_add(run)
    }

    /// Runs every planner on every run index; `skip` lists `(algorithm, seed)`
    /// pairs to leave out. Each record is handed to `sink` as it completes.
    pub fn run_with<F>(&self, planners: &mut [Box<dyn Planner>], skip: &HashSet<(String, u64)>, mut sink: F) -> Result<()>
    where
        F: FnMut(RunRecord) -> Result<()>,
    {
        for run in 0..self.n_runs {
            let seed = self.run_seed(run);
            let pending: Vec<usize> = (0..planners.len())
                .filter(|&k| !skip.contains(&(planners[k].id().to_string(), seed)))
                .collect();
            if pending.is_empty() {
                continue;
            }
            let ctx = RunContext::new(&self.config, seed)?;
            for k in pending {
                let path = planners[k].plan(&ctx)?;
                let record = evaluate_path(&ctx, path, &self.settings)?;
                debug!(algorithm = %record.algorithm_id, seed, e_p = record.e_p_final, pf = record.pf, "run complete");
                sink(record)?;
            }
        }
        Ok(())
    }

    pub fn run(&self, planners: &mut [Box<dyn Planner>]) -> Result<Vec<RunRecord>> {
        let mut out = Vec::new();
        self.run_with(planners, &HashSet::new(), |r| {
            out.push(r);
            Ok(())
        })?;
        Ok(out)
    }

    /// Streams records to `output`, one JSON object per line after a header.
    /// An existing file with a matching header is resumed: runs already
    /// present are skipped. Returns all records in the file afterwards.
    pub fn run_to_file(&self, planners: &mut [Box<dyn Planner>], output: &std::path::Path) -> Result<Vec<RunRecord>> {
        let header = RecordsHeader::new(&self.config, &self.settings);
        let mut existing = Vec::new();
        if output.exists() && std::fs::metadata(output)?.len() > 0 {
            let (found, records) = read_records(output)?;
            if found != header {
                return Err(Error::invalid(format!(
                    "{} was written with a different configuration",
                    output.display()
                )));
            }
            existing = records;
        }
        let skip: HashSet<(String, u64)> = existing.iter().map(|r| (r.algorithm_id.clone(), r.seed)).collect();
        let mut file = OpenOptions::new().create(true).append(true).open(output)?;
        if existing.is_empty() && file.metadata()?.len() == 0 {
            let mut line = serde_json::to_string(&header)?;
            line.push('\n');
            file.write_all(line.as_bytes())?;
        }
        if !skip.is_empty() {
            info!(resumed = skip.len(), "resuming records file");
        }
        self.run_with(planners, &skip, |record| {
            let mut line = serde_json::to_string(&record)?;
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
            existing.push(record);
            Ok(())
        })?;
        Ok(existing)
    }
}

/// Runs the named built-in algorithms and streams records to `output`.
pub fn run_experiment(
    config: &EnvConfig,
    settings: &EvalSettings,
    algorithms: &[&str],
    n_runs: u64,
    seed: u64,
    output: &std::path::Path,
) -> Result<Vec<RunRecord>> {
    let mut planners = algorithms.iter().map(|a| planner_for(a, settings)).collect::<Result<Vec<_>>>()?;
    Experiment::new(config.clone(), settings.clone(), n_runs, seed)?.run_to_file(&mut planners, output)
}

/// Sample statistics of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
    pub n: usize,
}

impl Stats {
    /// Unweighted statistics; `std` is the sample standard deviation (zero for
    /// a single value) and quantiles interpolate linearly between order
    /// statistics. Returns `None` for an empty slice.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| quantile_sorted(&sorted, p);
        Some(Self { mean, std, median: q(0.5), q05: q(0.05), q25: q(0.25), q75: q(0.75), q95: q(0.95), n })
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub algorithm: String,
    pub metric: String,
    #[serde(flatten)]
    pub stats: Stats,
}

pub const METRICS: &[&str] = &["e_p_final", "p_final", "dtf", "pf"];

/// Per-algorithm statistics of `e_p_final`, `p_final`, `dtf` (pooled over
/// every found target) and `pf`. Algorithms appear in sorted order; a metric
/// with no values (e.g. no target ever found) is omitted.
pub fn aggregate(records: &[RunRecord]) -> Vec<MetricSummary> {
    let mut by_alg: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_alg.entry(&r.algorithm_id).or_default().push(r);
    }
    let mut out = Vec::new();
    for (alg, rs) in by_alg {
        for metric in METRICS {
            let values: Vec<f64> = match *metric {
                "e_p_final" => rs.iter().map(|r| r.e_p_final).collect(),
                "p_final" => rs.iter().map(|r| r.p_final()).collect(),
                "dtf" => rs.iter().flat_map(|r| r.dtf.iter().copied()).collect(),
                _ => rs.iter().map(|r| r.pf).collect(),
            };
            if let Some(stats) = Stats::from_values(&values) {
                out.push(MetricSummary { algorithm: alg.to_string(), metric: metric.to_string(), stats });
            }
        }
    }
    out
}

pub const SUMMARY_HEADER: &str = "algorithm,metric,mean,std,median,q05,q25,q75,q95,n";

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[MetricSummary]) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        let s = &r.stats;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.algorithm, r.metric, s.mean, s.std, s.median, s.q05, s.q25, s.q75, s.q95, s.n
        )?;
    }
    Ok(())
}

/// Fraction of an algorithm's runs with `e_p_final > τ`, per threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub algorithm: String,
    pub thresholds: Vec<f64>,
    pub fractions: Vec<f64>,
}

pub fn performance_profile(records: &[RunRecord], thresholds: &[f64]) -> Result<Vec<ProfileCurve>> {
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("thresholds must be ascending"));
    }
    let mut by_alg: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_alg.entry(&r.algorithm_id).or_default().push(r.e_p_final);
    }
    Ok(by_alg
        .into_iter()
        .map(|(alg, values)| {
            let n = values.len() as f64;
            let fractions = thresholds.iter().map(|t| values.iter().filter(|v| **v > *t).count() as f64 / n).collect();
            ProfileCurve { algorithm: alg.to_string(), thresholds: thresholds.to_vec(), fractions }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubature::{accumulate_path_with, integrate_disc};
    use crate::pdm::{generate_random_pdm, Bounds};

    const ISO: [[f64; 2]; 2] = [[500.0, 0.0], [0.0, 500.0]];

    fn fake_record(alg: &str, e_p: f64) -> RunRecord {
        let pdm = generate_random_pdm(1, 1, Bounds::default(), ISO).unwrap();
        RunRecord {
            algorithm_id: alg.into(),
            seed: 0,
            pdm,
            path: Path::new(alg, vec![[0.0, 0.0]]),
            pod: vec![PodPoint { d: 0.0, p: e_p * 0.8, e_p }],
            e_p_final: e_p,
            dtf: vec![],
            n_targets: 10,
            pf: 0.0,
        }
    }

    #[test]
    fn efficiency_edges() {
        let pdm = generate_random_pdm(4, 4, Bounds::default(), ISO).unwrap();
        let mass = pdm.mass_in_bounds(pdm.bounds());
        assert_eq!(probability_efficiency(0.0, &pdm).unwrap(), 0.0);
        assert_eq!(probability_efficiency(mass, &pdm).unwrap(), 1.0);
        assert!(probability_efficiency(-0.1, &pdm).is_err());
        // All mass far outside the bounds.
        let far = crate::pdm::Pdm::new(
            vec![crate::pdm::GaussianComponent { mean: [1e5, 1e5], cov: ISO, weight: 1.0 }],
            Bounds::default(),
        )
        .unwrap();
        assert!(matches!(probability_efficiency(0.1, &far), Err(Error::ZeroMass)));
    }

    #[test]
    fn pod_curve_contract() {
        let pdm = generate_random_pdm(8, 4, Bounds::default(), ISO).unwrap();
        let rule = DiscCubatureRule::new(7).unwrap();
        let path = lawnmower(&Bounds::default(), 8.0, 512.0).unwrap();
        for fp in [Footprint::Disc, Footprint::Corridor] {
            let pod = pod_curve(&pdm, &path, 50, 2.5, &rule, fp).unwrap();
            assert_eq!(pod.len(), 51);
            assert_eq!(pod[0].d, 0.0);
            assert_eq!(pod[0].p, integrate_disc(&pdm, path.waypoints[0], 2.5, &rule));
            assert!(pod.windows(2).all(|w| w[1].p >= w[0].p && w[1].d > w[0].d));
            let full = accumulate_path_with(&pdm, &path.waypoints, 2.5, &rule, fp).unwrap();
            let e_full = probability_efficiency(full.total, &pdm).unwrap();
            assert!((pod[50].e_p - e_full).abs() < 1e-9);
            // Every point equals accumulating the truncated path from scratch.
            for pt in pod.iter().step_by(7) {
                let t = path.truncate(pt.d);
                let direct = accumulate_path_with(&pdm, &t.waypoints, 2.5, &rule, fp).unwrap().total;
                assert!((direct - pt.p).abs() < 1e-12, "d = {}", pt.d);
            }
        }
    }

    /// Plain sample-by-sample walk with an active target set.
    fn naive_walk(path: &Path, targets: &[Point], radius: f64, n_walk: usize) -> Vec<Option<f64>> {
        let total = path.length();
        let mut found = vec![None; targets.len()];
        let mut active: Vec<usize> = (0..targets.len()).collect();
        for i in 0..=n_walk {
            let d = i as f64 * total / n_walk as f64;
            let x = path.point_at(d);
            active.retain(|&k| {
                if dist2(x, targets[k]) <= radius * radius {
                    found[k] = Some(d);
                    false
                } else {
                    true
                }
            });
        }
        found
    }

    #[test]
    fn find_distances_match_naive_walk() {
        let path = lawnmower(&Bounds::default(), 8.0, 512.0).unwrap();
        let pdm = generate_random_pdm(21, 4, Bounds::default(), ISO).unwrap();
        let grid = pdm.discretize(8.0).unwrap();
        let targets = sample_targets(&grid, 3000, 4).unwrap();
        let fast = find_distances(&path, &targets, 2.5, 2000);
        let slow = naive_walk(&path, &targets, 2.5, 2000);
        assert_eq!(fast, slow);
        assert!(fast.iter().any(|f| f.is_some()));
    }

    #[test]
    fn dtf_edge_cases() {
        let path = Path::new("p", vec![[10.0, 10.0], [50.0, 10.0]]);
        let found = find_distances(&path, &[[10.0, 10.0], [30.0, 20.0]], 2.5, 10_000);
        assert_eq!(found, vec![Some(0.0), None]);
        let r = DtfResult::from_distances(&found);
        assert_eq!(r.dtf, vec![0.0]);
        assert_eq!(r.pf, 0.5);
        let single = Path::new("p", vec![[10.0, 10.0]]);
        assert_eq!(find_distances(&single, &[[11.0, 10.0]], 2.5, 100), vec![Some(0.0)]);
    }

    #[test]
    fn dtf_pf_is_consistent() {
        let pdm = generate_random_pdm(5, 4, Bounds::default(), ISO).unwrap();
        let path = lawnmower(&Bounds::default(), 8.0, 512.0).unwrap();
        let r = dtf_pf(&pdm, &path, 500, 2.5, 10_000, 8.0, 9).unwrap();
        assert_eq!(r.pf, r.dtf.len() as f64 / 500.0);
        assert!(r.dtf.iter().all(|d| *d <= path.length() + 1e-9));
        assert!(dtf_pf(&pdm, &path, 0, 2.5, 100, 8.0, 1).is_err());
    }

    #[test]
    fn stats_basics() {
        let one = Stats::from_values(&[0.4]).unwrap();
        assert_eq!((one.mean, one.median, one.std), (0.4, 0.4, 0.0));
        let two = Stats::from_values(&[0.1, 0.3]).unwrap();
        assert!((two.mean - 0.2).abs() < 1e-15 && (two.median - 0.2).abs() < 1e-15);
        let s = Stats::from_values(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.q25, 2.0);
        assert_eq!(s.q05, 1.2);
        assert!((s.std - 2.5f64.sqrt()).abs() < 1e-15);
        assert!(Stats::from_values(&[]).is_none());
    }

    #[test]
    fn profile_edges() {
        let recs = vec![fake_record("a", 0.15), fake_record("b", 0.05), fake_record("b", 0.25)];
        let prof = performance_profile(&recs, &[0.0, 0.1, 0.3]).unwrap();
        assert_eq!(prof[0].algorithm, "a");
        assert_eq!(prof[0].fractions, vec![1.0, 1.0, 0.0]);
        assert_eq!(prof[1].fractions, vec![1.0, 0.5, 0.0]);
        assert!(performance_profile(&[], &[0.1]).is_err());
        assert!(performance_profile(&recs, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn summary_csv_layout() {
        let recs = vec![fake_record("a", 0.1), fake_record("a", 0.3)];
        let rows = aggregate(&recs);
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SUMMARY_HEADER));
        let first = lines.next().unwrap();
        assert!(first.starts_with("a,e_p_final,0.2,"), "{first}");
        assert!(first.ends_with(",2"));
        // dtf has no values and is omitted.
        assert!(!text.contains(",dtf,"));
    }

    #[test]
    fn unknown_algorithm() {
        assert!(matches!(planner_for("dijkstra", &EvalSettings::default()), Err(Error::UnknownAlgorithm(_))));
    }
}
