//! Acceptance gate. Runs every exit criterion at its fixed tolerance, prints
//! one PASS/FAIL line per criterion and exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod fixtures;

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::time::Instant;

use rand::Rng;

use wisar_core::cubature::{accumulate_path, integrate_disc, mc_union_mass, DiscCubatureRule};
use wisar_core::env::{EnvConfig, SearchEnv};
use wisar_core::eval::{aggregate, planner_for, EvalSettings, Experiment, RunRecord};
use wisar_core::pdm::{generate_random_pdm, seeded_rng, Bounds, GaussianComponent, Pdm};
use wisar_core::planners::{lhc_gw_conv, local_hill_climb, warming_candidates, GwConfig, LAWNMOWER, LHC_GW_CONV};
use wisar_core::protocol::{EnvReply, EnvResponse};
use wisar_core::Point;

use fixtures::*;

const COV: [[f64; 2]; 2] = [[500.0, 0.0], [0.0, 500.0]];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Γ(i + ½) = √π (2i)! / (4^i i!).
fn gamma_half(i: u32) -> f64 {
    PI.sqrt() * factorial(2 * i) / (4f64.powi(i as i32) * factorial(i))
}

/// ∫∫ x^a y^b over the unit disc in closed form.
fn disc_moment(a: u32, b: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    let (i, j) = (a / 2, b / 2);
    2.0 * gamma_half(i) * gamma_half(j) / (f64::from(a + b + 2) * factorial(i + j))
}

fn cubature_exactness() -> Outcome {
    let rule = DiscCubatureRule::new(7).unwrap();
    let mut worst: f64 = 0.0;
    for a in 0..=7u32 {
        for b in 0..=(7 - a) {
            let q = rule.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
            worst = worst.max((q - disc_moment(a, b)).abs());
        }
    }
    let r6 = rule.integrate(|p| (p[0] * p[0] + p[1] * p[1]).powi(3));
    worst = worst.max((r6 - PI / 4.0).abs());

    let pdm = Pdm::new(vec![GaussianComponent { mean: [75.0, 75.0], cov: COV, weight: 1.0 }], Bounds::default()).unwrap();
    let got = integrate_disc(&pdm, [75.0, 75.0], 2.5, &rule);
    let expect = 1.0 - (-0.00625f64).exp();
    let rel = ((got - expect) / expect).abs();
    outcome(
        worst <= 1e-12 && rel <= 1e-8,
        format!("max monomial error {worst:.1e} (tol 1e-12); centered disc {got:.9e} vs 1-exp(-0.00625) = {expect:.9e}, rel {rel:.1e} (tol 1e-8)"),
    )
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0
}

fn self_crossing(path: &[Point]) -> bool {
    (0..path.len() - 1).any(|i| (i + 2..path.len() - 1).any(|j| segments_cross(path[i], path[i + 1], path[j], path[j + 1])))
}

fn union_mass_oracle() -> Outcome {
    let rule = DiscCubatureRule::new(7).unwrap();
    let mut rng = seeded_rng(2024);
    let mut worst_margin = f64::INFINITY;
    let mut worst = String::new();
    for k in 0..20u64 {
        let pdm = generate_random_pdm(1000 + k, 4, Bounds::default(), COV).unwrap();
        let anchor = pdm.components()[0].mean;
        // Random 10-waypoint walk near a component, redrawn until it crosses itself.
        let path = loop {
            let mut p = anchor;
            let mut path = vec![p];
            for _ in 1..10 {
                let h = rng.random_range(-PI..PI);
                let step = rng.random_range(1.0..6.0);
                p = Bounds::default().clamp([p[0] + step * h.cos(), p[1] + step * h.sin()]);
                path.push(p);
            }
            if self_crossing(&path) {
                break path;
            }
        };
        let total = accumulate_path(&pdm, &path, 2.5, &rule).unwrap().total;
        let (mc, se) = mc_union_mass(&pdm, &path, 2.5, 1_000_000, 77 + k);
        let tol = 3.0 * se + 2e-3;
        let margin = tol - (total - mc).abs();
        if margin < worst_margin {
            worst_margin = margin;
            worst = format!("path {k}: cubature {total:.5} vs MC {mc:.5} ± {se:.1e}");
        }
    }
    outcome(worst_margin >= 0.0, format!("20 self-crossing paths; tightest {worst}, margin {worst_margin:.2e}"))
}

fn observation_contract() -> Outcome {
    let config = EnvConfig::default();
    let n = config.n_waypoint;
    let mut rng = seeded_rng(5);
    let mut problems = Vec::new();
    for episode in 0..100u64 {
        let actions: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let record = |env: &mut SearchEnv| {
            let mut trace = vec![env.reset(episode).flat];
            let mut rewards = Vec::new();
            for a in &actions {
                let s = env.step(*a).unwrap();
                trace.push(s.observation.flat);
                rewards.push(s.reward.to_bits());
            }
            (trace, rewards)
        };
        let (trace, rewards) = record(&mut SearchEnv::new(config.clone()).unwrap());
        let (replay, replay_rewards) = record(&mut SearchEnv::new(config.clone()).unwrap());
        for (t, flat) in trace.iter().enumerate() {
            if flat.len() != 156 {
                problems.push(format!("episode {episode} t {t}: length {}", flat.len()));
            }
            if flat.iter().any(|v| !(0.0..=1.0).contains(v)) {
                problems.push(format!("episode {episode} t {t}: value outside [0, 1]"));
            }
            if (t + 1..n).any(|k| flat[k] != 0.0 || flat[n + k] != 0.0) {
                problems.push(format!("episode {episode} t {t}: path not zero padded"));
            }
        }
        let bits = |tr: &[Vec<f64>]| tr.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        if bits(&trace) != bits(&replay) || rewards != replay_rewards {
            problems.push(format!("episode {episode}: replay differs"));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "100 episodes: length 156, range [0, 1], zero padding and bit-exact replay hold".to_string()
        } else {
            problems[..problems.len().min(3)].join("; ")
        },
    )
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn baseline_runs() -> Vec<RunRecord> {
    let settings = EvalSettings::default();
    let mut planners = vec![planner_for(LAWNMOWER, &settings).unwrap(), planner_for(LHC_GW_CONV, &settings).unwrap()];
    Experiment::new(EnvConfig::default(), settings, 1000, 0).unwrap().run(&mut planners).unwrap()
}

fn pod_reproduction(records: &[RunRecord]) -> Outcome {
    let e_p = |alg: &str| mean(records.iter().filter(|r| r.algorithm_id == alg).map(|r| r.e_p_final));
    let (lm, lhc) = (e_p(LAWNMOWER), e_p(LHC_GW_CONV));
    let ratio = lhc / lm;
    let lm_ok = (0.05..=0.11).contains(&lm);
    let lhc_ok = (0.08..=0.16).contains(&lhc);
    outcome(
        lm_ok && lhc_ok && ratio >= 1.2,
        format!(
            "1000 paired runs: lawnmower e_p {lm:.4} in [0.05, 0.11] {}; lhc-gw-conv e_p {lhc:.4} in [0.08, 0.16] {}; ratio {ratio:.2} >= 1.2 {}",
            ok(lm_ok),
            ok(lhc_ok),
            ok(ratio >= 1.2)
        ),
    )
}

fn dtf_reproduction(records: &[RunRecord]) -> Outcome {
    let summary = aggregate(records);
    let stat = |alg: &str, metric: &str| {
        summary.iter().find(|s| s.algorithm == alg && s.metric == metric).map(|s| s.stats.mean).unwrap_or(f64::NAN)
    };
    let (lm_pf, lhc_pf) = (100.0 * stat(LAWNMOWER, "pf"), 100.0 * stat(LHC_GW_CONV, "pf"));
    let (lm_dtf, lhc_dtf) = (stat(LAWNMOWER, "dtf"), stat(LHC_GW_CONV, "dtf"));
    let band = (5.3..=10.3).contains(&lm_pf);
    outcome(
        band && lhc_pf > lm_pf && lhc_dtf < lm_dtf,
        format!(
            "1000 paired runs x 1000 targets: lawnmower PF {lm_pf:.2}% in [5.3, 10.3] {}; lhc-gw-conv PF {lhc_pf:.2}% > lawnmower {}; DTF {lhc_dtf:.1} < {lm_dtf:.1} {}",
            ok(band),
            ok(lhc_pf > lm_pf),
            ok(lhc_dtf < lm_dtf)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISSED"
    }
}

fn planner_oracles() -> Outcome {
    let mut problems = Vec::new();

    let peak = single_peak();
    let budget = 3.0 * SPACING * 2f64.sqrt();
    let hc = local_hill_climb(&peak, (0, 0), budget, SPACING).unwrap();
    let oracle = greedy_trajectories(&peak, (0, 0), 3);
    let ascends = |t: &[_]| t.windows(2).all(|w: &[(usize, usize)]| peak.value(w[1]) > peak.value(w[0]));
    if !oracle.iter().all(|t| ascends(t) && *t.last().unwrap() == SINGLE_PEAK_CELL) {
        problems.push("greedy oracle does not ascend to the peak".to_string());
    }
    if !oracle.iter().any(|t| t.as_slice() == &hc.cells[..4]) {
        problems.push(format!("5x5 climb {:?} is not a greedy trajectory", &hc.cells[..4]));
    }

    let ridge = two_peak_ridge();
    let gw = GwConfig::default();
    let cands = warming_candidates(&ridge, RIDGE_START, RIDGE_BUDGET, SPACING, &gw);
    let scores: Vec<f64> = cands.iter().map(|c| score_within_budget(&ridge, &c.cells, RIDGE_BUDGET)).collect();
    let best = lhc_gw_conv(&ridge, RIDGE_START, RIDGE_BUDGET, SPACING, &gw).unwrap();
    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(best.score == top && best.score > scores[0] && best.warming_level == scores.iter().position(|s| *s == top).unwrap()) {
        problems.push(format!("7x7 warming scores {scores:?}, chosen {} at level {}", best.score, best.warming_level));
    }

    for grid in [peak.clone(), ridge.clone()] {
        for start in grid.cells() {
            let a = lhc_gw_conv(&grid, start, 80.0, SPACING, &gw).unwrap();
            let b = lhc_gw_conv(&grid.scaled(10.0), start, 80.0, SPACING, &gw).unwrap();
            let again = lhc_gw_conv(&grid, start, 80.0, SPACING, &gw).unwrap();
            if a.cells != b.cells || a != again {
                problems.push(format!("start {start:?}: scaling or rerun changed the climb"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("5x5 climb matches greedy oracle; 7x7 warming {scores:?} beats k=0; x10 scaling and reruns leave cells unchanged")
        } else {
            problems.join("; ")
        },
    )
}

fn server_throughput() -> Outcome {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            wisar_server::serve_tcp(EnvConfig::default(), listener).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    let stream = TcpStream::connect(addr).unwrap();
    stream.set_nodelay(true).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    let mut line = String::new();
    let mut send = |msg: String| -> EnvResponse {
        writer.write_all(msg.as_bytes()).unwrap();
        writer.write_all(b"\n").unwrap();
        line.clear();
        reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap()
    };

    let mut rng = seeded_rng(31);
    let mut local = SearchEnv::new(EnvConfig::default()).unwrap();
    let mut mismatches = 0;
    let mut steps = 0usize;
    let mut elapsed = 0.0;
    for episode in 0..30u64 {
        let actions: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..=1.0)).collect();
        local.reset(episode);
        send(format!(r#"{{"v":1,"cmd":"reset","seed":{episode}}}"#));
        let start = Instant::now();
        let mut remote = Vec::with_capacity(64);
        for a in &actions {
            remote.push(send(format!(r#"{{"v":1,"cmd":"step","action":{a}}}"#)));
        }
        elapsed += start.elapsed().as_secs_f64();
        steps += actions.len();
        for (a, r) in actions.iter().zip(remote) {
            let here = local.step(*a).unwrap();
            match r.reply {
                EnvReply::Step { reward, flat, .. } if reward.to_bits() == here.reward.to_bits() && flat == here.observation.flat => {}
                _ => mismatches += 1,
            }
        }
    }
    let rate = steps as f64 / elapsed;
    outcome(
        rate >= 1000.0 && mismatches == 0,
        format!("{steps} steps over TCP at {rate:.0} steps/s (min 1000) on a single-threaded server; {mismatches} reward mismatches in transcript replay"),
    )
}

fn main() {
    let started = Instant::now();
    let mut failures = 0;
    let mut report = |name: &str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failures += 1;
        }
    };
    report("cubature exactness", cubature_exactness());
    report("union-mass oracle", union_mass_oracle());
    report("observation contract", observation_contract());
    let records = baseline_runs();
    report("baseline POD", pod_reproduction(&records));
    report("baseline DTF", dtf_reproduction(&records));
    report("planner oracles", planner_oracles());
    report("server throughput and replay", server_throughput());
    println!("acceptance: {failures} of 7 criteria failed ({:.1} s)", started.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
