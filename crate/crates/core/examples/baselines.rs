//! Prints baseline metrics over a number of paired runs.
//!
//! cargo run --release -p wisar-core --example baselines -- [runs] [disc|corridor]

use wisar_core::cubature::Footprint;
use wisar_core::env::EnvConfig;
use wisar_core::eval::{aggregate, planner_for, EvalSettings, Experiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let footprint = match args.next().as_deref() {
        Some("corridor") => Footprint::Corridor,
        _ => Footprint::Disc,
    };
    let config = EnvConfig { footprint, ..Default::default() };
    let settings = EvalSettings::default();
    let mut planners = ["lawnmower", "lhc-gw-conv", "random"]
        .iter()
        .map(|a| planner_for(a, &settings))
        .collect::<Result<Vec<_>, _>>()?;
    let records = Experiment::new(config, settings, runs, 1)?.run(&mut planners)?;
    for row in aggregate(&records) {
        println!("{:12} {:10} mean {:.4} std {:.4} median {:.4} n {}", row.algorithm, row.metric, row.stats.mean, row.stats.std, row.stats.median, row.stats.n);
    }
    Ok(())
}
