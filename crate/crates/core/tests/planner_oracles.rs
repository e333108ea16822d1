mod common;

use common::*;
use wisar_core::pdm::{generate_random_pdm, Bounds};
use wisar_core::planners::{lhc_gw_conv, local_hill_climb, warming_candidates, GwConfig};

#[test]
fn single_peak_climb_ascends_to_the_peak() {
    let grid = single_peak();
    let budget = 3.0 * SPACING * 2f64.sqrt();
    let hc = local_hill_climb(&grid, (0, 0), budget, SPACING).unwrap();
    let to_peak = &hc.cells[..4];
    assert_eq!(*to_peak.last().unwrap(), SINGLE_PEAK_CELL);
    for w in to_peak.windows(2) {
        assert!(grid.value(w[1]) > grid.value(w[0]), "{to_peak:?}");
    }

    let oracle = greedy_trajectories(&grid, (0, 0), 3);
    assert!(!oracle.is_empty());
    for t in &oracle {
        assert_eq!(*t.last().unwrap(), SINGLE_PEAK_CELL);
        assert!(t.windows(2).all(|w| grid.value(w[1]) > grid.value(w[0])));
    }
    assert!(oracle.iter().any(|t| t.as_slice() == to_peak));
    assert_eq!(hc.path.waypoints.len(), 4);
    assert!((hc.score - score_within_budget(&grid, &hc.cells, budget)).abs() < 1e-12);
}

#[test]
fn climb_follows_a_greedy_trajectory_past_the_peak() {
    let grid = single_peak();
    let hc = local_hill_climb(&grid, (0, 0), 8.0 * SPACING, SPACING).unwrap();
    let n_moves = hc.cells.len() - 1;
    let oracle = greedy_trajectories(&grid, (0, 0), n_moves);
    assert!(oracle.contains(&hc.cells), "{:?}", hc.cells);
}

#[test]
fn warming_beats_the_plain_climb_on_the_ridge_grid() {
    let grid = two_peak_ridge();
    let gw = GwConfig::default();
    let cands = warming_candidates(&grid, RIDGE_START, RIDGE_BUDGET, SPACING, &gw);
    assert_eq!(cands.len(), gw.n_warming);
    let scores: Vec<f64> = cands.iter().map(|c| score_within_budget(&grid, &c.cells, RIDGE_BUDGET)).collect();
    for (c, s) in cands.iter().zip(&scores) {
        assert!((c.score - s).abs() < 1e-12);
    }
    let best = lhc_gw_conv(&grid, RIDGE_START, RIDGE_BUDGET, SPACING, &gw).unwrap();
    let best_score = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first_best = scores.iter().position(|s| *s == best_score).unwrap();
    assert_eq!(best.warming_level, first_best);
    assert_eq!(best.score, best_score);
    assert!(best.score > scores[0], "{scores:?}");
    assert!(best.cells.contains(&(5, 5)));
}

#[test]
fn scaling_the_grid_leaves_cells_unchanged() {
    let gw = GwConfig::default();
    for grid in [single_peak(), two_peak_ridge()] {
        let scaled = grid.scaled(10.0);
        for start in grid.cells() {
            let a = lhc_gw_conv(&grid, start, 80.0, SPACING, &gw).unwrap();
            let b = lhc_gw_conv(&scaled, start, 80.0, SPACING, &gw).unwrap();
            assert_eq!(a.cells, b.cells);
            assert_eq!(a.warming_level, b.warming_level);
        }
    }
    for seed in 0..10 {
        let pdm = generate_random_pdm(seed, 4, Bounds::default(), [[500.0, 0.0], [0.0, 500.0]]).unwrap();
        let grid = pdm.discretize(8.0).unwrap();
        let a = lhc_gw_conv(&grid, (9, 9), 512.0, 8.0, &gw).unwrap();
        let b = lhc_gw_conv(&grid.scaled(10.0), (9, 9), 512.0, 8.0, &gw).unwrap();
        assert_eq!(a.cells, b.cells);
        assert_eq!(a.path, b.path);
    }
}

#[test]
fn planners_are_deterministic() {
    let grid = two_peak_ridge();
    let gw = GwConfig::default();
    let a = lhc_gw_conv(&grid, RIDGE_START, RIDGE_BUDGET, SPACING, &gw).unwrap();
    let b = lhc_gw_conv(&grid, RIDGE_START, RIDGE_BUDGET, SPACING, &gw).unwrap();
    assert_eq!(a, b);
}
