#![allow(dead_code)]

use std::collections::HashSet;

use wisar_core::pdm::{Cell, Grid};

pub const SPACING: f64 = 8.0;

/// Builds a grid from rows listed top (largest y) to bottom.
pub fn grid_from_rows<const N: usize>(rows: [[f64; N]; N]) -> Grid {
    let mut values = vec![0.0; N * N];
    for (r, row) in rows.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            values[(N - 1 - r) * N + i] = *v;
        }
    }
    Grid::from_values(values, N, N, [0.0, 0.0], SPACING).unwrap()
}

/// Single peak at (3, 3), strictly decreasing with squared distance.
pub fn single_peak() -> Grid {
    let mut rows = [[0.0; 5]; 5];
    for (r, row) in rows.iter_mut().enumerate() {
        let j = 4 - r as i32;
        for (i, v) in row.iter_mut().enumerate() {
            let (dx, dy) = (i as i32 - 3, j - 3);
            *v = (20 - dx * dx - dy * dy) as f64;
        }
    }
    grid_from_rows(rows)
}

pub const SINGLE_PEAK_CELL: Cell = (3, 3);

/// Small peak beside the start, a shallow ridge, and a taller peak across it.
pub fn two_peak_ridge() -> Grid {
    grid_from_rows([
        [0., 0., 0., 2., 5., 5., 5.],
        [0., 0., 0., 2., 5., 8., 5.],
        [0., 0., 0., 2., 5., 5., 5.],
        [0., 0., 0., 2., 2., 2., 2.],
        [1., 1., 1., 0., 0., 0., 0.],
        [1., 3., 1., 0., 0., 0., 0.],
        [1., 1., 1., 0., 0., 0., 0.],
    ])
}

pub const RIDGE_START: Cell = (2, 2);
pub const RIDGE_BUDGET: f64 = 64.0;

const MOVES: [(i32, i32); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

/// Every trajectory of `n_moves` moves where each move goes to a neighbour of
/// maximal current value, visited cells counting as zero. Ties branch.
pub fn greedy_trajectories(grid: &Grid, start: Cell, n_moves: usize) -> Vec<Vec<Cell>> {
    let (nx, ny) = grid.dims();
    let mut out = Vec::new();
    let mut visited = HashSet::from([start]);
    let mut path = vec![start];
    fn rec(
        grid: &Grid,
        dims: (usize, usize),
        n_moves: usize,
        path: &mut Vec<Cell>,
        visited: &mut HashSet<Cell>,
        out: &mut Vec<Vec<Cell>>,
    ) {
        if path.len() > n_moves {
            out.push(path.clone());
            return;
        }
        let cur = *path.last().unwrap();
        let value = |c: &Cell, visited: &HashSet<Cell>| if visited.contains(c) { 0.0 } else { grid.value(*c) };
        let neighbours: Vec<Cell> = MOVES
            .iter()
            .map(|(di, dj)| (cur.0 as i32 + di, cur.1 as i32 + dj))
            .filter(|(x, y)| *x >= 0 && *y >= 0 && (*x as usize) < dims.0 && (*y as usize) < dims.1)
            .map(|(x, y)| (x as usize, y as usize))
            .collect();
        let best = neighbours.iter().map(|c| value(c, visited)).fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<Cell> = neighbours.iter().filter(|c| value(c, visited) == best).copied().collect();
        for c in &ties {
            let fresh = visited.insert(*c);
            path.push(*c);
            rec(grid, dims, n_moves, path, visited, out);
            path.pop();
            if fresh {
                visited.remove(c);
            }
        }
    }
    rec(grid, (nx, ny), n_moves, &mut path, &mut visited, &mut out);
    out
}

/// Sum of original values over distinct cells reached within `budget`.
pub fn score_within_budget(grid: &Grid, cells: &[Cell], budget: f64) -> f64 {
    let mut used = 0.0;
    let mut seen = HashSet::new();
    let mut score = 0.0;
    for (k, c) in cells.iter().enumerate() {
        if k > 0 {
            let p = cells[k - 1];
            let diagonal = p.0 != c.0 && p.1 != c.1;
            used += if diagonal { SPACING * 2f64.sqrt() } else { SPACING };
        }
        if used <= budget + 1e-9 && seen.insert(*c) {
            score += grid.value(*c);
        }
    }
    score
}
