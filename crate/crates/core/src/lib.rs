//! Planning and evaluation toolkit for probabilistic wilderness search.
//!
//! The crate is organised bottom-up:
//!
//! * [`pdm`] holds the Gaussian-mixture probability distribution map (PDM),
//!   its discretisation and target sampling.
//! * [`cubature`] integrates the PDM over circular sensor footprints and
//!   accumulates detection probability along waypoint paths.
//! * [`env`] is the search MDP driven by reinforcement-learning trainers.
//! * [`planners`] contains the lawnmower and LHC_GW_CONV baselines.
//! * [`eval`] computes probability-over-distance, distance-to-find and the
//!   aggregate statistics, and persists run records.
//! * [`protocol`] defines the newline-delimited environment and policy
//!   messages and the request bodies of the HTTP service.

pub mod cubature;
pub mod env;
pub mod error;
pub mod eval;
pub mod pdm;
pub mod planners;
pub mod protocol;

pub use error::{Error, Result};

/// A point in the search plane, in meters.
pub type Point = [f64; 2];

#[inline]
pub(crate) fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

#[inline]
pub(crate) fn dist(a: Point, b: Point) -> f64 {
    dist2(a, b).sqrt()
}
