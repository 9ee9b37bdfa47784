//! Brownian-bridge random directions.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::seed;

/// Wiener path on the grid: `W(t_0) = 0` with independent Gaussian
/// increments of variance `t_{i+1} - t_i`.
pub fn sample_wiener<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Vec<f64> {
    let t = grid.times();
    let mut path = Vec::with_capacity(t.len());
    path.push(0.0);
    let mut w = 0.0;
    for pair in t.windows(2) {
        let z: f64 = rng.sample(StandardNormal);
        w += z * (pair[1] - pair[0]).sqrt();
        path.push(w);
    }
    path
}

/// Brownian bridge `B(t) = W(t) - (t / T) W(T)`, pinned to zero at both ends.
pub fn sample_brownian_bridge<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Vec<f64> {
    let mut path = sample_wiener(grid, rng);
    let horizon = grid.horizon();
    let end = path[path.len() - 1];
    for (b, &t) in path.iter_mut().zip(grid.times()) {
        *b -= t / horizon * end;
    }
    let last = path.len() - 1;
    path[0] = 0.0;
    path[last] = 0.0;
    path
}

/// `M` Brownian-bridge directions shared by all data sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    paths: Vec<Vec<f64>>,
    seed: u64,
}

impl DirectionSet {
    /// Wraps explicit direction paths, e.g. loaded for an audit rerun.
    pub fn from_paths(paths: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidCount("at least one direction is required".into()));
        }
        let g = paths[0].len();
        for p in &paths {
            if p.len() != g {
                return Err(Error::LengthMismatch {
                    expected: g,
                    found: p.len(),
                });
            }
            if let Some(bad) = p.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    value: *bad,
                    context: "direction".into(),
                });
            }
        }
        Ok(DirectionSet { paths, seed })
    }

    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of directions `M`.
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Number of grid points per direction.
    pub fn grid_len(&self) -> usize {
        self.paths[0].len()
    }
}

/// Draws `count` bridges; direction `m` comes from the sub-stream `(seed, m)`.
pub fn sample_directions(grid: &Grid, count: usize, seed: u64) -> Result<DirectionSet> {
    if count == 0 {
        return Err(Error::InvalidCount("number of directions must be at least 1".into()));
    }
    let paths = (0..count)
        .into_par_iter()
        .map(|m| {
            let mut rng = seed::stream(seed, &[m as u64]);
            sample_brownian_bridge(grid, &mut rng)
        })
        .collect();
    Ok(DirectionSet { paths, seed })
}
