//! Clustering of functional data sets by similarity in law.
//!
//! Each data set is reduced to scalars by projecting its functions onto
//! shared Brownian-bridge directions. Two-sample Kolmogorov–Smirnov distances
//! between the projected samples, averaged over directions, form a
//! dissimilarity matrix. A complete-linkage dendrogram is then cut at a
//! threshold derived from an empirical-Bernstein bound, giving the partition.
//!
//! ```
//! use lawclust::{bounds, dendrogram, directions, distance, grid::Grid, seed, simulate};
//!
//! let grid = Grid::uniform(40, 1.0).unwrap();
//! let sets: Vec<_> = [1.0, 1.0, 4.0]
//!     .iter()
//!     .enumerate()
//!     .map(|(u, &theta)| {
//!         let mut rng = seed::stream(7, &[u as u64]);
//!         simulate::gen_sbb(format!("s{u}"), theta, 60, &grid, &mut rng).unwrap()
//!     })
//!     .collect();
//! let dirs = directions::sample_directions(&grid, 300, 1).unwrap();
//! let matrix = distance::distance_matrix(&sets, &dirs).unwrap();
//! let cfg = bounds::ThresholdConfig::new((1.0f64 / 60.0).sqrt(), 60, 300, matrix.max_variance());
//! let gamma = bounds::gamma_star(&cfg).unwrap().gamma_star;
//! let tree = dendrogram::complete_linkage(&matrix).unwrap();
//! let partition = dendrogram::cut_at_threshold(&tree, gamma);
//! assert_eq!(partition.num_clusters(), 2);
//! ```

pub mod bounds;
pub mod cli;
pub mod dendrogram;
pub mod directions;
pub mod distance;
pub mod error;
pub mod grid;
pub mod io;
pub mod projection;
pub mod seed;
pub mod simulate;

pub use error::{Error, Result};
