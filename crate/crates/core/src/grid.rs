//! Core domain types: the common time grid, functional samples, labeled
//! data sets and partitions of data-set labels.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Relative tolerance used for equispacing and grid agreement checks.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Equispaced time grid `0 = t_0 < t_1 < ... < t_{G-1} = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    times: Vec<f64>,
}

impl Grid {
    /// Builds the grid of `points` equispaced times on `[0, horizon]`.
    pub fn uniform(points: usize, horizon: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!(
                "a grid needs at least 2 points, got {points}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let last = (points - 1) as f64;
        let mut times: Vec<f64> = (0..points).map(|i| horizon * i as f64 / last).collect();
        times[points - 1] = horizon;
        Ok(Grid { times })
    }

    /// Validates an explicit list of time points.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let g = times.len();
        if g < 2 {
            return Err(Error::InvalidGrid(format!(
                "a grid needs at least 2 points, got {g}"
            )));
        }
        if let Some(bad) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::NonFiniteValue {
                value: *bad,
                context: "grid times".into(),
            });
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first grid point must be 0, got {}",
                times[0]
            )));
        }
        let horizon = times[g - 1];
        if horizon <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let step = horizon / (g - 1) as f64;
        for (i, w) in times.windows(2).enumerate() {
            let dt = w[1] - w[0];
            if dt <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "times must be strictly increasing (index {})",
                    i + 1
                )));
            }
            if (dt - step).abs() > GRID_TOLERANCE * horizon {
                return Err(Error::InvalidGrid(format!(
                    "times are not equispaced (step {dt} at index {}, expected {step})",
                    i + 1
                )));
            }
        }
        Ok(Grid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Nominal spacing `T / (G - 1)`.
    pub fn step(&self) -> f64 {
        self.horizon() / (self.times.len() - 1) as f64
    }

    /// Pointwise agreement within `GRID_TOLERANCE` relative to the horizon.
    pub fn agrees_with(&self, other: &Grid) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let scale = self.horizon().abs().max(other.horizon().abs());
        self.times
            .iter()
            .zip(&other.times)
            .all(|(a, b)| (a - b).abs() <= GRID_TOLERANCE * scale)
    }
}

/// One function observed on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample(Vec<f64>);

impl FunctionalSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                value: *bad,
                context: "functional sample".into(),
            });
        }
        Ok(FunctionalSample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for FunctionalSample {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A labeled set of `N >= 2` functional samples sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    id: String,
    samples: Vec<FunctionalSample>,
    grid: Grid,
}

impl DataSet {
    pub fn new(id: impl Into<String>, samples: Vec<FunctionalSample>, grid: Grid) -> Result<Self> {
        let id = id.into();
        if samples.len() < 2 {
            return Err(Error::InvalidCount(format!(
                "data set {id:?} needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        for s in &samples {
            if s.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    found: s.len(),
                });
            }
        }
        Ok(DataSet { id, samples, grid })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn samples(&self) -> &[FunctionalSample] {
        &self.samples
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Returns the grid shared by every data set.
pub fn validate_common_grid(datasets: &[DataSet]) -> Result<Grid> {
    let first = datasets
        .first()
        .ok_or(Error::EmptyInput("no data sets given"))?;
    for ds in &datasets[1..] {
        if !first.grid.agrees_with(&ds.grid) {
            return Err(Error::GridMismatch(format!(
                "data set {:?} ({} points, T = {}) differs from {:?} ({} points, T = {})",
                ds.id,
                ds.grid.len(),
                ds.grid.horizon(),
                first.id,
                first.grid.len(),
                first.grid.horizon()
            )));
        }
    }
    Ok(first.grid.clone())
}

/// Assignment of data-set labels to clusters `0..k`.
///
/// Cluster indices are canonical: they are numbered in order of first
/// appearance along the label order, so two partitions over the same label
/// order compare equal exactly when they induce the same equivalence relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<String>,
    clusters: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<String>, clusters: Vec<usize>) -> Result<Self> {
        if labels.len() != clusters.len() {
            return Err(Error::LengthMismatch {
                expected: labels.len(),
                found: clusters.len(),
            });
        }
        let mut seen = HashMap::new();
        for l in &labels {
            if seen.insert(l.as_str(), ()).is_some() {
                return Err(Error::LabelMismatch(format!("duplicate label {l:?}")));
            }
        }
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let clusters = clusters
            .into_iter()
            .map(|c| {
                let next = remap.len();
                *remap.entry(c).or_insert(next)
            })
            .collect();
        Ok(Partition { labels, clusters })
    }

    pub fn singletons(labels: Vec<String>) -> Result<Self> {
        let clusters = (0..labels.len()).collect();
        Self::new(labels, clusters)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn assignment(&self) -> &[usize] {
        &self.clusters
    }

    pub fn cluster_of(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.clusters[i])
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.iter().max().map_or(0, |m| m + 1)
    }

    /// Members of each cluster, in label order.
    pub fn clusters(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (l, &c) in self.labels.iter().zip(&self.clusters) {
            out[c].push(l.clone());
        }
        out
    }

    /// True if both partitions group the same labels together, regardless
    /// of label order or cluster numbering.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        if self.labels.len() != other.labels.len() {
            return false;
        }
        let mut a: Vec<Vec<String>> = self
            .clusters()
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        let mut b: Vec<Vec<String>> = other
            .clusters()
            .into_iter()
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        a.sort();
        b.sort();
        a == b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_on(grid: Grid, id: &str) -> DataSet {
        let s = FunctionalSample::new(vec![0.0; grid.len()]).unwrap();
        DataSet::new(id, vec![s.clone(), s], grid).unwrap()
    }

    #[test]
    fn uniform_grid_is_equispaced() {
        let g = Grid::uniform(80, 1.0).unwrap();
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(g.horizon(), 1.0);
        let step = g.step();
        for w in g.times().windows(2) {
            assert!(((w[1] - w[0]) - step).abs() <= 1e-9);
        }
        assert!(Grid::from_times(g.times().to_vec()).is_ok());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::uniform(1, 1.0).is_err());
        assert!(Grid::uniform(5, 0.0).is_err());
        assert!(Grid::from_times(vec![0.1, 0.5, 1.0]).is_err());
        assert!(Grid::from_times(vec![0.0, 0.2, 1.0]).is_err());
        assert!(Grid::from_times(vec![0.0, 1.0, 0.5]).is_err());
    }

    #[test]
    fn common_grid_identity() {
        let g = Grid::uniform(80, 1.0).unwrap();
        let sets = vec![set_on(g.clone(), "a"), set_on(g.clone(), "b")];
        assert_eq!(validate_common_grid(&sets).unwrap(), g);
    }

    #[test]
    fn common_grid_length_disagreement() {
        let sets = vec![
            set_on(Grid::uniform(80, 1.0).unwrap(), "a"),
            set_on(Grid::uniform(81, 1.0).unwrap(), "b"),
        ];
        assert!(matches!(
            validate_common_grid(&sets),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn common_grid_empty() {
        assert!(matches!(
            validate_common_grid(&[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn data_set_checks() {
        let g = Grid::uniform(3, 1.0).unwrap();
        let s = FunctionalSample::new(vec![0.0; 3]).unwrap();
        assert!(DataSet::new("x", vec![s.clone()], g.clone()).is_err());
        let short = FunctionalSample::new(vec![0.0; 2]).unwrap();
        assert!(DataSet::new("x", vec![s, short], g).is_err());
        assert!(FunctionalSample::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn partition_is_canonical() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let p = Partition::new(labels.clone(), vec![5, 2, 5]).unwrap();
        assert_eq!(p.assignment(), &[0, 1, 0]);
        assert_eq!(p.num_clusters(), 2);
        let q = Partition::new(labels, vec![1, 0, 1]).unwrap();
        assert_eq!(p, q);
        assert!(p.same_grouping(&q));
        assert_eq!(p.cluster_of("c"), Some(0));
    }
}
