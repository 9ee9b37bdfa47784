//! Data-generating models, the end-to-end clustering replicate and the Monte
//! Carlo experiment runner with partition-quality metrics.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{gamma_star, ThresholdConfig, DEFAULT_C, DEFAULT_DELTA_GRID};
use crate::dendrogram::{complete_linkage, cut_at_threshold};
use crate::directions::{sample_brownian_bridge, sample_directions};
use crate::distance::distance_matrix;
use crate::error::{Error, Result};
use crate::grid::{DataSet, FunctionalSample, Grid, Partition};
use crate::seed;

/// Scale parameters of the scaled-Brownian-bridge study.
pub const SBB_THETAS: [f64; 7] = [1.0, 1.0, 2.0, 2.0, 2.0, 4.0, 4.0];
/// Autoregressive coefficients of the AR(1) study.
pub const AR_THETAS: [f64; 7] = [0.99, 0.99, 0.66, 0.66, 0.66, 0.33, 0.33];
/// Sample sizes 40, 60, ..., 160.
pub const STUDY_N_VALUES: [usize; 7] = [40, 60, 80, 100, 120, 140, 160];
pub const STUDY_SIGMA_VALUES: [usize; 3] = [10, 30, 50];
pub const STUDY_GRID_POINTS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// `theta`-scaled Brownian bridge.
    Sbb,
    /// Gaussian AR(1) with standard normal innovations.
    Ar,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Sbb => "sbb",
            Model::Ar => "ar",
        }
    }

    pub fn default_thetas(self) -> Vec<f64> {
        match self {
            Model::Sbb => SBB_THETAS.to_vec(),
            Model::Ar => AR_THETAS.to_vec(),
        }
    }

    fn tag(self) -> u64 {
        match self {
            Model::Sbb => 1,
            Model::Ar => 2,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbb" => Ok(Model::Sbb),
            "ar" => Ok(Model::Ar),
            other => Err(Error::InvalidParameter(format!("unknown model {other:?}"))),
        }
    }
}

/// `n` bridge paths on `grid`, each multiplied by `theta`.
pub fn gen_sbb<R: Rng + ?Sized>(
    id: impl Into<String>,
    theta: f64,
    n: usize,
    grid: &Grid,
    rng: &mut R,
) -> Result<DataSet> {
    let samples = (0..n)
        .map(|_| {
            let mut path = sample_brownian_bridge(grid, rng);
            path.iter_mut().for_each(|v| *v *= theta);
            FunctionalSample::new(path)
        })
        .collect::<Result<Vec<_>>>()?;
    DataSet::new(id, samples, grid.clone())
}

fn ar_path<R: Rng + ?Sized>(theta: f64, length: usize, rng: &mut R) -> Vec<f64> {
    let mut path = Vec::with_capacity(length);
    let mut y: f64 = rng.sample(StandardNormal);
    path.push(y);
    for _ in 1..length {
        let xi: f64 = rng.sample(StandardNormal);
        y = theta * y + xi;
        path.push(y);
    }
    path
}

/// `n` AR(1) paths `Y(t) = theta Y(t-1) + xi_t`, `Y(0) = xi_0`, with the
/// integer time index mapped onto `length` equispaced points of `[0, 1]`.
pub fn gen_ar<R: Rng + ?Sized>(
    id: impl Into<String>,
    theta: f64,
    n: usize,
    length: usize,
    rng: &mut R,
) -> Result<DataSet> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "AR coefficient must lie in (0, 1), got {theta}"
        )));
    }
    if length < 2 {
        return Err(Error::InvalidParameter(format!(
            "AR paths need at least 2 points, got {length}"
        )));
    }
    let grid = Grid::uniform(length, 1.0)?;
    let samples = (0..n)
        .map(|_| FunctionalSample::new(ar_path(theta, length, rng)))
        .collect::<Result<Vec<_>>>()?;
    DataSet::new(id, samples, grid)
}

/// Pair-confusion summary of an estimated partition against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionMetrics {
    pub exact: bool,
    /// Share of different-law pairs placed in the same cluster.
    pub type1: f64,
    /// Share of same-law pairs split across clusters.
    pub type2: f64,
}

pub fn partition_metrics(estimated: &Partition, truth: &Partition) -> Result<PartitionMetrics> {
    let labels = truth.labels();
    if estimated.labels().len() != labels.len() {
        return Err(Error::LabelMismatch(format!(
            "{} estimated labels vs {} true labels",
            estimated.labels().len(),
            labels.len()
        )));
    }
    let est: Vec<usize> = labels
        .iter()
        .map(|l| {
            estimated
                .cluster_of(l)
                .ok_or_else(|| Error::LabelMismatch(format!("label {l:?} missing from estimate")))
        })
        .collect::<Result<_>>()?;
    let tru = truth.assignment();

    let (mut diff_pairs, mut merged_diff, mut same_pairs, mut split_same) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let together = est[i] == est[j];
            if tru[i] == tru[j] {
                same_pairs += 1;
                split_same += u64::from(!together);
            } else {
                diff_pairs += 1;
                merged_diff += u64::from(together);
            }
        }
    }
    let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(PartitionMetrics {
        exact: merged_diff == 0 && split_same == 0,
        type1: rate(merged_diff, diff_pairs),
        type2: rate(split_same, same_pairs),
    })
}

/// Data-set labels `u1, u2, ...`, zero-padded so they sort in index order.
pub fn set_labels(count: usize) -> Vec<String> {
    let width = count.to_string().len();
    (1..=count).map(|i| format!("u{i:0width$}")).collect()
}

/// Ground truth: sets with equal parameters share a law.
pub fn truth_partition(thetas: &[f64]) -> Partition {
    let mut distinct: Vec<f64> = Vec::new();
    let clusters = thetas
        .iter()
        .map(|t| match distinct.iter().position(|d| d == t) {
            Some(i) => i,
            None => {
                distinct.push(*t);
                distinct.len() - 1
            }
        })
        .collect();
    Partition::new(set_labels(thetas.len()), clusters).expect("generated labels are unique")
}

/// Everything that defines one replicate except its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateParams {
    pub model: Model,
    pub thetas: Vec<f64>,
    /// Samples per data set.
    pub n: usize,
    /// Number of directions.
    pub m: usize,
    pub alpha: f64,
    pub c: f64,
    pub grid_points: usize,
    pub delta_grid_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub partition: Partition,
    pub metrics: PartitionMetrics,
    pub gamma_star: f64,
    pub v_star: f64,
}

/// Generates the data sets from `seed`, clusters them, and scores the cut.
pub fn run_replicate(params: &ReplicateParams, seed: u64) -> Result<ReplicateOutcome> {
    let grid = Grid::uniform(params.grid_points, 1.0)?;
    let labels = set_labels(params.thetas.len());
    let datasets = params
        .thetas
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(u, (&theta, label))| {
            let mut rng = seed::stream(seed, &[1, u as u64]);
            match params.model {
                Model::Sbb => gen_sbb(label.as_str(), theta, params.n, &grid, &mut rng),
                Model::Ar => gen_ar(label.as_str(), theta, params.n, params.grid_points, &mut rng),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let directions = sample_directions(&grid, params.m, seed::derive_seed(seed, &[2]))?;
    let matrix = distance_matrix(&datasets, &directions)?;
    let v_star = matrix.max_variance();
    let threshold = gamma_star(&ThresholdConfig {
        alpha: params.alpha,
        c: params.c,
        delta_grid_size: params.delta_grid_size,
        m: params.m,
        n: params.n,
        v_star,
    })?;
    let dendro = complete_linkage(&matrix)?;
    let partition = cut_at_threshold(&dendro, threshold.gamma_star);
    let metrics = partition_metrics(&partition, &truth_partition(&params.thetas))?;
    Ok(ReplicateOutcome {
        partition,
        metrics,
        gamma_star: threshold.gamma_star,
        v_star,
    })
}

/// A grid of `(N, sigma)` cells, each run for `replicates` replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub thetas: Vec<f64>,
    pub n_values: Vec<usize>,
    /// `M = sigma * N`.
    pub sigma_values: Vec<usize>,
    pub replicates: usize,
    pub grid_points: usize,
    pub seed: u64,
    pub c: f64,
    pub delta_grid_size: usize,
    /// Fixed level; `None` uses `alpha_N = sqrt(1 / N)`.
    pub alpha: Option<f64>,
}

impl ExperimentConfig {
    /// Full parameter grid of the published study for `model`.
    pub fn standard(model: Model, seed: u64) -> Self {
        ExperimentConfig {
            model,
            thetas: model.default_thetas(),
            n_values: STUDY_N_VALUES.to_vec(),
            sigma_values: STUDY_SIGMA_VALUES.to_vec(),
            replicates: 100,
            grid_points: STUDY_GRID_POINTS,
            seed,
            c: DEFAULT_C,
            delta_grid_size: DEFAULT_DELTA_GRID,
            alpha: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.grid_points < 2 {
            return bad("grid needs at least 2 points".into());
        }
        if self.thetas.len() < 2 {
            return bad("at least two data sets (thetas) are required".into());
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return bad("sample sizes must be given and at least 2".into());
        }
        if self.sigma_values.is_empty() || self.sigma_values.contains(&0) {
            return bad("sigma values must be given and at least 1".into());
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("alpha must lie in (0, 1), got {a}"));
            }
        }
        if self.model == Model::Ar && self.thetas.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return bad("AR coefficients must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// Parameters of the replicates in cell `(n, sigma)`.
    pub fn replicate_params(&self, n: usize, sigma: usize) -> ReplicateParams {
        ReplicateParams {
            model: self.model,
            thetas: self.thetas.clone(),
            n,
            m: sigma * n,
            alpha: self.alpha.unwrap_or_else(|| (1.0 / n as f64).sqrt()),
            c: self.c,
            grid_points: self.grid_points,
            delta_grid_size: self.delta_grid_size,
        }
    }

    /// Seed of one replicate, independent of every other cell.
    pub fn replicate_seed(&self, n: usize, sigma: usize, replicate: usize) -> u64 {
        seed::derive_seed(
            self.seed,
            &[self.model.tag(), n as u64, sigma as u64, replicate as u64],
        )
    }
}

/// Aggregated results of one `(N, sigma)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub n: usize,
    pub sigma: usize,
    pub replicates: usize,
    pub proportion_correct: f64,
    pub type1_rate: f64,
    pub type2_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub model: Model,
    pub cells: Vec<ReportCell>,
}

impl ExperimentReport {
    pub fn cell(&self, n: usize, sigma: usize) -> Option<&ReportCell> {
        self.cells.iter().find(|c| c.n == n && c.sigma == sigma)
    }
}

/// Runs every replicate of every cell; replicates run in parallel and are
/// aggregated in index order, so the report does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = config
        .n_values
        .iter()
        .flat_map(|&n| config.sigma_values.iter().map(move |&s| (n, s)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.replicates).map(move |r| (c, r)))
        .collect();
    let outcomes: Vec<PartitionMetrics> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (n, sigma) = cells[c];
            run_replicate(&config.replicate_params(n, sigma), config.replicate_seed(n, sigma, r))
                .map(|o| o.metrics)
        })
        .collect::<Result<_>>()?;

    let reps = config.replicates;
    let cells = cells
        .iter()
        .zip(outcomes.chunks(reps))
        .map(|(&(n, sigma), runs)| {
            let k = reps as f64;
            ReportCell {
                n,
                sigma,
                replicates: reps,
                proportion_correct: runs.iter().filter(|m| m.exact).count() as f64 / k,
                type1_rate: runs.iter().map(|m| m.type1).sum::<f64>() / k,
                type2_rate: runs.iter().map(|m| m.type2).sum::<f64>() / k,
            }
        })
        .collect();
    Ok(ExperimentReport {
        model: config.model,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    fn lag1_autocorrelation(paths: &[Vec<f64>]) -> f64 {
        let all: Vec<f64> = paths.iter().flatten().copied().collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for p in paths {
            for w in p.windows(2) {
                num += (w[0] - mean) * (w[1] - mean);
            }
            for v in p {
                den += (v - mean).powi(2);
            }
        }
        num / den
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn sbb_zero_scale_and_pinning() {
        let g = Grid::uniform(80, 1.0).unwrap();
        let mut rng = seed::stream(1, &[]);
        let zero = gen_sbb("z", 0.0, 5, &g, &mut rng).unwrap();
        assert!(zero.samples().iter().all(|s| s.values().iter().all(|&v| v == 0.0)));
        let ds = gen_sbb("s", 3.0, 50, &g, &mut rng).unwrap();
        for s in ds.samples() {
            assert_eq!(s.values()[0], 0.0);
            assert_eq!(s.values()[79], 0.0);
        }
    }

    #[test]
    fn sbb_mid_variance() {
        // theta^2 t (T - t) / T = 4 * 0.25 at t = 1/2.
        let g = Grid::uniform(81, 1.0).unwrap();
        let mut rng = seed::stream(2, &[]);
        let ds = gen_sbb("s", 2.0, 10_000, &g, &mut rng).unwrap();
        let mids: Vec<f64> = ds.samples().iter().map(|s| s.values()[40]).collect();
        assert!((variance(&mids) - 1.0).abs() < 0.05);
    }

    #[test]
    fn ar_autocorrelation() {
        let mut rng = seed::stream(3, &[]);
        let iid = vec![ar_path(0.0, 10_000, &mut rng)];
        assert!(lag1_autocorrelation(&iid).abs() < 0.05);
        let paths: Vec<Vec<f64>> = (0..50).map(|_| ar_path(0.66, 2_000, &mut rng)).collect();
        assert!((lag1_autocorrelation(&paths) - 0.66).abs() < 0.05);
    }

    #[test]
    fn ar_validation_and_determinism() {
        let mut rng = seed::stream(4, &[]);
        assert!(gen_ar("a", 0.0, 5, 80, &mut rng).is_err());
        assert!(gen_ar("a", 1.0, 5, 80, &mut rng).is_err());
        assert!(gen_ar("a", 0.5, 5, 1, &mut rng).is_err());
        let a = gen_ar("a", 0.5, 5, 80, &mut seed::stream(9, &[])).unwrap();
        let b = gen_ar("a", 0.5, 5, 80, &mut seed::stream(9, &[])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid().len(), 80);
        assert_eq!(a.grid().horizon(), 1.0);
    }

    #[test]
    fn metrics_identity() {
        let t = Partition::new(labels(&["a", "b", "c"]), vec![0, 0, 1]).unwrap();
        let m = partition_metrics(&t, &t).unwrap();
        assert_eq!((m.exact, m.type1, m.type2), (true, 0.0, 0.0));
    }

    #[test]
    fn metrics_hand_count() {
        let truth = Partition::new(labels(&["a", "b", "c"]), vec![0, 0, 1]).unwrap();
        let est = Partition::new(labels(&["a", "b", "c"]), vec![0, 1, 1]).unwrap();
        let m = partition_metrics(&est, &truth).unwrap();
        assert!(!m.exact);
        assert_eq!(m.type1, 0.5);
        assert_eq!(m.type2, 1.0);
    }

    #[test]
    fn metrics_all_distinct() {
        let truth = Partition::singletons(labels(&["a", "b", "c"])).unwrap();
        let m = partition_metrics(&truth.clone(), &truth).unwrap();
        assert_eq!((m.exact, m.type1, m.type2), (true, 0.0, 0.0));
    }

    #[test]
    fn metrics_relabel_invariant_and_order_free() {
        let truth = Partition::new(labels(&["a", "b", "c", "d"]), vec![0, 0, 1, 1]).unwrap();
        let est = Partition::new(labels(&["d", "c", "b", "a"]), vec![7, 3, 3, 3]).unwrap();
        let m = partition_metrics(&est, &truth).unwrap();
        // Same-law pairs (a,b), (c,d): (c,d) split. Different-law: (a,c), (b,c) merged of 4.
        assert_eq!((m.type1, m.type2), (0.5, 0.5));
        let other = Partition::new(labels(&["x", "b", "c", "d"]), vec![0, 0, 1, 1]).unwrap();
        assert!(matches!(
            partition_metrics(&other, &truth),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn default_truths() {
        let sbb = truth_partition(&SBB_THETAS);
        let sizes: Vec<usize> = sbb.clusters().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 3, 2]);
        assert_eq!(
            sbb.clusters(),
            vec![labels(&["u1", "u2"]), labels(&["u3", "u4", "u5"]), labels(&["u6", "u7"])]
        );
        let ar = truth_partition(&AR_THETAS);
        let sizes: Vec<usize> = ar.clusters().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 3, 2]);
    }

    #[test]
    fn replicate_is_deterministic() {
        let params = ReplicateParams {
            model: Model::Sbb,
            thetas: SBB_THETAS.to_vec(),
            n: 20,
            m: 60,
            alpha: (1.0f64 / 20.0).sqrt(),
            c: DEFAULT_C,
            grid_points: 30,
            delta_grid_size: 64,
        };
        let a = run_replicate(&params, 42).unwrap();
        let b = run_replicate(&params, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.gamma_star > 0.0);
    }

    #[test]
    fn single_replicate_rates_are_indicators() {
        let mut cfg = ExperimentConfig::standard(Model::Ar, 5);
        cfg.n_values = vec![20];
        cfg.sigma_values = vec![2];
        cfg.replicates = 1;
        cfg.grid_points = 20;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.cells.len(), 1);
        let p = r.cells[0].proportion_correct;
        assert!(p == 0.0 || p == 1.0);
    }

    #[test]
    fn standard_grid_has_21_cells() {
        let cfg = ExperimentConfig::standard(Model::Sbb, 0);
        assert_eq!(cfg.n_values.len() * cfg.sigma_values.len(), 21);
        assert_eq!(cfg.replicate_params(100, 10).m, 1000);
        assert!((cfg.replicate_params(100, 10).alpha - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::standard(Model::Sbb, 0);
        cfg.replicates = 0;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = ExperimentConfig::standard(Model::Sbb, 0);
        cfg.sigma_values = vec![0];
        assert!(cfg.validate().is_err());
    }
}
