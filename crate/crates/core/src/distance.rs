//! Two-sample Kolmogorov–Smirnov distances between projected samples, the
//! direction-averaged distance between data sets, and the single-direction
//! goodness-of-fit test.

use rayon::prelude::*;

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::grid::{validate_common_grid, DataSet};
use crate::projection::{project_set, ProjectionSet};

/// Empirical CDF `F(t) = #{x <= t} / n`, right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn eval(&self, t: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= t);
        count as f64 / self.sorted.len() as f64
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

pub fn ecdf(values: &[f64]) -> Result<Ecdf> {
    if values.is_empty() {
        return Err(Error::EmptyInput("ECDF of an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ecdf { sorted })
}

/// Exact `sup_t |F_x(t) - F_y(t)|` for two ascending slices.
///
/// The difference is evaluated after every jump sharing a value has been
/// applied, so ties across and within samples are handled.
fn ks_sorted(x: &[f64], y: &[f64]) -> f64 {
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < x.len() && j < y.len() {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / nx - j as f64 / ny).abs());
    }
    sup
}

/// Two-sample Kolmogorov–Smirnov distance between empirical CDFs.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<f64> {
    let ex = ecdf(x)?;
    let ey = ecdf(y)?;
    Ok(ks_sorted(&ex.sorted, &ey.sorted))
}

/// Distance between two data sets averaged over directions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistance {
    /// Mean of `per_direction`.
    pub mean: f64,
    /// Sample variance of `per_direction` with `1/(M-1)` normalization;
    /// zero when `M = 1`.
    pub variance: f64,
    pub per_direction: Vec<f64>,
}

impl PairDistance {
    pub fn from_per_direction(per_direction: Vec<f64>) -> Result<Self> {
        let m = per_direction.len();
        if m == 0 {
            return Err(Error::EmptyInput("no directions"));
        }
        let mean = per_direction.iter().sum::<f64>() / m as f64;
        let variance = if m > 1 {
            per_direction.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        Ok(PairDistance {
            mean,
            variance,
            per_direction,
        })
    }
}

/// Column-sorted copy of a projection set, reused across all pairs.
struct SortedColumns {
    columns: Vec<Vec<f64>>,
}

impl SortedColumns {
    fn new(p: &ProjectionSet) -> Self {
        let columns = (0..p.n_directions())
            .map(|m| {
                let mut c = p.column(m);
                c.sort_by(f64::total_cmp);
                c
            })
            .collect();
        SortedColumns { columns }
    }

    fn pair(&self, other: &SortedColumns) -> PairDistance {
        let per_direction = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| ks_sorted(a, b))
            .collect();
        // Non-empty by construction of ProjectionSet.
        PairDistance::from_per_direction(per_direction).expect("at least one direction")
    }
}

pub fn pair_distance(proj_u: &ProjectionSet, proj_v: &ProjectionSet) -> Result<PairDistance> {
    if proj_u.n_directions() != proj_v.n_directions() {
        return Err(Error::DirectionCountMismatch {
            left: proj_u.n_directions(),
            right: proj_v.n_directions(),
        });
    }
    Ok(SortedColumns::new(proj_u).pair(&SortedColumns::new(proj_v)))
}

/// Symmetric matrix of averaged distances and their per-pair variances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    dist: Vec<f64>,
    var: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full square distance table; variances are zero.
    pub fn from_square(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let s = labels.len();
        if s < 2 {
            return Err(Error::TooFewSets(s));
        }
        if rows.len() != s {
            return Err(Error::LengthMismatch {
                expected: s,
                found: rows.len(),
            });
        }
        let mut dist = vec![0.0; s * s];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != s {
                return Err(Error::LengthMismatch {
                    expected: s,
                    found: row.len(),
                });
            }
            for (j, &d) in row.iter().enumerate() {
                if i == j {
                    if d != 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "diagonal entry ({i}, {i}) must be 0, got {d}"
                        )));
                    }
                } else if !(0.0..=1.0).contains(&d) {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) = {d} outside [0, 1]"
                    )));
                } else if d != rows[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                dist[i * s + j] = d;
            }
        }
        Ok(DistanceMatrix {
            labels,
            dist,
            var: vec![0.0; s * s],
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.labels.len() + j]
    }

    pub fn variance(&self, i: usize, j: usize) -> f64 {
        self.var[i * self.labels.len() + j]
    }

    /// Largest per-pair empirical variance over all pairs.
    pub fn max_variance(&self) -> f64 {
        self.var.iter().copied().fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let s = self.labels.len();
        self.dist.chunks(s).map(<[f64]>::to_vec).collect()
    }
}

/// Projects each data set once, then fills every unordered pair.
pub fn distance_matrix(datasets: &[DataSet], directions: &DirectionSet) -> Result<DistanceMatrix> {
    if datasets.len() < 2 {
        return Err(Error::TooFewSets(datasets.len()));
    }
    validate_common_grid(datasets)?;
    let sorted: Vec<SortedColumns> = datasets
        .par_iter()
        .map(|ds| project_set(ds, directions).map(|p| SortedColumns::new(&p)))
        .collect::<Result<_>>()?;

    let s = datasets.len();
    let pairs: Vec<(usize, usize)> = (0..s)
        .flat_map(|i| (i + 1..s).map(move |j| (i, j)))
        .collect();
    let results: Vec<PairDistance> = pairs
        .par_iter()
        .map(|&(i, j)| sorted[i].pair(&sorted[j]))
        .collect();

    let mut dist = vec![0.0; s * s];
    let mut var = vec![0.0; s * s];
    for (&(i, j), pd) in pairs.iter().zip(&results) {
        dist[i * s + j] = pd.mean;
        dist[j * s + i] = pd.mean;
        var[i * s + j] = pd.variance;
        var[j * s + i] = pd.variance;
    }
    Ok(DistanceMatrix {
        labels: datasets.iter().map(|d| d.id().to_string()).collect(),
        dist,
        var,
    })
}

/// Outcome of the single-direction two-sample test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov–Smirnov test of equal laws on one projection.
///
/// The statistic is `sqrt(n_e) * D` with effective size
/// `n_e = n_x n_y / (n_x + n_y)`, which is `N/2` for equal sizes.
pub fn ks_gof_test(x: &[f64], y: &[f64]) -> Result<GofTest> {
    let d = ks_two_sample(x, y)?;
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let statistic = (nx * ny / (nx + ny)).sqrt() * d;
    Ok(GofTest {
        statistic,
        p_value: kolmogorov_sf(statistic),
    })
}

/// Survival function of the asymptotic Kolmogorov distribution,
/// `2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`, truncated once terms drop
/// below 1e-12.
///
/// Below `x = 1.18` the alternating series cancels badly, so the equivalent
/// form `1 - sqrt(2 pi)/x sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))` is used.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.02 || x.is_nan() {
        return 1.0;
    }
    if x < 1.18 {
        let w = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 1..=1000u64 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * w).exp();
            cdf += term;
            if term < 1e-17 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let x2 = x * x;
    let mut sum = 0.0;
    for k in 1..=1000u64 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x2).exp();
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
