//! Projection of functional samples onto directions by trapezoidal
//! quadrature of the `L2[0, T]` inner product.

use rayon::prelude::*;

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::grid::{DataSet, FunctionalSample, Grid};

/// Trapezoid rule on raw slices; symmetric in its two factors.
fn trapezoid(a: &[f64], b: &[f64], step: f64) -> f64 {
    let g = a.len();
    let mut interior = 0.0;
    for i in 1..g - 1 {
        interior += a[i] * b[i];
    }
    step * (0.5 * (a[0] * b[0]) + interior + 0.5 * (a[g - 1] * b[g - 1]))
}

/// `<sample, direction>` over the grid.
pub fn project(sample: &FunctionalSample, direction: &[f64], grid: &Grid) -> Result<f64> {
    project_values(sample.values(), direction, grid)
}

/// Slice form of [`project`].
pub fn project_values(sample: &[f64], direction: &[f64], grid: &Grid) -> Result<f64> {
    if sample.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: sample.len(),
        });
    }
    if direction.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: direction.len(),
        });
    }
    Ok(trapezoid(sample, direction, grid.step()))
}

/// `N x M` projections of one data set, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    set_id: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ProjectionSet {
    /// Builds a projection set from an `N x M` row-major buffer.
    pub fn from_rows(set_id: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInput("projection set has no rows"));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::EmptyInput("projection set has no columns"));
        }
        let mut values = Vec::with_capacity(n * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    found: r.len(),
                });
            }
            values.extend(r);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                value: *bad,
                context: "projection".into(),
            });
        }
        Ok(ProjectionSet {
            set_id: set_id.into(),
            rows: n,
            cols: m,
            values,
        })
    }

    pub fn set_id(&self) -> &str {
        &self.set_id
    }

    /// Number of samples `N`.
    pub fn n_samples(&self) -> usize {
        self.rows
    }

    /// Number of directions `M`.
    pub fn n_directions(&self) -> usize {
        self.cols
    }

    pub fn get(&self, sample: usize, direction: usize) -> f64 {
        self.values[sample * self.cols + direction]
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.cols..(sample + 1) * self.cols]
    }

    /// Projections of every sample onto direction `m`.
    pub fn column(&self, direction: usize) -> Vec<f64> {
        (0..self.rows).map(|n| self.get(n, direction)).collect()
    }
}

/// Projects every sample of `dataset` on every direction.
pub fn project_set(dataset: &DataSet, directions: &DirectionSet) -> Result<ProjectionSet> {
    let grid = dataset.grid();
    if directions.grid_len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "directions have {} points, data set {:?} has {}",
            directions.grid_len(),
            dataset.id(),
            grid.len()
        )));
    }
    let step = grid.step();
    let cols = directions.len();
    let values: Vec<f64> = dataset
        .samples()
        .par_iter()
        .flat_map_iter(|s| {
            directions
                .paths()
                .iter()
                .map(move |h| trapezoid(s.values(), h, step))
        })
        .collect();
    Ok(ProjectionSet {
        set_id: dataset.id().to_string(),
        rows: dataset.len(),
        cols,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::sample_directions;
    use proptest::prelude::*;

    fn sample(v: Vec<f64>) -> FunctionalSample {
        FunctionalSample::new(v).unwrap()
    }

    #[test]
    fn zero_function_projects_to_zero() {
        let g = Grid::uniform(80, 1.0).unwrap();
        let h: Vec<f64> = (0..80).map(|i| (i as f64).sin()).collect();
        assert_eq!(project(&sample(vec![0.0; 80]), &h, &g).unwrap(), 0.0);
    }

    #[test]
    fn constants_are_exact() {
        let g = Grid::uniform(80, 1.0).unwrap();
        let v = project(&sample(vec![1.0; 80]), &[1.0; 80], &g).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_is_exact() {
        let g = Grid::uniform(81, 1.0).unwrap();
        let y = sample(g.times().to_vec());
        let v = project(&y, &[1.0; 81], &g).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        let g = Grid::uniform(5, 1.0).unwrap();
        assert!(matches!(
            project(&sample(vec![0.0; 4]), &[0.0; 5], &g),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(project(&sample(vec![0.0; 5]), &[0.0; 3], &g).is_err());
    }

    #[test]
    fn set_matches_scalar_calls() {
        let g = Grid::uniform(20, 1.0).unwrap();
        let s1 = sample((0..20).map(|i| (i as f64 * 0.3).cos()).collect());
        let s2 = sample((0..20).map(|i| i as f64 * 0.1).collect());
        let ds = DataSet::new("u", vec![s1, s2], g.clone()).unwrap();
        let dirs = sample_directions(&g, 3, 4).unwrap();
        let p = project_set(&ds, &dirs).unwrap();
        assert_eq!((p.n_samples(), p.n_directions()), (2, 3));
        for n in 0..2 {
            for m in 0..3 {
                let direct = project(&ds.samples()[n], &dirs.paths()[m], &g).unwrap();
                assert_eq!(p.get(n, m), direct);
            }
        }
    }

    #[test]
    fn zero_set_gives_zero_matrix() {
        let g = Grid::uniform(20, 1.0).unwrap();
        let z = sample(vec![0.0; 20]);
        let ds = DataSet::new("z", vec![z.clone(), z], g.clone()).unwrap();
        let dirs = sample_directions(&g, 4, 1).unwrap();
        let p = project_set(&ds, &dirs).unwrap();
        assert!((0..2).all(|n| p.row(n).iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn grid_mismatch() {
        let g = Grid::uniform(20, 1.0).unwrap();
        let z = sample(vec![0.0; 20]);
        let ds = DataSet::new("z", vec![z.clone(), z], g).unwrap();
        let dirs = sample_directions(&Grid::uniform(21, 1.0).unwrap(), 2, 1).unwrap();
        assert!(matches!(
            project_set(&ds, &dirs),
            Err(Error::GridMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn linear_in_sample(
            y1 in proptest::collection::vec(-5.0f64..5.0, 12),
            y2 in proptest::collection::vec(-5.0f64..5.0, 12),
            h in proptest::collection::vec(-5.0f64..5.0, 12),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let g = Grid::uniform(12, 2.0).unwrap();
            let combo: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + b * q).collect();
            let lhs = project_values(&combo, &h, &g).unwrap();
            let rhs = a * project_values(&y1, &h, &g).unwrap() + b * project_values(&y2, &h, &g).unwrap();
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }

        #[test]
        fn symmetric_in_factors(
            y in proptest::collection::vec(-5.0f64..5.0, 9),
            h in proptest::collection::vec(-5.0f64..5.0, 9),
        ) {
            let g = Grid::uniform(9, 1.0).unwrap();
            prop_assert_eq!(project_values(&y, &h, &g).unwrap(), project_values(&h, &y, &g).unwrap());
        }
    }
}
