//! Concentration bounds on the averaged distance and the data-driven cut
//! threshold obtained by minimizing an empirical-Bernstein plus DKW bound
//! over the confidence split `delta`.

use crate::error::{Error, Result};

/// Default DKW constant; the two-sample bound holds for any `C >= e`.
pub const DEFAULT_C: f64 = std::f64::consts::E;

/// Default number of log-spaced `delta` candidates.
pub const DEFAULT_DELTA_GRID: usize = 512;

/// Hoeffding plus two-sample DKW tail bound on `|D_hat - D| >= gamma`:
/// `2 exp(-M g^2 / 2) + 2 exp(-M g^2 / 32) + 2 C exp(-N g^2 / 16)`.
///
/// Not clamped to 1.
pub fn theorem1_bound(gamma: f64, n: usize, m: usize, c: f64) -> f64 {
    let g2 = gamma * gamma;
    let (n, m) = (n as f64, m as f64);
    2.0 * (-m * g2 / 2.0).exp() + 2.0 * (-m * g2 / 32.0).exp() + 2.0 * c * (-n * g2 / 16.0).exp()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

/// `7 log(2 / delta) / (3 (M - 1))`.
pub fn epsilon_delta(delta: f64, m: usize) -> Result<f64> {
    check_delta(delta)?;
    if m < 2 {
        return Err(Error::InvalidM(m));
    }
    Ok(7.0 * (2.0 / delta).ln() / (3.0 * (m - 1) as f64))
}

/// Variance term `sqrt(2 V log(2 / delta) / M)`.
pub fn gamma_big(delta: f64, m: usize, variance: f64) -> Result<f64> {
    check_delta(delta)?;
    if m == 0 {
        return Err(Error::InvalidM(m));
    }
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "variance must be non-negative, got {variance}"
        )));
    }
    Ok((2.0 * variance * (2.0 / delta).ln() / m as f64).sqrt())
}

/// Empirical-Bernstein tail bound under equal laws:
/// `C exp(-N (gamma - eps(delta))^2) + delta`, valid when `eps(delta) < gamma`.
pub fn bernstein_bound(gamma: f64, delta: f64, n: usize, m: usize, c: f64) -> Result<f64> {
    let eps = epsilon_delta(delta, m)?;
    if eps >= gamma {
        return Err(Error::HypothesisViolated {
            epsilon: eps,
            gamma,
        });
    }
    let gap = gamma - eps;
    Ok(c * (-(n as f64) * gap * gap).exp() + delta)
}

/// Inputs of the threshold minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig {
    /// Level `alpha_N` in (0, 1).
    pub alpha: f64,
    /// DKW constant, at least 2.
    pub c: f64,
    pub delta_grid_size: usize,
    /// Number of directions.
    pub m: usize,
    /// Smallest data-set size.
    pub n: usize,
    /// Largest per-pair empirical variance.
    pub v_star: f64,
}

impl ThresholdConfig {
    pub fn new(alpha: f64, n: usize, m: usize, v_star: f64) -> Self {
        ThresholdConfig {
            alpha,
            c: DEFAULT_C,
            delta_grid_size: DEFAULT_DELTA_GRID,
            m,
            n,
            v_star,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !self.c.is_finite() || self.c < 2.0 {
            return bad(format!("C must be at least 2, got {}", self.c));
        }
        if self.delta_grid_size < 16 {
            return bad(format!(
                "delta grid needs at least 16 points, got {}",
                self.delta_grid_size
            ));
        }
        if self.m < 2 {
            return bad(format!("M must be at least 2, got {}", self.m));
        }
        if self.n < 2 {
            return bad(format!("N must be at least 2, got {}", self.n));
        }
        if !self.v_star.is_finite() || self.v_star < 0.0 {
            return bad(format!("V* must be non-negative, got {}", self.v_star));
        }
        Ok(())
    }

    /// Lower and upper ends of the searched `delta` range.
    pub fn delta_range(&self) -> (f64, f64) {
        (self.alpha * 1e-6, self.alpha * (1.0 - 1e-6))
    }

    /// The three summands at `delta`: variance term, DKW term, epsilon term.
    pub fn terms(&self, delta: f64) -> (f64, f64, f64) {
        let log_term = (2.0 / delta).ln();
        let variance = (2.0 * self.v_star * log_term / self.m as f64).sqrt();
        let dkw = ((self.c / (self.alpha - delta)).ln() / self.n as f64).sqrt();
        let eps = 7.0 * log_term / (3.0 * (self.m - 1) as f64);
        (variance, dkw, eps)
    }

    /// Objective minimized over `delta in (0, alpha)`.
    pub fn objective(&self, delta: f64) -> f64 {
        let (a, b, c) = self.terms(delta);
        a + b + c
    }
}

/// Minimizer of the threshold objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub gamma_star: f64,
    pub delta: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Cut threshold: infimum over `delta` of
/// `Gamma*(delta) + sqrt(log(C / (alpha - delta)) / N) + eps(delta)`.
///
/// Scans a log-spaced grid, then refines inside the best cell by golden
/// section.
pub fn gamma_star(config: &ThresholdConfig) -> Result<Threshold> {
    config.validate()?;
    let (lo, hi) = config.delta_range();
    let k = config.delta_grid_size;
    let ratio = (hi / lo).ln() / (k - 1) as f64;
    let grid: Vec<f64> = (0..k)
        .map(|i| {
            if i == k - 1 {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect();

    let (best, best_val) = grid
        .iter()
        .map(|&d| config.objective(d))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

    let left = grid[best.saturating_sub(1)];
    let right = grid[(best + 1).min(k - 1)];
    let (d, v) = golden_section(|d| config.objective(d), left, right);
    let out = if v < best_val {
        Threshold {
            gamma_star: v,
            delta: d,
        }
    } else {
        Threshold {
            gamma_star: best_val,
            delta: grid[best],
        }
    };
    Ok(out)
}
