//! Bounded scalar minimization: a uniform grid scan followed by
//! golden-section refinement inside the cells around the best grid point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub grid_points: usize,
    pub refine_iters: usize,
    /// Bracket width at which refinement stops.
    pub tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { grid_points: 512, refine_iters: 60, tol: 1e-10 }
    }
}

impl OptimizerConfig {
    pub fn with_grid_points(mut self, grid_points: usize) -> Self {
        self.grid_points = grid_points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 8 {
            return Err(Error::Domain(format!("grid_points = {} < 8", self.grid_points)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// Minimizes `f` over `[lo, hi]`.
///
/// `f` may return `+inf` (or NaN) where it is undefined. Returns
/// `(argmin, min)`; fails with [`Error::NoFeasiblePoint`] when no evaluated
/// point is finite.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, cfg: &OptimizerConfig) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    cfg.validate()?;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
    }
    let mut eval = |x: f64| {
        let y = f(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    };

    let m = cfg.grid_points;
    let step = (hi - lo) / (m - 1) as f64;
    let grid = |i: usize| if i == m - 1 { hi } else { lo + step * i as f64 };
    let mut best_i = 0;
    let mut best = (lo, f64::INFINITY);
    for i in 0..m {
        let x = grid(i);
        let y = eval(x);
        if y < best.1 {
            best = (x, y);
            best_i = i;
        }
    }
    if !best.1.is_finite() {
        return Err(Error::NoFeasiblePoint);
    }

    let mut a = grid(best_i.saturating_sub(1));
    let mut b = grid((best_i + 1).min(m - 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..cfg.refine_iters {
        if b - a <= cfg.tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    for (x, y) in [(c, fc), (d, fd)] {
        if y < best.1 {
            best = (x, y);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let (x, y) = minimize_scalar(|x| (x - 0.3) * (x - 0.3), -1.0, 1.0, &OptimizerConfig::default()).unwrap();
        assert!((x - 0.3).abs() < 1e-8, "{x}");
        assert!(y < 1e-15);
    }

    #[test]
    fn picks_global_of_two_minima() {
        // Local minimum near -0.6 (value 0.1), global near 0.7 (value 0).
        let f = |x: f64| ((x + 0.6) * (x + 0.6) + 0.1).min((x - 0.7) * (x - 0.7));
        let (x, _) = minimize_scalar(f, -1.0, 1.0, &OptimizerConfig::default().with_grid_points(8)).unwrap();
        assert!((x - 0.7).abs() < 1e-6, "{x}");
    }

    #[test]
    fn infinite_everywhere_is_an_error() {
        let r = minimize_scalar(|_| f64::INFINITY, 0.0, 1.0, &OptimizerConfig::default());
        assert_eq!(r, Err(Error::NoFeasiblePoint));
    }

    #[test]
    fn partially_infeasible_function() {
        let f = |x: f64| if x < 0.25 { f64::INFINITY } else { x };
        let (x, y) = minimize_scalar(f, 0.0, 1.0, &OptimizerConfig::default()).unwrap();
        assert!(x >= 0.25 && x - 0.25 < 1e-8);
        assert_eq!(x, y);
    }

    #[test]
    fn minimum_at_endpoint() {
        let (x, _) = minimize_scalar(|x| x, 0.0, 1.0, &OptimizerConfig::default()).unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn rejects_small_grids() {
        let cfg = OptimizerConfig { grid_points: 4, ..Default::default() };
        assert!(minimize_scalar(|x| x, 0.0, 1.0, &cfg).is_err());
    }
}
