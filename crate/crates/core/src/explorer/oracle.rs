//! Exhaustive grid search over `(rho, sigma_u^2, sigma_top^2)` through the
//! entropy evaluators, used as an independent check of the optimizers.
//!
//! The private variance is not gridded: it is solved from the one-node
//! distortion, so every grid point meets `d1` exactly. The top axis holds,
//! besides its log-spaced values and the absent sentinel, the largest top
//! variance meeting `d2` at the current `(rho, sigma_u^2)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::private_variance_for_d1;
use crate::entropy::{build_covariance, theorem3_rates, theorem4_rates, Var};
use crate::error::{Error, Result};
use crate::types::{ChannelParams, DistortionSpec, LayerParams, RatePoint, ABSENT};

/// Slack allowed on the distortion constraints. Kept far below the rate
/// resolution so that a point can never beat the true optimum by exploiting it.
pub const DISTORTION_SLACK: f64 = 1e-12;
/// Largest grid the oracle accepts.
pub const MAX_GRID: usize = 10_000_000;

const RHO_DEFAULT: usize = 100;
const SU_DEFAULT: usize = 800;
const TOP_DEFAULT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleObjective {
    /// Minimize `r + r_repair`.
    Total,
    /// Minimize `r`, then `r_repair` among points within `slack_millibits`
    /// thousandths of a bit of the smallest `r`.
    OperationalFirst { slack_millibits: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    /// Correlations, spread uniformly over the valid open interval; 0 is added.
    pub rho_points: usize,
    /// Log-spaced common-codeword variances; the absent sentinel is added.
    pub sigma_u_points: usize,
    /// Log-spaced top-codeword variances; the absent sentinel is added.
    pub top_points: usize,
    pub variance_min: f64,
    pub variance_max: f64,
    pub objective: OracleObjective,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            rho_points: RHO_DEFAULT,
            sigma_u_points: SU_DEFAULT,
            top_points: TOP_DEFAULT,
            variance_min: 1e-4, variance_max: 1e4, objective: OracleObjective::Total }
    }
}

impl OracleGrid {
    fn rhos(&self, n: usize) -> Vec<f64> {
        let lo = -1.0 / (n as f64 - 1.0) + 1e-6;
        let hi = 1.0 - 1e-6;
        let m = self.rho_points.max(2);
        let mut v: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
        if !v.contains(&0.0) {
            v.push(0.0);
        }
        v
    }

    fn variances(&self, points: usize) -> Vec<f64> {
        let m = points.max(2);
        let (a, b) = (self.variance_min.ln(), self.variance_max.ln());
        let mut v: Vec<f64> = (0..m).map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp()).collect();
        v.push(ABSENT);
        v
    }

    pub fn size(&self, n: usize) -> usize {
        self.rhos(n).len() * (self.sigma_u_points + 1) * (self.top_points + 2)
    }
}

fn layer(spec: &DistortionSpec, rho: f64, su: f64) -> Option<LayerParams> {
    if su.is_finite() && su * (1.0 - spec.d1) <= spec.d1 {
        return None;
    }
    Some(LayerParams::new(su, private_variance_for_d1(spec.d1, su), rho))
}

/// Largest top variance meeting `d2` given the layer, or `None` if the layer
/// alone meets it.
fn tight_top(spec: &DistortionSpec, n: usize, layer: LayerParams) -> Option<f64> {
    let model = build_covariance(&ChannelParams::new(n, vec![layer], ABSENT)).ok()?;
    let v = model.mmse_present(&[Var::U(1), Var::Y(1, 1), Var::Y(1, 2)]).ok()?;
    let inv = 1.0 / spec.d2 - 1.0 / v;
    (inv > 0.0).then(|| 1.0 / inv)
}

/// Rates at one grid point, or `None` if it misses the distortion targets.
fn evaluate(spec: &DistortionSpec, n: usize, layer: LayerParams, top: f64) -> Option<(f64, f64, ChannelParams)> {
    let params = ChannelParams::new(n, vec![layer], top);
    let model = build_covariance(&params).ok()?;
    let d1 = model.mmse_present(&[Var::U(1), Var::Y(1, 1)]).ok()?;
    let d2 = model.mmse_present(&[Var::U(1), Var::Y(1, 1), Var::Y(1, 2), Var::Top]).ok()?;
    if d1 > spec.d1 + DISTORTION_SLACK || d2 > spec.d2 + DISTORTION_SLACK {
        return None;
    }
    let e = if n == 2 { theorem4_rates(&params) } else { theorem3_rates(&params) }.ok()?;
    Some((e.r, e.r_repair, params))
}

/// Best grid point for `n = 2` (repair-node scheme) or `n = 3` (distributed).
pub fn brute_force_oracle(spec: &DistortionSpec, n: usize, grid: &OracleGrid) -> Result<RatePoint> {
    spec.validate()?;
    if n != 2 && n != 3 {
        return Err(Error::Domain(format!("the oracle supports n = 2 or 3, not {n}")));
    }
    let size = grid.size(n);
    if size > MAX_GRID {
        return Err(Error::Domain(format!("grid of {size} points exceeds {MAX_GRID}")));
    }
    let rhos = grid.rhos(n);
    let sus = grid.variances(grid.sigma_u_points);
    let tops = grid.variances(grid.top_points);

    // Every feasible point, in grid order; the reduction below is order-independent.
    let feasible: Vec<(f64, f64, ChannelParams)> = rhos
        .par_iter()
        .flat_map_iter(|&rho| {
            let tops = &tops;
            sus.iter()
                .filter_map(move |&su| layer(spec, rho, su))
                .flat_map(move |layer| {
                    let tight = tight_top(spec, n, layer);
                    tops.iter().copied().chain(tight).map(move |top| (layer, top))
                })
                .filter_map(move |(layer, top)| evaluate(spec, n, layer, top))
        })
        .collect();

    let best = match grid.objective {
        OracleObjective::Total => {
            feasible.into_iter().min_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)))
        }
        OracleObjective::OperationalFirst { slack_millibits } => {
            let min_r = feasible.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let limit = min_r + slack_millibits as f64 * 1e-3;
            feasible.into_iter().filter(|p| p.0 <= limit).min_by(|a, b| a.1.total_cmp(&b.1))
        }
    };
    let (r, rr, params) = best.ok_or(Error::NoFeasiblePoint)?;
    Ok(RatePoint::new(r, rr).with_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_fits_the_budget() {
        assert!(OracleGrid::default().size(2) <= 1_000_000);
        assert!(OracleGrid::default().size(3) <= 1_000_000);
    }

    #[test]
    fn rejects_oversized_grids() {
        let grid = OracleGrid { rho_points: 10_000, sigma_u_points: 1000, ..Default::default() };
        let spec = DistortionSpec::new(0.3, 0.2).unwrap();
        assert!(brute_force_oracle(&spec, 2, &grid).is_err());
        assert!(brute_force_oracle(&spec, 4, &OracleGrid::default()).is_err());
    }

    #[test]
    fn small_grid_common_message() {
        let grid = OracleGrid { rho_points: 41, sigma_u_points: 30, top_points: 30, ..Default::default() };
        let p = brute_force_oracle(&DistortionSpec::new(0.3, 0.25).unwrap(), 2, &grid).unwrap();
        assert!(p.r_total >= 1.0 - 1e-5 && p.r_total < 1.02, "{p:?}");
    }
}
