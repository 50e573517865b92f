//! Three-node optimization over `rho` regime by regime, and the baseline
//! curves without repair.

use crate::closed_form::{three_node_regime_point, three_node_rho_boundary, RHO_EPS};
use crate::entropy::{prop1_rate, prp_rate, theorem3_rates};
use crate::error::{Error, Result};
use crate::types::{ChannelParams, DistortionSpec, LayerParams, RatePoint, Regime, ABSENT};

use super::minimize::{minimize_scalar, OptimizerConfig};

const RHO_LO: f64 = -0.5 + RHO_EPS;
const RHO_HI: f64 = 1.0 - RHO_EPS;

/// Valid `rho` interval of a regime, or `None` if it is empty.
fn regime_interval(spec: &DistortionSpec, regime: Regime) -> Option<(f64, f64)> {
    let b = three_node_rho_boundary(spec);
    let (lo, hi) = match regime {
        Regime::CorrelationOnly | Regime::CommonMessage => (RHO_LO, b.min(RHO_HI)),
        Regime::ResolutionInfo => (b.max(RHO_LO), RHO_HI),
    };
    (lo < hi).then_some((lo, hi))
}

/// Best point of one regime, with `r` and `r_repair` from the entropy
/// evaluation at the optimizing parameters.
pub fn three_node_regime_optimum(
    spec: &DistortionSpec,
    regime: Regime,
    cfg: &OptimizerConfig,
) -> Result<Option<RatePoint>> {
    spec.validate()?;
    let Some((lo, hi)) = regime_interval(spec, regime) else {
        return Ok(None);
    };
    let total = |rho: f64| match three_node_regime_point(spec, rho, regime) {
        Ok(Some(p)) => p.r_total,
        _ => f64::INFINITY,
    };
    let rho = match minimize_scalar(total, lo, hi, cfg) {
        Ok((rho, _)) => rho,
        Err(Error::NoFeasiblePoint) => return Ok(None),
        Err(e) => return Err(e),
    };
    let point = three_node_regime_point(spec, rho, regime)?.ok_or(Error::NoFeasiblePoint)?;
    let e = theorem3_rates(&point.params)?;
    Ok(Some(RatePoint::new(e.r, e.r_repair).with_regime(regime).with_params(point.params)))
}

/// Optimum of each regime, in [`Regime::ALL`] order.
pub fn three_node_regime_optima(spec: &DistortionSpec, cfg: &OptimizerConfig) -> Result<Vec<(Regime, Option<RatePoint>)>> {
    Regime::ALL
        .iter()
        .map(|&regime| Ok((regime, three_node_regime_optimum(spec, regime, cfg)?)))
        .collect()
}

fn best_of(points: impl IntoIterator<Item = RatePoint>) -> Result<RatePoint> {
    points
        .into_iter()
        .min_by(|a, b| a.r_total.total_cmp(&b.r_total))
        .ok_or(Error::NoFeasiblePoint)
}

/// Minimum total rate of the three-node distributed-repair scheme.
pub fn three_node_optimal(spec: &DistortionSpec, cfg: &OptimizerConfig) -> Result<RatePoint> {
    let optima = three_node_regime_optima(spec, cfg)?;
    let best = best_of(optima.into_iter().filter_map(|(_, p)| p));
    debug_assert!(best.is_ok(), "the correlation-only regime is always feasible");
    best
}

/// Like [`three_node_optimal`] but without the common-message regime.
pub fn three_node_optimal_without_common(spec: &DistortionSpec, cfg: &OptimizerConfig) -> Result<RatePoint> {
    let points = [Regime::CorrelationOnly, Regime::ResolutionInfo]
        .iter()
        .map(|&regime| three_node_regime_optimum(spec, regime, cfg))
        .collect::<Result<Vec<_>>>()?;
    best_of(points.into_iter().flatten())
}

/// `Var(X | two private descriptions)` with the private variance set by `d1`.
fn pair_variance(d1: f64, rho: f64) -> f64 {
    d1 * (rho + 1.0) / (d1 * (rho - 1.0) + 2.0)
}

/// Three-node parameters of the layered scheme whose top layer is a single
/// MDS-coded codeword just fine enough for `d2`.
pub fn modified_prp3_params(spec: &DistortionSpec, rho: f64) -> ChannelParams {
    let inv = 1.0 / spec.d2 - 1.0 / pair_variance(spec.d1, rho);
    let top = if inv <= 0.0 { ABSENT } else { 1.0 / inv };
    ChannelParams::new(3, vec![LayerParams::private(spec.d1 / (1.0 - spec.d1), rho)], top)
}

/// Three-node parameters of the plain layered scheme: the second layer has
/// one independent codeword per node, any two of which give `d2`.
pub fn prp3_params(spec: &DistortionSpec, rho: f64) -> ChannelParams {
    let inv = 1.0 / spec.d2 - 1.0 / pair_variance(spec.d1, rho);
    let second = if inv <= 0.0 { ABSENT } else { 2.0 / inv };
    ChannelParams::new(
        3,
        vec![LayerParams::private(spec.d1 / (1.0 - spec.d1), rho), LayerParams::private(second, 0.0)],
        ABSENT,
    )
}

fn minimize_over_rho(cfg: &OptimizerConfig, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    minimize_scalar(|rho| f(rho).unwrap_or(f64::INFINITY), RHO_LO, RHO_HI, cfg)
}

/// Operational rate of the three-node layered scheme without repair, with
/// a single top codeword.
pub fn modified_prp3_rate(spec: &DistortionSpec, cfg: &OptimizerConfig) -> Result<RatePoint> {
    spec.validate()?;
    let (rho, _) = minimize_over_rho(cfg, |rho| Ok(prop1_rate(&modified_prp3_params(spec, rho))?.r))?;
    let params = modified_prp3_params(spec, rho);
    Ok(RatePoint::new(prop1_rate(&params)?.r, 0.0).with_params(params))
}

/// Operational rate of the plain three-node layered scheme without repair.
pub fn prp3_rate(spec: &DistortionSpec, cfg: &OptimizerConfig) -> Result<RatePoint> {
    spec.validate()?;
    let (rho, _) = minimize_over_rho(cfg, |rho| Ok(prp_rate(&prp3_params(spec, rho))?.r))?;
    let params = prp3_params(spec, rho);
    Ok(RatePoint::new(prp_rate(&params)?.r, 0.0).with_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{build_covariance, Var};
    use approx::assert_abs_diff_eq;

    fn spec(d1: f64, d2: f64) -> DistortionSpec {
        DistortionSpec::new(d1, d2).unwrap()
    }

    #[test]
    fn equal_distortions() {
        let p = three_node_optimal(&spec(0.3, 0.3), &OptimizerConfig::default()).unwrap();
        assert!(p.r_repair < 1e-6, "{p:?}");
        assert_abs_diff_eq!(p.r_total, 0.5 * (1.0f64 / 0.3).log2(), epsilon = 1e-4);
    }

    #[test]
    fn frozen_optima() {
        // Independent dense scans of the regime formulas.
        let cfg = OptimizerConfig::default();
        for (d1, d2, regime, rho, total) in [
            (0.3, 0.2, Regime::CommonMessage, 0.152, 0.959),
            (0.3, 0.15, Regime::ResolutionInfo, 0.027, 1.051),
            (0.5, 0.3, Regime::ResolutionInfo, 0.045, 0.640),
            (0.6, 0.5, Regime::CommonMessage, 0.10, 0.419),
        ] {
            let p = three_node_optimal(&spec(d1, d2), &cfg).unwrap();
            assert_eq!(p.regime, Some(regime), "({d1}, {d2})");
            assert_abs_diff_eq!(p.r_total, total, epsilon = 1e-3);
            let got_rho = p.params.unwrap().layers[0].rho;
            assert!((got_rho - rho).abs() < 0.01, "({d1}, {d2}) rho {got_rho}");
        }
    }

    #[test]
    fn common_message_never_hurts() {
        let cfg = OptimizerConfig::default();
        for d2 in [0.05, 0.1, 0.15, 0.2, 0.25, 0.29] {
            let s = spec(0.3, d2);
            let with = three_node_optimal(&s, &cfg).unwrap();
            let without = three_node_optimal_without_common(&s, &cfg).unwrap();
            assert!(with.r_total <= without.r_total + 1e-12);
        }
    }

    #[test]
    fn optimum_meets_distortions() {
        let s = spec(0.4, 0.22);
        let p = three_node_optimal(&s, &OptimizerConfig::default()).unwrap();
        let m = build_covariance(p.params.as_ref().unwrap()).unwrap();
        let d1 = m.mmse_present(&[Var::U(1), Var::Y(1, 2)]).unwrap();
        let d2 = m.mmse_present(&[Var::U(1), Var::Y(1, 1), Var::Y(1, 3), Var::Top]).unwrap();
        assert_abs_diff_eq!(d1, 0.4, epsilon = 1e-9);
        assert!(d2 <= 0.22 + 1e-9, "{d2}");
    }

    #[test]
    fn layered_baselines_coincide() {
        // With independent second-layer noises both layered baselines cost the
        // same at every correlation.
        let s = spec(0.3, 0.15);
        for rho in [-0.3, 0.0, 0.4] {
            let a = prop1_rate(&modified_prp3_params(&s, rho)).unwrap().r;
            let b = prp_rate(&prp3_params(&s, rho)).unwrap().r;
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn baseline_params_meet_d2() {
        let s = spec(0.3, 0.15);
        let m = build_covariance(&prp3_params(&s, 0.1)).unwrap();
        let d2 = m.mmse_present(&[Var::Y(1, 1), Var::Y(1, 2), Var::Y(2, 1), Var::Y(2, 2)]).unwrap();
        assert_abs_diff_eq!(d2, 0.15, epsilon = 1e-10);
        let m = build_covariance(&modified_prp3_params(&s, 0.1)).unwrap();
        let d2 = m.mmse_present(&[Var::Y(1, 1), Var::Y(1, 2), Var::Top]).unwrap();
        assert_abs_diff_eq!(d2, 0.15, epsilon = 1e-10);
    }
}
