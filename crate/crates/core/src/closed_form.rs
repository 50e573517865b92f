//! Closed-form Gaussian rates: the two-node optimum with its three regimes,
//! the two-node rate without repair, and the three-node regime formulas as a
//! function of the private-noise correlation `rho`.
//!
//! Every formula here has a twin evaluated numerically by [`crate::entropy`];
//! the tests check that both paths agree.

use crate::entropy::clamp_info;
use crate::error::{Error, Result};
use crate::explorer::minimize::{minimize_scalar, OptimizerConfig};
use crate::types::{ChannelParams, DistortionSpec, LayerParams, RatePoint, Regime, ABSENT};

/// Inset from the open ends of a correlation interval.
pub const RHO_EPS: f64 = 1e-6;

fn lg(x: f64) -> f64 {
    x.log2()
}

/// Which kinds of information the two-node optimum uses.
pub fn two_node_regime(spec: &DistortionSpec) -> Regime {
    let (d1, d2) = (spec.d1, spec.d2);
    if d2 <= 2.0 * d1 - 1.0 {
        Regime::ResolutionInfo
    } else if d2 >= d1 / (2.0 - d1) {
        Regime::CommonMessage
    } else {
        Regime::CorrelationOnly
    }
}

/// Private-noise variance that gives one-node distortion `d1` when the
/// common codeword has noise variance `sigma_u_sq`. Returns [`ABSENT`] when
/// the common codeword alone already meets `d1`.
pub fn private_variance_for_d1(d1: f64, sigma_u_sq: f64) -> f64 {
    if sigma_u_sq.is_infinite() {
        return d1 / (1.0 - d1);
    }
    let den = sigma_u_sq * (1.0 - d1) - d1;
    if den <= 1e-12 * sigma_u_sq {
        ABSENT
    } else {
        d1 * sigma_u_sq / den
    }
}

/// Optimal two-node repair scheme: rates and the parameters achieving them.
///
/// Always satisfies `r + r_repair = log2(1/d2) / 2`.
pub fn two_node_optimal(spec: &DistortionSpec) -> Result<RatePoint> {
    spec.validate()?;
    let (d1, d2) = (spec.d1, spec.d2);
    let regime = two_node_regime(spec);
    let (r, r_repair, layer, top) = match regime {
        Regime::CommonMessage => {
            let den = 2.0 * d2 - d1 * d2 - d1;
            let su = if den <= 0.0 { ABSENT } else { d1 * d2 / den };
            let sq = private_variance_for_d1(d1, su);
            (0.5 * lg(1.0 / d1), 0.5 * lg(d1 / d2), LayerParams::new(su, sq, 0.0), ABSENT)
        }
        Regime::CorrelationOnly => {
            let r_repair = 0.5 * lg(2.0 * ((1.0 - d1) * (d1 - d2)).sqrt() / ((1.0 - d2) * d2.sqrt()));
            let r = 0.5 * lg((1.0 - d2) / (2.0 * ((1.0 - d1) * d2 * (d1 - d2)).sqrt()));
            let rho = (d1 * d2 + d1 - 2.0 * d2) / (d1 * (d2 - 1.0));
            (r, r_repair, LayerParams::private(d1 / (1.0 - d1), rho), ABSENT)
        }
        Regime::ResolutionInfo => {
            let rho = (d1 - 1.0) / d1;
            let v = d1 * (rho + 1.0) / (d1 * (rho - 1.0) + 2.0);
            let inv = 1.0 / d2 - 1.0 / v;
            let top = if inv <= 0.0 { ABSENT } else { 1.0 / inv };
            let r = 0.25 * lg(1.0 / d2);
            (r, r, LayerParams::private(d1 / (1.0 - d1), rho), top)
        }
    };
    let params = ChannelParams::new(2, vec![layer], top);
    Ok(RatePoint::new(clamp_info(r), clamp_info(r_repair)).with_regime(regime).with_params(params))
}

/// Largest top-codeword variance meeting `d2` for two nodes without a common
/// codeword; [`ABSENT`] if the private pair already meets it.
pub fn two_node_top_variance(spec: &DistortionSpec, rho: f64) -> f64 {
    let inv = inverse_top_variance(spec, rho);
    if inv <= 0.0 {
        ABSENT
    } else {
        1.0 / inv
    }
}

fn inverse_top_variance(spec: &DistortionSpec, rho: f64) -> f64 {
    1.0 / spec.d2 - 1.0 - 2.0 * (1.0 - spec.d1) / ((rho + 1.0) * spec.d1)
}

/// Per-node rate of the two-node scheme without common codeword at
/// correlation `rho`, with the top codeword as coarse as `d2` allows.
pub fn two_node_no_common_rate(spec: &DistortionSpec, rho: f64) -> f64 {
    let d1 = spec.d1;
    let inv = inverse_top_variance(spec, rho).max(0.0);
    0.5 * lg(1.0 / ((1.0 - rho * rho).sqrt() * d1)) + 0.25 * lg(1.0 + d1 * (1.0 + rho) * inv / (d1 * (rho - 1.0) + 2.0))
}

/// Optimal symmetric two-node rate without any repair requirement.
pub fn two_node_ec_baseline(spec: &DistortionSpec) -> Result<f64> {
    two_node_ec_baseline_with(spec, &OptimizerConfig::default())
}

pub fn two_node_ec_baseline_with(spec: &DistortionSpec, cfg: &OptimizerConfig) -> Result<f64> {
    spec.validate()?;
    let (_, r) = minimize_scalar(|rho| two_node_no_common_rate(spec, rho), -1.0 + RHO_EPS, 1.0 - RHO_EPS, cfg)?;
    Ok(r)
}

/// Correlation at which the two private descriptions of three nodes meet
/// `d2` by themselves; separates the common-message and resolution regimes.
pub fn three_node_rho_boundary(spec: &DistortionSpec) -> f64 {
    let (d1, d2) = (spec.d1, spec.d2);
    (2.0 * d2 - d1 * d2 - d1) / (d1 * (1.0 - d2))
}

fn cube_root_c(rho: f64) -> f64 {
    ((rho - 1.0) * (rho - 1.0) * (2.0 * rho + 1.0)).cbrt()
}

/// Three-node operational rate without top codeword.
pub fn three_node_r(d1: f64, rho: f64) -> f64 {
    0.5 * lg(1.0 / (d1 * cube_root_c(rho)))
}

/// Unclamped three-node repair rate with the private variance eliminated
/// through `d1`. `sigma_u_sq` may be [`ABSENT`].
pub fn three_node_rr(d1: f64, rho: f64, sigma_u_sq: f64) -> f64 {
    let inv_su = 1.0 / sigma_u_sq;
    let n = 2.0 * d1 * (rho - 1.0) * (1.0 + inv_su) + 3.0;
    let m = d1 * (rho - 1.0) * (1.0 + inv_su) + 2.0;
    0.25 * lg((1.0 - rho) * n / (cube_root_c(rho) * m))
}

/// Three-node total in the common-message regime as printed in the source
/// formula, with absolute values on the sign-changing factors. It does not
/// agree with the entropy evaluation; kept to document the discrepancy.
pub fn common_message_printed_total(spec: &DistortionSpec, rho: f64) -> f64 {
    let (d1, d2) = (spec.d1, spec.d2);
    let radicand = ((d2 - 2.0 * d1 * (rho + 1.0)) / (d1 * (2.0 * rho + 1.0))).abs();
    0.5 * lg(d2 * radicand.sqrt() / (d1 * rho + d1 - 2.0 * d2).abs())
}

/// Rates of the three-node scheme in one regime at correlation `rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeRates {
    pub r: f64,
    pub r_repair: f64,
    pub r_total: f64,
    pub params: ChannelParams,
}

impl RegimeRates {
    pub fn to_rate_point(&self, regime: Regime) -> RatePoint {
        RatePoint::new(self.r, self.r_repair).with_regime(regime).with_params(self.params.clone())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > -0.5 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho = {rho} outside (-1/2, 1)")))
    }
}

/// Three-node rates of `regime` at `rho`, or `None` if the regime is not
/// valid there.
pub fn three_node_regime_point(spec: &DistortionSpec, rho: f64, regime: Regime) -> Result<Option<RegimeRates>> {
    spec.validate()?;
    check_rho(rho)?;
    let (d1, d2) = (spec.d1, spec.d2);
    let boundary = three_node_rho_boundary(spec);
    let sq1 = d1 / (1.0 - d1);
    let point = match regime {
        Regime::CorrelationOnly => {
            if rho > boundary {
                return Ok(None);
            }
            let r = three_node_r(d1, rho);
            let rr = three_node_rr(d1, rho, ABSENT);
            let total = if rr > 0.0 {
                let num = 2.0 * d1 * (rho - 1.0) + 3.0;
                let den = (-2.0 * rho * rho + rho + 1.0) * (d1 * (rho - 1.0) + 2.0);
                0.5 * lg((num / den).sqrt() / d1)
            } else {
                r
            };
            let params = ChannelParams::new(3, vec![LayerParams::private(sq1, rho)], ABSENT);
            RegimeRates { r, r_repair: total - r, r_total: total, params }
        }
        Regime::CommonMessage => {
            if rho >= boundary {
                return Ok(None);
            }
            let su = d1 * d2 * (1.0 - rho) / (2.0 * d2 - d1 * (d2 * (1.0 - rho) + rho + 1.0));
            // The one-node constraint with this su, solved for the private variance.
            let sq = if d1 == d2 { ABSENT } else { d1 * d2 * (1.0 - rho) / ((1.0 + rho) * (d1 - d2)) };
            let params = ChannelParams::new(3, vec![LayerParams::new(su, sq, rho)], ABSENT);
            if sq.is_infinite() {
                let r = 0.5 * lg(1.0 + 1.0 / su);
                RegimeRates { r, r_repair: 0.0, r_total: r, params }
            } else {
                let r = three_node_r(d1, rho);
                let rr = three_node_rr(d1, rho, su);
                let total = if rr > 0.0 {
                    let radicand = (2.0 * d1 * (rho + 1.0) - d2) / (d1 * (1.0 - rho * rho) * (2.0 * rho + 1.0));
                    0.5 * lg(radicand.sqrt() / d1)
                } else {
                    r
                };
                RegimeRates { r, r_repair: total - r, r_total: total, params }
            }
        }
        Regime::ResolutionInfo => {
            if rho <= boundary {
                return Ok(None);
            }
            let sq2 = d1 * d2 * (rho + 1.0) / (d1 * (d2 * (1.0 - rho) + rho + 1.0) - 2.0 * d2);
            let r = 0.5 * lg((d1 * (rho + 1.0) / (d2 * (d1 * (rho - 1.0) + 2.0))).sqrt() / (d1 * cube_root_c(rho)));
            let rr = three_node_rr(d1, rho, ABSENT).max(0.0);
            let params = ChannelParams::new(3, vec![LayerParams::private(sq1, rho)], sq2);
            RegimeRates { r, r_repair: rr, r_total: r + rr, params }
        }
    };
    Ok(Some(RegimeRates {
        r: clamp_info(point.r),
        r_repair: clamp_info(point.r_repair),
        ..point
    }))
}

/// Totals `R + R_r` of the three regimes at `rho`, each `None` where invalid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeNodeRates {
    pub correlation_only: Option<f64>,
    pub common_message: Option<f64>,
    pub resolution_info: Option<f64>,
}

impl ThreeNodeRates {
    pub fn get(&self, regime: Regime) -> Option<f64> {
        match regime {
            Regime::CorrelationOnly => self.correlation_only,
            Regime::CommonMessage => self.common_message,
            Regime::ResolutionInfo => self.resolution_info,
        }
    }
}

pub fn three_node_regime_rates(spec: &DistortionSpec, rho: f64) -> Result<ThreeNodeRates> {
    let total = |regime| -> Result<Option<f64>> {
        Ok(three_node_regime_point(spec, rho, regime)?.map(|p| p.r_total))
    };
    Ok(ThreeNodeRates {
        correlation_only: total(Regime::CorrelationOnly)?,
        common_message: total(Regime::CommonMessage)?,
        resolution_info: total(Regime::ResolutionInfo)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{build_covariance, theorem3_rates, theorem4_rates, Var};
    use approx::assert_abs_diff_eq;

    fn spec(d1: f64, d2: f64) -> DistortionSpec {
        DistortionSpec::new(d1, d2).unwrap()
    }

    #[test]
    fn regime_examples() {
        assert_eq!(two_node_regime(&spec(0.7, 0.3)), Regime::ResolutionInfo);
        assert_eq!(two_node_regime(&spec(0.3, 0.25)), Regime::CommonMessage);
        assert_eq!(two_node_regime(&spec(0.3, 0.15)), Regime::CorrelationOnly);
    }

    #[test]
    fn two_node_values() {
        let p = two_node_optimal(&spec(0.3, 0.25)).unwrap();
        assert_abs_diff_eq!(p.r, 0.8684827970831031, epsilon = 1e-12);
        assert_abs_diff_eq!(p.r_repair, 0.1315172029168969, epsilon = 1e-12);
        assert_abs_diff_eq!(p.r_total, 1.0, epsilon = 1e-12);

        let p = two_node_optimal(&spec(0.3, 0.15)).unwrap();
        assert_abs_diff_eq!(p.r, 0.879893, epsilon = 1e-6);
        assert_abs_diff_eq!(p.r_repair, 0.488589, epsilon = 1e-6);
        assert_abs_diff_eq!(p.r_total, 0.5 * (1.0f64 / 0.15).log2(), epsilon = 1e-12);

        let p = two_node_optimal(&spec(0.7, 0.3)).unwrap();
        assert_abs_diff_eq!(p.r, 0.4342413, epsilon = 1e-6);
        assert_eq!(p.r, p.r_repair);
    }

    #[test]
    fn equal_distortions_need_no_repair() {
        let p = two_node_optimal(&spec(0.3, 0.3)).unwrap();
        assert_eq!(p.r_repair, 0.0);
        assert_abs_diff_eq!(p.r, 0.5 * (1.0f64 / 0.3).log2(), epsilon = 1e-12);
        assert_eq!(p.regime, Some(Regime::CommonMessage));
        let e = theorem4_rates(p.params.as_ref().unwrap()).unwrap();
        assert_abs_diff_eq!(e.r_total, p.r_total, epsilon = 1e-9);
    }

    #[test]
    fn achieving_parameters_meet_the_distortions() {
        for (d1, d2) in [(0.3, 0.25), (0.3, 0.15), (0.7, 0.3), (0.8, 0.2), (0.5, 0.4)] {
            let p = two_node_optimal(&spec(d1, d2)).unwrap();
            let params = p.params.unwrap();
            let m = build_covariance(&params).unwrap();
            let one = m.mmse_present(&[Var::U(1), Var::Y(1, 1)]).unwrap();
            let two = m.mmse_present(&[Var::U(1), Var::Y(1, 1), Var::Y(1, 2), Var::Top]).unwrap();
            assert_abs_diff_eq!(one, d1, epsilon = 1e-10);
            assert_abs_diff_eq!(two, d2, epsilon = 1e-10);
            let e = theorem4_rates(&params).unwrap();
            assert_abs_diff_eq!(e.r, p.r, epsilon = 1e-9);
            assert_abs_diff_eq!(e.r_repair, p.r_repair, epsilon = 1e-9);
        }
    }

    #[test]
    fn ec_baseline_examples() {
        assert_abs_diff_eq!(two_node_ec_baseline(&spec(0.3, 0.25)).unwrap(), 0.8684827970831031, epsilon = 1e-9);
        assert_abs_diff_eq!(two_node_ec_baseline(&spec(0.3, 0.15)).unwrap(), 0.879893, epsilon = 1e-6);
        assert_abs_diff_eq!(
            two_node_ec_baseline(&spec(0.4, 0.4)).unwrap(),
            0.5 * (1.0f64 / 0.4).log2(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn three_node_boundary_limits_agree() {
        let s = spec(0.3, 0.2);
        let b = three_node_rho_boundary(&s);
        let below = three_node_regime_point(&s, b - 1e-9, Regime::CommonMessage).unwrap().unwrap();
        let above = three_node_regime_point(&s, b + 1e-9, Regime::ResolutionInfo).unwrap().unwrap();
        assert_abs_diff_eq!(below.r_total, above.r_total, epsilon = 1e-6);
        let at = three_node_regime_rates(&s, b).unwrap();
        assert!(at.correlation_only.is_some() && at.common_message.is_none() && at.resolution_info.is_none());
    }

    #[test]
    fn three_node_regimes_match_entropy_engine() {
        let s = spec(0.3, 0.2);
        for rho in [-0.4, -0.1, 0.0, 0.1, 0.15, 0.3, 0.6, 0.9] {
            for regime in Regime::ALL {
                if let Some(p) = three_node_regime_point(&s, rho, regime).unwrap() {
                    let e = theorem3_rates(&p.params).unwrap();
                    assert_abs_diff_eq!(e.r, p.r, epsilon = 1e-9);
                    assert_abs_diff_eq!(e.r_repair, p.r_repair, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn printed_common_message_form_diverges() {
        let s = spec(0.3, 0.2);
        let p = three_node_regime_point(&s, 0.1, Regime::CommonMessage).unwrap().unwrap();
        assert!((common_message_printed_total(&s, 0.1) - p.r_total).abs() > 1e-3);
    }

    #[test]
    fn identical_copies_limit() {
        let s = spec(0.3, 0.3);
        let p = three_node_regime_point(&s, 1.0 - 1e-6, Regime::CommonMessage).unwrap().unwrap();
        assert_abs_diff_eq!(p.r_total, 0.5 * (1.0f64 / 0.3).log2(), epsilon = 1e-9);
        assert_eq!(p.r_repair, 0.0);
    }

    #[test]
    fn rho_domain() {
        let s = spec(0.3, 0.2);
        assert!(three_node_regime_rates(&s, -0.5).is_err());
        assert!(three_node_regime_rates(&s, 1.0).is_err());
    }
}
