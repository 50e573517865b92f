//! Parameter and result types shared by every module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance value meaning "this variable is not part of the scheme".
pub const ABSENT: f64 = f64::INFINITY;

/// Test-channel parameters of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Noise variance of the common codeword `U_k`.
    #[serde(with = "variance")]
    pub sigma_u_sq: f64,
    /// Noise variance of each private codeword `Y_{k,i}`.
    #[serde(with = "variance")]
    pub sigma_q_sq: f64,
    /// Correlation between the private noises of two different nodes.
    pub rho: f64,
}

impl LayerParams {
    pub fn new(sigma_u_sq: f64, sigma_q_sq: f64, rho: f64) -> Self {
        Self { sigma_u_sq, sigma_q_sq, rho }
    }

    /// Layer with private codewords only.
    pub fn private(sigma_q_sq: f64, rho: f64) -> Self {
        Self::new(ABSENT, sigma_q_sq, rho)
    }

    pub fn has_common(&self) -> bool {
        self.sigma_u_sq.is_finite()
    }

    pub fn has_private(&self) -> bool {
        self.sigma_q_sq.is_finite()
    }
}

/// Symmetric Gaussian test channel for `n` nodes.
///
/// Every node holds `X + Q_{k,i}` for each layer `k` with private codewords,
/// the common codewords `X + Q_{u,k}`, and a share of the single top
/// codeword `X + Q_top`. The top codeword is labelled `Y{layers.len()+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n: usize,
    pub layers: Vec<LayerParams>,
    #[serde(with = "variance")]
    pub top_sigma_sq: f64,
}

impl ChannelParams {
    pub fn new(n: usize, layers: Vec<LayerParams>, top_sigma_sq: f64) -> Self {
        Self { n, layers, top_sigma_sq }
    }

    pub fn has_top(&self) -> bool {
        self.top_sigma_sq.is_finite()
    }

    /// Checks everything except positive semidefiniteness of the noise
    /// correlation, which [`crate::entropy::build_covariance`] handles.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameters(format!("n = {} but at least 2 nodes are needed", self.n)));
        }
        let check_var = |name: String, v: f64| {
            if v.is_nan() || v <= 0.0 {
                Err(Error::InvalidParameters(format!("{name} = {v} must be positive or inf")))
            } else {
                Ok(())
            }
        };
        for (k, layer) in self.layers.iter().enumerate() {
            check_var(format!("layer {} sigma_u_sq", k + 1), layer.sigma_u_sq)?;
            check_var(format!("layer {} sigma_q_sq", k + 1), layer.sigma_q_sq)?;
            if !layer.rho.is_finite() {
                return Err(Error::InvalidParameters(format!("layer {} rho = {}", k + 1, layer.rho)));
            }
        }
        check_var("top_sigma_sq".into(), self.top_sigma_sq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Target mean-squared errors for one node and for two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionSpec {
    pub d1: f64,
    pub d2: f64,
}

impl DistortionSpec {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        let spec = Self { d1, d2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |d: f64| d > 0.0 && d < 1.0;
        if !in_unit(self.d1) || !in_unit(self.d2) {
            return Err(Error::InvalidSpec(format!("d1 = {}, d2 = {} must lie in (0, 1)", self.d1, self.d2)));
        }
        if self.d2 > self.d1 {
            return Err(Error::InvalidSpec(format!("d2 = {} exceeds d1 = {}", self.d2, self.d1)));
        }
        Ok(())
    }

    /// Target for `m` accessed nodes (1 or 2).
    pub fn d(&self, m: usize) -> f64 {
        match m {
            1 => self.d1,
            _ => self.d2,
        }
    }
}

/// Which kinds of information are active at an optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    ResolutionInfo,
    CorrelationOnly,
    CommonMessage,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::CorrelationOnly, Regime::CommonMessage, Regime::ResolutionInfo];

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ResolutionInfo => "resolution-info",
            Regime::CorrelationOnly => "correlation-only",
            Regime::CommonMessage => "common-message",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Operational rate, repair rate and their sum, in bits per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r: f64,
    pub r_repair: f64,
    pub r_total: f64,
    pub regime: Option<Regime>,
    pub params: Option<ChannelParams>,
}

impl RatePoint {
    pub fn new(r: f64, r_repair: f64) -> Self {
        Self { r, r_repair, r_total: r + r_repair, regime: None, params: None }
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = Some(regime);
        self
    }

    pub fn with_params(mut self, params: ChannelParams) -> Self {
        self.params = Some(params);
        self
    }
}

/// Serde adapter writing infinite variances as the string `"inf"`.
pub mod variance {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v.to_ascii_lowercase().as_str() {
                    "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}
