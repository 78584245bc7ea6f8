//! Analog activation functions.
//!
//! The receive elements saturate according to Rapp's soft-threshold model
//!
//! ```text
//! g(y) = y / (1 + (y / y_sat)^alpha)
//! ```
//!
//! With an even exponent the function is odd, smooth, bounded by its peak value
//! `g* = (y_sat / alpha) (alpha - 1)^(1 - 1/alpha)` reached at
//! `y* = y_sat (alpha - 1)^(-1/alpha)`, and decays to zero in both tails.
//!
//! At the default operating point (`y_sat = 1.5`, `alpha = 2`) the output range
//! is `[-0.75, 0.75]`.

use serde::{Deserialize, Serialize};

use crate::numkernel::Matrix;
use crate::{Error, Result};

/// Saturation threshold and smoothness exponent of the Rapp nonlinearity.
///
/// Only even exponents are accepted: for odd `alpha` the denominator vanishes at
/// `y = -y_sat` and the function has a pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRappParams", into = "RawRappParams")]
pub struct RappParams {
    y_sat: f64,
    alpha: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRappParams {
    #[serde(default = "default_y_sat")]
    y_sat: f64,
    #[serde(default = "default_alpha")]
    alpha: u32,
}

fn default_y_sat() -> f64 {
    1.5
}

fn default_alpha() -> u32 {
    2
}

impl TryFrom<RawRappParams> for RappParams {
    type Error = Error;

    fn try_from(raw: RawRappParams) -> Result<Self> {
        RappParams::new(raw.y_sat, raw.alpha)
    }
}

impl From<RappParams> for RawRappParams {
    fn from(p: RappParams) -> Self {
        RawRappParams {
            y_sat: p.y_sat,
            alpha: p.alpha,
        }
    }
}

impl RappParams {
    pub fn new(y_sat: f64, alpha: u32) -> Result<Self> {
        if !(y_sat > 0.0 && y_sat.is_finite()) {
            return Err(Error::Config(format!(
                "saturation threshold must be positive and finite, got {y_sat}"
            )));
        }
        if alpha < 2 || !alpha.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "Rapp exponent must be an even integer >= 2, got {alpha}"
            )));
        }
        Ok(RappParams { y_sat, alpha })
    }

    pub fn y_sat(&self) -> f64 {
        self.y_sat
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }
}

impl Default for RappParams {
    fn default() -> Self {
        RappParams {
            y_sat: default_y_sat(),
            alpha: default_alpha(),
        }
    }
}

#[inline]
pub fn rapp(y: f64, p: &RappParams) -> f64 {
    let r = (y / p.y_sat).powi(p.alpha as i32);
    y / (1.0 + r)
}

/// Analytic derivative `dg/dy = (1 + (1 - alpha) r) / (1 + r)^2` with `r = (y/y_sat)^alpha`.
pub fn rapp_derivative(y: f64, p: &RappParams) -> f64 {
    let r = (y / p.y_sat).powi(p.alpha as i32);
    (1.0 + (1.0 - p.alpha as f64) * r) / ((1.0 + r) * (1.0 + r))
}

/// Element-wise [`rapp`].
pub fn rapp_vec(y: &Matrix, p: &RappParams) -> Matrix {
    y.map(|v| rapp(v, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RappPeak {
    pub y_star: f64,
    pub g_star: f64,
}

/// Location and value of the maximum of [`rapp`] on `(0, inf)`.
pub fn rapp_peak(p: &RappParams) -> RappPeak {
    let a = p.alpha as f64;
    RappPeak {
        y_star: p.y_sat * (a - 1.0).powf(-1.0 / a),
        g_star: p.y_sat / a * (a - 1.0).powf(1.0 - 1.0 / a),
    }
}

/// Logistic sigmoid, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
