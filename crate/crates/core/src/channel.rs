//! Ricean XL-MIMO channels.
//!
//! A realization is
//!
//! ```text
//! H = sqrt(k/(1+k)) sqrt(P_L) H_los + sqrt(1/(1+k)) sqrt(P_L) H_nlos
//! ```
//!
//! with `H_nlos` i.i.d. `CN(0, 1)` and `H_los` the rank-one far-field response of
//! two half-wavelength uniform linear arrays. Over time the channel ages as
//! `H(k) = eta H(k-1) + (1 - eta) Theta(k)`, applied to the full matrix
//! (line-of-sight part included). Note that this recursion is not
//! variance-preserving: for `eta < 1` the entry variance contracts towards
//! `(1-eta)^2 / (1 - eta^2)` instead of staying at `P_L`.
//!
//! The learner only sees `H^r`, the element-wise real part of `H`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numkernel::{sample_complex_gaussian, ComplexMatrix, Matrix, RngStream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiceanConfig {
    /// Ricean factor; 0 gives Rayleigh fading.
    pub kappa: f64,
    pub pathloss: f64,
    pub n_r: usize,
    pub n_t: usize,
    /// Departure angle of the line-of-sight ray, radians from broadside.
    pub los_angle_tx: f64,
    /// Arrival angle of the line-of-sight ray, radians from broadside.
    pub los_angle_rx: f64,
}

impl RiceanConfig {
    /// Broadside geometry with unit pathloss.
    pub fn new(kappa: f64, n_r: usize, n_t: usize) -> Result<Self> {
        let cfg = RiceanConfig {
            kappa,
            pathloss: 1.0,
            n_r,
            n_t,
            los_angle_tx: 0.0,
            los_angle_rx: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!(
                "Ricean factor must be finite and >= 0, got {}",
                self.kappa
            )));
        }
        if !(self.pathloss > 0.0 && self.pathloss.is_finite()) {
            return Err(Error::Config(format!(
                "pathloss must be positive, got {}",
                self.pathloss
            )));
        }
        if self.n_r == 0 || self.n_t == 0 {
            return Err(Error::Config(format!(
                "antenna counts must be >= 1, got n_r = {}, n_t = {}",
                self.n_r, self.n_t
            )));
        }
        if !(self.los_angle_tx.is_finite() && self.los_angle_rx.is_finite()) {
            return Err(Error::Config("steering angles must be finite".into()));
        }
        Ok(())
    }

    /// Power share of the line-of-sight component, `k / (1 + k)`.
    pub fn los_power_share(&self) -> f64 {
        self.kappa / (1.0 + self.kappa)
    }

    /// Power share of the scattered component, `1 / (1 + k)`.
    pub fn nlos_power_share(&self) -> f64 {
        1.0 / (1.0 + self.kappa)
    }
}

/// Half-wavelength ULA steering vector, element `m` = `exp(i pi m sin(theta))`.
pub fn steering_vector(n: usize, theta: f64) -> Vec<Complex64> {
    let phase = std::f64::consts::PI * theta.sin();
    (0..n)
        .map(|m| Complex64::from_polar(1.0, phase * m as f64))
        .collect()
}

/// Rank-one line-of-sight matrix `a_rx a_tx^H`; every entry has unit modulus.
pub fn los_matrix(cfg: &RiceanConfig) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let a_rx = steering_vector(cfg.n_r, cfg.los_angle_rx);
    let a_tx = steering_vector(cfg.n_t, cfg.los_angle_tx);
    Ok(ComplexMatrix::from_fn(cfg.n_r, cfg.n_t, |i, j| {
        a_rx[i] * a_tx[j].conj()
    }))
}

/// A channel realization together with its real-part view.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    h_complex: ComplexMatrix,
    h_real: Matrix,
}

impl ChannelMatrix {
    pub fn from_complex(h: ComplexMatrix) -> Self {
        let h_real = h.re();
        ChannelMatrix {
            h_complex: h,
            h_real,
        }
    }

    pub fn complex(&self) -> &ComplexMatrix {
        &self.h_complex
    }

    /// `H^r`, the element-wise real part.
    pub fn real(&self) -> &Matrix {
        &self.h_real
    }

    pub fn into_real(self) -> Matrix {
        self.h_real
    }

    pub fn n_r(&self) -> usize {
        self.h_real.rows()
    }

    pub fn n_t(&self) -> usize {
        self.h_real.cols()
    }
}

pub fn sample_ricean(cfg: &RiceanConfig, rng: &mut RngStream) -> Result<ChannelMatrix> {
    let los = los_matrix(cfg)?;
    let nlos = sample_complex_gaussian(rng, cfg.n_r, cfg.n_t, 1.0)?;
    let amp = cfg.pathloss.sqrt();
    let h = los.axpby(
        cfg.los_power_share().sqrt() * amp,
        &nlos,
        cfg.nlos_power_share().sqrt() * amp,
    )?;
    Ok(ChannelMatrix::from_complex(h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArConfig {
    eta: f64,
}

impl ArConfig {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Config(format!(
                "AR coefficient must lie in (0, 1], got {eta}"
            )));
        }
        Ok(ArConfig { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// One AR(1) step. With `eta = 1` the channel is returned unchanged and no
/// randomness is consumed.
pub fn evolve_ar(
    prev: &ChannelMatrix,
    cfg: &ArConfig,
    rng: &mut RngStream,
) -> Result<ChannelMatrix> {
    if cfg.eta == 1.0 {
        return Ok(prev.clone());
    }
    let (rows, cols) = prev.h_complex.shape();
    let theta = sample_complex_gaussian(rng, rows, cols, 1.0)?;
    let h = prev.h_complex.axpby(cfg.eta, &theta, 1.0 - cfg.eta)?;
    Ok(ChannelMatrix::from_complex(h))
}

/// Receiver noise. `sigma2` is the complex noise variance; the real-part noise
/// seen by the learner has variance `sigma2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseModel {
    #[default]
    Noiseless,
    Awgn {
        sigma2: f64,
    },
}

impl NoiseModel {
    pub fn awgn(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!(
                "noise variance must be finite and >= 0, got {sigma2}"
            )));
        }
        Ok(NoiseModel::Awgn { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        match *self {
            NoiseModel::Noiseless => 0.0,
            NoiseModel::Awgn { sigma2 } => sigma2,
        }
    }

    /// Standard deviation of the real-part noise, 0 when noiseless.
    pub fn real_std(&self) -> f64 {
        (self.sigma2() / 2.0).sqrt()
    }
}

/// `y = H^r x + n_r`, with fresh noise drawn from `rng` unless the noise power is zero.
pub fn apply_channel(
    h_real: &Matrix,
    x_tilde: &[f64],
    noise: &NoiseModel,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let mut y = h_real.matvec(x_tilde)?;
    add_noise(&mut y, noise, rng);
    Ok(y)
}

pub(crate) fn add_noise(y: &mut [f64], noise: &NoiseModel, rng: &mut RngStream) {
    let std = noise.real_std();
    if std > 0.0 {
        for v in y.iter_mut() {
            *v += std * rng.standard_normal();
        }
    }
}

/// Mean per-antenna received signal power `mean_i ||H^r x_i||^2 / N_r` over
/// the rows of `x_tilde`.
pub fn received_signal_power(h_real: &Matrix, x_tilde: &Matrix) -> Result<f64> {
    if x_tilde.cols() != h_real.cols() {
        return Err(Error::Dimension(format!(
            "inputs have {} entries, channel expects {}",
            x_tilde.cols(),
            h_real.cols()
        )));
    }
    let mut total = 0.0;
    for i in 0..x_tilde.rows() {
        let y = h_real.matvec(x_tilde.row(i))?;
        total += y.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(total / (x_tilde.rows() as f64 * h_real.rows() as f64))
}

/// Noise variance giving the requested receive SNR for the input set (rows of `x_tilde`).
///
/// `snr_db = +inf` yields 0.
pub fn sigma2_for_snr(h_real: &Matrix, x_tilde: &Matrix, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Config(format!("invalid SNR {snr_db} dB")));
    }
    let p_sig = received_signal_power(h_real, x_tilde)?;
    if p_sig <= 0.0 {
        return Err(Error::DegenerateSignal(
            "received signal power is zero; SNR is undefined".into(),
        ));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let sigma2 = scale_by_db(p_sig, snr_db);
    if !sigma2.is_finite() {
        return Err(Error::Config(format!("SNR {snr_db} dB is out of range")));
    }
    Ok(sigma2)
}

/// `power / 10^(db/10)`.
///
/// Whole decades are applied as separate divisions by ten, so that for
/// non-negative `db` raising the SNR by 10 dB divides the result by exactly 10.
fn scale_by_db(power: f64, db: f64) -> f64 {
    // Beyond ~330 decades the result has under- or overflowed anyway.
    const MAX_DECADES: f64 = 400.0;
    let decades = (db / 10.0).floor();
    let rest = db - 10.0 * decades;
    let mut out = power / 10f64.powf(rest / 10.0);
    let n = decades.abs().min(MAX_DECADES) as u32;
    for _ in 0..n {
        if decades >= 0.0 {
            out /= 10.0;
        } else {
            out *= 10.0;
        }
    }
    out
}
