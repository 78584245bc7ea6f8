use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, Matrix};
use crate::{Error, Result};

/// Seedable random stream backed by ChaCha20.
///
/// The 256-bit key is expanded from the 64-bit `seed` with the PCG32 scheme of
/// `SeedableRng::seed_from_u64`; `stream` selects one of the 2^64 independent
/// ChaCha keystreams under that key. Each keystream has a 2^68-byte period, so
/// streams derived from one seed never overlap in practice. Gaussian draws use
/// the ziggurat sampler of `rand_distr::StandardNormal`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    /// Fresh stream under the same seed with a different stream id.
    pub fn substream(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `amount` distinct indices from `0..len`, uniformly at random, in sampled order.
    pub fn sample_indices(&mut self, len: usize, amount: usize) -> Vec<usize> {
        index::sample(&mut self.rng, len, amount).into_vec()
    }

    /// Uniformly random permutation of `0..len`.
    pub fn permutation(&mut self, len: usize) -> Vec<usize> {
        self.sample_indices(len, len)
    }
}

/// `rows x cols` matrix of i.i.d. `N(mean, std^2)` entries, drawn in row-major order.
pub fn sample_gaussian(
    rng: &mut RngStream,
    rows: usize,
    cols: usize,
    mean: f64,
    std: f64,
) -> Result<Matrix> {
    check_params(rows, cols, std)?;
    if !mean.is_finite() {
        return Err(Error::Input(format!("mean must be finite, got {mean}")));
    }
    Ok(Matrix::from_fn(rows, cols, |_, _| {
        mean + std * rng.standard_normal()
    }))
}

/// Circularly-symmetric complex Gaussian matrix, `CN(0, std^2)` per entry.
///
/// Real and imaginary parts are independent `N(0, std^2 / 2)`, drawn real part
/// first for each entry in row-major order.
pub fn sample_complex_gaussian(
    rng: &mut RngStream,
    rows: usize,
    cols: usize,
    std: f64,
) -> Result<ComplexMatrix> {
    check_params(rows, cols, std)?;
    let part_std = std * std::f64::consts::FRAC_1_SQRT_2;
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re = part_std * rng.standard_normal();
        let im = part_std * rng.standard_normal();
        Complex64::new(re, im)
    }))
}

fn check_params(rows: usize, cols: usize, std: f64) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "sample shape must be non-empty, got {rows}x{cols}"
        )));
    }
    if std.is_nan() || std < 0.0 || std.is_infinite() {
        return Err(Error::Input(format!(
            "standard deviation must be finite and non-negative, got {std}"
        )));
    }
    Ok(())
}
