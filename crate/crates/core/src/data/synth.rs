use super::RawTable;
use crate::numkernel::{Matrix, RngStream};
use crate::{Error, Result};

/// Two isotropic unit-variance Gaussian classes whose means are `separation` apart.
///
/// Class means sit at `±(separation / 2) / sqrt(d) · (1, ..., 1)`. Labels alternate
/// `+1, -1, ...` so class counts differ by at most one.
pub fn synth_two_gaussians(
    rng: &mut RngStream,
    n_samples: usize,
    d: usize,
    separation: f64,
) -> Result<RawTable> {
    if n_samples < 2 || d == 0 {
        return Err(Error::Input(format!(
            "need at least 2 samples and 1 feature, got {n_samples}x{d}"
        )));
    }
    if !separation.is_finite() {
        return Err(Error::Input(format!(
            "separation must be finite, got {separation}"
        )));
    }
    let offset = separation / 2.0 / (d as f64).sqrt();
    let labels: Vec<i64> = (0..n_samples)
        .map(|i| if i % 2 == 0 { 1 } else { -1 })
        .collect();
    let features = Matrix::from_fn(n_samples, d, |i, _| {
        labels[i] as f64 * offset + rng.standard_normal()
    });
    RawTable::new(features, labels)
}
