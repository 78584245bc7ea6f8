use faer::Mat;

use super::matrix::Matrix;
use crate::{Error, Result};

/// Thin singular value decomposition `A = U diag(s) V^T`.
///
/// For an `m x n` input with `k = min(m, n)`: `u` is `m x k`, `v` is `n x k`,
/// both with orthonormal columns, and `s` holds `k` non-negative values in
/// non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// `U diag(s) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        Matrix::from_fn(m, n, |i, j| {
            self.s
                .iter()
                .enumerate()
                .map(|(k, &sk)| self.u[(i, k)] * sk * self.v[(j, k)])
                .sum()
        })
    }
}

/// Thin SVD, computed by faer's bidiagonal divide-and-conquer routine.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::Input(
            "svd of a matrix with non-finite entries".into(),
        ));
    }
    let (m, n) = a.shape();
    let k = m.min(n);
    let fm = Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let dec = fm
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e:?}")))?;
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());

    // faer already sorts, but the contract is enforced here regardless.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| fs[q].abs().total_cmp(&fs[p].abs()));

    let s: Vec<f64> = order.iter().map(|&p| fs[p].abs()).collect();
    let u = Matrix::from_fn(m, k, |i, c| fu[(i, order[c])]);
    let v = Matrix::from_fn(n, k, |i, c| fv[(i, order[c])]);
    if !(u.is_finite() && v.is_finite() && s.iter().all(|x| x.is_finite())) {
        return Err(Error::Numerical("svd produced non-finite factors".into()));
    }
    Ok(Svd { u, s, v })
}
