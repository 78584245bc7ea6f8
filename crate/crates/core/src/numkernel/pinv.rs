use super::matrix::{dot, Matrix};
use super::svd::{svd, Svd};
use crate::{Error, Result};

/// Relative tolerance used when none is given.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Singular values at or below `rel_tol * max(rows, cols) * s_max` are treated as zero.
pub fn singular_cutoff(s: &[f64], rows: usize, cols: usize, rel_tol: f64) -> f64 {
    let s_max = s.first().copied().unwrap_or(0.0);
    rel_tol * rows.max(cols) as f64 * s_max
}

/// Accepts relative singular-value tolerances in `(0, 1)`.
pub fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Config(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    Ok(())
}

fn inverted_spectrum(dec: &Svd, rows: usize, cols: usize, rel_tol: f64) -> Vec<f64> {
    let tau = singular_cutoff(&dec.s, rows, cols, rel_tol);
    dec.s
        .iter()
        .map(|&s| if s > tau { 1.0 / s } else { 0.0 })
        .collect()
}

/// Moore-Penrose pseudoinverse `A^+ = V diag(1/s) U^T` over the retained singular values.
pub fn pseudoinverse(a: &Matrix, rel_tol: f64) -> Result<Matrix> {
    check_rel_tol(rel_tol)?;
    let dec = svd(a)?;
    let inv = inverted_spectrum(&dec, a.rows(), a.cols(), rel_tol);
    let (m, n) = a.shape();
    let mut out = Matrix::zeros(n, m);
    for (k, &sk) in inv.iter().enumerate() {
        if sk == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = dec.v[(i, k)] * sk;
            let row = out.row_mut(i);
            for (j, o) in row.iter_mut().enumerate() {
                *o += vik * dec.u[(j, k)];
            }
        }
    }
    Ok(out)
}

/// Minimum-norm least-squares solution `w = G^+ t` at the default tolerance.
pub fn min_norm_lstsq(g: &Matrix, t: &[f64]) -> Result<Vec<f64>> {
    min_norm_lstsq_with_tol(g, t, DEFAULT_REL_TOL)
}

/// Minimum-norm least-squares solution `w = G^+ t`.
///
/// Evaluated as `V diag(1/s) (U^T t)` without forming `G^+`, so the result lies
/// in the row space of `G`.
pub fn min_norm_lstsq_with_tol(g: &Matrix, t: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    check_rel_tol(rel_tol)?;
    if g.rows() != t.len() {
        return Err(Error::Dimension(format!(
            "{}x{} system with {} targets",
            g.rows(),
            g.cols(),
            t.len()
        )));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite target".into()));
    }
    let dec = svd(g)?;
    let inv = inverted_spectrum(&dec, g.rows(), g.cols(), rel_tol);
    // coefficients c_k = (u_k . t) / s_k
    let ut = dec.u.tr_matvec(t)?;
    let coeff: Vec<f64> = ut.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let w = dec.v.matvec(&coeff)?;
    debug_assert_eq!(w.len(), g.cols());
    Ok(w)
}

/// `||G w - t||_2`.
pub fn residual_norm(g: &Matrix, w: &[f64], t: &[f64]) -> Result<f64> {
    let gw = g.matvec(w)?;
    if gw.len() != t.len() {
        return Err(Error::Dimension("target length does not match rows".into()));
    }
    let r: Vec<f64> = gw.iter().zip(t).map(|(a, b)| a - b).collect();
    Ok(dot(&r, &r).sqrt())
}
