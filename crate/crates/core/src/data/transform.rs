use super::RawTable;
use crate::numkernel::{Matrix, RngStream};
use crate::{Error, Result};

/// Samples `n_pixels` distinct pixel columns (kept in index order) and maps
/// digit labels to `+1` for even digits, `-1` for odd ones.
pub fn mnist_binarize(table: &RawTable, n_pixels: usize, rng: &mut RngStream) -> Result<RawTable> {
    let d_raw = table.n_features();
    if n_pixels == 0 || n_pixels > d_raw {
        return Err(Error::Input(format!(
            "cannot select {n_pixels} pixels out of {d_raw}"
        )));
    }
    let mut cols = rng.sample_indices(d_raw, n_pixels);
    cols.sort_unstable();
    let labels = table
        .labels()
        .iter()
        .map(|&digit| if digit % 2 == 0 { 1 } else { -1 })
        .collect();
    table.select_features(&cols)?.with_labels(labels)
}

/// Drops all-missing columns, samples `n_features` of the remainder (kept in
/// index order), mean-imputes the gaps and maps labels to ±1.
pub fn secom_prepare(table: &RawTable, n_features: usize, rng: &mut RngStream) -> Result<RawTable> {
    let usable: Vec<usize> = (0..table.n_features())
        .filter(|&c| (0..table.n_rows()).any(|i| table.is_present(i, c)))
        .collect();
    if n_features == 0 || n_features > usable.len() {
        return Err(Error::Data(format!(
            "need {n_features} usable feature columns, found {}",
            usable.len()
        )));
    }
    let mut picks = rng.sample_indices(usable.len(), n_features);
    picks.sort_unstable();
    let cols: Vec<usize> = picks.iter().map(|&k| usable[k]).collect();
    let selected = impute_mean(&table.select_features(&cols)?)?;
    let labels = super::binary_targets(selected.labels())?
        .into_iter()
        .map(|t| t as i64)
        .collect();
    selected.with_labels(labels)
}

/// Replaces missing cells with the mean of the present values in their column.
pub fn impute_mean(table: &RawTable) -> Result<RawTable> {
    let (rows, cols) = table.features().shape();
    let x = table.features();
    let mut means = Vec::with_capacity(cols);
    for c in 0..cols {
        let (sum, n) = (0..rows)
            .filter(|&i| table.is_present(i, c))
            .fold((0.0, 0usize), |(s, n), i| (s + x[(i, c)], n + 1));
        if n == 0 {
            let name = table
                .feature_names()
                .map_or_else(|| c.to_string(), |names| names[c].clone());
            return Err(Error::Data(format!(
                "column {name} has no values to impute from"
            )));
        }
        means.push(sum / n as f64);
    }
    let features = Matrix::from_fn(rows, cols, |i, c| {
        if table.is_present(i, c) {
            x[(i, c)]
        } else {
            means[c]
        }
    });
    RawTable::with_mask(
        features,
        vec![true; rows * cols],
        table.labels().to_vec(),
        table.feature_names().map(<[String]>::to_vec),
    )
}

/// Uniformly random subset of `n` rows, kept in their original order.
/// Returns the table unchanged when `n >= rows`.
pub fn subsample_rows(table: &RawTable, n: usize, rng: &mut RngStream) -> Result<RawTable> {
    if n >= table.n_rows() {
        return Ok(table.clone());
    }
    let mut rows = rng.sample_indices(table.n_rows(), n);
    rows.sort_unstable();
    table.select_rows(&rows)
}
