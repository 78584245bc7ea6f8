//! Dataset ingestion and preparation.
//!
//! Loaders produce a [`RawTable`] (features, presence mask, integer labels).
//! Transforms select features and impute gaps; [`split_standardize`] turns a
//! complete table into a [`Dataset`] with ±1 targets and standardized features.

mod delimited;
mod idx;
mod split;
mod synth;
mod transform;

pub use delimited::{load_csv, parse_csv, CsvOptions, LabelSource};
pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx, parse_idx_images, parse_idx_labels, IdxImages,
};
pub use split::{binary_targets, split_standardize, Dataset, SplitOptions, StandardizationStats};
pub use synth::synth_two_gaussians;
pub use transform::{impute_mean, mnist_binarize, secom_prepare, subsample_rows};

use crate::numkernel::Matrix;
use crate::{Error, Result};

/// Features with an explicit presence mask and integer labels.
///
/// Missing cells hold a 0.0 placeholder in `features`; consult the mask before
/// using any value.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    features: Matrix,
    present: Vec<bool>,
    labels: Vec<i64>,
    feature_names: Option<Vec<String>>,
}

impl RawTable {
    /// Table without missing cells.
    pub fn new(features: Matrix, labels: Vec<i64>) -> Result<Self> {
        let present = vec![true; features.rows() * features.cols()];
        Self::with_mask(features, present, labels, None)
    }

    pub fn with_mask(
        features: Matrix,
        present: Vec<bool>,
        labels: Vec<i64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::Data(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if present.len() != features.rows() * features.cols() {
            return Err(Error::Data(
                "presence mask does not match feature shape".into(),
            ));
        }
        if let Some(names) = &feature_names {
            if names.len() != features.cols() {
                return Err(Error::Data(format!(
                    "{} feature names for {} columns",
                    names.len(),
                    features.cols()
                )));
            }
        }
        Ok(RawTable {
            features,
            present,
            labels,
            feature_names,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn is_present(&self, row: usize, col: usize) -> bool {
        self.present[row * self.features.cols() + col]
    }

    pub fn missing_count(&self) -> usize {
        self.present.iter().filter(|p| !**p).count()
    }

    /// Cells `(row, col)` that are missing, row-major.
    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        let cols = self.features.cols();
        self.present
            .iter()
            .enumerate()
            .filter(|(_, p)| !**p)
            .map(|(k, _)| (k / cols, k % cols))
            .collect()
    }

    /// Keeps the listed feature columns, in the given order.
    pub fn select_features(&self, cols: &[usize]) -> Result<RawTable> {
        if cols.is_empty() {
            return Err(Error::Data("feature selection is empty".into()));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::Data(format!("feature index {bad} out of range")));
        }
        let features = self.features.select_cols(cols);
        let present = (0..self.n_rows())
            .flat_map(|i| cols.iter().map(move |&c| (i, c)))
            .map(|(i, c)| self.is_present(i, c))
            .collect();
        let names = self
            .feature_names
            .as_ref()
            .map(|n| cols.iter().map(|&c| n[c].clone()).collect());
        RawTable::with_mask(features, present, self.labels.clone(), names)
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<RawTable> {
        if rows.is_empty() {
            return Err(Error::Data("row selection is empty".into()));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::Data(format!("row index {bad} out of range")));
        }
        let cols = self.n_features();
        let features = self.features.select_rows(rows);
        let present = rows
            .iter()
            .flat_map(|&r| self.present[r * cols..(r + 1) * cols].iter().copied())
            .collect();
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        RawTable::with_mask(features, present, labels, self.feature_names.clone())
    }

    pub fn with_labels(self, labels: Vec<i64>) -> Result<RawTable> {
        RawTable::with_mask(self.features, self.present, labels, self.feature_names)
    }
}
