use super::RawTable;
use crate::numkernel::{Matrix, RngStream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOptions {
    pub train_ratio: f64,
    /// Accept tables containing a single class instead of failing.
    pub allow_single_class: bool,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            train_ratio: 0.8,
            allow_single_class: false,
        }
    }
}

/// Per-feature affine map fitted on the training block.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns whose training variance vanished; their std is reported as 1.
    pub degenerate: Vec<bool>,
}

impl StandardizationStats {
    /// Population mean and standard deviation of every column of `x`.
    pub fn fit(x: &Matrix) -> Self {
        let (rows, cols) = x.shape();
        let n = rows as f64;
        let mut mean = Vec::with_capacity(cols);
        let mut std = Vec::with_capacity(cols);
        let mut degenerate = Vec::with_capacity(cols);
        for c in 0..cols {
            let col = x.col_to_vec(c);
            if col.iter().all(|&v| v == col[0]) {
                mean.push(col[0]);
                std.push(1.0);
                degenerate.push(true);
                continue;
            }
            let mu = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let sd = var.sqrt();
            let flat = sd <= 1e-12 * mu.abs().max(1.0);
            mean.push(mu);
            std.push(if flat { 1.0 } else { sd });
            degenerate.push(flat);
        }
        StandardizationStats {
            mean,
            std,
            degenerate,
        }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x)?;
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            (x[(i, j)] - self.mean[j]) / self.std[j]
        }))
    }

    pub fn invert(&self, z: &Matrix) -> Result<Matrix> {
        self.check_width(z)?;
        Ok(Matrix::from_fn(z.rows(), z.cols(), |i, j| {
            z[(i, j)] * self.std[j] + self.mean[j]
        }))
    }

    fn check_width(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "stats fitted on {} features, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        Ok(())
    }
}

/// Standardized train/test split with ±1 targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x_train: Matrix,
    pub t_train: Vec<f64>,
    pub x_test: Matrix,
    pub t_test: Vec<f64>,
    pub stats: StandardizationStats,
    /// Source rows of the training block, in block order.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl Dataset {
    pub fn n_features(&self) -> usize {
        self.x_train.cols()
    }
}

/// Maps integer labels to ±1.
///
/// Labels already in `{-1, +1}` pass through. Otherwise two distinct values map
/// smaller to `-1` and larger to `+1`; a single value maps to `+1` when positive
/// and `-1` otherwise. More than two distinct values is an error.
pub fn binary_targets(labels: &[i64]) -> Result<Vec<f64>> {
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let map = |l: i64| -> f64 {
        if distinct.iter().all(|v| *v == -1 || *v == 1) {
            l as f64
        } else if distinct.len() == 2 {
            if l == distinct[0] {
                -1.0
            } else {
                1.0
            }
        } else if l > 0 {
            1.0
        } else {
            -1.0
        }
    };
    if distinct.len() > 2 {
        return Err(Error::Data(format!(
            "expected binary labels, found {} distinct values",
            distinct.len()
        )));
    }
    Ok(labels.iter().map(|&l| map(l)).collect())
}

/// Uniformly random split; statistics come from the training block only and
/// are applied to both blocks.
pub fn split_standardize(
    table: &RawTable,
    opts: &SplitOptions,
    rng: &mut RngStream,
) -> Result<Dataset> {
    let r = opts.train_ratio;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Config(format!(
            "train ratio must lie in (0, 1), got {r}"
        )));
    }
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::Data(format!(
            "need at least 2 rows to split, got {n}"
        )));
    }
    if let Some(&(i, j)) = table.missing_cells().first() {
        return Err(Error::Data(format!(
            "missing value at row {i}, column {j}; impute before splitting"
        )));
    }
    let targets = binary_targets(table.labels())?;
    let positives = targets.iter().filter(|&&t| t > 0.0).count();
    if (positives == 0 || positives == n) && !opts.allow_single_class {
        return Err(Error::ClassBalance(
            "only one class present; set allow_single_class to proceed".into(),
        ));
    }

    let n_train = ((r * n as f64).round() as usize).clamp(1, n - 1);
    let perm = rng.permutation(n);
    let (train_indices, test_indices) = (perm[..n_train].to_vec(), perm[n_train..].to_vec());

    let raw_train = table.features().select_rows(&train_indices);
    let stats = StandardizationStats::fit(&raw_train);
    let x_train = stats.apply(&raw_train)?;
    let x_test = stats.apply(&table.features().select_rows(&test_indices))?;
    Ok(Dataset {
        x_train,
        t_train: train_indices.iter().map(|&i| targets[i]).collect(),
        x_test,
        t_test: test_indices.iter().map(|&i| targets[i]).collect(),
        stats,
        train_indices,
        test_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: usize) -> RawTable {
        let x = Matrix::from_fn(rows, 3, |i, j| {
            (i as f64 + 1.0) * (j as f64 + 0.5) + (i % 3) as f64
        });
        let labels = (0..rows as i64).map(|i| i % 2).collect();
        RawTable::new(x, labels).unwrap()
    }

    #[test]
    fn ten_rows_split_eight_two() {
        let d = split_standardize(&table(10), &SplitOptions::default(), &mut RngStream::new(0))
            .unwrap();
        assert_eq!((d.x_train.rows(), d.x_test.rows()), (8, 2));
        let mut all: Vec<usize> = d
            .train_indices
            .iter()
            .chain(&d.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn training_columns_are_standardized() {
        let d = split_standardize(&table(50), &SplitOptions::default(), &mut RngStream::new(4))
            .unwrap();
        let n = d.x_train.rows() as f64;
        for c in 0..3 {
            let col = d.x_train.col_to_vec(c);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-8);
            assert!((var - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_column_is_flagged_and_zeroed() {
        let x = Matrix::from_fn(6, 2, |i, j| if j == 0 { 0.1 } else { i as f64 });
        let t = RawTable::new(x, vec![0, 1, 0, 1, 0, 1]).unwrap();
        let d = split_standardize(&t, &SplitOptions::default(), &mut RngStream::new(1)).unwrap();
        assert_eq!(d.stats.degenerate, vec![true, false]);
        assert_eq!(d.stats.std[0], 1.0);
        assert!(d.x_train.col_to_vec(0).iter().all(|&v| v == 0.0));
        assert!(d.x_test.col_to_vec(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stats_reproduce_training_block() {
        let t = table(30);
        let d = split_standardize(&t, &SplitOptions::default(), &mut RngStream::new(2)).unwrap();
        let raw = t.features().select_rows(&d.train_indices);
        assert_eq!(d.stats.apply(&raw).unwrap(), d.x_train);
        let back = d.stats.invert(&d.x_train).unwrap();
        for (a, b) in back.as_slice().iter().zip(raw.as_slice()) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn label_mapping() {
        assert_eq!(binary_targets(&[0, 1, 1]).unwrap(), vec![-1.0, 1.0, 1.0]);
        assert_eq!(binary_targets(&[4, 2]).unwrap(), vec![1.0, -1.0]);
        assert_eq!(binary_targets(&[-1, 1]).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(binary_targets(&[1, 1]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(binary_targets(&[0, 0]).unwrap(), vec![-1.0, -1.0]);
        assert!(binary_targets(&[0, 1, 2]).is_err());
    }

    #[test]
    fn single_class_needs_override() {
        let x = Matrix::from_fn(4, 1, |i, _| i as f64);
        let t = RawTable::new(x, vec![1; 4]).unwrap();
        let mut opts = SplitOptions::default();
        assert!(matches!(
            split_standardize(&t, &opts, &mut RngStream::new(0)),
            Err(Error::ClassBalance(_))
        ));
        opts.allow_single_class = true;
        assert!(split_standardize(&t, &opts, &mut RngStream::new(0)).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        let opts = SplitOptions {
            train_ratio: 1.0,
            ..SplitOptions::default()
        };
        assert!(matches!(
            split_standardize(&table(10), &opts, &mut RngStream::new(0)),
            Err(Error::Config(_))
        ));
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let gappy = RawTable::with_mask(x, vec![true, false], vec![0, 1], None).unwrap();
        assert!(
            split_standardize(&gappy, &SplitOptions::default(), &mut RngStream::new(0)).is_err()
        );
    }
}
