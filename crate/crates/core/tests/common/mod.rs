#![allow(dead_code)]

use std::path::PathBuf;

use xlmimo_elm::experiments::ExperimentConfig;
use xlmimo_elm::numkernel::{sample_gaussian, svd, Matrix, RngStream};

pub fn wbcd_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/wdbc.csv")
}

/// WBCD config with the given extra TOML appended.
pub fn wbcd_config(seeds: usize, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"
        seeds = {seeds}
        master_seed = 1
        [dataset]
        kind = "csv"
        path = {path:?}
        label_column = "diagnosis"
        label_map = {{ M = 1, B = -1 }}
        {extra}
        "#,
        path = wbcd_path()
    );
    ExperimentConfig::from_toml(&text, std::path::Path::new(".")).unwrap()
}

pub fn gaussian(rng: &mut RngStream, rows: usize, cols: usize) -> Matrix {
    sample_gaussian(rng, rows, cols, 0.0, 1.0).unwrap()
}

/// `rows x cols` Gaussian matrix of rank `rank`.
pub fn low_rank(rng: &mut RngStream, rows: usize, cols: usize, rank: usize) -> Matrix {
    let a = gaussian(rng, rows, rank);
    let b = gaussian(rng, rank, cols);
    a.matmul(&b).unwrap()
}

/// Random vector in the null space of `g`, scaled to unit norm.
pub fn null_space_vector(g: &Matrix, rng: &mut RngStream) -> Vec<f64> {
    let f = svd(g).unwrap();
    let s_max = f.s.first().copied().unwrap_or(0.0);
    let cutoff = 1e-10 * s_max * g.rows().max(g.cols()) as f64;
    let mut z: Vec<f64> = (0..g.cols()).map(|_| rng.standard_normal()).collect();
    for k in 0..f.s.len() {
        if f.s[k] <= cutoff {
            continue;
        }
        let vk = f.v.col_to_vec(k);
        let c: f64 = vk.iter().zip(&z).map(|(a, b)| a * b).sum();
        for (zi, vi) in z.iter_mut().zip(&vk) {
            *zi -= c * vi;
        }
    }
    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    z.iter().map(|v| v / n).collect()
}

pub fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    let diff = a.sub(b).unwrap().frobenius_norm();
    diff / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
