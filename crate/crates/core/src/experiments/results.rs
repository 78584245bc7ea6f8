use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::{Error, Result};

pub const MODEL_OTA: &str = "xlmimo_elm";
pub const MODEL_DIGITAL: &str = "digital_elm";

/// One evaluated trial. The schema is shared by every experiment kind; cells
/// that do not apply stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub model: String,
    /// Trial index; the master seed is recorded in the manifest.
    pub seed: u64,
    /// Name of the swept parameter.
    pub param: String,
    pub value: f64,
    pub n_r: usize,
    pub kappa: f64,
    pub snr_db: Option<f64>,
    pub sigma2: f64,
    pub step: Option<usize>,
    pub iteration: Option<usize>,
    pub accuracy: f64,
    pub train_residual: Option<f64>,
    pub receive_power: f64,
    pub reference_accuracy: Option<f64>,
    pub normalized_accuracy: Option<f64>,
    /// Only filled when timing is requested; keeps default output byte-stable.
    pub wall_ms: Option<f64>,
}

pub const CSV_HEADER: [&str; 17] = [
    "experiment",
    "model",
    "seed",
    "param",
    "value",
    "n_r",
    "kappa",
    "snr_db",
    "sigma2",
    "step",
    "iteration",
    "accuracy",
    "train_residual",
    "receive_power",
    "reference_accuracy",
    "normalized_accuracy",
    "wall_ms",
];

pub fn write_csv<W: Write, T: Serialize>(writer: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    let wrap = |e: csv::Error| Error::Data(format!("CSV write failed: {e}"));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush()
        .map_err(|e| Error::Data(format!("CSV write failed: {e}")))
}

/// Writes rows with the fixed header (header only when `rows` is empty).
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(file, &CSV_HEADER, rows).map_err(|e| match e {
        Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if found != CSV_HEADER {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "unexpected header".into(),
        });
    }
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Per-grid-point aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub model: String,
    pub param: String,
    pub value: f64,
    pub n_r: usize,
    pub step: Option<usize>,
    pub iteration: Option<usize>,
    pub trials: usize,
    pub mean_accuracy: f64,
    /// Population standard deviation.
    pub std_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
    pub mean_receive_power: f64,
    pub mean_normalized_accuracy: Option<f64>,
    pub mean_wall_ms: Option<f64>,
}

pub const SUMMARY_HEADER: [&str; 15] = [
    "experiment",
    "model",
    "param",
    "value",
    "n_r",
    "step",
    "iteration",
    "trials",
    "mean_accuracy",
    "std_accuracy",
    "min_accuracy",
    "max_accuracy",
    "mean_receive_power",
    "mean_normalized_accuracy",
    "mean_wall_ms",
];

type GroupKey = (
    String,
    String,
    String,
    u64,
    usize,
    Option<usize>,
    Option<usize>,
);

fn key(r: &ResultRow) -> GroupKey {
    (
        r.experiment.clone(),
        r.model.clone(),
        r.param.clone(),
        r.value.to_bits(),
        r.n_r,
        r.step,
        r.iteration,
    )
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Groups rows by grid point in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Input(
            "cannot summarize an empty result table".into(),
        ));
    }
    let mut order: Vec<GroupKey> = Vec::new();
    let mut groups: HashMap<GroupKey, Vec<&ResultRow>> = HashMap::new();
    for r in rows {
        let k = key(r);
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(r);
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let g = &groups[&k];
            let n = g.len() as f64;
            let acc: Vec<f64> = g.iter().map(|r| r.accuracy).collect();
            let mu = acc.iter().sum::<f64>() / n;
            let var = acc.iter().map(|a| (a - mu) * (a - mu)).sum::<f64>() / n;
            let first = g[0];
            SummaryRow {
                experiment: first.experiment.clone(),
                model: first.model.clone(),
                param: first.param.clone(),
                value: first.value,
                n_r: first.n_r,
                step: first.step,
                iteration: first.iteration,
                trials: g.len(),
                mean_accuracy: mu,
                std_accuracy: var.sqrt(),
                min_accuracy: acc.iter().copied().fold(f64::INFINITY, f64::min),
                max_accuracy: acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_receive_power: g.iter().map(|r| r.receive_power).sum::<f64>() / n,
                mean_normalized_accuracy: mean(g.iter().filter_map(|r| r.normalized_accuracy)),
                mean_wall_ms: mean(g.iter().filter_map(|r| r.wall_ms)),
            }
        })
        .collect())
}

pub fn emit_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(file, &SUMMARY_HEADER, rows)
}

/// First iteration index at which `trace` reaches `threshold`.
pub fn iterations_to_threshold(trace: &[f64], threshold: f64) -> Option<usize> {
    trace.iter().position(|&v| v >= threshold)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetChecksum {
    pub path: PathBuf,
    pub sha256: String,
}

/// Sidecar describing how a result file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub master_seed: u64,
    pub seeds: usize,
    pub rows: usize,
    pub rng: String,
    pub seed_derivation: String,
    pub datasets: Vec<DatasetChecksum>,
    pub config: ExperimentConfig,
}

pub const RNG_DESCRIPTION: &str = "ChaCha20 (rand_chacha), key from seed_from_u64(master_seed), \
     keystream selected per trial and purpose; Gaussians via rand_distr::StandardNormal";

pub const SEED_DERIVATION: &str = "trial t, purpose p -> stream id 16*t + p; purposes: \
     0 split, 1 channel, 2 noise, 3 digital hidden layer, 4 online mini-batches, \
     5 channel evolution, 6 dataset transform; the same streams are reused at every \
     grid point so one seed sees the same split, base channel draw and noise sequence";

impl Manifest {
    pub fn new(experiment: &str, cfg: &ExperimentConfig, rows: usize) -> Result<Self> {
        let datasets = cfg
            .dataset
            .files()
            .into_iter()
            .map(|p| {
                Ok(DatasetChecksum {
                    path: p.to_path_buf(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Manifest {
            experiment: experiment.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: cfg.master_seed,
            seeds: cfg.seeds,
            rows,
            rng: RNG_DESCRIPTION.into(),
            seed_derivation: SEED_DERIVATION.into(),
            datasets,
            config: cfg.clone(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Data(format!("manifest serialization failed: {e}")))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// `<out>.summary.csv` and `<out>.manifest.json` next to the result file.
pub fn sidecar_paths(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.with_extension("");
    let with = |suffix: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".summary.csv"), with(".manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, accuracy: f64) -> ResultRow {
        ResultRow {
            experiment: "sweep_nr".into(),
            model: MODEL_OTA.into(),
            seed: 0,
            param: "n_r".into(),
            value,
            n_r: value as usize,
            kappa: 0.0,
            snr_db: None,
            sigma2: 0.0,
            step: None,
            iteration: None,
            accuracy,
            train_residual: Some(1e-3),
            receive_power: 2.0,
            reference_accuracy: None,
            normalized_accuracy: None,
            wall_ms: None,
        }
    }

    #[test]
    fn summary_arithmetic() {
        let s = summarize(&[row(64.0, 0.8), row(64.0, 0.9)]).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].mean_accuracy - 0.85).abs() < 1e-15);
        assert!((s[0].std_accuracy - 0.05).abs() < 1e-12);
        assert_eq!((s[0].min_accuracy, s[0].max_accuracy), (0.8, 0.9));
        let s = summarize(&[row(64.0, 0.7)]).unwrap();
        assert_eq!((s[0].mean_accuracy, s[0].std_accuracy), (0.7, 0.0));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn one_summary_row_per_grid_point() {
        let rows: Vec<_> = [128.0, 64.0, 128.0, 64.0]
            .iter()
            .map(|&v| row(v, 0.5))
            .collect();
        let s = summarize(&rows).unwrap();
        assert_eq!(
            s.iter().map(|r| r.value).collect::<Vec<_>>(),
            vec![128.0, 64.0]
        );
        assert!(s.iter().all(|r| r.trials == 2));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut rows = vec![row(64.0, 0.8125), row(128.0, 1.0 / 3.0)];
        rows[1].snr_db = Some(f64::INFINITY);
        rows[1].step = Some(2);
        rows[1].normalized_accuracy = Some(0.1 + 0.2);
        emit_csv(&rows, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), rows);
        emit_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(read_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn threshold_crossing() {
        assert_eq!(
            iterations_to_threshold(&[0.5, 0.94, 0.96, 0.9], 0.95),
            Some(2)
        );
        assert_eq!(iterations_to_threshold(&[0.99], 0.95), Some(0));
        assert_eq!(iterations_to_threshold(&[0.1], 0.95), None);
    }

    #[test]
    fn sidecars() {
        let (s, m) = sidecar_paths(Path::new("out/run.csv"));
        assert_eq!(s, Path::new("out/run.summary.csv"));
        assert_eq!(m, Path::new("out/run.manifest.json"));
    }

    #[test]
    fn checksum_tracks_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, b"a,b\n1,2\n").unwrap();
        let a = sha256_file(&p).unwrap();
        std::fs::write(&p, b"a,b\n1,3\n").unwrap();
        assert_ne!(a, sha256_file(&p).unwrap());
        assert_eq!(sha256_file(&p).unwrap().len(), 64);
    }
}
