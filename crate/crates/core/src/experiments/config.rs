use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::activation::RappParams;
use crate::channel::{ArConfig, RiceanConfig};
use crate::data::{CsvOptions, LabelSource};
use crate::elm::OnlineConfig;
use crate::numkernel::{check_rel_tol, DEFAULT_REL_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SweepNr,
    SweepSnr,
    SweepKappa,
    Online,
    Single,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::SweepNr => "sweep_nr",
            ExperimentKind::SweepSnr => "sweep_snr",
            ExperimentKind::SweepKappa => "sweep_kappa",
            ExperimentKind::Online => "online",
            ExperimentKind::Single => "single",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full experiment description, normally read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// If present, must match the subcommand the config is run with.
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Also train a digital ELM with as many hidden units as antennas.
    #[serde(default)]
    pub baseline: bool,
    /// Worker threads; all available cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub prep: PrepSpec,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub activation: RappParams,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub online: OnlineSpec,
}

fn default_seeds() -> usize {
    300
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Csv {
        path: PathBuf,
        /// Label column by header name.
        #[serde(default)]
        label_column: Option<String>,
        /// Label column by zero-based index.
        #[serde(default)]
        label_index: Option<usize>,
        /// Labels in a separate file, one per line.
        #[serde(default)]
        labels_path: Option<PathBuf>,
        /// Single-character delimiter; defaults to a comma.
        #[serde(default = "default_delimiter")]
        delimiter: String,
        #[serde(default = "default_true")]
        has_header: bool,
        #[serde(default = "default_missing")]
        missing_token: String,
        #[serde(default)]
        label_map: BTreeMap<String, i64>,
        #[serde(default)]
        drop_columns: Vec<String>,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
    },
    Synthetic {
        samples: usize,
        features: usize,
        separation: f64,
    },
}

fn default_delimiter() -> String {
    ",".into()
}

fn default_true() -> bool {
    true
}

fn default_missing() -> String {
    "NA".into()
}

impl DatasetSpec {
    /// Files the dataset is read from, in a fixed order.
    pub fn files(&self) -> Vec<&Path> {
        match self {
            DatasetSpec::Csv {
                path, labels_path, ..
            } => std::iter::once(path.as_path())
                .chain(labels_path.as_deref())
                .collect(),
            DatasetSpec::Idx { images, labels } => vec![images, labels],
            DatasetSpec::Synthetic { .. } => Vec::new(),
        }
    }

    pub fn csv_options(&self) -> Result<Option<CsvOptions>> {
        let DatasetSpec::Csv {
            label_column,
            label_index,
            labels_path,
            delimiter,
            has_header,
            missing_token,
            label_map,
            drop_columns,
            ..
        } = self
        else {
            return Ok(None);
        };
        let label = match (label_column, label_index, labels_path) {
            (Some(name), None, None) => LabelSource::Column(name.clone()),
            (None, Some(i), None) => LabelSource::Index(*i),
            (None, None, Some(p)) => LabelSource::File(p.clone()),
            _ => {
                return Err(Error::Config(
                    "set exactly one of label_column, label_index, labels_path".into(),
                ))
            }
        };
        let delimiter = match delimiter.as_bytes() {
            [b] => *b,
            _ if delimiter == "\\t" => b'\t',
            _ => {
                return Err(Error::Config(format!(
                    "delimiter must be a single byte, got {delimiter:?}"
                )))
            }
        };
        Ok(Some(CsvOptions {
            label,
            delimiter,
            has_header: *has_header,
            missing_token: missing_token.clone(),
            label_map: label_map.clone(),
            drop_columns: drop_columns.clone(),
        }))
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match self {
            DatasetSpec::Csv {
                path, labels_path, ..
            } => {
                join(path);
                if let Some(p) = labels_path {
                    join(p);
                }
            }
            DatasetSpec::Idx { images, labels } => {
                join(images);
                join(labels);
            }
            DatasetSpec::Synthetic { .. } => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    /// Random pixel subset, even/odd digit labels.
    MnistParity,
    /// Random feature subset of the non-empty columns, mean imputation.
    Secom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepSpec {
    #[serde(default = "default_train_ratio")]
    pub train_ratio: f64,
    #[serde(default)]
    pub transform: Transform,
    /// Features kept by the transform (100 pixels / 20 columns by default).
    #[serde(default)]
    pub select: Option<usize>,
    /// Random row subsample applied after loading; full table when absent.
    #[serde(default)]
    pub subsample: Option<usize>,
    /// Mean-impute missing cells when no transform does it.
    #[serde(default)]
    pub impute: bool,
    #[serde(default)]
    pub allow_single_class: bool,
}

fn default_train_ratio() -> f64 {
    0.8
}

impl Default for PrepSpec {
    fn default() -> Self {
        PrepSpec {
            train_ratio: default_train_ratio(),
            transform: Transform::None,
            select: None,
            subsample: None,
            impute: false,
            allow_single_class: false,
        }
    }
}

impl PrepSpec {
    pub fn selected_features(&self) -> usize {
        self.select.unwrap_or(match self.transform {
            Transform::MnistParity => 100,
            Transform::Secom => 20,
            Transform::None => 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_pathloss")]
    pub pathloss: f64,
    #[serde(default)]
    pub los_angle_tx: f64,
    #[serde(default)]
    pub los_angle_rx: f64,
    /// Antenna count used when the experiment does not sweep it.
    #[serde(default)]
    pub n_r: Option<usize>,
    /// Receive SNR in dB; noiseless when absent.
    #[serde(default)]
    pub snr_db: Option<f64>,
}

fn default_pathloss() -> f64 {
    1.0
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            kappa: 0.0,
            pathloss: default_pathloss(),
            los_angle_tx: 0.0,
            los_angle_rx: 0.0,
            n_r: None,
            snr_db: None,
        }
    }
}

impl ChannelSpec {
    pub fn ricean(&self, kappa: f64, n_r: usize, n_t: usize) -> Result<RiceanConfig> {
        let cfg = RiceanConfig {
            kappa,
            pathloss: self.pathloss,
            n_r,
            n_t,
            los_angle_tx: self.los_angle_tx,
            los_angle_rx: self.los_angle_rx,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub n_r: Vec<usize>,
    /// `inf` selects the noiseless limit.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub kappa: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineSpec {
    #[serde(default = "default_eta")]
    pub eta: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_online_nr")]
    pub n_r: usize,
    /// Channel evolution steps after the initial fit.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_iters")]
    pub iters_per_step: usize,
    #[serde(default)]
    pub early_stop: Option<f64>,
}

fn default_eta() -> Vec<f64> {
    vec![0.9]
}

fn default_gamma() -> f64 {
    0.5
}

fn default_batch() -> usize {
    32
}

fn default_online_nr() -> usize {
    1024
}

fn default_steps() -> usize {
    5
}

fn default_iters() -> usize {
    20
}

impl Default for OnlineSpec {
    fn default() -> Self {
        OnlineSpec {
            eta: default_eta(),
            gamma: default_gamma(),
            batch_size: default_batch(),
            n_r: default_online_nr(),
            steps: default_steps(),
            iters_per_step: default_iters(),
            early_stop: None,
        }
    }
}

impl OnlineSpec {
    pub fn online_config(&self, rel_tol: f64) -> Result<OnlineConfig> {
        let cfg = OnlineConfig {
            gamma: self.gamma,
            batch_size: self.batch_size,
            n_iters: self.iters_per_step,
            early_stop: self.early_stop,
            rel_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// Reads a TOML config; relative paths are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.dataset.resolve(base_dir);
        if let Some(out) = &mut cfg.output {
            if out.is_relative() {
                *out = base_dir.join(&*out);
            }
        }
        Ok(cfg)
    }

    /// Antenna counts for grid-based runs. `sweep_nr` uses `sweep.n_r`; the
    /// other kinds use the fixed `channel.n_r` when set and fall back to the
    /// `sweep.n_r` list (one curve per antenna count).
    pub fn n_r_grid(&self, kind: ExperimentKind) -> Vec<usize> {
        match (kind, self.channel.n_r) {
            (ExperimentKind::SweepNr, _) | (_, None) => self.sweep.n_r.clone(),
            (_, Some(n)) => vec![n],
        }
    }

    /// Checks the config is runnable as `kind`.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let Some(k) = self.kind {
            if k != kind {
                return bad(format!("config is for {k} but was run as {kind}"));
            }
        }
        if self.seeds == 0 {
            return bad("seeds must be >= 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        check_rel_tol(self.solver.rel_tol)?;
        let r = self.prep.train_ratio;
        if !(r > 0.0 && r < 1.0) {
            return bad(format!("train_ratio must lie in (0, 1), got {r}"));
        }
        if self.prep.transform != Transform::None && self.prep.selected_features() == 0 {
            return bad("select must be >= 1".into());
        }
        if self.prep.subsample == Some(0) {
            return bad("subsample must be >= 1".into());
        }
        self.dataset.csv_options()?;
        if let DatasetSpec::Synthetic {
            samples,
            features,
            separation,
        } = &self.dataset
        {
            if *samples < 2 || *features == 0 || !separation.is_finite() {
                return bad(
                    "synthetic dataset needs samples >= 2, features >= 1 and finite separation"
                        .into(),
                );
            }
        }
        for f in self.dataset.files() {
            if !f.is_file() {
                return bad(format!("dataset file {} does not exist", f.display()));
            }
        }
        self.channel.ricean(self.channel.kappa, 1, 1)?;
        if let Some(s) = self.channel.snr_db {
            check_snr(s)?;
        }

        match kind {
            ExperimentKind::SweepNr => {
                if self.sweep.n_r.is_empty() {
                    return bad("sweep_nr needs a nonempty sweep.n_r grid".into());
                }
            }
            ExperimentKind::SweepSnr => {
                if self.sweep.snr_db.is_empty() {
                    return bad("sweep_snr needs a nonempty sweep.snr_db grid".into());
                }
                self.sweep.snr_db.iter().try_for_each(|&s| check_snr(s))?;
            }
            ExperimentKind::SweepKappa => {
                if self.sweep.kappa.is_empty() {
                    return bad("sweep_kappa needs a nonempty sweep.kappa grid".into());
                }
                for &k in &self.sweep.kappa {
                    self.channel.ricean(k, 1, 1)?;
                }
            }
            ExperimentKind::Online => {
                if self.online.eta.is_empty() {
                    return bad("online needs a nonempty online.eta list".into());
                }
                for &eta in &self.online.eta {
                    ArConfig::new(eta)?;
                }
                if self.online.n_r == 0 {
                    return bad("online.n_r must be >= 1".into());
                }
                self.online.online_config(self.solver.rel_tol)?;
            }
            ExperimentKind::Single => {}
        }
        if kind != ExperimentKind::Online {
            let grid = self.n_r_grid(kind);
            if grid.is_empty() {
                return bad("set channel.n_r or sweep.n_r".into());
            }
            if grid.contains(&0) {
                return bad("antenna counts must be >= 1".into());
            }
        }
        Ok(())
    }
}

fn check_snr(s: f64) -> Result<()> {
    if s.is_nan() || s == f64::NEG_INFINITY {
        return Err(Error::Config(format!("invalid SNR {s} dB")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTH: &str = r#"
        seeds = 2
        [dataset]
        kind = "synthetic"
        samples = 40
        features = 3
        separation = 4.0
        [sweep]
        n_r = [16, 32]
    "#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml(SYNTH, Path::new(".")).unwrap();
        assert_eq!(cfg.seeds, 2);
        assert_eq!(cfg.prep.train_ratio, 0.8);
        assert_eq!(cfg.activation, RappParams::default());
        assert_eq!(cfg.online.batch_size, 32);
        assert_eq!(cfg.online.gamma, 0.5);
        assert_eq!(cfg.online.n_r, 1024);
        assert_eq!(cfg.solver.rel_tol, DEFAULT_REL_TOL);
        cfg.validate(ExperimentKind::SweepNr).unwrap();
        assert!(cfg.validate(ExperimentKind::SweepSnr).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = SYNTH.replace("seeds = 2", "seeds = 2\nsedes = 3");
        assert!(ExperimentConfig::from_toml(&typo, Path::new(".")).is_err());
        let nested = SYNTH.replace("separation = 4.0", "separation = 4.0\nseperation = 1");
        assert!(ExperimentConfig::from_toml(&nested, Path::new(".")).is_err());
        let section = format!("{SYNTH}\n[channel]\nkapa = 1.0\n");
        assert!(ExperimentConfig::from_toml(&section, Path::new(".")).is_err());
    }

    #[test]
    fn infinite_snr_parses() {
        let text = format!("{SYNTH}\n[channel]\nn_r = 8\n")
            .replace("n_r = [16, 32]", "snr_db = [0.0, inf]");
        let cfg = ExperimentConfig::from_toml(&text, Path::new(".")).unwrap();
        assert_eq!(cfg.sweep.snr_db, vec![0.0, f64::INFINITY]);
        cfg.validate(ExperimentKind::SweepSnr).unwrap();
    }

    #[test]
    fn validation_errors() {
        let cfg = ExperimentConfig::from_toml(SYNTH, Path::new(".")).unwrap();
        let mut c = cfg.clone();
        c.seeds = 0;
        assert!(c.validate(ExperimentKind::SweepNr).is_err());
        let mut c = cfg.clone();
        c.kind = Some(ExperimentKind::Online);
        assert!(c.validate(ExperimentKind::SweepNr).is_err());
        let mut c = cfg.clone();
        c.sweep.kappa = vec![-1.0];
        assert!(c.validate(ExperimentKind::SweepKappa).is_err());
        let mut c = cfg;
        c.online.eta = vec![1.5];
        assert!(c.validate(ExperimentKind::Online).is_err());
    }

    #[test]
    fn relative_paths_and_missing_files() {
        let text = r#"
            [dataset]
            kind = "csv"
            path = "nope.csv"
            label_column = "y"
            [channel]
            n_r = 4
        "#;
        let cfg = ExperimentConfig::from_toml(text, Path::new("/some/dir")).unwrap();
        assert_eq!(cfg.dataset.files(), vec![Path::new("/some/dir/nope.csv")]);
        assert!(matches!(
            cfg.validate(ExperimentKind::Single),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn label_source_must_be_unique() {
        let text = r#"
            [dataset]
            kind = "csv"
            path = "x.csv"
            label_column = "y"
            label_index = 3
        "#;
        let cfg = ExperimentConfig::from_toml(text, Path::new(".")).unwrap();
        assert!(cfg.dataset.csv_options().is_err());
    }
}
