use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{DatasetSpec, ExperimentConfig, ExperimentKind, Transform};
use super::results::{
    emit_csv, emit_summary, sidecar_paths, summarize, Manifest, ResultRow, MODEL_DIGITAL, MODEL_OTA,
};
use crate::channel::{evolve_ar, sample_ricean, sigma2_for_snr, ArConfig, NoiseModel};
use crate::data::{
    impute_mean, load_csv, load_idx, mnist_binarize, secom_prepare, split_standardize,
    subsample_rows, synth_two_gaussians, Dataset, RawTable, SplitOptions,
};
use crate::elm::{augment_rows, ElmModel, HiddenLayer, OnlineTrainer};
use crate::numkernel::RngStream;
use crate::{Error, Result};

/// What a per-trial random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Split = 0,
    Channel = 1,
    Noise = 2,
    Digital = 3,
    Online = 4,
    Evolve = 5,
    Transform = 6,
}

/// Stream for `(trial, purpose)` under `master_seed`.
pub fn trial_stream(master_seed: u64, trial: u64, purpose: Purpose) -> RngStream {
    RngStream::with_stream(master_seed, trial * 16 + purpose as u64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record per-row wall time. Off by default so output is byte-reproducible.
    pub timing: bool,
}

/// Loads the dataset file(s) once; synthetic datasets are drawn per trial instead.
pub fn load_table(cfg: &ExperimentConfig) -> Result<Option<RawTable>> {
    match &cfg.dataset {
        DatasetSpec::Csv { path, .. } => {
            let opts = cfg.dataset.csv_options()?.expect("csv dataset");
            load_csv(path, &opts).map(Some)
        }
        DatasetSpec::Idx { images, labels } => load_idx(images, labels).map(Some),
        DatasetSpec::Synthetic { .. } => Ok(None),
    }
}

/// Split and standardized data for one trial; depends only on the table,
/// the master seed and the trial index.
pub fn prepare_dataset(
    cfg: &ExperimentConfig,
    table: Option<&RawTable>,
    trial: u64,
) -> Result<Dataset> {
    let mut trng = trial_stream(cfg.master_seed, trial, Purpose::Transform);
    let mut table = match (&cfg.dataset, table) {
        (
            DatasetSpec::Synthetic {
                samples,
                features,
                separation,
            },
            _,
        ) => synth_two_gaussians(&mut trng, *samples, *features, *separation)?,
        (_, Some(t)) => t.clone(),
        (_, None) => return Err(Error::Data("dataset was not loaded".into())),
    };
    if let Some(n) = cfg.prep.subsample {
        table = subsample_rows(&table, n, &mut trng)?;
    }
    let select = cfg.prep.selected_features();
    table = match cfg.prep.transform {
        Transform::None => table,
        Transform::MnistParity => mnist_binarize(&table, select, &mut trng)?,
        Transform::Secom => secom_prepare(&table, select, &mut trng)?,
    };
    if cfg.prep.impute && table.missing_count() > 0 {
        table = impute_mean(&table)?;
    }
    let opts = SplitOptions {
        train_ratio: cfg.prep.train_ratio,
        allow_single_class: cfg.prep.allow_single_class,
    };
    split_standardize(
        &table,
        &opts,
        &mut trial_stream(cfg.master_seed, trial, Purpose::Split),
    )
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    param: &'static str,
    value: f64,
    n_r: usize,
    kappa: f64,
    snr_db: Option<f64>,
}

fn grid(cfg: &ExperimentConfig, kind: ExperimentKind) -> Vec<GridPoint> {
    let ch = &cfg.channel;
    let over_nr = |param: &'static str, f: &dyn Fn(usize) -> Vec<(f64, f64, Option<f64>)>| {
        cfg.n_r_grid(kind)
            .into_iter()
            .flat_map(|n_r| {
                f(n_r)
                    .into_iter()
                    .map(move |(value, kappa, snr_db)| GridPoint {
                        param,
                        value,
                        n_r,
                        kappa,
                        snr_db,
                    })
            })
            .collect()
    };
    match kind {
        ExperimentKind::SweepNr | ExperimentKind::Single => {
            over_nr("n_r", &|n_r| vec![(n_r as f64, ch.kappa, ch.snr_db)])
        }
        ExperimentKind::SweepKappa => over_nr("kappa", &|_| {
            cfg.sweep.kappa.iter().map(|&k| (k, k, ch.snr_db)).collect()
        }),
        ExperimentKind::SweepSnr => {
            let mut levels = cfg.sweep.snr_db.clone();
            // noise-free reference column
            if !levels.contains(&f64::INFINITY) {
                levels.push(f64::INFINITY);
            }
            over_nr("snr_db", &|_| {
                levels.iter().map(|&s| (s, ch.kappa, Some(s))).collect()
            })
        }
        ExperimentKind::Online => cfg
            .online
            .eta
            .iter()
            .map(|&eta| GridPoint {
                param: "eta",
                value: eta,
                n_r: cfg.online.n_r,
                kappa: ch.kappa,
                snr_db: ch.snr_db,
            })
            .collect(),
    }
}

struct Trial<'a> {
    cfg: &'a ExperimentConfig,
    kind: ExperimentKind,
    data: Dataset,
    trial: u64,
    opts: RunOptions,
}

impl Trial<'_> {
    fn stream(&self, purpose: Purpose) -> RngStream {
        trial_stream(self.cfg.master_seed, self.trial, purpose)
    }

    fn row(&self, gp: &GridPoint, model: &str, sigma2: f64) -> ResultRow {
        ResultRow {
            experiment: self.kind.as_str().to_string(),
            model: model.to_string(),
            seed: self.trial,
            param: gp.param.to_string(),
            value: gp.value,
            n_r: gp.n_r,
            kappa: gp.kappa,
            snr_db: gp.snr_db,
            sigma2,
            step: None,
            iteration: None,
            accuracy: f64::NAN,
            train_residual: None,
            receive_power: f64::NAN,
            reference_accuracy: None,
            normalized_accuracy: None,
            wall_ms: None,
        }
    }

    fn elapsed(&self, start: Instant) -> Option<f64> {
        self.opts
            .timing
            .then(|| start.elapsed().as_secs_f64() * 1e3)
    }

    /// Over-the-air layer for a fresh channel draw at `gp`.
    fn ota_layer(&self, gp: &GridPoint) -> Result<(HiddenLayer, f64)> {
        let d = self.data.n_features();
        let rc = self.cfg.channel.ricean(gp.kappa, gp.n_r, d + 1)?;
        let h = sample_ricean(&rc, &mut self.stream(Purpose::Channel))?.into_real();
        let sigma2 = match gp.snr_db {
            Some(s) => sigma2_for_snr(&h, &augment_rows(&self.data.x_train), s)?,
            None => 0.0,
        };
        let noise = if sigma2 > 0.0 {
            NoiseModel::awgn(sigma2)?
        } else {
            NoiseModel::Noiseless
        };
        Ok((
            HiddenLayer::over_the_air(h, self.cfg.activation, noise),
            sigma2,
        ))
    }

    fn fit_and_score(
        &self,
        gp: &GridPoint,
        model_name: &str,
        hidden: HiddenLayer,
        sigma2: f64,
        start: Instant,
    ) -> Result<ResultRow> {
        let d = &self.data;
        let mut nrng = self.stream(Purpose::Noise);
        let model = ElmModel::fit(
            hidden,
            &d.x_train,
            &d.t_train,
            self.cfg.solver.rel_tol,
            &mut nrng,
        )?;
        let accuracy = model.accuracy(&d.x_test, &d.t_test, &mut nrng)?;
        let mut row = self.row(gp, model_name, sigma2);
        row.accuracy = accuracy;
        row.train_residual = model.train_residual();
        row.receive_power = model.receive_power();
        row.wall_ms = self.elapsed(start);
        Ok(row)
    }

    fn grid_point(&self, gp: &GridPoint) -> Result<Vec<ResultRow>> {
        let start = Instant::now();
        let (hidden, sigma2) = self.ota_layer(gp)?;
        let mut rows = vec![self.fit_and_score(gp, MODEL_OTA, hidden, sigma2, start)?];
        let with_baseline = matches!(self.kind, ExperimentKind::SweepNr | ExperimentKind::Single);
        if self.cfg.baseline && with_baseline {
            let start = Instant::now();
            let mut drng = self.stream(Purpose::Digital);
            let hidden = HiddenLayer::digital(&mut drng, gp.n_r, self.data.n_features())?;
            rows.push(self.fit_and_score(gp, MODEL_DIGITAL, hidden, 0.0, start)?);
        }
        Ok(rows)
    }

    /// Fit under `H(0)`, then per channel step: evolve, score the stale
    /// combiner (iteration 0), and record every mini-batch update.
    fn online(&self, gp: &GridPoint) -> Result<Vec<ResultRow>> {
        let start = Instant::now();
        let d = &self.data;
        let cfg = self.cfg;
        let ar = ArConfig::new(gp.value)?;
        let ocfg = cfg.online.online_config(cfg.solver.rel_tol)?;
        let rc = cfg.channel.ricean(gp.kappa, gp.n_r, d.n_features() + 1)?;
        let mut channel = sample_ricean(&rc, &mut self.stream(Purpose::Channel))?;
        let sigma2 = match gp.snr_db {
            Some(s) => sigma2_for_snr(channel.real(), &augment_rows(&d.x_train), s)?,
            None => 0.0,
        };
        let noise = if sigma2 > 0.0 {
            NoiseModel::awgn(sigma2)?
        } else {
            NoiseModel::Noiseless
        };
        let mut nrng = self.stream(Purpose::Noise);
        let mut erng = self.stream(Purpose::Evolve);
        let mut orng = self.stream(Purpose::Online);
        let tol = cfg.solver.rel_tol;

        let hidden = HiddenLayer::over_the_air(channel.real().clone(), cfg.activation, noise);
        let mut model = ElmModel::fit(hidden, &d.x_train, &d.t_train, tol, &mut nrng)?;
        let acc0 = model.accuracy(&d.x_test, &d.t_test, &mut nrng)?;
        let mut row = self.row(gp, MODEL_OTA, sigma2);
        row.step = Some(0);
        row.iteration = Some(0);
        row.accuracy = acc0;
        row.train_residual = model.train_residual();
        row.receive_power = model.receive_power();
        row.reference_accuracy = Some(acc0);
        row.normalized_accuracy = (acc0 > 0.0).then_some(1.0);
        row.wall_ms = self.elapsed(start);
        let mut rows = vec![row];

        for step in 1..=cfg.online.steps {
            channel = evolve_ar(&channel, &ar, &mut erng)?;
            let h_k = channel.real();
            let reference = ElmModel::fit(
                model.hidden().with_weights(h_k.clone())?,
                &d.x_train,
                &d.t_train,
                tol,
                &mut nrng,
            )?;
            let ref_acc = reference.accuracy(&d.x_test, &d.t_test, &mut nrng)?;
            let mut trainer =
                OnlineTrainer::new(&model, h_k.clone(), &d.x_train, &d.t_train, ocfg)?;
            for iteration in 0..=ocfg.n_iters {
                let start = Instant::now();
                let mut change = f64::INFINITY;
                if iteration > 0 {
                    change = trainer.step(&mut orng)?;
                }
                let current = trainer.model();
                let acc = current.accuracy(&d.x_test, &d.t_test, &mut nrng)?;
                let mut row = self.row(gp, MODEL_OTA, sigma2);
                row.step = Some(step);
                row.iteration = Some(iteration);
                row.accuracy = acc;
                row.receive_power = current.receive_power();
                row.reference_accuracy = Some(ref_acc);
                row.normalized_accuracy = (ref_acc > 0.0).then(|| acc / ref_acc);
                row.wall_ms = self.elapsed(start);
                rows.push(row);
                if ocfg.early_stop.is_some_and(|t| change < t) {
                    break;
                }
            }
            model = trainer.into_model();
        }
        Ok(rows)
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
    table: Option<&RawTable>,
    points: &[GridPoint],
    trial: u64,
    opts: RunOptions,
) -> Result<Vec<(usize, ResultRow)>> {
    let data = prepare_dataset(cfg, table, trial)?;
    let t = Trial {
        cfg,
        kind,
        data,
        trial,
        opts,
    };
    let mut out = Vec::new();
    for (g, gp) in points.iter().enumerate() {
        let rows = if kind == ExperimentKind::Online {
            t.online(gp)?
        } else {
            t.grid_point(gp)?
        };
        out.extend(rows.into_iter().map(|r| (g, r)));
    }
    Ok(out)
}

/// Runs every (grid point, seed) trial and returns rows ordered by grid point,
/// then seed, independent of scheduling.
pub fn run(
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
    opts: RunOptions,
) -> Result<Vec<ResultRow>> {
    cfg.validate(kind)?;
    let table = load_table(cfg)?;
    let points = grid(cfg, kind);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_trial: Vec<Result<Vec<(usize, ResultRow)>>> = pool.install(|| {
        (0..cfg.seeds as u64)
            .into_par_iter()
            .map(|trial| run_trial(cfg, kind, table.as_ref(), &points, trial, opts))
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    rows.sort_by_key(|(g, r)| (*g, r.seed));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn run_sweep_nr(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    run(cfg, ExperimentKind::SweepNr, opts)
}

pub fn run_sweep_snr(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    run(cfg, ExperimentKind::SweepSnr, opts)
}

pub fn run_sweep_kappa(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    run(cfg, ExperimentKind::SweepKappa, opts)
}

pub fn run_online(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    run(cfg, ExperimentKind::Online, opts)
}

pub fn run_single(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<ResultRow>> {
    run(cfg, ExperimentKind::Single, opts)
}

/// Writes the result CSV plus its summary and manifest sidecars.
pub fn write_outputs(
    rows: &[ResultRow],
    cfg: &ExperimentConfig,
    kind: ExperimentKind,
    out: &Path,
) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    emit_csv(rows, out)?;
    let (summary_path, manifest_path) = sidecar_paths(out);
    if !rows.is_empty() {
        emit_summary(&summarize(rows)?, &summary_path)?;
    }
    Manifest::new(kind.as_str(), cfg, rows.len())?.write(&manifest_path)
}
