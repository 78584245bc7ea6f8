//! The XL-MIMO extreme learning machine.
//!
//! Each input `x` is transmitted uncoded as `x~ = [x; 1]` over `d + 1` antennas.
//! Row `i` of the hidden matrix is `g(H^r x~_i + n)`, and the combiner is the
//! minimum-norm least-squares fit `w = G^+ t`. Predictions are `w^T g(H^r x~ + n)`
//! with fresh noise per evaluation; labels are the sign of the prediction.
//!
//! For time-varying channels the combiner is re-tuned from its previous value by
//! repeatedly solving a random mini-batch problem under the new channel and
//! accumulating `w <- w + gamma * G_S^+ t_S`.

use crate::activation::{rapp, sigmoid, RappParams};
use crate::channel::{add_noise, NoiseModel};
use crate::numkernel::{min_norm_lstsq_with_tol, norm, Matrix, RngStream, DEFAULT_REL_TOL};
use crate::{Error, Result};

/// `[x_1, ..., x_d, 1]`.
pub fn augment(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.extend_from_slice(x);
    out.push(1.0);
    out
}

/// Every row of `x` augmented with a trailing 1.
pub fn augment_rows(x: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols() + 1, |i, j| {
        if j < x.cols() {
            x[(i, j)]
        } else {
            1.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Rapp(RappParams),
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(&self, y: f64) -> f64 {
        match self {
            Activation::Rapp(p) => rapp(y, p),
            Activation::Sigmoid => sigmoid(y),
        }
    }
}

/// Random hidden layer: weight matrix with a trailing bias column, an
/// element-wise activation, and additive noise before the activation.
#[derive(Debug, Clone)]
pub struct HiddenLayer {
    weights: Matrix,
    activation: Activation,
    noise: NoiseModel,
}

impl HiddenLayer {
    /// Over-the-air layer: the weights are the real channel `H^r` (`N_r x (d+1)`).
    pub fn over_the_air(h_real: Matrix, rapp: RappParams, noise: NoiseModel) -> Self {
        HiddenLayer {
            weights: h_real,
            activation: Activation::Rapp(rapp),
            noise,
        }
    }

    /// Conventional ELM layer with i.i.d. `Uniform[0, 1)` weights (bias column
    /// included), sigmoid activation and no noise.
    pub fn digital(rng: &mut RngStream, n_hidden: usize, d: usize) -> Result<Self> {
        if n_hidden == 0 {
            return Err(Error::Config(
                "digital ELM needs at least one hidden unit".into(),
            ));
        }
        let weights = Matrix::from_fn(n_hidden, d + 1, |_, _| rng.uniform());
        Ok(HiddenLayer {
            weights,
            activation: Activation::Sigmoid,
            noise: NoiseModel::Noiseless,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.rows()
    }

    /// Feature dimension `d`; the layer has `d + 1` input columns.
    pub fn input_dim(&self) -> usize {
        self.weights.cols() - 1
    }

    /// Same activation and noise bound to a new weight (channel) matrix.
    pub fn with_weights(&self, weights: Matrix) -> Result<Self> {
        if weights.cols() != self.weights.cols() {
            return Err(Error::Dimension(format!(
                "new channel has {} transmit columns, layer expects {}",
                weights.cols(),
                self.weights.cols()
            )));
        }
        Ok(HiddenLayer {
            weights,
            activation: self.activation,
            noise: self.noise,
        })
    }

    /// Hidden output for one feature vector (without the appended 1).
    pub fn hidden_row(&self, x: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} features, layer expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut y = self.weights.matvec(&augment(x))?;
        add_noise(&mut y, &self.noise, rng);
        for v in y.iter_mut() {
            *v = self.activation.apply(*v);
        }
        Ok(y)
    }

    /// `D x N_r` hidden matrix for the rows of `x` (`D x d`). Noise, if any, is
    /// drawn independently for every row, in row order.
    pub fn hidden_matrix(&self, x: &Matrix, rng: &mut RngStream) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "inputs have {} features, layer expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        let mut g = Matrix::zeros(x.rows(), self.n_hidden());
        for i in 0..x.rows() {
            let row = self.hidden_row(x.row(i), rng)?;
            g.row_mut(i).copy_from_slice(&row);
        }
        Ok(g)
    }
}

/// Closed-form training result.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub w: Vec<f64>,
    /// `||G w - t||`.
    pub train_residual: f64,
    /// `||w||^2`.
    pub receive_power: f64,
}

pub fn train(g: &Matrix, t: &[f64]) -> Result<Fit> {
    train_with_tol(g, t, DEFAULT_REL_TOL)
}

pub fn train_with_tol(g: &Matrix, t: &[f64], rel_tol: f64) -> Result<Fit> {
    let w = min_norm_lstsq_with_tol(g, t, rel_tol)?;
    let gw = g.matvec(&w)?;
    let train_residual = gw
        .iter()
        .zip(t)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let receive_power = w.iter().map(|v| v * v).sum();
    Ok(Fit {
        w,
        train_residual,
        receive_power,
    })
}

/// Trained combiner bound to its hidden layer.
#[derive(Debug, Clone)]
pub struct ElmModel {
    w: Vec<f64>,
    hidden: HiddenLayer,
    train_residual: Option<f64>,
    receive_power: f64,
}

impl ElmModel {
    /// Builds `G` for the training inputs and solves for the combiner.
    pub fn fit(
        hidden: HiddenLayer,
        x: &Matrix,
        t: &[f64],
        rel_tol: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let g = hidden.hidden_matrix(x, rng)?;
        let fit = train_with_tol(&g, t, rel_tol)?;
        Ok(ElmModel {
            w: fit.w,
            hidden,
            train_residual: Some(fit.train_residual),
            receive_power: fit.receive_power,
        })
    }

    pub fn from_weights(hidden: HiddenLayer, w: Vec<f64>) -> Result<Self> {
        if w.len() != hidden.n_hidden() {
            return Err(Error::Dimension(format!(
                "{} combiner weights for {} hidden units",
                w.len(),
                hidden.n_hidden()
            )));
        }
        let receive_power = w.iter().map(|v| v * v).sum();
        Ok(ElmModel {
            w,
            hidden,
            train_residual: None,
            receive_power,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn hidden(&self) -> &HiddenLayer {
        &self.hidden
    }

    /// Residual of the closed-form fit; `None` once the weights were updated online.
    pub fn train_residual(&self) -> Option<f64> {
        self.train_residual
    }

    /// Receive power `||w||^2`.
    pub fn receive_power(&self) -> f64 {
        self.receive_power
    }

    /// Real-valued outputs `w^T g(H^r x~ + n)` for the rows of `x`.
    pub fn predict(&self, x: &Matrix, rng: &mut RngStream) -> Result<Vec<f64>> {
        let g = self.hidden.hidden_matrix(x, rng)?;
        g.matvec(&self.w)
    }

    /// Fraction of rows of `x` whose predicted label matches `targets` (±1).
    pub fn accuracy(&self, x: &Matrix, targets: &[f64], rng: &mut RngStream) -> Result<f64> {
        let labels = classify(&self.predict(x, rng)?);
        accuracy(&labels, targets)
    }
}

/// Sign decision: `+1` for `t >= 0`, `-1` otherwise.
pub fn classify(t_hat: &[f64]) -> Vec<i8> {
    t_hat
        .iter()
        .map(|&v| if v >= 0.0 { 1 } else { -1 })
        .collect()
}

pub fn accuracy(labels: &[i8], targets: &[f64]) -> Result<f64> {
    if labels.len() != targets.len() || labels.is_empty() {
        return Err(Error::Dimension(format!(
            "{} labels vs {} targets",
            labels.len(),
            targets.len()
        )));
    }
    let hits = labels
        .iter()
        .zip(targets)
        .filter(|(&l, &t)| f64::from(l) == t)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineConfig {
    /// Learning rate, strictly inside (0, 1).
    pub gamma: f64,
    pub batch_size: usize,
    pub n_iters: usize,
    /// Stop once `||gamma w_S|| / ||w||` falls below this value.
    pub early_stop: Option<f64>,
    pub rel_tol: f64,
}

impl OnlineConfig {
    pub fn new(gamma: f64, batch_size: usize, n_iters: usize) -> Result<Self> {
        let cfg = OnlineConfig {
            gamma,
            batch_size,
            n_iters,
            early_stop: None,
            rel_tol: DEFAULT_REL_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "learning rate must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if let Some(tol) = self.early_stop {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::Config(format!(
                    "early-stop tolerance must be > 0, got {tol}"
                )));
            }
        }
        Ok(())
    }
}

/// Mini-batch re-training under a new channel, one iteration per [`step`](Self::step).
#[derive(Debug)]
pub struct OnlineTrainer<'a> {
    w: Vec<f64>,
    hidden: HiddenLayer,
    x: &'a Matrix,
    t: &'a [f64],
    cfg: OnlineConfig,
    iterations: usize,
}

impl<'a> OnlineTrainer<'a> {
    /// Starts from `model`'s weights with its hidden layer re-bound to `h_real_k`.
    pub fn new(
        model: &ElmModel,
        h_real_k: Matrix,
        x: &'a Matrix,
        t: &'a [f64],
        cfg: OnlineConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if x.rows() != t.len() {
            return Err(Error::Dimension(format!(
                "{} inputs with {} targets",
                x.rows(),
                t.len()
            )));
        }
        if cfg.batch_size > x.rows() {
            return Err(Error::Config(format!(
                "batch size {} exceeds the {} available samples",
                cfg.batch_size,
                x.rows()
            )));
        }
        let hidden = model.hidden.with_weights(h_real_k)?;
        Ok(OnlineTrainer {
            w: model.w.clone(),
            hidden,
            x,
            t,
            cfg,
            iterations: 0,
        })
    }

    /// One sample / solve / update round. Returns the relative weight change
    /// `||gamma w_S|| / ||w||` (infinite when the previous `w` is zero).
    pub fn step(&mut self, rng: &mut RngStream) -> Result<f64> {
        let batch = rng.sample_indices(self.x.rows(), self.cfg.batch_size);
        let xs = self.x.select_rows(&batch);
        let ts: Vec<f64> = batch.iter().map(|&i| self.t[i]).collect();
        let gs = self.hidden.hidden_matrix(&xs, rng)?;
        let ws = min_norm_lstsq_with_tol(&gs, &ts, self.cfg.rel_tol)?;
        let prev_norm = norm(&self.w);
        for (w, d) in self.w.iter_mut().zip(&ws) {
            *w += self.cfg.gamma * d;
        }
        self.iterations += 1;
        let delta = self.cfg.gamma * norm(&ws);
        Ok(if prev_norm > 0.0 {
            delta / prev_norm
        } else {
            f64::INFINITY
        })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Snapshot of the current combiner as a model.
    pub fn model(&self) -> ElmModel {
        ElmModel::from_weights(self.hidden.clone(), self.w.clone())
            .expect("weight count matches hidden layer")
    }

    pub fn into_model(self) -> ElmModel {
        ElmModel::from_weights(self.hidden, self.w).expect("weight count matches hidden layer")
    }
}

#[derive(Debug, Clone)]
pub struct OnlineOutcome {
    pub model: ElmModel,
    pub iterations: usize,
    /// True when the early-stop criterion fired before `n_iters`.
    pub stopped_early: bool,
}

/// Runs up to `cfg.n_iters` mini-batch updates under the new channel `h_real_k`.
pub fn online_update(
    model: &ElmModel,
    h_real_k: Matrix,
    x: &Matrix,
    t: &[f64],
    cfg: OnlineConfig,
    rng: &mut RngStream,
) -> Result<OnlineOutcome> {
    let mut trainer = OnlineTrainer::new(model, h_real_k, x, t, cfg)?;
    let mut stopped_early = false;
    for _ in 0..cfg.n_iters {
        let change = trainer.step(rng)?;
        if cfg.early_stop.is_some_and(|tol| change < tol) {
            stopped_early = true;
            break;
        }
    }
    let iterations = trainer.iterations();
    Ok(OnlineOutcome {
        model: trainer.into_model(),
        iterations,
        stopped_early,
    })
}
