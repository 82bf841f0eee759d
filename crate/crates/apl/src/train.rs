//! Desk-scale training harness: linear and one-hidden-layer models under
//! momentum SGD, metric evaluation, and a finite-difference gradient audit.
//!
//! Everything is deterministic given its inputs. Parameter initialization
//! draws from ChaCha8 seeded with `ModelSpec::seed` (weight matrices in
//! row-major order, biases start at zero), and each epoch's shuffle
//! continues the same stream. Batch gradients accumulate in row-major
//! order, so identical inputs give bitwise-identical histories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{
    apl_forward_backward, sigmoid_scalar, AplParams, LabelMatrix, LogitMatrix,
};
use crate::mat::Mat;
use crate::metrics::{
    mean_average_precision, micro_f1, ndcg_at_k, precision_at_k, MetricReport, RankedPrediction,
};
use crate::rng;
use crate::synth::Dataset;

/// Relative tolerance the gradient audit is held to.
pub const AUDIT_TOLERANCE: f64 = 1e-4;

/// Entries with a probability this close to the threshold are excluded
/// from finite-difference comparison; the kink makes the two-sided
/// difference meaningless there.
pub const KINK_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Mlp1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Hidden width, used by `mlp1` only.
    #[serde(default = "default_hidden")]
    pub hidden_size: usize,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_hidden() -> usize {
    32
}

fn default_init_scale() -> f64 {
    0.01
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.kind, ModelKind::Mlp1) && self.hidden_size < 1 {
            return Err(Error::InvalidSpec("hidden_size must be at least 1".into()));
        }
        if !self.init_scale.is_finite() {
            return Err(Error::InvalidSpec("init_scale must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptSpec {
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

fn default_momentum() -> f64 {
    0.9
}

impl OptSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidSpec("learning_rate must be finite and >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidSpec("momentum must lie in [0, 1)".into()));
        }
        if self.epochs < 1 || self.batch_size < 1 {
            return Err(Error::InvalidSpec("epochs and batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained parameters; `scores` runs the forward pass to logits.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Linear {
        w: Mat,
        b: Vec<f64>,
    },
    Mlp1 {
        w1: Mat,
        b1: Vec<f64>,
        w2: Mat,
        b2: Vec<f64>,
    },
}

impl ModelParams {
    pub fn scores(&self, features: &Mat) -> Mat {
        match self {
            ModelParams::Linear { w, b } => {
                let mut logits = features.matmul(w);
                logits.add_row_bias(b);
                logits
            }
            ModelParams::Mlp1 { w1, b1, w2, b2 } => {
                let mut pre = features.matmul(w1);
                pre.add_row_bias(b1);
                let hidden = pre.map(f64::tanh);
                let mut logits = hidden.matmul(w2);
                logits.add_row_bias(b2);
                logits
            }
        }
    }

    fn init(spec: &ModelSpec, n_features: usize, n_classes: usize, rng: &mut rng::ChaCha8Rng) -> ModelParams {
        let mut normal_mat = |rows: usize, cols: usize| {
            Mat::from_vec(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| spec.init_scale * rng::standard_normal(rng))
                    .collect(),
            )
        };
        match spec.kind {
            ModelKind::Linear => ModelParams::Linear {
                w: normal_mat(n_features, n_classes),
                b: vec![0.0; n_classes],
            },
            ModelKind::Mlp1 => {
                let w1 = normal_mat(n_features, spec.hidden_size);
                let w2 = normal_mat(spec.hidden_size, n_classes);
                ModelParams::Mlp1 {
                    w1,
                    b1: vec![0.0; spec.hidden_size],
                    w2,
                    b2: vec![0.0; n_classes],
                }
            }
        }
    }

    fn zeros_like(&self) -> ModelParams {
        match self {
            ModelParams::Linear { w, b } => ModelParams::Linear {
                w: Mat::zeros(w.rows(), w.cols()),
                b: vec![0.0; b.len()],
            },
            ModelParams::Mlp1 { w1, b1, w2, b2 } => ModelParams::Mlp1 {
                w1: Mat::zeros(w1.rows(), w1.cols()),
                b1: vec![0.0; b1.len()],
                w2: Mat::zeros(w2.rows(), w2.cols()),
                b2: vec![0.0; b2.len()],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metrics: MetricReport,
}

impl EpochRecord {
    /// One JSON-lines record: `{"epoch":..,"train_loss":..,"metrics":{..}}`.
    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"epoch\":{},\"train_loss\":{},\"metrics\":{}}}",
            self.epoch,
            serde_json::to_string(&self.train_loss).expect("finite float"),
            self.val_metrics.to_json()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub final_params: ModelParams,
}

impl TrainHistory {
    /// JSON lines, one record per epoch.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.epochs {
            out.push_str(&rec.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn final_val_metrics(&self) -> &MetricReport {
        &self.epochs.last().expect("at least one epoch").val_metrics
    }
}

struct ForwardCache {
    logits: LogitMatrix,
    hidden: Option<Mat>,
}

fn forward(params: &ModelParams, xb: &Mat) -> Result<ForwardCache> {
    match params {
        ModelParams::Linear { .. } => Ok(ForwardCache {
            logits: LogitMatrix::new(params.scores(xb))?,
            hidden: None,
        }),
        ModelParams::Mlp1 { w1, b1, w2, b2 } => {
            let mut pre = xb.matmul(w1);
            pre.add_row_bias(b1);
            let hidden = pre.map(f64::tanh);
            let mut logits = hidden.matmul(w2);
            logits.add_row_bias(b2);
            Ok(ForwardCache {
                logits: LogitMatrix::new(logits)?,
                hidden: Some(hidden),
            })
        }
    }
}

fn backward(params: &ModelParams, xb: &Mat, cache: &ForwardCache, grad_logits: &Mat) -> ModelParams {
    match params {
        ModelParams::Linear { .. } => ModelParams::Linear {
            w: xb.t_matmul(grad_logits),
            b: grad_logits.col_sums(),
        },
        ModelParams::Mlp1 { w2, .. } => {
            let hidden = cache.hidden.as_ref().expect("mlp cache");
            let d_w2 = hidden.t_matmul(grad_logits);
            let d_b2 = grad_logits.col_sums();
            let d_hidden = grad_logits.matmul_bt(w2);
            let mut d_pre = d_hidden;
            for (g, &h) in d_pre.data_mut().iter_mut().zip(hidden.data()) {
                *g *= 1.0 - h * h;
            }
            let d_w1 = xb.t_matmul(&d_pre);
            let d_b1 = d_pre.col_sums();
            ModelParams::Mlp1 {
                w1: d_w1,
                b1: d_b1,
                w2: d_w2,
                b2: d_b2,
            }
        }
    }
}

fn update_buffers(param: &mut [f64], velocity: &mut [f64], grad: &[f64], opt: &OptSpec) {
    for ((p, v), &g) in param.iter_mut().zip(velocity).zip(grad) {
        *v = opt.momentum * *v + g;
        *p -= opt.learning_rate * *v;
    }
}

fn sgd_update(params: &mut ModelParams, velocity: &mut ModelParams, grads: &ModelParams, opt: &OptSpec) {
    match (params, velocity, grads) {
        (
            ModelParams::Linear { w, b },
            ModelParams::Linear { w: vw, b: vb },
            ModelParams::Linear { w: gw, b: gb },
        ) => {
            update_buffers(w.data_mut(), vw.data_mut(), gw.data(), opt);
            update_buffers(b, vb, gb, opt);
        }
        (
            ModelParams::Mlp1 { w1, b1, w2, b2 },
            ModelParams::Mlp1 {
                w1: vw1,
                b1: vb1,
                w2: vw2,
                b2: vb2,
            },
            ModelParams::Mlp1 {
                w1: gw1,
                b1: gb1,
                w2: gw2,
                b2: gb2,
            },
        ) => {
            update_buffers(w1.data_mut(), vw1.data_mut(), gw1.data(), opt);
            update_buffers(b1, vb1, gb1, opt);
            update_buffers(w2.data_mut(), vw2.data_mut(), gw2.data(), opt);
            update_buffers(b2, vb2, gb2, opt);
        }
        _ => unreachable!("parameter kinds always match"),
    }
}

/// Trains a model on the leading 80% of `data` under the given loss and
/// reports per-epoch loss over that slice plus metrics on the held-out
/// tail. Datasets too small to split (fewer than 5 samples) train and
/// validate on the whole set.
///
/// The recorded `train_loss` is a full forward pass in row-major order
/// after each epoch's updates, so a zero learning rate yields a constant
/// history.
pub fn train(
    model: &ModelSpec,
    data: &Dataset,
    loss: &AplParams,
    opt: &OptSpec,
    ks: &[usize],
) -> Result<TrainHistory> {
    model.validate()?;
    opt.validate()?;
    let n = data.features.rows();
    if data.labels.rows() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, data.labels.cols()),
            got: data.labels.shape(),
        });
    }

    let n_val = n / 5;
    let n_train = n - n_val;
    let x_train = data.features.slice_rows(0, n_train);
    let y_train = data.labels.slice_rows(0, n_train);
    let (x_val, y_val) = if n_val == 0 {
        (x_train.clone(), y_train.clone())
    } else {
        (
            data.features.slice_rows(n_train, n),
            data.labels.slice_rows(n_train, n),
        )
    };

    let mut rng = rng::seeded(model.seed);
    let mut params = ModelParams::init(model, data.features.cols(), data.labels.cols(), &mut rng);
    let mut velocity = params.zeros_like();
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut history = Vec::with_capacity(opt.epochs);

    for epoch in 1..=opt.epochs {
        rng::shuffle(&mut rng, &mut order);
        for chunk in order.chunks(opt.batch_size) {
            let xb = x_train.gather_rows(chunk);
            let yb = y_train.gather_rows(chunk);
            let cache = forward(&params, &xb).map_err(|_| Error::Diverged { epoch })?;
            let out = apl_forward_backward(&cache.logits, &yb, loss)?;
            if !out.value.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            let grads = backward(&params, &xb, &cache, &out.grad);
            sgd_update(&mut params, &mut velocity, &grads, opt);
        }
        let logits = LogitMatrix::new(params.scores(&x_train))
            .map_err(|_| Error::Diverged { epoch })?;
        let train_loss = apl_forward_backward(&logits, &y_train, loss)?.value;
        if !train_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let val_metrics = evaluate(&params, &x_val, &y_val, ks)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_metrics,
        });
    }

    Ok(TrainHistory {
        epochs: history,
        final_params: params,
    })
}

/// Forward pass plus the standard metric set: P@k and nDCG@k for each
/// requested k, mAP, and micro-F1 at probability 0.5. Rank metrics see the
/// sigmoid probabilities, which order identically to the logits.
pub fn evaluate(
    params: &ModelParams,
    features: &Mat,
    labels: &LabelMatrix,
    ks: &[usize],
) -> Result<MetricReport> {
    if labels.rows() != features.rows() {
        return Err(Error::ShapeMismatch {
            expected: (features.rows(), labels.cols()),
            got: labels.shape(),
        });
    }
    let scores = params.scores(features);
    if scores.cols() != labels.cols() {
        return Err(Error::ShapeMismatch {
            expected: (features.rows(), scores.cols()),
            got: labels.shape(),
        });
    }
    let preds: Vec<RankedPrediction> = (0..scores.rows())
        .map(|r| {
            let probs = scores.row(r).iter().map(|&l| sigmoid_scalar(l)).collect();
            RankedPrediction::new(probs, labels.row(r).to_vec())
        })
        .collect::<Result<_>>()?;
    let mut report = MetricReport::new(preds.len());
    for &k in ks {
        report.insert(format!("p@{k}"), precision_at_k(&preds, k)?);
        report.insert(format!("ndcg@{k}"), ndcg_at_k(&preds, k)?);
    }
    report.insert("map", mean_average_precision(&preds)?);
    report.insert("micro_f1", micro_f1(&preds, 0.5)?);
    Ok(report)
}

/// Outcome of a finite-difference gradient audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub trials: usize,
    pub max_rel_err: f64,
    pub entries_checked: usize,
    pub entries_excluded: usize,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.max_rel_err < AUDIT_TOLERANCE
    }
}

/// Largest relative disagreement between the analytic logit gradient and
/// central finite differences of the loss value, over every entry of the
/// batch. Entries within [`KINK_EXCLUSION`] of the threshold are skipped.
///
/// The relative error divides by `max(|analytic|, |numeric|, 1e-5)`; the
/// floor keeps the ratio meaningful where the true gradient vanishes and
/// the difference quotient sees only roundoff.
pub fn max_fd_rel_err(
    logits: &LogitMatrix,
    labels: &LabelMatrix,
    params: &AplParams,
    h: f64,
) -> Result<(f64, usize, usize)> {
    const REL_FLOOR: f64 = 1e-5;
    let analytic = apl_forward_backward(logits, labels, params)?;
    let (rows, cols) = logits.shape();
    let mut max_err = 0.0f64;
    let mut checked = 0usize;
    let mut excluded = 0usize;
    let mut bumped = logits.as_mat().clone();
    for r in 0..rows {
        for c in 0..cols {
            let p = sigmoid_scalar(logits.at(r, c));
            if (p - params.p_th()).abs() < KINK_EXCLUSION {
                excluded += 1;
                continue;
            }
            let l = logits.at(r, c);
            bumped.set(r, c, l + h);
            let up = apl_forward_backward(&LogitMatrix::new(bumped.clone())?, labels, params)?
                .value;
            bumped.set(r, c, l - h);
            let down = apl_forward_backward(&LogitMatrix::new(bumped.clone())?, labels, params)?
                .value;
            bumped.set(r, c, l);
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.grad.at(r, c);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            max_err = max_err.max(rel);
            checked += 1;
        }
    }
    Ok((max_err, checked, excluded))
}

/// Audits the analytic gradient of the given loss parameters on `trials`
/// random batches (4 samples by 6 classes, logits from N(0, 2), labels
/// Bernoulli(1/2)), comparing against central differences with h = 1e-5.
pub fn finite_difference_audit(loss: &AplParams, trials: usize, seed: u64) -> Result<AuditReport> {
    if trials < 1 {
        return Err(Error::InvalidSpec("trials must be at least 1".into()));
    }
    const ROWS: usize = 4;
    const COLS: usize = 6;
    let mut rng = rng::seeded(seed);
    let mut max_rel_err = 0.0f64;
    let mut entries_checked = 0usize;
    let mut entries_excluded = 0usize;
    for _ in 0..trials {
        let logits = LogitMatrix::new(Mat::from_vec(
            ROWS,
            COLS,
            (0..ROWS * COLS)
                .map(|_| 2.0 * rng::standard_normal(&mut rng))
                .collect(),
        ))?;
        let labels = LabelMatrix::new(
            ROWS,
            COLS,
            (0..ROWS * COLS)
                .map(|_| rng::bernoulli(&mut rng, 0.5) as u8)
                .collect(),
        )?;
        let (err, checked, excluded) = max_fd_rel_err(&logits, &labels, loss, 1e-5)?;
        max_rel_err = max_rel_err.max(err);
        entries_checked += checked;
        entries_excluded += excluded;
    }
    Ok(AuditReport {
        trials,
        max_rel_err,
        entries_checked,
        entries_excluded,
    })
}
