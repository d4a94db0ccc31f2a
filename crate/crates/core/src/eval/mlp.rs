use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::roc_auc;
use crate::error::{Error, Result};
use crate::numeric::{hadamard, sigmoid, AdamConfig, AdamState, Dense, ParamSet};
use crate::seeds;

/// Edge representation fed to the classifier: the elementwise product of the
/// endpoint embeddings.
pub fn edge_feature(z_u: &[f64], z_v: &[f64]) -> Result<Vec<f64>> {
    if z_u.len() != z_v.len() {
        return Err(Error::Shape(format!(
            "endpoint embeddings have dimensions {} and {}",
            z_u.len(),
            z_v.len()
        )));
    }
    Ok(hadamard(z_u, z_v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpConfig {
    pub hidden_dim: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Epochs without a validation AUC improvement before stopping.
    pub patience: usize,
    /// Derived from the run's master seed, never read from configuration.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_dim: 64,
            max_epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            patience: 10,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.max_epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "classifier hidden_dim, max_epochs and batch_size must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(
                "classifier learning rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One ReLU hidden layer and a logistic output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpClassifier {
    pub hidden: Dense,
    pub output: Dense,
}

impl ParamSet for MlpClassifier {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.hidden.tensors();
        t.extend(self.output.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.hidden.tensors_mut();
        t.extend(self.output.tensors_mut());
        t
    }
}

impl MlpClassifier {
    pub fn new<R: rand::Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        MlpClassifier {
            hidden: Dense::glorot(input_dim, hidden_dim, rng),
            output: Dense::glorot(hidden_dim, 1, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.input_dim()
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut h = self.hidden.forward(x);
        h.iter_mut().for_each(|a| *a = a.max(0.0));
        self.output.forward(&h)[0]
    }

    /// Probability that `x` is a positive example.
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn predict_all(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Mean binary cross-entropy over the examples and its gradient.
    pub fn loss_and_grad(&self, xs: &[&[f64]], labels: &[bool]) -> (f64, MlpClassifier) {
        let mut grads = self.zeros_like();
        let scale = 1.0 / xs.len().max(1) as f64;
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(labels) {
            let pre = self.hidden.forward(x);
            let h: Vec<f64> = pre.iter().map(|a| a.max(0.0)).collect();
            let z = self.output.forward(&h)[0];
            loss += if y { softplus(-z) } else { softplus(z) };
            let dz = (sigmoid(z) - if y { 1.0 } else { 0.0 }) * scale;
            let mut dh = self.output.backward(&h, &[dz], &mut grads.output);
            dh.iter_mut().zip(&pre).for_each(|(d, &p)| {
                if p <= 0.0 {
                    *d = 0.0
                }
            });
            self.hidden.backward(x, &dh, &mut grads.hidden);
        }
        (loss * scale, grads)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MlpReport {
    pub epoch_losses: Vec<f64>,
    pub val_auc: Vec<f64>,
    /// Epoch (0-based) whose parameters were kept.
    pub best_epoch: usize,
}

/// Trains with Adam on mini-batches. When a validation set with both classes
/// is supplied, keeps the parameters with the best validation AUC and stops
/// after `patience` epochs without improvement.
pub fn train_edge_classifier(
    xs: &[Vec<f64>],
    labels: &[bool],
    validation: Option<(&[Vec<f64>], &[bool])>,
    cfg: &MlpConfig,
) -> Result<(MlpClassifier, MlpReport)> {
    cfg.validate()?;
    if xs.is_empty() || xs.len() != labels.len() {
        return Err(Error::Input(format!(
            "classifier needs matching non-empty examples and labels, got {} and {}",
            xs.len(),
            labels.len()
        )));
    }
    let dim = xs[0].len();
    if let Some(bad) = xs.iter().find(|x| x.len() != dim) {
        return Err(Error::Shape(format!(
            "edge features have mixed dimensions {dim} and {}",
            bad.len()
        )));
    }
    let validation = validation
        .filter(|(vx, vy)| !vx.is_empty() && vy.iter().any(|&l| l) && vy.iter().any(|&l| !l));

    let mut init_rng = seeds::stream(cfg.seed, "mlp/init");
    let mut shuffle_rng = seeds::stream(cfg.seed, "mlp/shuffle");
    let mut model = MlpClassifier::new(dim, cfg.hidden_dim, &mut init_rng);
    let mut adam = AdamState::new(
        &model,
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut report = MlpReport::default();
    let mut best = (f64::NEG_INFINITY, model.clone());
    let mut stale = 0;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let bx: Vec<&[f64]> = batch.iter().map(|&i| xs[i].as_slice()).collect();
            let by: Vec<bool> = batch.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = model.loss_and_grad(&bx, &by);
            if !loss.is_finite() {
                return Err(Error::Numeric("classifier loss became non-finite".into()));
            }
            total += loss * batch.len() as f64;
            adam.step(&mut model, &grads);
        }
        report.epoch_losses.push(total / xs.len() as f64);

        if let Some((vx, vy)) = validation {
            let auc = roc_auc(&model.predict_all(vx), vy)?;
            report.val_auc.push(auc);
            if auc > best.0 {
                best = (auc, model.clone());
                report.best_epoch = epoch;
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        } else {
            report.best_epoch = epoch;
        }
    }
    if validation.is_some() {
        model = best.1;
    }
    Ok((model, report))
}
