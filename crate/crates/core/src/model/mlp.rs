//! One-hidden-layer classifier trained with momentum SGD.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative given the pre-activation `x` and output `y`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Factor applied to the learning rate on a plateau.
    pub lr_decay: f64,
    /// Evaluations without improvement before decaying the learning rate.
    pub lr_patience: usize,
    pub max_epochs: usize,
    /// Evaluations without a new best before stopping.
    pub early_stop_patience: usize,
    pub min_learning_rate: f64,
    pub dropout: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            lr_decay: 0.5,
            lr_patience: 4,
            max_epochs: 100,
            early_stop_patience: 20,
            min_learning_rate: 1e-6,
            dropout: 0.2,
            momentum: 0.9,
            batch_size: 32,
            hidden: 512,
            activation: Activation::Tanh,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = self.learning_rate > 0.0
            && self.lr_decay > 0.0
            && self.lr_decay < 1.0
            && self.lr_patience > 0
            && self.max_epochs > 0
            && self.early_stop_patience > 0
            && self.min_learning_rate > 0.0
            && self.batch_size > 0
            && self.hidden > 0;
        if !positive {
            return Err(ModelError::Config("training settings must be positive, lr_decay below 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) || !(0.0..1.0).contains(&self.momentum) {
            return Err(ModelError::Config("dropout and momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Weights of an input → hidden → output network, stored flat so that
/// optimizers and gradient checks can treat them as one vector.
///
/// Layout: `w1` (hidden × input, row-major), `b1`, `w2` (output × hidden),
/// `b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    pub activation: Activation,
    pub values: Vec<f64>,
}

struct Offsets {
    b1: usize,
    w2: usize,
    b2: usize,
}

/// Intermediate values of one forward pass.
struct Pass {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    /// Dropout multipliers (0 or 1/(1-p)); empty when dropout is off.
    mask: Vec<f64>,
    logits: Vec<f64>,
    probs: Vec<f64>,
}

impl Pass {
    /// Cross-entropy as log-sum-exp minus the target logit, with `ln_1p`
    /// so that losses near zero keep their relative precision.
    fn loss(&self, y: usize) -> f64 {
        let top = argmax(&self.logits);
        let m = self.logits[top];
        let rest: f64 = self.logits.iter().enumerate().filter(|(k, _)| *k != top).map(|(_, l)| (l - m).exp()).sum();
        m + rest.ln_1p() - self.logits[y]
    }
}

impl MlpParams {
    pub fn len_for(input: usize, hidden: usize, output: usize) -> usize {
        hidden * input + hidden + output * hidden + output
    }

    /// Glorot-uniform weights and zero biases.
    pub fn init(input: usize, hidden: usize, output: usize, activation: Activation, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = MlpParams { input, hidden, output, activation, values: vec![0.0; Self::len_for(input, hidden, output)] };
        let o = p.offsets();
        let r1 = (6.0 / (input + hidden) as f64).sqrt();
        let r2 = (6.0 / (hidden + output) as f64).sqrt();
        for v in &mut p.values[..o.b1] {
            *v = rng.random_range(-r1..r1);
        }
        for v in &mut p.values[o.w2..o.b2] {
            *v = rng.random_range(-r2..r2);
        }
        p
    }

    /// All-zero weights.
    pub fn zeros(input: usize, hidden: usize, output: usize, activation: Activation) -> Self {
        MlpParams { input, hidden, output, activation, values: vec![0.0; Self::len_for(input, hidden, output)] }
    }

    fn offsets(&self) -> Offsets {
        let b1 = self.hidden * self.input;
        let w2 = b1 + self.hidden;
        Offsets { b1, w2, b2: w2 + self.output * self.hidden }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn forward(&self, x: &[f64], dropout: Option<(f64, &mut ChaCha8Rng)>) -> Pass {
        let o = self.offsets();
        let v = &self.values;
        let nz: Vec<(usize, f64)> = x.iter().copied().enumerate().filter(|(_, a)| *a != 0.0).collect();
        let mut pre = v[o.b1..o.w2].to_vec();
        for (j, p) in pre.iter_mut().enumerate() {
            let row = &v[j * self.input..(j + 1) * self.input];
            *p += nz.iter().map(|&(i, a)| row[i] * a).sum::<f64>();
        }
        let mut hidden: Vec<f64> = pre.iter().map(|&z| self.activation.apply(z)).collect();
        let mut mask = Vec::new();
        if let Some((p, rng)) = dropout {
            if p > 0.0 {
                let keep = 1.0 / (1.0 - p);
                mask = (0..self.hidden).map(|_| if rng.random_bool(p) { 0.0 } else { keep }).collect();
                hidden.iter_mut().zip(&mask).for_each(|(h, m)| *h *= m);
            }
        }
        let mut logits = v[o.b2..].to_vec();
        for (k, l) in logits.iter_mut().enumerate() {
            let row = &v[o.w2 + k * self.hidden..o.w2 + (k + 1) * self.hidden];
            *l += row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        let probs = softmax(&logits);
        Pass { pre, hidden, mask, logits, probs }
    }

    /// Class probabilities for one input.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x, None).probs
    }

    /// Index of the most probable class (lowest index on ties).
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.predict_proba(x))
    }

    /// Cross-entropy of one example, without dropout.
    pub fn loss(&self, x: &[f64], y: usize) -> f64 {
        self.forward(x, None).loss(y)
    }

    /// Add the gradient of the example's loss to `grad`; returns the loss.
    fn backward(&self, x: &[f64], y: usize, pass: &Pass, grad: &mut [f64]) -> f64 {
        let o = self.offsets();
        let v = &self.values;
        let mut dlogits = pass.probs.clone();
        dlogits[y] -= 1.0;
        let mut dh = vec![0.0; self.hidden];
        for (k, d) in dlogits.iter().enumerate() {
            grad[o.b2 + k] += d;
            let base = o.w2 + k * self.hidden;
            for j in 0..self.hidden {
                grad[base + j] += d * pass.hidden[j];
                dh[j] += d * v[base + j];
            }
        }
        let nz: Vec<(usize, f64)> = x.iter().copied().enumerate().filter(|(_, a)| *a != 0.0).collect();
        for j in 0..self.hidden {
            let m = if pass.mask.is_empty() { 1.0 } else { pass.mask[j] };
            if m == 0.0 {
                continue;
            }
            // The mask scaled the activation, so undo it to get tanh/relu output.
            let y_act = pass.hidden[j] / m;
            let dz = dh[j] * m * self.activation.derivative(pass.pre[j], y_act);
            grad[o.b1 + j] += dz;
            let base = j * self.input;
            for &(i, a) in &nz {
                grad[base + i] += dz * a;
            }
        }
        pass.loss(y)
    }

    /// Analytic gradient of one example's loss, dropout off.
    pub fn gradient(&self, x: &[f64], y: usize) -> Vec<f64> {
        let mut g = vec![0.0; self.values.len()];
        let pass = self.forward(x, None);
        self.backward(x, y, &pass, &mut g);
        g
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn argmax(xs: &[f64]) -> usize {
    xs.iter().enumerate().fold(0, |best, (i, &x)| if x > xs[best] { i } else { best })
}

/// Training examples: feature rows and class indices.
#[derive(Debug, Clone, Copy)]
pub struct Examples<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [usize],
}

impl Examples<'_> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
    pub dev_loss: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trained {
    /// Parameters of the best development checkpoint.
    pub params: MlpParams,
    pub best_epoch: usize,
    pub log: Vec<EpochLog>,
}

impl Trained {
    pub fn best(&self) -> &EpochLog {
        &self.log[self.best_epoch]
    }
}

fn evaluate(p: &MlpParams, data: Examples<'_>) -> (f64, f64) {
    let mut correct = 0;
    let mut loss = 0.0;
    for (x, &y) in data.x.iter().zip(data.y) {
        let probs = p.predict_proba(x);
        correct += usize::from(argmax(&probs) == y);
        loss -= probs[y].max(f64::MIN_POSITIVE).ln();
    }
    let n = data.len().max(1) as f64;
    (correct as f64 / n, loss / n)
}

/// Momentum SGD state.
#[derive(Debug, Clone)]
pub struct Sgd {
    velocity: Vec<f64>,
    grad: Vec<f64>,
    momentum: f64,
}

impl Sgd {
    pub fn new(params: &MlpParams, momentum: f64) -> Self {
        let n = params.values.len();
        Sgd { velocity: vec![0.0; n], grad: vec![0.0; n], momentum }
    }

    /// One update on the examples at `batch`; returns their mean loss.
    pub fn step(
        &mut self,
        params: &mut MlpParams,
        data: Examples<'_>,
        batch: &[usize],
        lr: f64,
        dropout: f64,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for &i in batch {
            let pass = params.forward(&data.x[i], Some((dropout, &mut *rng)));
            total += params.backward(&data.x[i], data.y[i], &pass, &mut self.grad);
        }
        let scale = 1.0 / batch.len().max(1) as f64;
        for ((w, v), g) in params.values.iter_mut().zip(&mut self.velocity).zip(&self.grad) {
            *v = self.momentum * *v - lr * g * scale;
            *w += *v;
        }
        total * scale
    }
}

/// Minimize cross-entropy on `train` by mini-batch momentum SGD, checking
/// `dev` after every epoch. The learning rate is multiplied by `lr_decay`
/// after `lr_patience` evaluations without improvement; training stops after
/// `early_stop_patience` evaluations without a new best, when the rate falls
/// below `min_learning_rate`, or at `max_epochs`.
pub fn train_mlp(
    train: Examples<'_>,
    dev: Examples<'_>,
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<Trained, ModelError> {
    cfg.validate()?;
    let input = train.x.first().ok_or(ModelError::EmptyInput)?.len();
    if let Some(bad) = train.x.iter().chain(dev.x).find(|r| r.len() != input) {
        return Err(ModelError::DimensionMismatch { left: input, right: bad.len() });
    }
    if train.y.iter().chain(dev.y).any(|&y| y >= n_classes) {
        return Err(ModelError::Config(format!("labels must be below {n_classes}")));
    }
    let mut present = train.y.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(ModelError::DegenerateLabels);
    }
    // Without a development set, select on the training data.
    let dev = if dev.is_empty() { train } else { dev };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = MlpParams::init(input, cfg.hidden, n_classes, cfg.activation, rng.random());
    let mut sgd = Sgd::new(&params, cfg.momentum);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut lr = cfg.learning_rate;
    let mut best: Option<(f64, f64, MlpParams, usize)> = None;
    let mut since_best = 0;
    let mut since_improve = 0;
    let mut log = Vec::new();

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            total += sgd.step(&mut params, train, batch, lr, cfg.dropout, &mut rng) * batch.len() as f64;
        }
        let train_loss = total / train.len() as f64;
        if !train_loss.is_finite() || !params.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch });
        }
        let (dev_accuracy, dev_loss) = evaluate(&params, dev);
        log.push(EpochLog { epoch, train_loss, dev_accuracy, dev_loss, learning_rate: lr });
        let better = match &best {
            None => true,
            Some((acc, loss, _, _)) => dev_accuracy > *acc || (dev_accuracy == *acc && dev_loss < *loss),
        };
        if better {
            best = Some((dev_accuracy, dev_loss, params.clone(), epoch));
            since_best = 0;
            since_improve = 0;
        } else {
            since_best += 1;
            since_improve += 1;
            if since_improve >= cfg.lr_patience {
                lr *= cfg.lr_decay;
                since_improve = 0;
            }
        }
        if since_best >= cfg.early_stop_patience || lr < cfg.min_learning_rate {
            break;
        }
    }
    let (_, _, params, best_epoch) = best.expect("at least one epoch runs");
    Ok(Trained { params, best_epoch, log })
}

/// Largest relative difference between analytic and central-difference
/// gradients over `n_coords` randomly chosen parameters (at least 100, or
/// all of them if fewer).
///
/// Relative error is `|a − n| / max(|a| + |n|, 1e-6)`. The floor sits above
/// the roundoff of a central difference in double precision (about
/// 1e-11 at this step), which would otherwise dominate coordinates whose
/// gradient is itself near zero.
pub fn grad_check(params: &MlpParams, x: &[f64], y: usize, n_coords: usize, seed: u64) -> f64 {
    const STEP: f64 = 1e-5;
    let analytic = params.gradient(x, y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = params.values.len();
    let want = n_coords.max(100).min(total);
    let coords = rand::seq::index::sample(&mut rng, total, want);
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for c in coords {
        let orig = probe.values[c];
        probe.values[c] = orig + STEP;
        let up = probe.loss(x, y);
        probe.values[c] = orig - STEP;
        let down = probe.loss(x, y);
        probe.values[c] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let err = (analytic[c] - numeric).abs() / (analytic[c].abs() + numeric.abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, -3.0, 2.5]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn zero_net_bias_gradient() {
        let p = MlpParams::zeros(4, 5, 3, Activation::Tanh);
        let g = p.gradient(&[0.0; 4], 1);
        let o = p.offsets();
        let third = 1.0 / 3.0;
        assert_eq!(&g[o.b2..], &[third, third - 1.0, third]);
        assert!(g[o.b1..o.w2].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn relu_gradients() {
        let p = MlpParams::init(6, 16, 3, Activation::Relu, 3);
        let x = [0.3, -1.2, 0.0, 2.0, 0.7, -0.1];
        assert!(grad_check(&p, &x, 2, 100, 1) < 1e-4);
    }

    #[test]
    fn config_checks() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { dropout: 1.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { learning_rate: 0.0, ..TrainConfig::default() }.validate().is_err());
    }

    #[test]
    fn degenerate_labels() {
        let x = vec![vec![1.0, 0.0]; 4];
        let y = vec![0; 4];
        let data = Examples { x: &x, y: &y };
        assert!(matches!(train_mlp(data, data, 2, &TrainConfig::default()), Err(ModelError::DegenerateLabels)));
    }
}
