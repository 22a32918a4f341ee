use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierError, Label, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { lambda: 1e-3, epochs: 20, learning_rate: 0.1, rng_seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub train_config: SvmConfig,
}

impl LinearModel {
    pub fn margin(&self, x: &SparseVector) -> Result<f64, ClassifierError> {
        if x.dim != self.weights.len() {
            return Err(ClassifierError::SizeMismatch { expected: self.weights.len(), got: x.dim });
        }
        Ok(x.dot(&self.weights) + self.bias)
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// `lambda/2 ||w||^2 + mean(max(0, 1 - y (w.x + b)))`.
pub fn hinge_objective(weights: &[f64], bias: f64, xs: &[SparseVector], ys: &[Label], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y.sign() * (x.dot(weights) + bias)).max(0.0))
        .sum();
    reg + loss / xs.len().max(1) as f64
}

/// Full-batch subgradient of [`hinge_objective`] with respect to (w, b). At a
/// hinge point (margin exactly 1) the zero branch is taken.
pub fn hinge_subgradient(weights: &[f64], bias: f64, xs: &[SparseVector], ys: &[Label], lambda: f64) -> (Vec<f64>, f64) {
    let n = xs.len().max(1) as f64;
    let mut g: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    let mut gb = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let s = y.sign();
        if s * (x.dot(weights) + bias) < 1.0 {
            for (i, v) in x.iter() {
                g[i] -= s * v / n;
            }
            gb -= s / n;
        }
    }
    (g, gb)
}

/// Stochastic subgradient descent on the regularized hinge objective with
/// step size `lr / (1 + lr * lambda * t)`. Examples are visited in a seeded
/// shuffled order each epoch. The weight vector is kept as `scale * v` so
/// that shrinkage costs O(1) per step.
pub fn train(xs: &[SparseVector], ys: &[Label], dim: usize, config: &SvmConfig) -> Result<LinearModel, ClassifierError> {
    if xs.is_empty() {
        return Err(ClassifierError::NoExamples);
    }
    if xs.len() != ys.len() {
        return Err(ClassifierError::LengthMismatch(xs.len(), ys.len()));
    }
    if !(ys.contains(&Label::Positive) && ys.contains(&Label::Negative)) {
        return Err(ClassifierError::SingleClass);
    }
    if let Some(x) = xs.iter().find(|x| x.dim != dim) {
        return Err(ClassifierError::SizeMismatch { expected: dim, got: x.dim });
    }
    if !(config.lambda > 0.0) || !(config.learning_rate > 0.0) {
        return Err(ClassifierError::BadArgument("lambda and learning_rate must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut t: u64 = 0;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = config.learning_rate / (1.0 + config.learning_rate * config.lambda * t as f64);
            let x = &xs[i];
            let y = ys[i].sign();
            let margin = scale * x.dot(&v) + bias;
            scale *= 1.0 - eta * config.lambda;
            if y * margin < 1.0 {
                let step = eta * y / scale;
                for (j, val) in x.iter() {
                    v[j] += step * val;
                }
                bias += eta * y;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    let weights = v.into_iter().map(|w| w * scale).collect();
    Ok(LinearModel { weights, bias, train_config: config.clone() })
}
