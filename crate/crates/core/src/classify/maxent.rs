//! Multinomial logistic regression (maximum entropy) fitted by batch
//! gradient descent on the L2-regularized mean cross-entropy.

use serde::{Deserialize, Serialize};

use super::{softmax, Dataset};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaxEntParams {
    pub l2: f64,
    pub learning_rate: f64,
    /// Stop once the absolute loss change between epochs drops below this.
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for MaxEntParams {
    fn default() -> Self {
        MaxEntParams {
            l2: 1e-4,
            learning_rate: 0.5,
            tolerance: 1e-6,
            max_epochs: 1000,
        }
    }
}

/// Weight matrix (one row per class) plus per-class bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEnt {
    pub weights: [Vec<f64>; 3],
    pub bias: [f64; 3],
}

impl MaxEnt {
    pub fn zeros(n_features: usize) -> Self {
        MaxEnt {
            weights: [vec![0.0; n_features], vec![0.0; n_features], vec![0.0; n_features]],
            bias: [0.0; 3],
        }
    }

    pub fn logits(&self, x: &FeatureVector) -> [f64; 3] {
        let mut z = self.bias;
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += x.dot(&self.weights[c]);
        }
        z
    }

    pub fn probabilities(&self, x: &FeatureVector) -> [f64; 3] {
        softmax(&self.logits(x))
    }

    /// Flattened parameters: the three weight rows followed by the biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.weights.iter().flatten().copied().collect();
        out.extend_from_slice(&self.bias);
        out
    }

    pub fn from_flat(flat: &[f64], n_features: usize) -> Self {
        assert_eq!(flat.len(), 3 * n_features + 3);
        let row = |c: usize| flat[c * n_features..(c + 1) * n_features].to_vec();
        MaxEnt {
            weights: [row(0), row(1), row(2)],
            bias: [flat[3 * n_features], flat[3 * n_features + 1], flat[3 * n_features + 2]],
        }
    }

    fn axpy(&mut self, step: f64, grad: &MaxEnt) {
        for c in 0..3 {
            for (w, g) in self.weights[c].iter_mut().zip(&grad.weights[c]) {
                *w -= step * g;
            }
            self.bias[c] -= step * grad.bias[c];
        }
    }
}

fn log_softmax_at(z: &[f64; 3], y: usize) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    z[y] - lse
}

/// Loss `mean_i -log p(y_i | x_i) + l2/2 * ||W||^2` (bias unregularized) and its gradient.
pub fn objective(model: &MaxEnt, data: &Dataset, l2: f64) -> (f64, MaxEnt) {
    let n = data.rows.len().max(1) as f64;
    let d = data.n_features;
    let mut grad = MaxEnt::zeros(d);
    let mut loss = 0.0;
    for (x, label) in data.rows.iter().zip(&data.labels) {
        let y = label.index();
        let z = model.logits(x);
        loss -= log_softmax_at(&z, y);
        let p = softmax(&z);
        for c in 0..3 {
            let r = p[c] - if c == y { 1.0 } else { 0.0 };
            grad.bias[c] += r / n;
            for (j, v) in x.iter() {
                if j < d {
                    grad.weights[c][j] += r * v / n;
                }
            }
        }
    }
    loss /= n;
    let mut sq = 0.0;
    for c in 0..3 {
        for (g, w) in grad.weights[c].iter_mut().zip(&model.weights[c]) {
            *g += l2 * w;
            sq += w * w;
        }
    }
    (loss + 0.5 * l2 * sq, grad)
}

impl MaxEnt {
    pub fn fit(data: &Dataset, params: &MaxEntParams) -> Result<Self> {
        if params.learning_rate <= 0.0 || params.l2 < 0.0 {
            return Err(Error::Config("invalid maximum entropy parameters".into()));
        }
        let mut model = MaxEnt::zeros(data.n_features);
        let (mut loss, mut grad) = objective(&model, data, params.l2);
        let mut step = params.learning_rate;
        for _ in 0..params.max_epochs {
            let mut candidate = model.clone();
            candidate.axpy(step, &grad);
            let (new_loss, new_grad) = objective(&candidate, data, params.l2);
            if !new_loss.is_finite() || new_loss > loss {
                // step too large for this data's scale
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
                continue;
            }
            let delta = loss - new_loss;
            model = candidate;
            loss = new_loss;
            grad = new_grad;
            if delta < params.tolerance {
                break;
            }
        }
        Ok(model)
    }
}
