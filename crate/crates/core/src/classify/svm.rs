//! One-vs-rest linear SVM trained with Pegasos-style stochastic subgradient
//! steps on the hinge loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Regularization is `1 / (n * c)`.
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, epochs: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearHead {
    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub heads: Vec<LinearHead>,
}

impl LinearSvm {
    pub fn margins(&self, x: &FeatureVector) -> [f64; 3] {
        [
            self.heads[0].margin(x),
            self.heads[1].margin(x),
            self.heads[2].margin(x),
        ]
    }

    pub fn fit(data: &Dataset, params: &SvmParams, seed: u64) -> Result<Self> {
        if params.c <= 0.0 {
            return Err(Error::Config("SVM C must be positive".into()));
        }
        let heads = (0..3)
            .map(|c| {
                let y: Vec<f64> = data
                    .labels
                    .iter()
                    .map(|l| if l.index() == c { 1.0 } else { -1.0 })
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                fit_binary(data, &y, params, &mut rng)
            })
            .collect();
        Ok(LinearSvm { heads })
    }
}

/// The bias is learned as the weight of a constant feature equal to 1, so it
/// is regularized along with the other weights. The iterate is kept as
/// `scale * v` to make the shrink step O(1).
fn fit_binary(data: &Dataset, y: &[f64], params: &SvmParams, rng: &mut ChaCha8Rng) -> LinearHead {
    let n = data.rows.len();
    let d = data.n_features;
    let lambda = 1.0 / (n as f64 * params.c);
    let mut v = vec![0.0; d + 1];
    let mut scale = 1.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    for _ in 0..params.epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = &data.rows[i];
            let margin = scale * (x.dot(&v[..d]) + v[d]);
            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if y[i] * margin < 1.0 {
                let g = eta * y[i] / scale;
                for (j, val) in x.iter() {
                    if j < d {
                        v[j] += g * val;
                    }
                }
                v[d] += g;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    let weights: Vec<f64> = v[..d].iter().map(|w| w * scale).collect();
    LinearHead {
        weights,
        bias: v[d] * scale,
    }
}
