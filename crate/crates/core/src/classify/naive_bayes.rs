//! Multinomial Naive Bayes with additive (Laplace) smoothing.

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbParams {
    pub alpha: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Classes with no training documents are never predicted.
    pub present: [bool; 3],
    pub log_prior: [f64; 3],
    /// `log_likelihood[c][j] = log P(feature j | class c)`.
    pub log_likelihood: [Vec<f64>; 3],
}

impl NaiveBayes {
    pub fn fit(data: &Dataset, params: &NbParams) -> Result<Self> {
        if params.alpha <= 0.0 {
            return Err(Error::Config("Naive Bayes alpha must be positive".into()));
        }
        let d = data.n_features;
        let mut docs = [0usize; 3];
        let mut counts: [Vec<f64>; 3] = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
        for (row, label) in data.rows.iter().zip(&data.labels) {
            let c = label.index();
            docs[c] += 1;
            for (j, v) in row.iter() {
                if v < 0.0 {
                    return Err(Error::Training(
                        "multinomial Naive Bayes needs non-negative features".into(),
                    ));
                }
                counts[c][j] += v;
            }
        }
        let n = data.rows.len() as f64;
        let mut present = [false; 3];
        let mut log_prior = [0.0; 3];
        let mut log_likelihood: [Vec<f64>; 3] = Default::default();
        for c in 0..3 {
            present[c] = docs[c] > 0;
            log_prior[c] = if present[c] { (docs[c] as f64 / n).ln() } else { 0.0 };
            let total: f64 = counts[c].iter().sum();
            let denom = (total + params.alpha * d as f64).ln();
            log_likelihood[c] = counts[c]
                .iter()
                .map(|&k| (k + params.alpha).ln() - denom)
                .collect();
        }
        Ok(NaiveBayes {
            present,
            log_prior,
            log_likelihood,
        })
    }

    /// Unnormalized log joint `log P(c) + sum_j x_j log P(j | c)`.
    pub fn scores(&self, x: &FeatureVector) -> [f64; 3] {
        let mut out = [f64::NEG_INFINITY; 3];
        for c in 0..3 {
            if !self.present[c] {
                continue;
            }
            let ll = &self.log_likelihood[c];
            out[c] = self.log_prior[c]
                + x.iter()
                    .filter(|(j, _)| *j < ll.len())
                    .map(|(j, v)| v * ll[j])
                    .sum::<f64>();
        }
        out
    }

    /// Class posteriors.
    pub fn posterior(&self, x: &FeatureVector) -> [f64; 3] {
        super::softmax(&self.scores(x))
    }
}
