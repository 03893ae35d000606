//! Ternary sentiment classifiers trained from scratch: multinomial Naive
//! Bayes, maximum entropy, one-vs-rest linear SVM and one-vs-rest random
//! forest, with Gini importances and evaluation reports.

mod forest;
mod maxent;
mod naive_bayes;
mod report;
mod svm;
mod text;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{BinaryForest, ForestParams, Node, RandomForest, Tree};
pub use maxent::{objective as maxent_objective, MaxEnt, MaxEntParams};
pub use naive_bayes::{NaiveBayes, NbParams};
pub use report::{evaluate, EvalReport, HeadImportance, ImportanceReport};
pub use svm::{LinearHead, LinearSvm, SvmParams};
pub use text::{TextClassifier, TextModelConfig};

use crate::corpus::SentimentLabel;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    NB,
    ME,
    SVM,
    RF,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::NB, Algorithm::ME, Algorithm::SVM, Algorithm::RF];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NB" => Ok(Algorithm::NB),
            "ME" | "LR" => Ok(Algorithm::ME),
            "SVM" => Ok(Algorithm::SVM),
            "RF" => Ok(Algorithm::RF),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Per-algorithm settings. Defaults are the documented reproducible ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub nb: NbParams,
    pub me: MaxEntParams,
    pub svm: SvmParams,
    pub rf: ForestParams,
}

/// Rows of sparse features with one label each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<SentimentLabel>,
    pub n_features: usize,
}

impl Dataset {
    pub fn new(rows: Vec<FeatureVector>, labels: Vec<SentimentLabel>, n_features: usize) -> Self {
        assert_eq!(rows.len(), labels.len(), "rows and labels differ in length");
        Dataset {
            rows,
            labels,
            n_features,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NaiveBayes),
    MaxEnt(MaxEnt),
    Svm(LinearSvm),
    Forest(RandomForest),
}

const MODEL_FORMAT: &str = "trained-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub algorithm: Algorithm,
    pub n_features: usize,
    pub seed: u64,
    /// Hash of the vocabulary the features were indexed against, if any.
    pub vocab_hash: Option<String>,
    pub params: ModelParams,
}

/// Predicted label with the per-class decision scores it was chosen from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: SentimentLabel,
    pub scores: [f64; 3],
}

/// Index of the largest score; ties go to the earliest class in the order
/// Negative, Neutral, Positive. NaN never wins.
pub fn argmax(scores: &[f64; 3]) -> SentimentLabel {
    let mut best = 0;
    for c in 1..3 {
        let cur = scores[c];
        if !cur.is_nan() && (scores[best].is_nan() || cur > scores[best]) {
            best = c;
        }
    }
    SentimentLabel::from_index(best)
}

pub(crate) fn softmax(z: &[f64; 3]) -> [f64; 3] {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return [1.0 / 3.0; 3];
    }
    let e = z.map(|v| (v - m).exp());
    let s: f64 = e.iter().sum();
    e.map(|v| v / s)
}

/// Trains a classifier. Needs at least two classes present.
pub fn train(algorithm: Algorithm, data: &Dataset, hyper: &Hyperparams, seed: u64) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let present = data.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Training(
            "training data must contain at least two classes".into(),
        ));
    }
    let params = match algorithm {
        Algorithm::NB => ModelParams::NaiveBayes(NaiveBayes::fit(data, &hyper.nb)?),
        Algorithm::ME => ModelParams::MaxEnt(MaxEnt::fit(data, &hyper.me)?),
        Algorithm::SVM => ModelParams::Svm(LinearSvm::fit(data, &hyper.svm, seed)?),
        Algorithm::RF => ModelParams::Forest(RandomForest::fit(data, &hyper.rf, seed)?),
    };
    Ok(TrainedModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        algorithm,
        n_features: data.n_features,
        seed,
        vocab_hash: None,
        params,
    })
}

impl TrainedModel {
    /// Wraps hand-built parameters, e.g. for tests or imported models.
    pub fn from_params(params: ModelParams, n_features: usize, seed: u64) -> Self {
        let algorithm = match &params {
            ModelParams::NaiveBayes(_) => Algorithm::NB,
            ModelParams::MaxEnt(_) => Algorithm::ME,
            ModelParams::Svm(_) => Algorithm::SVM,
            ModelParams::Forest(_) => Algorithm::RF,
        };
        TrainedModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            algorithm,
            n_features,
            seed,
            vocab_hash: None,
            params,
        }
    }

    /// Decision scores: NB log joint, ME logits, SVM margins, RF mean
    /// positive-leaf fraction per one-vs-rest head.
    pub fn scores(&self, x: &FeatureVector) -> [f64; 3] {
        match &self.params {
            ModelParams::NaiveBayes(m) => m.scores(x),
            ModelParams::MaxEnt(m) => m.logits(x),
            ModelParams::Svm(m) => m.margins(x),
            ModelParams::Forest(m) => m.scores(x),
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        let scores = self.scores(x);
        Prediction {
            label: argmax(&scores),
            scores,
        }
    }

    /// Scores mapped onto the probability simplex. RF head scores are
    /// renormalized; the other models go through a softmax.
    pub fn class_probabilities(&self, x: &FeatureVector) -> [f64; 3] {
        let scores = self.scores(x);
        match &self.params {
            ModelParams::Forest(_) => {
                let s: f64 = scores.iter().sum();
                if s > 0.0 {
                    scores.map(|v| v / s)
                } else {
                    [1.0 / 3.0; 3]
                }
            }
            _ => softmax(&scores),
        }
    }

    /// Per-head Gini importances of a random forest, each summing to 1.
    pub fn gini_importances(&self) -> Result<Vec<Vec<f64>>> {
        match &self.params {
            ModelParams::Forest(f) => Ok(f
                .heads
                .iter()
                .map(|h| h.importances(self.n_features))
                .collect()),
            _ => Err(Error::Unsupported(format!(
                "Gini importances need a random forest, got {}",
                self.algorithm
            ))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model {} v{}",
                model.format, model.version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
