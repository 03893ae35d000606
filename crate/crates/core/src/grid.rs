//! Experiment grids: processing level × algorithm × n-gram order for the
//! bag-of-ngram baselines, and first-stage dataset × fusion algorithm for
//! LOOVE.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classify::{Algorithm, Hyperparams, TextClassifier, TextModelConfig};
use crate::corpus::{stratified_split, EmoteDictionary, LabeledExample, SentimentLabel, SplitSpec};
use crate::error::{Error, Result};
use crate::features::NgramOrder;
use crate::loove::{train_loove, LooveConfig};
use crate::pseudodict::PseudoDict;
use crate::tokenize::{ProcessingLevel, TextResources};

/// Accuracy on `test` of always predicting the most frequent `train` label
/// (ties to the earliest label).
pub fn majority_baseline(train: &[LabeledExample], test: &[LabeledExample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Evaluation("empty test set".into()));
    }
    let mut counts = [0usize; 3];
    for e in train {
        counts[e.label.index()] += 1;
    }
    let mut best = 0;
    for c in 1..3 {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    let majority = SentimentLabel::from_index(best);
    Ok(test.iter().filter(|e| e.label == majority).count() as f64 / test.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineCell {
    pub level: ProcessingLevel,
    pub algorithm: Algorithm,
    pub order: NgramOrder,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineGrid {
    pub n_train: usize,
    pub n_test: usize,
    pub majority_baseline: f64,
    /// Ordered by algorithm, then n-gram order, then level.
    pub cells: Vec<BaselineCell>,
}

pub const NGRAM_ORDERS: [NgramOrder; 2] = [NgramOrder::Unigram, NgramOrder::UnigramBigram];

/// Trains and scores every (level, algorithm, order) combination on one
/// stratified split. `base` supplies weighting, min_count and hyperparameters.
pub fn run_baseline_grid(
    data: &[LabeledExample],
    emotes: &EmoteDictionary,
    resources: &TextResources,
    base: &TextModelConfig,
    split: SplitSpec,
    seed: u64,
) -> Result<BaselineGrid> {
    let (train, test) = stratified_split(data, split)?;
    let majority_baseline = majority_baseline(&train, &test)?;
    let mut cells = Vec::with_capacity(24);
    for algorithm in Algorithm::ALL {
        for order in NGRAM_ORDERS {
            for level in ProcessingLevel::ALL {
                let config = TextModelConfig {
                    level,
                    order,
                    algorithm,
                    ..*base
                };
                let clf = TextClassifier::train(&train, emotes, &config, resources, seed)?;
                let accuracy = clf.evaluate(&test, emotes)?.accuracy;
                log::info!("baseline {level}.{algorithm}.{}: {accuracy:.4}", order.suffix());
                cells.push(BaselineCell {
                    level,
                    algorithm,
                    order,
                    accuracy,
                });
            }
        }
    }
    Ok(BaselineGrid {
        n_train: train.len(),
        n_test: test.len(),
        majority_baseline,
        cells,
    })
}

impl BaselineGrid {
    pub fn get(&self, level: ProcessingLevel, algorithm: Algorithm, order: NgramOrder) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.level == level && c.algorithm == algorithm && c.order == order)
            .map(|c| c.accuracy)
    }

    pub fn best(&self) -> Option<&BaselineCell> {
        self.cells.iter().max_by(|a, b| a.accuracy.total_cmp(&b.accuracy))
    }

    /// Rows `NB.1 .. RF.2`, columns P1..P3, accuracies in percent.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "P1", "P2", "P3"])?;
        for algorithm in Algorithm::ALL {
            for order in NGRAM_ORDERS {
                let mut row = vec![format!("{algorithm}.{}", order.suffix())];
                for level in ProcessingLevel::ALL {
                    let acc = self.get(level, algorithm, order).unwrap_or(f64::NAN);
                    row.push(format!("{:.2}", acc * 100.0));
                }
                w.write_record(&row)?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LooveGridConfig {
    /// Pipeline of the first-stage classifiers (its algorithm is replaced by
    /// `clf1_algorithm`).
    pub text: TextModelConfig,
    pub clf1_algorithm: Algorithm,
    pub clf2_algorithms: Vec<Algorithm>,
    pub hyper: Hyperparams,
    pub train_fraction: f64,
}

impl Default for LooveGridConfig {
    fn default() -> Self {
        LooveGridConfig {
            text: TextModelConfig::default(),
            clf1_algorithm: Algorithm::RF,
            clf2_algorithms: vec![Algorithm::ME, Algorithm::SVM, Algorithm::RF],
            hyper: Hyperparams::default(),
            train_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooveGrid {
    /// `none` (no first-stage classifier) followed by the dataset tags.
    pub rows: Vec<String>,
    /// `no_stats` followed by the fusion algorithms.
    pub columns: Vec<String>,
    /// Test accuracy per (row, column). The (`none`, `no_stats`) corner holds
    /// the majority-label baseline, since that model has no inputs.
    pub accuracy: Vec<Vec<f64>>,
    pub n_train: usize,
    pub n_test: usize,
}

/// Every (first-stage dataset, fusion algorithm) LOOVE variant plus the two
/// edge cases, all trained on the Twitch training split and scored on its
/// test split. First-stage classifiers train on a stratified share of their
/// own dataset.
pub fn run_loove_grid(
    twitch: &[LabeledExample],
    external: &[(String, Vec<LabeledExample>)],
    pseudodict: &PseudoDict,
    emotes: &EmoteDictionary,
    resources: &TextResources,
    config: &LooveGridConfig,
    seed: u64,
) -> Result<LooveGrid> {
    let split = SplitSpec::new(config.train_fraction, seed)?;
    let (train, test) = stratified_split(twitch, split)?;
    let fusion = |alg: Algorithm| LooveConfig {
        clf2_algorithm: alg,
        hyper: config.hyper,
        ..LooveConfig::default()
    };

    let mut rows = vec!["none".to_string()];
    let mut columns = vec!["no_stats".to_string()];
    columns.extend(config.clf2_algorithms.iter().map(|a| a.to_string()));

    let mut none_row = vec![majority_baseline(&train, &test)?];
    for &alg in &config.clf2_algorithms {
        let m = train_loove(&train, None, "none", pseudodict, emotes, &fusion(alg), seed)?;
        none_row.push(m.evaluate(&test)?.accuracy);
    }
    let mut accuracy = vec![none_row];

    for (tag, data) in external {
        let (ext_train, _) = stratified_split(data, split)?;
        let clf1_config = TextModelConfig {
            algorithm: config.clf1_algorithm,
            hyper: config.hyper,
            ..config.text
        };
        let clf1 = TextClassifier::train(&ext_train, emotes, &clf1_config, resources, seed)?;
        let mut row = vec![clf1.evaluate(&test, emotes)?.accuracy];
        for &alg in &config.clf2_algorithms {
            let m = train_loove(&train, Some(&clf1), tag, pseudodict, emotes, &fusion(alg), seed)?;
            row.push(m.evaluate(&test)?.accuracy);
        }
        log::info!("loove row {tag}: {row:?}");
        rows.push(tag.clone());
        accuracy.push(row);
    }
    Ok(LooveGrid {
        rows,
        columns,
        accuracy,
        n_train: train.len(),
        n_test: test.len(),
    })
}

impl LooveGrid {
    pub fn cell(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        Some(self.accuracy[r][c])
    }

    /// Accuracies in percent; header row is the column labels.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["clf1".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.rows.iter().zip(&self.accuracy) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|a| format!("{:.2}", a * 100.0)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_ties_to_first_label() {
        let train = vec![
            LabeledExample::new("a", SentimentLabel::Positive),
            LabeledExample::new("b", SentimentLabel::Negative),
        ];
        let test = vec![
            LabeledExample::new("c", SentimentLabel::Negative),
            LabeledExample::new("d", SentimentLabel::Neutral),
        ];
        assert_eq!(majority_baseline(&train, &test).unwrap(), 0.5);
        assert!(majority_baseline(&train, &[]).is_err());
    }
}
