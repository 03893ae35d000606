use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::corpus::SentimentLabel;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Accuracy, per-class precision/recall/F1 and the confusion matrix
/// (`confusion[actual][predicted]`, label index order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub confusion: [[usize; 3]; 3],
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
}

impl EvalReport {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (SentimentLabel, SentimentLabel)>) -> Result<Self> {
        let mut confusion = [[0usize; 3]; 3];
        let mut n = 0;
        for (actual, predicted) in pairs {
            confusion[actual.index()][predicted.index()] += 1;
            n += 1;
        }
        if n == 0 {
            return Err(Error::Evaluation("empty test set".into()));
        }
        let correct: usize = (0..3).map(|c| confusion[c][c]).sum();
        let mut precision = [0.0; 3];
        let mut recall = [0.0; 3];
        let mut f1 = [0.0; 3];
        for c in 0..3 {
            let predicted: usize = (0..3).map(|a| confusion[a][c]).sum();
            let actual: usize = confusion[c].iter().sum();
            precision[c] = ratio(confusion[c][c], predicted);
            recall[c] = ratio(confusion[c][c], actual);
            let s = precision[c] + recall[c];
            f1[c] = if s > 0.0 { 2.0 * precision[c] * recall[c] / s } else { 0.0 };
        }
        Ok(EvalReport {
            n,
            accuracy: correct as f64 / n as f64,
            confusion,
            precision,
            recall,
            f1,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["class", "precision", "recall", "f1", "support"])?;
        for label in SentimentLabel::ALL {
            let c = label.index();
            w.write_record([
                label.as_str().to_string(),
                format!("{:.4}", self.precision[c]),
                format!("{:.4}", self.recall[c]),
                format!("{:.4}", self.f1[c]),
                self.confusion[c].iter().sum::<usize>().to_string(),
            ])?;
        }
        w.write_record(["accuracy".to_string(), format!("{:.4}", self.accuracy), String::new(), String::new(), self.n.to_string()])?;
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn evaluate(model: &TrainedModel, rows: &[FeatureVector], labels: &[SentimentLabel]) -> Result<EvalReport> {
    EvalReport::from_pairs(
        rows.iter()
            .zip(labels)
            .map(|(x, &y)| (y, model.predict(x).label)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadImportance {
    pub label: SentimentLabel,
    pub importances: Vec<f64>,
    /// Feature indices by decreasing importance, ties by index.
    pub ranked: Vec<usize>,
    pub group_sums: BTreeMap<String, f64>,
}

/// Gini importances of a one-vs-rest forest, per head and per feature group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub feature_names: Vec<String>,
    pub feature_groups: Vec<String>,
    pub heads: Vec<HeadImportance>,
    /// Group sums averaged over heads.
    pub mean_group_sums: BTreeMap<String, f64>,
    /// Share of features in each group.
    pub group_fractions: BTreeMap<String, f64>,
}

impl ImportanceReport {
    pub fn new(per_head: Vec<Vec<f64>>, names: Vec<String>, groups: Vec<String>) -> Self {
        assert_eq!(names.len(), groups.len());
        let mut group_fractions: BTreeMap<String, f64> = BTreeMap::new();
        for g in &groups {
            *group_fractions.entry(g.clone()).or_default() += 1.0;
        }
        let n = groups.len().max(1) as f64;
        group_fractions.values_mut().for_each(|v| *v /= n);

        let mut mean_group_sums: BTreeMap<String, f64> =
            group_fractions.keys().map(|k| (k.clone(), 0.0)).collect();
        let n_heads = per_head.len().max(1) as f64;
        let heads = per_head
            .into_iter()
            .enumerate()
            .map(|(h, importances)| {
                let mut ranked: Vec<usize> = (0..importances.len()).collect();
                ranked.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
                let mut group_sums: BTreeMap<String, f64> =
                    group_fractions.keys().map(|k| (k.clone(), 0.0)).collect();
                for (i, v) in importances.iter().enumerate() {
                    *group_sums.get_mut(&groups[i]).expect("known group") += v;
                }
                for (k, v) in &group_sums {
                    *mean_group_sums.get_mut(k).expect("known group") += v / n_heads;
                }
                HeadImportance {
                    label: SentimentLabel::from_index(h % 3),
                    importances,
                    ranked,
                    group_sums,
                }
            })
            .collect();
        ImportanceReport {
            feature_names: names,
            feature_groups: groups,
            heads,
            mean_group_sums,
            group_fractions,
        }
    }

    /// One row per (head, rank) for the top `limit` features of each head.
    pub fn write_csv<W: Write>(&self, out: W, limit: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["class", "rank", "feature", "group", "importance"])?;
        for head in &self.heads {
            for (rank, &i) in head.ranked.iter().take(limit).enumerate() {
                w.write_record([
                    head.label.as_str(),
                    &rank.to_string(),
                    &self.feature_names[i],
                    &self.feature_groups[i],
                    &format!("{:.6}", head.importances[i]),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Group sums per head plus the feature-share row, shaped like a
    /// label-by-group summary table.
    pub fn write_group_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let groups: Vec<&String> = self.group_fractions.keys().collect();
        let mut header = vec!["row".to_string()];
        header.extend(groups.iter().map(|g| g.to_string()));
        w.write_record(&header)?;
        for head in &self.heads {
            let mut row = vec![head.label.as_str().to_string()];
            row.extend(groups.iter().map(|g| format!("{:.4}", head.group_sums[*g])));
            w.write_record(&row)?;
        }
        let mut row = vec!["average".to_string()];
        row.extend(groups.iter().map(|g| format!("{:.4}", self.mean_group_sums[*g])));
        w.write_record(&row)?;
        let mut row = vec!["features_fraction".to_string()];
        row.extend(groups.iter().map(|g| format!("{:.4}", self.group_fractions[*g])));
        w.write_record(&row)?;
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
