//! Two-stage fusion classifier. A frozen text classifier (CLF1) labels the
//! message; pooled pseudo-dictionary valences of its emotes are appended; a
//! small secondary classifier (CLF2) makes the final call.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{train, Algorithm, Dataset, EvalReport, Hyperparams, ImportanceReport, Prediction, TextClassifier, TrainedModel};
use crate::corpus::{load_emote_dictionary, EmoteDictionary, LabeledExample, SentimentLabel};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::manifest::sha256_file;
use crate::pseudodict::PseudoDict;
use crate::tokenize::{tokenize, Token, TokenKind};

/// Version of the fusion-vector layout below.
pub const FUSION_VERSION: u32 = 1;

pub const CLF1_FEATURES: [&str; 3] = ["clf1_negative", "clf1_neutral", "clf1_positive"];
pub const STAT_FEATURES: [&str; 5] = ["emote_mean", "emote_min", "emote_max", "emote_count", "emote_present"];

/// Pooled valences of the message's emotes that have dictionary entries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmoteStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub present: bool,
}

impl EmoteStats {
    pub fn from_valences(valences: &[f64]) -> Self {
        if valences.is_empty() {
            return EmoteStats::default();
        }
        EmoteStats {
            mean: valences.iter().sum::<f64>() / valences.len() as f64,
            min: valences.iter().copied().fold(f64::INFINITY, f64::min),
            max: valences.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            count: valences.len(),
            present: true,
        }
    }

    pub fn to_features(&self) -> [f64; 5] {
        [
            self.mean,
            self.min,
            self.max,
            self.count as f64,
            if self.present { 1.0 } else { 0.0 },
        ]
    }
}

/// Every Emote occurrence with a dictionary entry contributes once.
pub fn extract_emote_stats(tokens: &[Token], dict: &PseudoDict) -> EmoteStats {
    let valences: Vec<f64> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Emote)
        .filter_map(|t| dict.valence(&t.text))
        .collect();
    EmoteStats::from_valences(&valences)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clf1Encoding {
    #[default]
    OneHot,
    Probabilities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionLayout {
    pub version: u32,
    pub clf1: bool,
    pub stats: bool,
    pub encoding: Clf1Encoding,
}

impl FusionLayout {
    pub fn len(&self) -> usize {
        (if self.clf1 { 3 } else { 0 }) + if self.stats { 5 } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.clf1 {
            names.extend(CLF1_FEATURES.iter().map(|s| s.to_string()));
        }
        if self.stats {
            names.extend(STAT_FEATURES.iter().map(|s| s.to_string()));
        }
        names
    }

    pub fn groups(&self) -> Vec<String> {
        let mut groups = Vec::new();
        if self.clf1 {
            groups.extend(std::iter::repeat("clf1".to_string()).take(3));
        }
        if self.stats {
            groups.extend(std::iter::repeat("emote_stats".to_string()).take(5));
        }
        groups
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LooveConfig {
    pub clf2_algorithm: Algorithm,
    pub hyper: Hyperparams,
    /// Disabling stats turns the model into plain CLF1.
    pub use_stats: bool,
    pub encoding: Clf1Encoding,
}

impl Default for LooveConfig {
    fn default() -> Self {
        LooveConfig {
            clf2_algorithm: Algorithm::RF,
            hyper: Hyperparams::default(),
            use_stats: true,
            encoding: Clf1Encoding::OneHot,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooveModel {
    pub clf1: Option<TextClassifier>,
    /// Which dataset CLF1 was trained on (free-form, e.g. "EC" or "T").
    pub clf1_tag: String,
    pub pseudodict: PseudoDict,
    pub emotes: EmoteDictionary,
    pub layout: FusionLayout,
    /// `None` in the no-stats case, where CLF1's label is final.
    pub clf2: Option<TrainedModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoovePrediction {
    pub label: SentimentLabel,
    /// Exactly the vector CLF2 consumed (CLF1 part only when CLF2 is absent).
    pub fusion: Vec<f64>,
    pub stats: EmoteStats,
    pub clf1: Option<Prediction>,
}

fn clf1_features(clf1: &TextClassifier, tokens: &[Token], encoding: Clf1Encoding) -> (Prediction, [f64; 3]) {
    let x = clf1.featurize(tokens);
    let prediction = clf1.model.predict(&x);
    let features = match encoding {
        Clf1Encoding::OneHot => {
            let mut v = [0.0; 3];
            v[prediction.label.index()] = 1.0;
            v
        }
        Clf1Encoding::Probabilities => clf1.model.class_probabilities(&x),
    };
    (prediction, features)
}

fn fuse(
    clf1: Option<&TextClassifier>,
    dict: &PseudoDict,
    layout: &FusionLayout,
    tokens: &[Token],
) -> (Vec<f64>, EmoteStats, Option<Prediction>) {
    let mut fusion = Vec::with_capacity(layout.len());
    let mut clf1_pred = None;
    if let Some(c) = clf1 {
        let (p, f) = clf1_features(c, tokens, layout.encoding);
        fusion.extend_from_slice(&f);
        clf1_pred = Some(p);
    }
    let stats = extract_emote_stats(tokens, dict);
    if layout.stats {
        fusion.extend_from_slice(&stats.to_features());
    }
    (fusion, stats, clf1_pred)
}

/// Trains CLF2 on fusion vectors of `train_data`. CLF1 is cloned, never
/// modified. Passing no CLF1 gives the stats-only model.
pub fn train_loove(
    train_data: &[LabeledExample],
    clf1: Option<&TextClassifier>,
    clf1_tag: &str,
    pseudodict: &PseudoDict,
    emotes: &EmoteDictionary,
    config: &LooveConfig,
    seed: u64,
) -> Result<LooveModel> {
    let layout = FusionLayout {
        version: FUSION_VERSION,
        clf1: clf1.is_some(),
        stats: config.use_stats,
        encoding: config.encoding,
    };
    if layout.is_empty() {
        return Err(Error::Config("LOOVE needs CLF1, emote statistics, or both".into()));
    }
    let clf2 = if layout.stats {
        let rows: Vec<FeatureVector> = train_data
            .par_iter()
            .map(|e| {
                let tokens = tokenize(&e.text, emotes);
                FeatureVector::from_dense(&fuse(clf1, pseudodict, &layout, &tokens).0)
            })
            .collect();
        let labels = train_data.iter().map(|e| e.label).collect();
        let data = Dataset::new(rows, labels, layout.len());
        Some(train(config.clf2_algorithm, &data, &config.hyper, seed)?)
    } else {
        None
    };
    Ok(LooveModel {
        clf1: clf1.cloned(),
        clf1_tag: if clf1.is_some() { clf1_tag.to_string() } else { "none".to_string() },
        pseudodict: pseudodict.clone(),
        emotes: emotes.clone(),
        layout,
        clf2,
    })
}

const BUNDLE_FORMAT: &str = "loove-bundle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BundleManifest {
    format: String,
    version: u32,
    tool_version: String,
    layout: FusionLayout,
    clf1_tag: String,
    clf2_algorithm: Option<Algorithm>,
    /// File name to sha256.
    files: std::collections::BTreeMap<String, String>,
}

impl LooveModel {
    pub fn predict_tokens(&self, tokens: &[Token]) -> LoovePrediction {
        let (fusion, stats, clf1) = fuse(self.clf1.as_ref(), &self.pseudodict, &self.layout, tokens);
        let label = match (&self.clf2, clf1) {
            (Some(m), _) => m.predict(&FeatureVector::from_dense(&fusion)).label,
            (None, Some(p)) => p.label,
            (None, None) => unreachable!("layout has CLF1 or CLF2"),
        };
        LoovePrediction {
            label,
            fusion,
            stats,
            clf1,
        }
    }

    pub fn predict(&self, text: &str) -> LoovePrediction {
        self.predict_tokens(&tokenize(text, &self.emotes))
    }

    pub fn predict_batch(&self, texts: &[&str]) -> Vec<LoovePrediction> {
        texts.par_iter().map(|t| self.predict(t)).collect()
    }

    pub fn evaluate(&self, examples: &[LabeledExample]) -> Result<EvalReport> {
        let predicted: Vec<SentimentLabel> = examples.par_iter().map(|e| self.predict(&e.text).label).collect();
        EvalReport::from_pairs(examples.iter().map(|e| e.label).zip(predicted))
    }

    /// Gini importances of CLF2 over the fusion features.
    pub fn feature_importance(&self) -> Result<ImportanceReport> {
        let clf2 = self
            .clf2
            .as_ref()
            .ok_or_else(|| Error::Unsupported("model has no secondary classifier".into()))?;
        Ok(ImportanceReport::new(clf2.gini_importances()?, self.layout.names(), self.layout.groups()))
    }

    /// Writes clf1.json, pseudodict.tsv, clf2.json, emotes.txt and a
    /// manifest.json with their hashes. Absent stages have no file.
    pub fn save_bundle(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = std::collections::BTreeMap::new();
        if let Some(c) = &self.clf1 {
            c.save(dir.join("clf1.json"))?;
            files.insert("clf1.json".to_string(), String::new());
        }
        self.pseudodict.save_tsv(dir.join("pseudodict.tsv"))?;
        files.insert("pseudodict.tsv".to_string(), String::new());
        if let Some(m) = &self.clf2 {
            m.save(dir.join("clf2.json"))?;
            files.insert("clf2.json".to_string(), String::new());
        }
        self.emotes.save(dir.join("emotes.txt"))?;
        files.insert("emotes.txt".to_string(), String::new());
        for (name, hash) in files.iter_mut() {
            *hash = sha256_file(dir.join(name))?;
        }
        let manifest = BundleManifest {
            format: BUNDLE_FORMAT.into(),
            version: 1,
            tool_version: crate::manifest::TOOL_VERSION.into(),
            layout: self.layout,
            clf1_tag: self.clf1_tag.clone(),
            clf2_algorithm: self.clf2.as_ref().map(|m| m.algorithm),
            files,
        };
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
    }

    /// Loads a bundle, refusing files whose hashes differ from the manifest.
    pub fn load_bundle(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.json");
        let manifest: BundleManifest =
            serde_json::from_str(&fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?)?;
        if manifest.format != BUNDLE_FORMAT || manifest.layout.version != FUSION_VERSION {
            return Err(Error::Format(format!("{}: not a supported LOOVE bundle", dir.display())));
        }
        for (name, hash) in &manifest.files {
            if &sha256_file(dir.join(name))? != hash {
                return Err(Error::Format(format!("{}: hash mismatch for {name}", dir.display())));
            }
        }
        let has = |name: &str| manifest.files.contains_key(name);
        let clf1 = if has("clf1.json") {
            Some(TextClassifier::load(dir.join("clf1.json"))?)
        } else {
            None
        };
        let clf2 = if has("clf2.json") {
            Some(TrainedModel::load(dir.join("clf2.json"))?)
        } else {
            None
        };
        if clf1.is_some() != manifest.layout.clf1 || clf2.is_some() != manifest.layout.stats {
            return Err(Error::Format(format!("{}: bundle files disagree with layout", dir.display())));
        }
        Ok(LooveModel {
            clf1,
            clf1_tag: manifest.clf1_tag,
            pseudodict: PseudoDict::load_tsv(dir.join("pseudodict.tsv"))?,
            emotes: load_emote_dictionary(&[dir.join("emotes.txt")])?,
            layout: manifest.layout,
            clf2,
        })
    }
}
