use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{evaluate, train, Algorithm, Dataset, EvalReport, Hyperparams, ImportanceReport, Prediction, TrainedModel};
use crate::corpus::{EmoteDictionary, LabeledExample};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, NgramOrder, NgramVocab, Weighting};
use crate::tokenize::{process, tokenize, ProcessingLevel, TextResources, Token};

/// Everything needed to turn raw text into a trained bag-of-ngram model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextModelConfig {
    pub level: ProcessingLevel,
    pub order: NgramOrder,
    pub algorithm: Algorithm,
    pub weighting: Weighting,
    pub min_count: usize,
    pub hyper: Hyperparams,
}

impl Default for TextModelConfig {
    fn default() -> Self {
        TextModelConfig {
            level: ProcessingLevel::P1,
            order: NgramOrder::UnigramBigram,
            algorithm: Algorithm::RF,
            weighting: Weighting::Counts,
            min_count: 1,
            hyper: Hyperparams::default(),
        }
    }
}

/// A trained model bundled with the text pipeline and vocabulary it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextClassifier {
    pub level: ProcessingLevel,
    pub weighting: Weighting,
    pub resources: TextResources,
    pub vocab: NgramVocab,
    pub model: TrainedModel,
}

impl TextClassifier {
    pub fn train(
        examples: &[LabeledExample],
        emotes: &EmoteDictionary,
        config: &TextModelConfig,
        resources: &TextResources,
        seed: u64,
    ) -> Result<Self> {
        let raw: Vec<Vec<Token>> = examples.iter().map(|e| tokenize(&e.text, emotes)).collect();
        let mut resources = resources.clone();
        if config.level == ProcessingLevel::P3 {
            resources.learn_vocabulary(raw.iter().map(Vec::as_slice));
        }
        let processed: Vec<Vec<Token>> = raw
            .iter()
            .map(|t| process(t, config.level, &resources))
            .collect();
        let vocab = NgramVocab::build(&processed, config.order, config.min_count)?;
        let rows: Vec<FeatureVector> = processed
            .iter()
            .map(|t| vocab.vectorize(t, config.weighting))
            .collect();
        let data = Dataset::new(rows, examples.iter().map(|e| e.label).collect(), vocab.len());
        let mut model = train(config.algorithm, &data, &config.hyper, seed)?;
        model.vocab_hash = Some(vocab.hash());
        Ok(TextClassifier {
            level: config.level,
            weighting: config.weighting,
            resources,
            vocab,
            model,
        })
    }

    /// Features of already tokenized (unprocessed) text.
    pub fn featurize(&self, raw: &[Token]) -> FeatureVector {
        let processed = process(raw, self.level, &self.resources);
        self.vocab.vectorize(&processed, self.weighting)
    }

    pub fn predict_tokens(&self, raw: &[Token]) -> Prediction {
        self.model.predict(&self.featurize(raw))
    }

    pub fn predict(&self, text: &str, emotes: &EmoteDictionary) -> Prediction {
        self.predict_tokens(&tokenize(text, emotes))
    }

    pub fn evaluate(&self, examples: &[LabeledExample], emotes: &EmoteDictionary) -> Result<EvalReport> {
        let rows: Vec<FeatureVector> = examples
            .iter()
            .map(|e| self.featurize(&tokenize(&e.text, emotes)))
            .collect();
        let labels: Vec<_> = examples.iter().map(|e| e.label).collect();
        evaluate(&self.model, &rows, &labels)
    }

    /// Gini importances grouped by the emote involvement of each n-gram.
    pub fn importance_report(&self) -> Result<ImportanceReport> {
        let per_head = self.model.gini_importances()?;
        let groups = self
            .vocab
            .kinds()
            .into_iter()
            .map(|k| k.as_str().to_string())
            .collect();
        Ok(ImportanceReport::new(per_head, self.vocab.names(), groups))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let clf: TextClassifier = serde_json::from_str(text)?;
        if clf.model.vocab_hash.as_deref().is_some_and(|h| h != clf.vocab.hash()) {
            return Err(Error::Format("model and vocabulary hashes differ".into()));
        }
        Ok(clf)
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
