//! Declarative run configuration read from TOML. Command-line flags are
//! applied on top by the caller.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{Algorithm, TextModelConfig};
use crate::corpus::{load_emote_dictionary, load_lexicon, EmoteDictionary, LexiconFormat, SentimentLexicon, VADER_SCALE};
use crate::embed::EmbedConfig;
use crate::error::{Error, Result};
use crate::loove::LooveConfig;
use crate::pseudodict::PseudoDictConfig;
use crate::tokenize::{load_lemmas, load_stopwords, Lemmatizer, TextResources};

/// A labeled dataset used to train a first-stage classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDataset {
    pub tag: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsConfig {
    /// Chat log (JSON lines) for embedding training.
    pub corpus: Option<PathBuf>,
    /// Labeled Twitch dataset (TSV) used for training and testing.
    pub dataset: Option<PathBuf>,
    /// Labeled datasets for first-stage classifiers, in table row order.
    pub external: Vec<NamedDataset>,
    pub lexicons: Vec<PathBuf>,
    pub emotes: Vec<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub pseudodict: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub train_fraction: f64,
    /// Algorithm of the first-stage classifiers in the LOOVE grid.
    pub clf1_algorithm: Algorithm,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            train_fraction: 0.8,
            clf1_algorithm: Algorithm::RF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub paths: PathsConfig,
    pub text: TextModelConfig,
    pub embed: EmbedConfig,
    pub pseudodict: PseudoDictConfig,
    pub loove: LooveConfig,
    pub grid: GridConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            threads: None,
            paths: PathsConfig::default(),
            text: TextModelConfig::default(),
            embed: EmbedConfig::default(),
            pseudodict: PseudoDictConfig::default(),
            loove: LooveConfig::default(),
            grid: GridConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Union of the configured emote lists; empty when none are configured.
    pub fn emote_dictionary(&self) -> Result<EmoteDictionary> {
        if self.paths.emotes.is_empty() {
            return Ok(EmoteDictionary::new());
        }
        load_emote_dictionary(&self.paths.emotes)
    }

    /// Merge of the configured lexicons, later files overriding earlier ones.
    pub fn lexicon(&self) -> Result<SentimentLexicon> {
        let mut lexicon = SentimentLexicon::new();
        for path in &self.paths.lexicons {
            let load = load_lexicon(path, lexicon_format_for(path))?;
            if load.skipped > 0 {
                log::warn!("{}: skipped {} malformed rows", path.display(), load.skipped);
            }
            lexicon.merge(&load.lexicon);
        }
        Ok(lexicon)
    }

    /// English defaults, overridden by configured stop word and lemma files.
    pub fn text_resources(&self) -> Result<TextResources> {
        let mut resources = TextResources::english();
        if let Some(p) = &self.paths.stopwords {
            resources.stopwords = load_stopwords(p)?;
        }
        if let Some(p) = &self.paths.lemmas {
            resources.lemmatizer = Lemmatizer::new(load_lemmas(p)?);
        }
        Ok(resources)
    }
}

/// JSON files hold valences already in [-1, 1]; TSV files whose name
/// mentions VADER hold native VADER scores; other TSV files are taken as is.
pub fn lexicon_format_for(path: &Path) -> LexiconFormat {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if name.ends_with(".json") {
        LexiconFormat::Json { scale: 1.0 }
    } else if name.contains("vader") {
        LexiconFormat::Tsv { scale: VADER_SCALE }
    } else {
        LexiconFormat::Tsv { scale: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::ProcessingLevel;

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        let partial = RunConfig::from_toml(
            "seed = 7\n[text]\nlevel = \"P3\"\n[embed]\ndim = 50\n[[paths.external]]\ntag = \"T\"\npath = \"t.tsv\"\n",
        )
        .unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.text.level, ProcessingLevel::P3);
        assert_eq!(partial.embed.dim, 50);
        assert_eq!(partial.embed.window, 5);
        assert_eq!(partial.paths.external[0].tag, "T");
        let nested = RunConfig::from_toml("[text.hyper.rf]\nn_trees = 15\n[text.hyper.svm]\nc = 2.0\n").unwrap();
        assert_eq!(nested.text.hyper.rf.n_trees, 15);
        assert_eq!(nested.text.hyper.rf.min_samples_leaf, 1);
        assert_eq!(nested.text.hyper.svm.c, 2.0);
        assert_eq!(nested.text.hyper.svm.epochs, 100);
        assert!(matches!(RunConfig::from_toml("seed = \"x\""), Err(Error::Config(_))));
    }

    #[test]
    fn lexicon_formats() {
        assert_eq!(lexicon_format_for(Path::new("x/vader_lexicon.txt")), LexiconFormat::vader());
        assert_eq!(lexicon_format_for(Path::new("emoji.json")), LexiconFormat::Json { scale: 1.0 });
        assert_eq!(lexicon_format_for(Path::new("mine.tsv")), LexiconFormat::Tsv { scale: 1.0 });
    }
}
