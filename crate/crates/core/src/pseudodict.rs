//! Emote pseudo-dictionary: an emote's valence is the mean valence of its
//! closest lexicon-tagged neighbors in embedding space.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::SentimentLexicon;
use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};
use crate::tokenize::TokenKind;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    #[default]
    Mean,
    /// Weights each neighbor by its (non-negative) cosine similarity.
    SimilarityWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PseudoDictConfig {
    pub k: usize,
    /// Neighbor ranks scanned per emote, counted over all token kinds.
    pub search_cap: usize,
    pub pooling: Pooling,
}

impl Default for PseudoDictConfig {
    fn default() -> Self {
        PseudoDictConfig {
            k: 5,
            search_cap: 1000,
            pooling: Pooling::Mean,
        }
    }
}

impl PseudoDictConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.search_cap {
            return Err(Error::Config(format!(
                "need 1 <= k <= search_cap, got k={} cap={}",
                self.k, self.search_cap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub token: String,
    pub similarity: f64,
    pub valence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoDictEntry {
    pub emote: String,
    pub valence: f64,
    /// Number of neighbors pooled. Equals `evidence.len()` unless the entry
    /// was loaded from TSV, which carries no evidence.
    pub k_used: usize,
    pub evidence: Vec<Evidence>,
}

impl PseudoDictEntry {
    /// Pools evidence; `None` when there is none.
    pub fn from_evidence(emote: impl Into<String>, evidence: Vec<Evidence>, pooling: Pooling) -> Option<Self> {
        if evidence.is_empty() {
            return None;
        }
        let mean = evidence.iter().map(|e| e.valence).sum::<f64>() / evidence.len() as f64;
        let valence = match pooling {
            Pooling::Mean => mean,
            Pooling::SimilarityWeighted => {
                let w: f64 = evidence.iter().map(|e| e.similarity.max(0.0)).sum();
                if w > 0.0 {
                    evidence.iter().map(|e| e.similarity.max(0.0) * e.valence).sum::<f64>() / w
                } else {
                    mean
                }
            }
        };
        Some(PseudoDictEntry {
            emote: emote.into(),
            valence,
            k_used: evidence.len(),
            evidence,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PseudoDict {
    entries: BTreeMap<String, PseudoDictEntry>,
}

impl PseudoDict {
    pub fn new() -> Self {
        Self::default()
    }

    /// A dictionary with given valences and no evidence.
    pub fn from_valences<I, S>(valences: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut dict = PseudoDict::new();
        for (emote, valence) in valences {
            let emote = emote.into();
            dict.insert(PseudoDictEntry {
                emote: emote.clone(),
                valence,
                k_used: 0,
                evidence: Vec::new(),
            });
        }
        dict
    }

    pub fn insert(&mut self, entry: PseudoDictEntry) -> Option<PseudoDictEntry> {
        self.entries.insert(entry.emote.clone(), entry)
    }

    pub fn get(&self, emote: &str) -> Option<&PseudoDictEntry> {
        self.entries.get(emote)
    }

    pub fn valence(&self, emote: &str) -> Option<f64> {
        self.entries.get(emote).map(|e| e.valence)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in emote string order.
    pub fn iter(&self) -> impl Iterator<Item = &PseudoDictEntry> {
        self.entries.values()
    }

    pub fn valences(&self) -> HashMap<String, f64> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.valence)).collect()
    }

    pub fn write_tsv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(b'\t')
            .has_headers(false)
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        for e in self.iter() {
            w.write_record([e.emote.as_str(), &e.valence.to_string(), &e.k_used.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<tsv>", e))?;
        Ok(())
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(std::io::BufWriter::new(file))
    }

    /// Reads `emote<TAB>valence<TAB>k_used` lines; `k_used` is optional.
    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut dict = PseudoDict::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let emote = parts.next().unwrap_or_default();
            let bad = || Error::Format(format!("{}:{}: bad pseudo-dictionary line", path.display(), n + 1));
            let valence: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            if emote.is_empty() || !valence.is_finite() || !(-1.0..=1.0).contains(&valence) {
                return Err(bad());
            }
            let k_used = match parts.next() {
                Some(k) => k.trim().parse().map_err(|_| bad())?,
                None => 0,
            };
            dict.insert(PseudoDictEntry {
                emote: emote.to_string(),
                valence,
                k_used,
                evidence: Vec::new(),
            });
        }
        Ok(dict)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(serde_json::from_str(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?)
    }
}

/// Kinds a neighbor may have to count as evidence.
const EVIDENCE_KINDS: [TokenKind; 3] = [TokenKind::Word, TokenKind::Emoticon, TokenKind::Emoji];

/// Valence of the token at `index` from its first `k` lexicon-tagged,
/// non-emote neighbors within the top `search_cap`. The token itself never
/// counts, so for lexicon words this is a leave-one-out estimate.
pub fn infer_valence(
    store: &EmbeddingStore,
    index: usize,
    lexicon: &SentimentLexicon,
    config: &PseudoDictConfig,
) -> Option<PseudoDictEntry> {
    let hits = store.nearest_indices(store.vector_at(index), config.search_cap, None, &[index]);
    let evidence: Vec<Evidence> = hits
        .into_iter()
        .filter(|&(i, _)| EVIDENCE_KINDS.contains(&store.kind(i)))
        .filter_map(|(i, sim)| {
            lexicon.valence(store.token(i)).map(|v| Evidence {
                token: store.token(i).to_string(),
                similarity: sim,
                valence: v,
            })
        })
        .take(config.k)
        .collect();
    PseudoDictEntry::from_evidence(store.token(index), evidence, config.pooling)
}

fn build_for(
    store: &EmbeddingStore,
    targets: Vec<usize>,
    lexicon: &SentimentLexicon,
    config: &PseudoDictConfig,
) -> Result<PseudoDict> {
    config.validate()?;
    if lexicon.is_empty() {
        return Err(Error::Config("sentiment lexicon is empty".into()));
    }
    let entries: Vec<PseudoDictEntry> = targets
        .into_par_iter()
        .filter_map(|i| infer_valence(store, i, lexicon, config))
        .collect();
    let mut dict = PseudoDict::new();
    for e in entries {
        dict.insert(e);
    }
    Ok(dict)
}

/// Entries for every Emote-kind token with at least one tagged neighbor.
pub fn build_pseudodict(store: &EmbeddingStore, lexicon: &SentimentLexicon, config: &PseudoDictConfig) -> Result<PseudoDict> {
    let targets = (0..store.len()).filter(|&i| store.kind(i) == TokenKind::Emote).collect();
    build_for(store, targets, lexicon, config)
}

/// Inferred valences for the lexicon's own words (those in the store), each
/// excluding its own entry; used to score the method against the lexicon.
pub fn build_word_targeted(store: &EmbeddingStore, lexicon: &SentimentLexicon, config: &PseudoDictConfig) -> Result<PseudoDict> {
    let targets = (0..store.len())
        .filter(|&i| store.kind(i) != TokenKind::Emote && lexicon.contains(store.token(i)))
        .collect();
    build_for(store, targets, lexicon, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub rmse: f64,
    pub n: usize,
}

/// Root mean squared error over tokens present in both maps.
pub fn evaluate_pseudodict(dict: &PseudoDict, reference: &HashMap<String, f64>) -> Result<RmseReport> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for e in dict.iter() {
        if let Some(r) = reference.get(&e.emote) {
            sum += (e.valence - r).powi(2);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Evaluation("no overlap between dictionary and reference".into()));
    }
    Ok(RmseReport {
        rmse: (sum / n as f64).sqrt(),
        n,
    })
}
