//! N-gram vocabularies and sparse bag-of-ngram vectors.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tokenize::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NgramOrder {
    Unigram,
    UnigramBigram,
}

impl NgramOrder {
    /// Suffix used in table rows, e.g. `RF.2`.
    pub fn suffix(self) -> u8 {
        match self {
            NgramOrder::Unigram => 1,
            NgramOrder::UnigramBigram => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ngram {
    Uni(String),
    Bi(String, String),
}

impl fmt::Display for Ngram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ngram::Uni(a) => f.write_str(a),
            Ngram::Bi(a, b) => write!(f, "{a} {b}"),
        }
    }
}

/// Emote involvement of a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Unigram whose token is an emote.
    EmoteOnly,
    /// Bigram with at least one emote.
    EmotePlus,
    Other,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::EmoteOnly => "emote_only",
            FeatureKind::EmotePlus => "emote_plus",
            FeatureKind::Other => "other",
        }
    }

    pub fn is_emote(self) -> bool {
        self != FeatureKind::Other
    }
}

/// How n-gram occurrences become feature values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Counts,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabFeature {
    pub ngram: Ngram,
    pub kind: FeatureKind,
}

const VOCAB_FORMAT: &str = "ngram-vocab";
const VOCAB_VERSION: u32 = 1;

/// Dense 0..N-1 index over n-grams, in first-occurrence order.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramVocab {
    order: NgramOrder,
    features: Vec<VocabFeature>,
    index: HashMap<Ngram, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    format: String,
    version: u32,
    order: NgramOrder,
    features: Vec<VocabFeature>,
}

fn unigram_kind(kind: TokenKind) -> FeatureKind {
    if kind == TokenKind::Emote {
        FeatureKind::EmoteOnly
    } else {
        FeatureKind::Other
    }
}

fn bigram_kind(a: TokenKind, b: TokenKind) -> FeatureKind {
    if a == TokenKind::Emote || b == TokenKind::Emote {
        FeatureKind::EmotePlus
    } else {
        FeatureKind::Other
    }
}

fn for_each_ngram(tokens: &[Token], order: NgramOrder, mut f: impl FnMut(Ngram, FeatureKind)) {
    for t in tokens {
        f(Ngram::Uni(t.text.clone()), unigram_kind(t.kind));
    }
    if order == NgramOrder::UnigramBigram {
        for w in tokens.windows(2) {
            f(
                Ngram::Bi(w[0].text.clone(), w[1].text.clone()),
                bigram_kind(w[0].kind, w[1].kind),
            );
        }
    }
}

impl NgramVocab {
    /// Collects every n-gram seen at least `min_count` times. Bigrams never
    /// span two messages. A feature's kind comes from its first occurrence.
    pub fn build<T: AsRef<[Token]>>(corpus: &[T], order: NgramOrder, min_count: usize) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if corpus.is_empty() {
            return Err(Error::Config("cannot build a vocabulary from an empty corpus".into()));
        }
        let mut seen: HashMap<Ngram, usize> = HashMap::new();
        let mut first: Vec<(Ngram, FeatureKind, usize)> = Vec::new();
        for doc in corpus {
            for_each_ngram(doc.as_ref(), order, |ngram, kind| {
                match seen.get(&ngram) {
                    Some(&i) => first[i].2 += 1,
                    None => {
                        seen.insert(ngram.clone(), first.len());
                        first.push((ngram, kind, 1));
                    }
                }
            });
        }
        let features: Vec<VocabFeature> = first
            .into_iter()
            .filter(|(_, _, c)| *c >= min_count)
            .map(|(ngram, kind, _)| VocabFeature { ngram, kind })
            .collect();
        if features.is_empty() {
            return Err(Error::Config(format!(
                "no n-gram occurs at least {min_count} times"
            )));
        }
        Ok(Self::from_features(order, features))
    }

    fn from_features(order: NgramOrder, features: Vec<VocabFeature>) -> Self {
        let index = features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.ngram.clone(), i))
            .collect();
        NgramVocab {
            order,
            features,
            index,
        }
    }

    pub fn order(&self) -> NgramOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, ngram: &Ngram) -> Option<usize> {
        self.index.get(ngram).copied()
    }

    pub fn feature(&self, index: usize) -> &VocabFeature {
        &self.features[index]
    }

    pub fn features(&self) -> &[VocabFeature] {
        &self.features
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.features.iter().map(|f| f.kind).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.ngram.to_string()).collect()
    }

    /// Fraction of features per kind, in `[EmoteOnly, EmotePlus, Other]` order.
    pub fn kind_fractions(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        for f in &self.features {
            counts[f.kind as usize] += 1;
        }
        let n = self.features.len().max(1) as f64;
        counts.map(|c| c as f64 / n)
    }

    /// Counts (or presence flags) of in-vocabulary n-grams; the rest is ignored.
    pub fn vectorize(&self, tokens: &[Token], weighting: Weighting) -> FeatureVector {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for_each_ngram(tokens, self.order, |ngram, _| {
            if let Some(i) = self.get(&ngram) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        });
        if weighting == Weighting::Binary {
            counts.values_mut().for_each(|v| *v = 1.0);
        }
        FeatureVector::from_pairs(counts)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&VocabFile {
            format: VOCAB_FORMAT.into(),
            version: VOCAB_VERSION,
            order: self.order,
            features: self.features.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: VocabFile = serde_json::from_str(text)?;
        if file.format != VOCAB_FORMAT || file.version != VOCAB_VERSION {
            return Err(Error::Format(format!(
                "unsupported vocabulary {} v{}",
                file.format, file.version
            )));
        }
        Ok(Self::from_features(file.order, file.features))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = self.to_json().expect("vocab serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
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

impl Serialize for NgramVocab {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VocabFile {
            format: VOCAB_FORMAT.into(),
            version: VOCAB_VERSION,
            order: self.order,
            features: self.features.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NgramVocab {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = VocabFile::deserialize(d)?;
        Ok(Self::from_features(file.order, file.features))
    }
}

/// Sparse vector with strictly increasing indices and no explicit zeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from arbitrary pairs; zeros are dropped and duplicates summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        FeatureVector { entries: merged }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for &(i, v) in &self.entries {
            if i < len {
                out[i] = v;
            }
        }
        out
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, v)| dense.get(i).copied().unwrap_or(0.0) * v)
            .sum()
    }
}
