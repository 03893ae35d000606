//! Skip-gram with negative sampling over tokenized chat, and exact cosine
//! nearest-neighbor queries over the resulting vectors.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::EmoteDictionary;
use crate::error::{Error, Result};
use crate::tokenize::{classify_token, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f32,
    /// Frequent-token subsampling threshold; 0 disables subsampling.
    pub subsample_t: f64,
    pub seed: u64,
    /// 1 gives bit-reproducible training; more workers update shared weights
    /// without locks.
    pub threads: usize,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            dim: 100,
            window: 5,
            min_count: 30,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample_t: 1e-4,
            seed: 1,
            threads: 1,
        }
    }
}

/// Token vectors with kinds and corpus frequencies. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    tokens: Vec<String>,
    kinds: Vec<TokenKind>,
    freqs: Vec<u64>,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
    config: Option<EmbedConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub token: String,
    pub similarity: f64,
    pub kind: TokenKind,
}

/// Neighbors by decreasing cosine similarity, ties by token string.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NeighborResult {
    pub neighbors: Vec<Neighbor>,
}

impl NeighborResult {
    pub fn tokens(&self) -> Vec<&str> {
        self.neighbors.iter().map(|n| n.token.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    Token(&'a str),
    Vector(&'a [f32]),
}

/// L2 norm accumulated in f64, in component order.
pub fn l2_norm(v: &[f32]) -> f64 {
    let mut s = 0.0f64;
    for &x in v {
        s += x as f64 * x as f64;
    }
    s.sqrt()
}

/// Cosine similarity with the dot product accumulated in f64 in component
/// order. Zero when either vector is zero.
pub fn cosine(a: &[f32], norm_a: f64, b: &[f32], norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    let mut dot = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
    }
    dot / (norm_a * norm_b)
}

/// Heap entry ordered so that the heap top is the worst kept candidate.
struct Candidate<'a> {
    sim: f64,
    token: &'a str,
    idx: usize,
}

impl Candidate<'_> {
    /// `Less` means `self` ranks ahead of `other`.
    fn rank_cmp(&self, other: &Self) -> Ordering {
        other.sim.total_cmp(&self.sim).then_with(|| self.token.cmp(other.token))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.rank_cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate<'_> {}
impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_cmp(other)
    }
}

const SCAN_CHUNK: usize = 8192;

impl EmbeddingStore {
    /// Builds a store from `(token, kind, frequency, vector)` entries.
    pub fn from_entries(dim: usize, entries: Vec<(String, TokenKind, u64, Vec<f32>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut store = EmbeddingStore {
            dim,
            tokens: Vec::with_capacity(entries.len()),
            kinds: Vec::with_capacity(entries.len()),
            freqs: Vec::with_capacity(entries.len()),
            vectors: Vec::with_capacity(entries.len() * dim),
            norms: Vec::with_capacity(entries.len()),
            index: HashMap::with_capacity(entries.len()),
            config: None,
        };
        for (token, kind, freq, vector) in entries {
            if vector.len() != dim {
                return Err(Error::Format(format!(
                    "vector for {token:?} has {} components, expected {dim}",
                    vector.len()
                )));
            }
            if vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::Format(format!("vector for {token:?} is not finite")));
            }
            if store.index.insert(token.clone(), store.tokens.len()).is_some() {
                return Err(Error::Format(format!("duplicate token {token:?}")));
            }
            store.norms.push(l2_norm(&vector));
            store.vectors.extend_from_slice(&vector);
            store.tokens.push(token);
            store.kinds.push(kind);
            store.freqs.push(freq);
        }
        Ok(store)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn config(&self) -> Option<&EmbedConfig> {
        self.config.as_ref()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn kind(&self, i: usize) -> TokenKind {
        self.kinds[i]
    }

    pub fn freq(&self, i: usize) -> u64 {
        self.freqs[i]
    }

    pub fn vector_at(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn norm_at(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.vector_at(i))
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Token indices of one kind, most frequent first (ties by token).
    pub fn top_by_kind(&self, kind: TokenKind, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).filter(|&i| self.kinds[i] == kind).collect();
        idx.sort_by(|&a, &b| self.freqs[b].cmp(&self.freqs[a]).then_with(|| self.tokens[a].cmp(&self.tokens[b])));
        idx.truncate(n);
        idx
    }

    /// Re-derives kinds from the tokens themselves, e.g. after loading a
    /// vector file without a sidecar.
    pub fn reclassify(&mut self, emotes: &EmoteDictionary) {
        for (t, k) in self.tokens.iter().zip(self.kinds.iter_mut()) {
            *k = classify_token(t, emotes);
        }
    }

    /// Top-`k` token indices by cosine to `query`, skipping `exclude` and any
    /// kind outside `filter`. Exact scan, fanned out over chunks.
    pub fn nearest_indices(
        &self,
        query: &[f32],
        k: usize,
        filter: Option<&[TokenKind]>,
        exclude: &[usize],
    ) -> Vec<(usize, f64)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let qnorm = l2_norm(query);
        let allowed = |i: usize| {
            !exclude.contains(&i) && filter.map_or(true, |f| f.contains(&self.kinds[i]))
        };
        let scan = |range: std::ops::Range<usize>| {
            let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
            for i in range {
                if !allowed(i) {
                    continue;
                }
                let cand = Candidate {
                    sim: cosine(query, qnorm, self.vector_at(i), self.norms[i]),
                    token: &self.tokens[i],
                    idx: i,
                };
                if heap.len() < k {
                    heap.push(cand);
                } else if cand < *heap.peek().expect("non-empty") {
                    heap.pop();
                    heap.push(cand);
                }
            }
            heap.into_vec()
        };
        let n = self.len();
        let mut all: Vec<Candidate> = if n <= SCAN_CHUNK {
            scan(0..n)
        } else {
            (0..n.div_ceil(SCAN_CHUNK))
                .into_par_iter()
                .map(|c| scan(c * SCAN_CHUNK..((c + 1) * SCAN_CHUNK).min(n)))
                .flatten()
                .collect()
        };
        all.sort();
        all.truncate(k);
        all.into_iter().map(|c| (c.idx, c.sim)).collect()
    }

    fn to_result(&self, hits: Vec<(usize, f64)>) -> NeighborResult {
        NeighborResult {
            neighbors: hits
                .into_iter()
                .map(|(i, s)| Neighbor {
                    token: self.tokens[i].clone(),
                    similarity: s,
                    kind: self.kinds[i],
                })
                .collect(),
        }
    }

    /// k nearest neighbors of a token (itself excluded) or of a raw vector.
    pub fn nearest(&self, query: Query<'_>, k: usize, filter: Option<&[TokenKind]>) -> Result<NeighborResult> {
        let hits = match query {
            Query::Token(t) => {
                let i = self.index_of(t).ok_or_else(|| Error::NotFound(t.to_string()))?;
                self.nearest_indices(self.vector_at(i), k, filter, &[i])
            }
            Query::Vector(v) => {
                if v.len() != self.dim {
                    return Err(Error::Config(format!(
                        "query has {} components, store has {}",
                        v.len(),
                        self.dim
                    )));
                }
                self.nearest_indices(v, k, filter, &[])
            }
        };
        Ok(self.to_result(hits))
    }

    /// Neighbors of `sum(positive) - sum(negative)` over unit-normalized
    /// vectors, excluding the argument tokens.
    pub fn analogy(&self, positive: &[&str], negative: &[&str], k: usize) -> Result<NeighborResult> {
        let mut target = vec![0.0f64; self.dim];
        let mut exclude = Vec::new();
        for (tokens, sign) in [(positive, 1.0), (negative, -1.0)] {
            for t in tokens {
                let i = self.index_of(t).ok_or_else(|| Error::NotFound(t.to_string()))?;
                exclude.push(i);
                let norm = self.norms[i];
                if norm == 0.0 {
                    continue;
                }
                for (acc, &x) in target.iter_mut().zip(self.vector_at(i)) {
                    *acc += sign * x as f64 / norm;
                }
            }
        }
        let query: Vec<f32> = target.iter().map(|&x| x as f32).collect();
        Ok(self.to_result(self.nearest_indices(&query, k, None, &exclude)))
    }

    /// Writes the common word2vec text format: a `count dim` header, then
    /// `token v1 ... vd` per line.
    pub fn save_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{} {}", self.len(), self.dim).map_err(io)?;
        for i in 0..self.len() {
            write!(w, "{}", self.tokens[i]).map_err(io)?;
            for x in self.vector_at(i) {
                write!(w, " {x}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Kinds, frequencies and training config, aligned with the vector file.
    pub fn save_sidecar(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let sidecar = Sidecar {
            format: SIDECAR_FORMAT.into(),
            version: 1,
            dim: self.dim,
            config: self.config,
            tokens: (0..self.len())
                .map(|i| SidecarToken {
                    token: self.tokens[i].clone(),
                    kind: self.kinds[i],
                    freq: self.freqs[i],
                })
                .collect(),
        };
        fs::write(path, serde_json::to_string(&sidecar)?).map_err(|e| Error::io(path, e))
    }

    pub fn save(&self, vectors: impl AsRef<Path>, sidecar: impl AsRef<Path>) -> Result<()> {
        self.save_text(vectors)?;
        self.save_sidecar(sidecar)
    }

    /// Loads a word2vec text file, taking kinds and frequencies from the
    /// sidecar when given (otherwise every token is a Word with frequency 0).
    pub fn load(vectors: impl AsRef<Path>, sidecar: Option<&Path>) -> Result<Self> {
        let path = vectors.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format(format!("{}: empty vector file", path.display())))?
            .map_err(|e| Error::io(path, e))?;
        let mut parts = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(count)), Some(Ok(dim))) = (parts.next(), parts.next()) else {
            return Err(Error::Format(format!("{}: bad header {header:?}", path.display())));
        };
        let meta: Option<Sidecar> = match sidecar {
            Some(p) => Some(serde_json::from_str(
                &fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            )?),
            None => None,
        };
        let meta_index: HashMap<&str, &SidecarToken> = meta
            .iter()
            .flat_map(|m| m.tokens.iter().map(|t| (t.token.as_str(), t)))
            .collect();
        let mut entries = Vec::with_capacity(count);
        for line in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let token = parts.next().unwrap_or_default().to_string();
            let vector = parts
                .filter(|p| !p.is_empty())
                .map(|p| p.parse::<f32>())
                .collect::<std::result::Result<Vec<f32>, _>>()
                .map_err(|e| Error::Format(format!("{}: {token:?}: {e}", path.display())))?;
            let (kind, freq) = meta_index
                .get(token.as_str())
                .map_or((TokenKind::Word, 0), |m| (m.kind, m.freq));
            entries.push((token, kind, freq, vector));
        }
        if entries.len() != count {
            return Err(Error::Format(format!(
                "{}: header says {count} vectors, found {}",
                path.display(),
                entries.len()
            )));
        }
        let mut store = Self::from_entries(dim, entries)?;
        store.config = meta.and_then(|m| m.config);
        Ok(store)
    }
}

const SIDECAR_FORMAT: &str = "embedding-sidecar";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    version: u32,
    dim: usize,
    config: Option<EmbedConfig>,
    tokens: Vec<SidecarToken>,
}

#[derive(Serialize, Deserialize)]
struct SidecarToken {
    token: String,
    kind: TokenKind,
    freq: u64,
}

/// Shared weight storage for the SGNS kernel.
trait Weights {
    fn get(&self, i: usize) -> f32;
    fn set(&self, i: usize, v: f32);
}

impl Weights for [Cell<f32>] {
    #[inline(always)]
    fn get(&self, i: usize) -> f32 {
        self[i].get()
    }
    #[inline(always)]
    fn set(&self, i: usize, v: f32) {
        self[i].set(v)
    }
}

impl Weights for [AtomicU32] {
    #[inline(always)]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self[i].load(AtomicOrdering::Relaxed))
    }
    #[inline(always)]
    fn set(&self, i: usize, v: f32) {
        self[i].store(v.to_bits(), AtomicOrdering::Relaxed)
    }
}

struct Vocab {
    tokens: Vec<String>,
    kinds: Vec<TokenKind>,
    freqs: Vec<u64>,
}

fn build_vocab<T: AsRef<[Token]>>(corpus: &[T], min_count: u64) -> (Vocab, HashMap<String, u32>) {
    let mut counts: HashMap<&str, (u64, TokenKind)> = HashMap::new();
    for doc in corpus {
        for t in doc.as_ref() {
            counts.entry(&t.text).or_insert((0, t.kind)).0 += 1;
        }
    }
    let mut kept: Vec<(&str, u64, TokenKind)> = counts
        .into_iter()
        .filter(|(_, (c, _))| *c >= min_count)
        .map(|(t, (c, k))| (t, c, k))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index = kept
        .iter()
        .enumerate()
        .map(|(i, (t, _, _))| (t.to_string(), i as u32))
        .collect();
    let vocab = Vocab {
        tokens: kept.iter().map(|k| k.0.to_string()).collect(),
        freqs: kept.iter().map(|k| k.1).collect(),
        kinds: kept.iter().map(|k| k.2).collect(),
    };
    (vocab, index)
}

struct Trainer<'a> {
    config: &'a EmbedConfig,
    keep_prob: Vec<f32>,
    negatives: WeightedIndex<f64>,
    total_words: u64,
}

impl Trainer<'_> {
    /// Processes `sentences` for one epoch. `processed` is the number of words
    /// seen by all workers before this call, used for the learning-rate decay.
    fn run<W: Weights + ?Sized>(
        &self,
        syn0: &W,
        syn1: &W,
        sentences: &[Vec<u32>],
        rng: &mut ChaCha8Rng,
        mut processed: u64,
    ) {
        let dim = self.config.dim;
        let window = self.config.window.max(1);
        let mut neu1e = vec![0.0f32; dim];
        let mut kept: Vec<u32> = Vec::new();
        let budget = (self.total_words * self.config.epochs as u64) as f64 + 1.0;
        for sentence in sentences {
            processed += sentence.len() as u64;
            let lr = self.config.initial_lr * (1.0 - processed as f64 / budget).max(1e-4) as f32;
            kept.clear();
            for &w in sentence {
                let p = self.keep_prob[w as usize];
                if p >= 1.0 || rng.gen::<f32>() < p {
                    kept.push(w);
                }
            }
            for pos in 0..kept.len() {
                let center = kept[pos] as usize;
                let reach = window - rng.gen_range(0..window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(kept.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = kept[ctx_pos] as usize;
                    neu1e.iter_mut().for_each(|x| *x = 0.0);
                    let c0 = center * dim;
                    for d in 0..=self.config.negatives {
                        let (target, label) = if d == 0 {
                            (context, 1.0f32)
                        } else {
                            let t = self.negatives.sample(rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0f32)
                        };
                        let t0 = target * dim;
                        let mut f = 0.0f32;
                        for k in 0..dim {
                            f += syn0.get(c0 + k) * syn1.get(t0 + k);
                        }
                        let sig = 1.0 / (1.0 + (-f.clamp(-30.0, 30.0)).exp());
                        let g = (label - sig) * lr;
                        for k in 0..dim {
                            let out = syn1.get(t0 + k);
                            neu1e[k] += g * out;
                            syn1.set(t0 + k, out + g * syn0.get(c0 + k));
                        }
                    }
                    for k in 0..dim {
                        syn0.set(c0 + k, syn0.get(c0 + k) + neu1e[k]);
                    }
                }
            }
        }
    }
}

/// Trains SGNS embeddings. Vectors come from the input (center) matrix.
pub fn train_embeddings<T: AsRef<[Token]> + Sync>(corpus: &[T], config: &EmbedConfig) -> Result<EmbeddingStore> {
    if config.dim == 0 || config.epochs == 0 || config.window == 0 {
        return Err(Error::Config("dim, window and epochs must be positive".into()));
    }
    let (vocab, index) = build_vocab(corpus, config.min_count.max(1));
    if vocab.tokens.len() < 2 {
        return Err(Error::Training(format!(
            "only {} tokens reach min_count {}",
            vocab.tokens.len(),
            config.min_count
        )));
    }
    let sentences: Vec<Vec<u32>> = corpus
        .iter()
        .map(|doc| doc.as_ref().iter().filter_map(|t| index.get(&t.text).copied()).collect())
        .collect();
    let total_words: u64 = vocab.freqs.iter().sum();
    let keep_prob: Vec<f32> = vocab
        .freqs
        .iter()
        .map(|&f| {
            if config.subsample_t <= 0.0 {
                return 1.0;
            }
            let thresh = config.subsample_t * total_words as f64;
            (((f as f64 / thresh).sqrt() + 1.0) * thresh / f as f64) as f32
        })
        .collect();
    let negatives = WeightedIndex::new(vocab.freqs.iter().map(|&f| (f as f64).powf(0.75)))
        .map_err(|e| Error::Training(format!("negative sampling table: {e}")))?;

    let n = vocab.tokens.len();
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut syn0: Vec<f32> = (0..n * dim)
        .map(|_| (rng.gen::<f32>() - 0.5) / dim as f32)
        .collect();
    let mut syn1 = vec![0.0f32; n * dim];
    let trainer = Trainer {
        config,
        keep_prob,
        negatives,
        total_words,
    };
    let words_per_epoch: u64 = sentences.iter().map(|s| s.len() as u64).sum();

    if config.threads <= 1 {
        let s0 = Cell::from_mut(syn0.as_mut_slice()).as_slice_of_cells();
        let s1 = Cell::from_mut(syn1.as_mut_slice()).as_slice_of_cells();
        for epoch in 0..config.epochs {
            let mut erng = ChaCha8Rng::seed_from_u64(config.seed);
            erng.set_stream(1 + epoch as u64);
            trainer.run(s0, s1, &sentences, &mut erng, epoch as u64 * words_per_epoch);
        }
    } else {
        let s0: Vec<AtomicU32> = syn0.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let s1: Vec<AtomicU32> = syn1.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        let workers = config.threads;
        let chunk = sentences.len().div_ceil(workers).max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Training(format!("thread pool: {e}")))?;
        for epoch in 0..config.epochs {
            pool.install(|| {
                sentences.par_chunks(chunk).enumerate().for_each(|(w, part)| {
                    let mut wrng = ChaCha8Rng::seed_from_u64(config.seed);
                    wrng.set_stream(((1 + epoch as u64) << 16) | w as u64);
                    // approximate position of this worker in the epoch
                    let before = epoch as u64 * words_per_epoch
                        + (w * chunk) as u64 * words_per_epoch / sentences.len().max(1) as u64;
                    trainer.run(s0.as_slice(), s1.as_slice(), part, &mut wrng, before);
                });
            });
        }
        syn0 = s0.iter().map(|a| f32::from_bits(a.load(AtomicOrdering::Relaxed))).collect();
    }

    let entries = (0..n)
        .map(|i| {
            (
                vocab.tokens[i].clone(),
                vocab.kinds[i],
                vocab.freqs[i],
                syn0[i * dim..(i + 1) * dim].to_vec(),
            )
        })
        .collect();
    let mut store = EmbeddingStore::from_entries(dim, entries)?;
    store.config = Some(*config);
    Ok(store)
}
