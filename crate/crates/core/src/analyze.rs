//! Corpus and model analyses emitted as plot-ready tables.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::ImportanceReport;
use crate::corpus::SentimentLabel;
use crate::embed::EmbeddingStore;
use crate::error::{Error, Result};
use crate::tokenize::{Token, TokenKind};

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Unique tokens and occurrences per kind, in [`TokenKind::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTypeStats {
    pub unique: [usize; 4],
    pub occurrences: [u64; 4],
    /// Share of unique tokens per kind; sums to 1 unless the corpus is empty.
    pub fractions: [f64; 4],
}

/// Token string to (occurrence count, kind). A string keeps the kind of its
/// first occurrence.
pub fn frequency_table<T: AsRef<[Token]>>(corpus: &[T]) -> HashMap<String, (u64, TokenKind)> {
    let mut table: HashMap<String, (u64, TokenKind)> = HashMap::new();
    for doc in corpus {
        for t in doc.as_ref() {
            match table.get_mut(&t.text) {
                Some(e) => e.0 += 1,
                None => {
                    table.insert(t.text.clone(), (1, t.kind));
                }
            }
        }
    }
    table
}

/// Frequencies of one kind, largest first.
pub fn kind_frequencies(table: &HashMap<String, (u64, TokenKind)>, kind: TokenKind) -> Vec<u64> {
    let mut f: Vec<u64> = table.values().filter(|(_, k)| *k == kind).map(|(c, _)| *c).collect();
    f.sort_unstable_by(|a, b| b.cmp(a));
    f
}

pub fn token_type_stats(table: &HashMap<String, (u64, TokenKind)>) -> TokenTypeStats {
    let mut unique = [0usize; 4];
    let mut occurrences = [0u64; 4];
    for (count, kind) in table.values() {
        unique[kind.index()] += 1;
        occurrences[kind.index()] += count;
    }
    let total: usize = unique.iter().sum();
    let fractions = unique.map(|u| if total == 0 { 0.0 } else { u as f64 / total as f64 });
    TokenTypeStats {
        unique,
        occurrences,
        fractions,
    }
}

impl TokenTypeStats {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "unique", "occurrences", "fraction"])?;
        for kind in TokenKind::ALL {
            let i = kind.index();
            w.write_record([
                kind.as_str(),
                &self.unique[i].to_string(),
                &self.occurrences[i].to_string(),
                &format!("{:.6}", self.fractions[i]),
            ])?;
        }
        flush(w)
    }
}

/// Inclusive 1-based rank bounds for a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRange {
    pub start: usize,
    pub end: usize,
}

impl Default for RankRange {
    fn default() -> Self {
        RankRange { start: 1, end: 100_000 }
    }
}

pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankFrequencyFit {
    pub kind: Option<TokenKind>,
    /// Negated least-squares slope of ln(frequency) on ln(rank).
    pub exponent: f64,
    pub intercept: f64,
    pub rank_start: usize,
    pub rank_end: usize,
    pub n_points: usize,
    /// `None` when the frequencies in range are all equal.
    pub r_squared: Option<f64>,
    pub degenerate: bool,
}

/// Power-law fit of a rank-frequency table. `frequencies` may be in any
/// order; ranks are assigned after sorting descending. Zero frequencies are
/// skipped. The range is clipped to the table.
pub fn zipf_fit(frequencies: &[f64], kind: Option<TokenKind>, range: RankRange) -> Result<RankFrequencyFit> {
    let mut f: Vec<f64> = frequencies.iter().copied().filter(|&x| x > 0.0 && x.is_finite()).collect();
    f.sort_unstable_by(|a, b| b.total_cmp(a));
    let start = range.start.max(1);
    let end = range.end.min(f.len());
    let points: Vec<(f64, f64)> = (start..=end)
        .map(|r| ((r as f64).ln(), f[r - 1].ln()))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_POINTS} ranks with positive frequency, have {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let degenerate = points.iter().all(|p| p.1 == points[0].1);
    let slope = if degenerate { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let r_squared = if degenerate {
        None
    } else {
        let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        Some(1.0 - ss_res / syy)
    };
    Ok(RankFrequencyFit {
        kind,
        exponent: if slope == 0.0 { 0.0 } else { -slope },
        intercept,
        rank_start: start,
        rank_end: end,
        n_points: points.len(),
        r_squared,
        degenerate,
    })
}

/// Writes `rank,frequency` for a descending frequency list.
pub fn write_rank_frequency_csv<W: Write>(frequencies: &[u64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "frequency"])?;
    for (i, f) in frequencies.iter().enumerate() {
        w.write_record([(i + 1).to_string(), f.to_string()])?;
    }
    flush(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborTypeRow {
    pub kind: TokenKind,
    pub sample_size: usize,
    /// Mean share of each neighbor kind, in [`TokenKind::ALL`] order.
    pub fractions: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborTypeDistribution {
    pub k: usize,
    pub rows: Vec<NeighborTypeRow>,
}

/// For the `per_kind` most frequent tokens of each kind, the mean kind mix of
/// their `k` nearest neighbors. Kinds absent from the store get no row.
pub fn neighbor_type_distribution(store: &EmbeddingStore, per_kind: usize, k: usize) -> NeighborTypeDistribution {
    let mut rows = Vec::new();
    for kind in TokenKind::ALL {
        let sample = store.top_by_kind(kind, per_kind);
        if sample.is_empty() {
            continue;
        }
        let mixes: Vec<[f64; 4]> = sample
            .par_iter()
            .filter_map(|&i| {
                let hits = store.nearest_indices(store.vector_at(i), k, None, &[i]);
                if hits.is_empty() {
                    return None;
                }
                let mut mix = [0.0; 4];
                for (j, _) in &hits {
                    mix[store.kind(*j).index()] += 1.0;
                }
                Some(mix.map(|c| c / hits.len() as f64))
            })
            .collect();
        if mixes.is_empty() {
            continue;
        }
        let mut fractions = [0.0; 4];
        for m in &mixes {
            for c in 0..4 {
                fractions[c] += m[c];
            }
        }
        let n = mixes.len() as f64;
        rows.push(NeighborTypeRow {
            kind,
            sample_size: mixes.len(),
            fractions: fractions.map(|f| f / n),
        });
    }
    NeighborTypeDistribution { k, rows }
}

impl NeighborTypeDistribution {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["kind".to_string(), "sample_size".to_string()];
        header.extend(TokenKind::ALL.iter().map(|k| k.as_str().to_string()));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut row = vec![r.kind.as_str().to_string(), r.sample_size.to_string()];
            row.extend(r.fractions.iter().map(|f| format!("{f:.6}")));
            w.write_record(&row)?;
        }
        flush(w)
    }
}

/// Sentiment class of a valence: thirds of [-1, 1].
pub fn valence_class(v: f64) -> SentimentLabel {
    if v < -1.0 / 3.0 {
        SentimentLabel::Negative
    } else if v > 1.0 / 3.0 {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassHistogram {
    pub class: SentimentLabel,
    /// Source tokens in this class.
    pub tokens: usize,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentHistogram {
    pub neighbors: usize,
    /// `bins + 1` edges spanning [-1, 1].
    pub edges: Vec<f64>,
    pub classes: Vec<ClassHistogram>,
}

fn bin_of(v: f64, bins: usize) -> usize {
    (((v + 1.0) / 2.0 * bins as f64).floor() as usize).min(bins - 1)
}

/// For each store token with a valence, bins the valences of the tagged
/// tokens among its top `neighbors` neighbors, grouped by the source
/// token's class.
pub fn sentiment_neighborhood_histogram(
    store: &EmbeddingStore,
    valences: &HashMap<String, f64>,
    bins: usize,
    neighbors: usize,
) -> Result<SentimentHistogram> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let sources: Vec<(usize, f64)> = (0..store.len())
        .filter_map(|i| valences.get(store.token(i)).map(|&v| (i, v)))
        .collect();
    let per_token: Vec<(SentimentLabel, Vec<u64>)> = sources
        .par_iter()
        .map(|&(i, v)| {
            let mut counts = vec![0u64; bins];
            for (j, _) in store.nearest_indices(store.vector_at(i), neighbors, None, &[i]) {
                if let Some(&nv) = valences.get(store.token(j)) {
                    counts[bin_of(nv, bins)] += 1;
                }
            }
            (valence_class(v), counts)
        })
        .collect();
    let mut classes: Vec<ClassHistogram> = SentimentLabel::ALL
        .iter()
        .map(|&class| ClassHistogram {
            class,
            tokens: 0,
            counts: vec![0; bins],
        })
        .collect();
    for (class, counts) in per_token {
        let h = &mut classes[class.index()];
        h.tokens += 1;
        for (a, b) in h.counts.iter_mut().zip(counts) {
            *a += b;
        }
    }
    Ok(SentimentHistogram {
        neighbors,
        edges: (0..=bins).map(|b| -1.0 + 2.0 * b as f64 / bins as f64).collect(),
        classes,
    })
}

impl SentimentHistogram {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["class", "bin_low", "bin_high", "count"])?;
        for h in &self.classes {
            for (b, c) in h.counts.iter().enumerate() {
                w.write_record([
                    h.class.as_str(),
                    &format!("{:.4}", self.edges[b]),
                    &format!("{:.4}", self.edges[b + 1]),
                    &c.to_string(),
                ])?;
            }
        }
        flush(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    /// Occurrences at each 0-based rank, pooled over heads.
    pub histogram: Vec<u64>,
    pub count: usize,
    pub mean_rank: Option<f64>,
    pub median_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRankHistogram {
    pub top_n: usize,
    pub emote: RankSummary,
    pub other: RankSummary,
}

fn summarize(ranks: &mut [usize], top_n: usize) -> RankSummary {
    ranks.sort_unstable();
    let mut histogram = vec![0u64; top_n];
    for &r in ranks.iter() {
        histogram[r] += 1;
    }
    let n = ranks.len();
    let mean_rank = (n > 0).then(|| ranks.iter().sum::<usize>() as f64 / n as f64);
    let median_rank = (n > 0).then(|| {
        if n % 2 == 1 {
            ranks[n / 2] as f64
        } else {
            (ranks[n / 2 - 1] + ranks[n / 2]) as f64 / 2.0
        }
    });
    RankSummary {
        histogram,
        count: n,
        mean_rank,
        median_rank,
    }
}

/// Where emote features land among each head's `top_n` most important
/// features. `is_emote` decides by feature group.
pub fn top_feature_rank_histogram(
    report: &ImportanceReport,
    top_n: usize,
    is_emote: impl Fn(&str) -> bool,
) -> FeatureRankHistogram {
    let mut emote = Vec::new();
    let mut other = Vec::new();
    for head in &report.heads {
        for (rank, &f) in head.ranked.iter().take(top_n).enumerate() {
            if is_emote(&report.feature_groups[f]) {
                emote.push(rank);
            } else {
                other.push(rank);
            }
        }
    }
    FeatureRankHistogram {
        top_n,
        emote: summarize(&mut emote, top_n),
        other: summarize(&mut other, top_n),
    }
}

impl FeatureRankHistogram {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "emote", "other"])?;
        for r in 0..self.top_n {
            w.write_record([
                r.to_string(),
                self.emote.histogram[r].to_string(),
                self.other.histogram[r].to_string(),
            ])?;
        }
        flush(w)
    }
}

/// The `per_kind` most frequent tokens of each kind with their vectors, for
/// external projection tools.
pub fn export_vectors<W: Write>(store: &EmbeddingStore, per_kind: usize, out: W) -> Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["token".to_string(), "kind".to_string(), "freq".to_string()];
    header.extend((0..store.dim()).map(|d| format!("v{d}")));
    w.write_record(&header)?;
    let mut n = 0;
    for kind in TokenKind::ALL {
        for i in store.top_by_kind(kind, per_kind) {
            let mut row = vec![store.token(i).to_string(), kind.as_str().to_string(), store.freq(i).to_string()];
            row.extend(store.vector_at(i).iter().map(|x| x.to_string()));
            w.write_record(&row)?;
            n += 1;
        }
    }
    flush(w)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(t: &str, k: TokenKind) -> Token {
        Token::new(t, k)
    }

    #[test]
    fn type_stats_half_half() {
        let corpus = vec![vec![tok("hi", TokenKind::Word), tok("Kappa", TokenKind::Emote), tok("hi", TokenKind::Word)]];
        let s = token_type_stats(&frequency_table(&corpus));
        assert_eq!(s.fractions[TokenKind::Word.index()], 0.5);
        assert_eq!(s.fractions[TokenKind::Emote.index()], 0.5);
        assert_eq!(s.occurrences[TokenKind::Word.index()], 2);
        assert!((s.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zipf_exact_and_degenerate() {
        let f: Vec<f64> = (1..=1000).map(|r| 1e6 * (r as f64).powf(-0.97)).collect();
        let fit = zipf_fit(&f, None, RankRange::default()).unwrap();
        assert!((fit.exponent - 0.97).abs() < 1e-9);
        assert!((fit.r_squared.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(fit.rank_end, 1000);

        let flat = zipf_fit(&[5.0; 20], None, RankRange::default()).unwrap();
        assert_eq!(flat.exponent, 0.0);
        assert!(flat.degenerate);
        assert_eq!(flat.r_squared, None);

        assert!(matches!(zipf_fit(&[3.0; 9], None, RankRange::default()), Err(Error::Fit(_))));
        let clipped = RankRange { start: 5, end: 12 };
        assert!(zipf_fit(&f, None, clipped).is_err());
    }

    fn segregated() -> EmbeddingStore {
        let mut entries = Vec::new();
        let axes = [[1.0f32, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        for (k, kind) in TokenKind::ALL.iter().enumerate() {
            for j in 0..4 {
                let mut v = axes[k];
                v[(k + 1) % 4] = 0.01 * j as f32;
                entries.push((format!("{}{j}", kind.as_str()), *kind, 10 - j as u64, v.to_vec()));
            }
        }
        EmbeddingStore::from_entries(4, entries).unwrap()
    }

    #[test]
    fn segregated_kinds_give_identity() {
        let d = neighbor_type_distribution(&segregated(), 10, 3);
        assert_eq!(d.rows.len(), 4);
        for (i, r) in d.rows.iter().enumerate() {
            assert!((r.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(r.fractions[i], 1.0);
        }
    }

    #[test]
    fn histogram_conservation() {
        let store = segregated();
        let valences: HashMap<String, f64> = [
            ("word0".to_string(), 0.9),
            ("word1".to_string(), 0.8),
            ("word2".to_string(), 1.0),
            ("emote0".to_string(), -0.9),
        ]
        .into();
        let h = sentiment_neighborhood_histogram(&store, &valences, 6, 3).unwrap();
        let pos = &h.classes[SentimentLabel::Positive.index()];
        assert_eq!(pos.tokens, 3);
        // word tokens' 3 nearest are the other words, 2 of which are tagged
        assert_eq!(pos.counts.iter().sum::<u64>(), 6);
        assert!(pos.counts[..5].iter().all(|&c| c == 0));
        let neg = &h.classes[SentimentLabel::Negative.index()];
        assert_eq!(neg.counts.iter().sum::<u64>(), 0);
        assert_eq!(h.edges.len(), 7);
    }

    #[test]
    fn rank_histogram_all_emote() {
        let names: Vec<String> = (0..10).map(|i| format!("f{i}")).collect();
        let groups = vec!["emote_only".to_string(); 10];
        let imp: Vec<f64> = (0..10).map(|i| (10 - i) as f64 / 55.0).collect();
        let report = ImportanceReport::new(vec![imp.clone(), imp.clone(), imp], names, groups);
        let h = top_feature_rank_histogram(&report, 10, |g| g.starts_with("emote"));
        assert_eq!(h.emote.mean_rank, Some(4.5));
        assert_eq!(h.emote.median_rank, Some(4.5));
        assert_eq!(h.other.count, 0);
        assert_eq!(h.emote.histogram.iter().sum::<u64>() + h.other.histogram.iter().sum::<u64>(), 30);
    }

    #[test]
    fn export_counts_rows() {
        let store = segregated();
        let mut buf = Vec::new();
        assert_eq!(export_vectors(&store, 2, &mut buf).unwrap(), 8);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("token,kind,freq,v0,v1,v2,v3\n"));
    }
}
