mod common;

use std::collections::HashMap;

use loove::analyze::{frequency_table, neighbor_type_distribution, token_type_stats};
use loove::classify::{argmax, train, Algorithm, Dataset, Hyperparams, TextClassifier, TextModelConfig};
use loove::corpus::{EmoteSource, LabeledExample, SentimentLabel};
use loove::embed::{EmbeddingStore, Query};
use loove::features::{FeatureKind, FeatureVector, Ngram, NgramOrder, NgramVocab};
use loove::loove::{extract_emote_stats, train_loove, LooveConfig};
use loove::pseudodict::{build_pseudodict, PseudoDict, PseudoDictConfig, PseudoDictEntry};
use loove::tokenize::{tokenize, Token, TokenKind};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn kinds_subset() -> impl Strategy<Value = Vec<TokenKind>> {
    proptest::sample::subsequence(TokenKind::ALL.to_vec(), 1..=4)
}

fn tokens_strategy() -> impl Strategy<Value = Vec<Token>> {
    proptest::collection::vec(
        (
            "[a-c]{1,2}",
            prop_oneof![Just(TokenKind::Word), Just(TokenKind::Emote), Just(TokenKind::Emoji)],
        ),
        0..10,
    )
    .prop_map(|v| v.into_iter().map(|(t, k)| Token::new(t, k)).collect())
}

/// Emotes are upper case, words lower case.
fn cased_tokens() -> impl Strategy<Value = Vec<Token>> {
    proptest::collection::vec(
        prop_oneof![
            "[a-c]{1,2}".prop_map(|t| Token::new(t, TokenKind::Word)),
            "[A-C]{1,2}".prop_map(|t| Token::new(t, TokenKind::Emote)),
        ],
        0..10,
    )
}

/// Applies a random rotation in a random coordinate plane pair sequence.
fn rotate(store: &EmbeddingStore, seed: u64) -> EmbeddingStore {
    let mut r = rng(seed);
    let dim = store.dim();
    let mut planes = Vec::new();
    for _ in 0..dim * 2 {
        let (a, b) = (r.gen_range(0..dim), r.gen_range(0..dim));
        if a != b {
            planes.push((a, b, r.gen_range(0.0..std::f64::consts::TAU)));
        }
    }
    let entries = (0..store.len())
        .map(|i| {
            let mut v: Vec<f64> = store.vector_at(i).iter().map(|&x| x as f64).collect();
            for &(a, b, t) in &planes {
                let (x, y) = (v[a], v[b]);
                v[a] = t.cos() * x - t.sin() * y;
                v[b] = t.sin() * x + t.cos() * y;
            }
            (
                store.token(i).to_string(),
                store.kind(i),
                store.freq(i),
                v.into_iter().map(|x| x as f32).collect(),
            )
        })
        .collect();
    EmbeddingStore::from_entries(dim, entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kind_filter_soundness(seed in any::<u64>(), n in 2usize..400, dim in 1usize..12, k in 1usize..30, filter in kinds_subset()) {
        let mut r = rng(seed);
        let store = random_store(&mut r, n, dim);
        let q = r.gen_range(0..n);
        let res = store.nearest(Query::Token(store.token(q)), k, Some(&filter)).unwrap();
        prop_assert!(res.len() <= k);
        prop_assert!(res.neighbors.iter().all(|nb| filter.contains(&nb.kind) && nb.token != store.token(q)));
        prop_assert!(res.neighbors.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        let eligible = (0..n).filter(|&i| i != q && filter.contains(&store.kind(i))).count();
        prop_assert_eq!(res.len(), k.min(eligible));
    }

    #[test]
    fn evidence_is_monotone_and_bounded(seed in any::<u64>(), n in 2usize..300, dim in 1usize..10, k in 1usize..8) {
        let mut r = rng(seed);
        let store = random_store(&mut r, n, dim);
        let mut entries: Vec<(String, f64)> = Vec::new();
        for i in 0..n {
            if r.gen_bool(0.3) {
                entries.push((store.token(i).to_string(), r.gen_range(-1.0..=1.0)));
            }
        }
        prop_assume!(!entries.is_empty());
        let lex = lexicon(&entries.iter().map(|(t, v)| (t.as_str(), *v)).collect::<Vec<_>>());
        let config = PseudoDictConfig { k, ..PseudoDictConfig::default() };
        let dict = build_pseudodict(&store, &lex, &config).unwrap();
        for e in dict.iter() {
            prop_assert!(!e.evidence.is_empty() && e.evidence.len() <= k);
            prop_assert!(e.evidence.windows(2).all(|w| w[0].similarity >= w[1].similarity));
            let lo = e.evidence.iter().map(|x| x.valence).fold(f64::INFINITY, f64::min);
            let hi = e.evidence.iter().map(|x| x.valence).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= e.valence && e.valence <= hi + 1e-12);
            prop_assert!(e.evidence.iter().all(|x| lex.valence(&x.token) == Some(x.valence)));
            // Same order as the unfiltered ranking.
            let ranking = store.nearest(Query::Token(&e.emote), n, None).unwrap();
            let order: HashMap<&str, usize> = ranking.tokens().into_iter().enumerate().map(|(i, t)| (t, i)).collect();
            prop_assert!(e.evidence.windows(2).all(|w| order[w[0].token.as_str()] < order[w[1].token.as_str()]));
        }
    }

    #[test]
    fn stats_ignore_unused_dictionary_entries(
        tokens in tokens_strategy(),
        base in proptest::collection::btree_map("[a-c]{1,2}", -1.0f64..=1.0, 0..5),
        extra in proptest::collection::btree_map("[d-f]{1,2}", -1.0f64..=1.0, 0..5),
    ) {
        let small = PseudoDict::from_valences(base.clone());
        let mut big = small.clone();
        for (emote, v) in extra {
            big.insert(PseudoDictEntry { emote, valence: v, k_used: 0, evidence: Vec::new() });
        }
        prop_assert_eq!(extract_emote_stats(&tokens, &small), extract_emote_stats(&tokens, &big));
    }

    #[test]
    fn argmax_is_first_maximum(scores in proptest::array::uniform3(prop_oneof![Just(0.0f64), Just(1.0), -2.0f64..2.0])) {
        let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = scores.iter().position(|&s| s == m).unwrap();
        prop_assert_eq!(argmax(&scores), SentimentLabel::from_index(first));
    }

    #[test]
    fn feature_kinds_partition_vocabulary(corpus in proptest::collection::vec(cased_tokens(), 1..6)) {
        prop_assume!(corpus.iter().any(|d| !d.is_empty()));
        let vocab = NgramVocab::build(&corpus, NgramOrder::UnigramBigram, 1).unwrap();
        let again = NgramVocab::build(&corpus, NgramOrder::UnigramBigram, 1).unwrap();
        prop_assert_eq!(vocab.to_json().unwrap(), again.to_json().unwrap());
        let f = vocab.kind_fractions();
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let is_emote = |t: &str| t.starts_with(|c: char| c.is_ascii_uppercase());
        for feature in vocab.features() {
            let want = match &feature.ngram {
                Ngram::Uni(a) if is_emote(a) => FeatureKind::EmoteOnly,
                Ngram::Bi(a, b) if is_emote(a) || is_emote(b) => FeatureKind::EmotePlus,
                _ => FeatureKind::Other,
            };
            prop_assert_eq!(feature.kind, want);
        }
    }

    #[test]
    fn analysis_fractions_sum_to_one(seed in any::<u64>(), n in 2usize..200, dim in 1usize..8) {
        let mut r = rng(seed);
        let store = random_store(&mut r, n, dim);
        let dist = neighbor_type_distribution(&store, 20, 10);
        for row in &dist.rows {
            prop_assert!((row.fractions.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        let corpus: Vec<Vec<Token>> = (0..n)
            .map(|i| vec![Token::new(store.token(i), store.kind(i))])
            .collect();
        let stats = token_type_stats(&frequency_table(&corpus));
        prop_assert!((stats.fractions.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn forest_is_seed_deterministic(seed in any::<u64>(), n in 10usize..60) {
        let mut r = rng(seed);
        let rows: Vec<FeatureVector> = (0..n)
            .map(|_| FeatureVector::from_dense(&(0..4).map(|_| r.gen_range(0..3) as f64).collect::<Vec<_>>()))
            .collect();
        let labels: Vec<SentimentLabel> = (0..n).map(|i| SentimentLabel::from_index(i % 3)).collect();
        let data = Dataset::new(rows, labels, 4);
        let mut hyper = Hyperparams::default();
        hyper.rf.n_trees = 15;
        let a = train(Algorithm::RF, &data, &hyper, seed).unwrap();
        let b = train(Algorithm::RF, &data, &hyper, seed).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        for x in &data.rows {
            prop_assert_eq!(a.predict(x), b.predict(x));
        }
        for head in a.gini_importances().unwrap() {
            prop_assert!(head.iter().all(|&v| v >= 0.0));
            let s: f64 = head.iter().sum();
            prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-9);
        }
    }

    /// Rotating the embedding space keeps neighbor rankings, so the
    /// pseudo-dictionary and every fusion vector stay the same.
    #[test]
    fn fusion_survives_rotation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dim = 6;
        let entries: Vec<(String, TokenKind, u64, Vec<f32>)> = (0..60)
            .map(|i| {
                let kind = if i < 10 { TokenKind::Emote } else { TokenKind::Word };
                let name = if i < 10 { format!("Emo{i:02}") } else { format!("w{i}") };
                let v = (0..dim).map(|_| r.gen_range(-1.0f32..1.0)).collect();
                (name, kind, 5, v)
            })
            .collect();
        let store = EmbeddingStore::from_entries(dim, entries).unwrap();
        let lex_entries: Vec<(String, f64)> = (10..60)
            .filter(|i| i % 2 == 0)
            .map(|i| (format!("w{i}"), ((i % 9) as f64 - 4.0) / 4.0))
            .collect();
        let lex = lexicon(&lex_entries.iter().map(|(t, v)| (t.as_str(), *v)).collect::<Vec<_>>());
        let config = PseudoDictConfig { k: 3, ..PseudoDictConfig::default() };
        let rotated = rotate(&store, seed ^ 0x5eed);
        // Rounding to f32 can swap near ties; those cases are skipped.
        let same_ranking = (0..10).all(|i| {
            let a = store.nearest(Query::Token(store.token(i)), 59, None).unwrap();
            let b = rotated.nearest(Query::Token(store.token(i)), 59, None).unwrap();
            a.tokens() == b.tokens()
        });
        prop_assume!(same_ranking);
        let d1 = build_pseudodict(&store, &lex, &config).unwrap();
        let d2 = build_pseudodict(&rotated, &lex, &config).unwrap();
        prop_assert_eq!(d1.valences(), d2.valences());

        let mut emotes = loove::corpus::EmoteDictionary::new();
        for i in 0..10 {
            emotes.insert(format!("Emo{i:02}"), EmoteSource::User);
        }
        let data: Vec<LabeledExample> = (0..30)
            .map(|i| LabeledExample::new(format!("w{} Emo{:02} Emo{:02}", 10 + i, i % 10, (i * 7) % 10), SentimentLabel::from_index(i % 3)))
            .collect();
        let cfg = TextModelConfig { algorithm: Algorithm::NB, ..TextModelConfig::default() };
        let clf1 = TextClassifier::train(&data, &emotes, &cfg, &loove::tokenize::TextResources::english(), 1).unwrap();
        let m1 = train_loove(&data, Some(&clf1), "x", &d1, &emotes, &LooveConfig::default(), 3).unwrap();
        let m2 = train_loove(&data, Some(&clf1), "x", &d2, &emotes, &LooveConfig::default(), 3).unwrap();
        for e in &data {
            let (p1, p2) = (m1.predict(&e.text), m2.predict(&e.text));
            prop_assert_eq!(&p1.fusion, &p2.fusion);
            prop_assert_eq!(p1.label, p2.label);
        }
        let toks = tokenize(&data[0].text, &emotes);
        prop_assert_eq!(extract_emote_stats(&toks, &d1), extract_emote_stats(&toks, &d2));
    }
}
