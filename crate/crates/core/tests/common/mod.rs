#![allow(dead_code)]

use loove::corpus::{EmoteDictionary, EmoteSource, LabeledExample, LexiconSource, SentimentLabel, SentimentLexicon};
use loove::embed::EmbeddingStore;
use loove::pseudodict::PseudoDict;
use loove::tokenize::{Token, TokenKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn emote_dict<'a>(codes: impl IntoIterator<Item = &'a str>) -> EmoteDictionary {
    let mut d = EmoteDictionary::new();
    for c in codes {
        d.insert(c, EmoteSource::User);
    }
    d
}

pub fn lexicon(entries: &[(&str, f64)]) -> SentimentLexicon {
    let mut l = SentimentLexicon::new();
    for &(t, v) in entries {
        l.insert(t, v, LexiconSource::User);
    }
    l
}

/// Random store with vector components drawn from a small grid, so exact
/// cosine ties are common. Kinds are mixed.
pub fn random_store(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingStore {
    let levels = rng.gen_range(2..=4);
    let entries = (0..n)
        .map(|i| {
            let kind = TokenKind::ALL[rng.gen_range(0..4)];
            let mut v: Vec<f32> = (0..dim)
                .map(|_| rng.gen_range(-levels..=levels) as f32 / levels as f32)
                .collect();
            if v.iter().all(|&x| x == 0.0) && rng.gen_bool(0.5) {
                v[0] = 1.0;
            }
            (format!("t{:05}_{}", rng.gen_range(0..100_000), i), kind, 1, v)
        })
        .collect();
    EmbeddingStore::from_entries(dim, entries).expect("valid store")
}

pub const POS_SEED_WORDS: [&str; 3] = ["good", "great", "nice"];
pub const NEG_SEED_WORDS: [&str; 3] = ["bad", "awful", "terrible"];
const POS_POOL: [&str; 8] = ["good", "great", "nice", "happy", "love", "awesome", "fun", "cool"];
const NEG_POOL: [&str; 8] = ["bad", "awful", "terrible", "sad", "hate", "horrible", "boring", "ugly"];
const FILLER: [&str; 24] = [
    "stream", "game", "chat", "today", "play", "level", "boss", "map", "round", "team", "match", "time",
    "song", "music", "camera", "mic", "build", "item", "run", "score", "point", "zone", "road", "city",
];

pub fn planted_lexicon() -> SentimentLexicon {
    lexicon(&[
        ("good", 0.6),
        ("great", 0.8),
        ("nice", 0.5),
        ("happy", 0.7),
        ("love", 0.8),
        ("awesome", 0.9),
        ("bad", -0.6),
        ("awful", -0.8),
        ("terrible", -0.9),
        ("sad", -0.6),
        ("hate", -0.8),
        ("horrible", -0.9),
    ])
}

fn sentence(rng: &mut ChaCha8Rng, pool: &[&str], lo: usize, hi: usize) -> Vec<Token> {
    let n = rng.gen_range(lo..=hi);
    (0..n)
        .map(|_| Token::new(*pool.choose(rng).unwrap(), TokenKind::Word))
        .collect()
}

/// `emoA` only ever appears with good/great/nice and `emoB` with
/// bad/awful/terrible. The rest is sentiment-word chatter and neutral filler.
pub fn planted_corpus(n: usize, seed: u64) -> Vec<Vec<Token>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let u: f64 = r.gen();
            if u < 0.1 || (0.1..0.2).contains(&u) {
                let (emote, words) = if u < 0.1 {
                    ("emoA", &POS_SEED_WORDS)
                } else {
                    ("emoB", &NEG_SEED_WORDS)
                };
                let mut s = sentence(&mut r, words, 2, 5);
                let at = r.gen_range(0..=s.len());
                s.insert(at, Token::new(emote, TokenKind::Emote));
                s
            } else if u < 0.45 {
                sentence(&mut r, &POS_POOL, 3, 7)
            } else if u < 0.7 {
                sentence(&mut r, &NEG_POOL, 3, 7)
            } else {
                sentence(&mut r, &FILLER, 3, 8)
            }
        })
        .collect()
}

/// Messages whose label is carried only by emotes.
pub struct EmoteSignal {
    pub messages: Vec<LabeledExample>,
    /// The same messages with the emotes removed.
    pub paraphrases: Vec<LabeledExample>,
    pub dict: PseudoDict,
    pub emotes: EmoteDictionary,
}

/// Twenty planted emotes: eight positive, eight negative, four near zero.
/// Each message has one to two emotes of one polarity and filler words drawn
/// independently of the label, so text alone carries no signal.
pub fn emote_signal(n: usize, seed: u64) -> EmoteSignal {
    let mut r = rng(seed);
    let codes: Vec<String> = (0..20).map(|i| format!("Emo{i:02}")).collect();
    let valence = |i: usize| -> f64 {
        match i {
            0..=7 => 0.4 + 0.07 * i as f64,
            8..=15 => -0.4 - 0.07 * (i - 8) as f64,
            _ => -0.15 + 0.1 * (i - 16) as f64,
        }
    };
    let dict = PseudoDict::from_valences(codes.iter().enumerate().map(|(i, c)| (c.clone(), valence(i))));
    let emotes = emote_dict(codes.iter().map(String::as_str));
    let mut messages = Vec::with_capacity(n);
    let mut paraphrases = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = r.gen();
        let (range, label) = if u < 0.4 {
            (0..8, SentimentLabel::Positive)
        } else if u < 0.8 {
            (8..16, SentimentLabel::Negative)
        } else {
            (16..20, SentimentLabel::Neutral)
        };
        let words: Vec<&str> = (0..r.gen_range(3..=7)).map(|_| *FILLER.choose(&mut r).unwrap()).collect();
        let mut with = words.clone();
        for _ in 0..r.gen_range(1..=2) {
            let e = &codes[r.gen_range(range.clone())];
            let at = r.gen_range(0..=with.len());
            with.insert(at, e);
        }
        messages.push(LabeledExample::new(with.join(" "), label));
        paraphrases.push(LabeledExample::new(words.join(" "), label));
    }
    EmoteSignal {
        messages,
        paraphrases,
        dict,
        emotes,
    }
}

/// Three classes, each marked by its own cue words plus shared filler.
pub fn toy_separable(per_class: usize, seed: u64) -> Vec<LabeledExample> {
    let cues = [
        (SentimentLabel::Negative, ["awful", "hate", "terrible"]),
        (SentimentLabel::Neutral, ["schedule", "tuesday", "update"]),
        (SentimentLabel::Positive, ["awesome", "love", "wonderful"]),
    ];
    let mut r = rng(seed);
    let mut out = Vec::new();
    for i in 0..per_class {
        for (label, words) in &cues {
            let mut w: Vec<&str> = (0..r.gen_range(2..=4)).map(|_| *FILLER.choose(&mut r).unwrap()).collect();
            w.insert(r.gen_range(0..=w.len()), words[i % 3]);
            w.insert(r.gen_range(0..=w.len()), words.choose(&mut r).unwrap());
            out.push(LabeledExample::new(w.join(" "), *label));
        }
    }
    out
}
