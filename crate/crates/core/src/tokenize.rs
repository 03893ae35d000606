//! Whitespace tokenization with emote/emoji/emoticon tagging, and the three
//! text-processing levels applied before feature extraction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::EmoteDictionary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Emote,
    Emoji,
    Emoticon,
}

impl TokenKind {
    pub const ALL: [TokenKind; 4] = [
        TokenKind::Word,
        TokenKind::Emote,
        TokenKind::Emoji,
        TokenKind::Emoticon,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Word => "word",
            TokenKind::Emote => "emote",
            TokenKind::Emoji => "emoji",
            TokenKind::Emoticon => "emoticon",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(TokenKind::Word),
            "emote" => Ok(TokenKind::Emote),
            "emoji" => Ok(TokenKind::Emoji),
            "emoticon" => Ok(TokenKind::Emoticon),
            other => Err(Error::Format(format!("unknown token kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind) -> Self {
        Token {
            text: text.into(),
            kind,
        }
    }
}

/// Scalars that may appear inside an emoji token without being pictographs
/// themselves: joiners, variation selectors, skin tones and keycap marks.
fn is_emoji_modifier(c: char) -> bool {
    matches!(c as u32,
        0x200D | 0xFE0E | 0xFE0F | 0x20E3 | 0x1F3FB..=0x1F3FF | 0xE0020..=0xE007F)
}

fn is_pictograph(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF   // mahjong .. symbols & pictographs ext-A
        | 0x2600..=0x27BF   // misc symbols, dingbats
        | 0x2B00..=0x2BFF   // arrows, stars
        | 0x2300..=0x23FF   // misc technical (⌚ ⏰ ...)
        | 0x2190..=0x21FF   // arrows
        | 0x2100..=0x214F   // letterlike (™ ℹ)
        | 0x3030 | 0x303D | 0x3297 | 0x3299
        | 0x00A9 | 0x00AE | 0x203C | 0x2049
        | 0x25A0..=0x25FF   // geometric shapes
    )
}

/// True when every scalar lies in the emoji ranges and at least one is a pictograph.
pub fn is_emoji(token: &str) -> bool {
    let mut saw_pictograph = false;
    for c in token.chars() {
        if is_pictograph(c) {
            saw_pictograph = true;
        } else if !is_emoji_modifier(c) {
            return false;
        }
    }
    saw_pictograph
}

const EMOTICONS: &[&str] = &[
    "<3", "</3", "<\\3", "^^", "^_^", "^.^", "^-^", "-_-", "-.-", "T_T", "T.T", ";_;", "o_o",
    "O_O", "o.O", "O.o", "0_0", ">_<", ">.<", "xD", "XD", "xd", ":'(", ":')", ":'-(", "D:",
    "D;", "D=", "DX", "D8", "B)", "B-)", "c:", "C:", ":c", ":C", "uwu", "UwU", "owo", "OwO",
];

fn emoticon_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?:[>}\]]?[:;=8][\-o^'*]?[)(\]\[DPpOo03/\\|*$@{}><SsXx]+|[)(\]\[{}]+[\-o^']?[:;=])$",
        )
        .expect("emoticon pattern")
    })
}

pub fn is_emoticon(token: &str) -> bool {
    EMOTICONS.contains(&token) || emoticon_regex().is_match(token)
}

/// Kind of a raw token, by priority Emote > Emoji > Emoticon > Word.
pub fn classify_token(token: &str, emotes: &EmoteDictionary) -> TokenKind {
    if emotes.contains(token) {
        TokenKind::Emote
    } else if is_emoji(token) {
        TokenKind::Emoji
    } else if is_emoticon(token) {
        TokenKind::Emoticon
    } else {
        TokenKind::Word
    }
}

/// Splits on whitespace and tags each token. No normalization is applied.
pub fn tokenize(text: &str, emotes: &EmoteDictionary) -> Vec<Token> {
    text.split_whitespace()
        .map(|t| Token::new(t, classify_token(t, emotes)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcessingLevel {
    /// Lowercase, strip punctuation, squeeze character runs longer than three.
    P1,
    /// P1 plus stop word removal.
    P2,
    /// P2 plus lemma substitution.
    P3,
}

impl ProcessingLevel {
    pub const ALL: [ProcessingLevel; 3] = [ProcessingLevel::P1, ProcessingLevel::P2, ProcessingLevel::P3];
}

impl fmt::Display for ProcessingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ProcessingLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(ProcessingLevel::P1),
            "P2" | "2" => Ok(ProcessingLevel::P2),
            "P3" | "3" => Ok(ProcessingLevel::P3),
            other => Err(Error::Config(format!("unknown processing level {other:?}"))),
        }
    }
}

fn punctuation_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{P}\p{S}]+").expect("punctuation pattern"))
}

/// Collapses every run of more than three identical characters to three.
pub fn squeeze_runs(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev = None;
    let mut run = 0usize;
    for c in s.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 3 {
            out.push(c);
        }
    }
    out
}

/// P1 normalization of a single Word token. Order: lowercase, strip, squeeze.
pub fn normalize_word(word: &str) -> String {
    let lower = word.to_lowercase();
    let stripped = punctuation_regex().replace_all(&lower, "");
    squeeze_runs(&stripped)
}

/// Lemma lookup: an explicit table, with a suffix-stripping fallback that only
/// fires when the stem is at least three characters and is a known word.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lemmatizer {
    pub table: BTreeMap<String, String>,
    pub vocabulary: BTreeSet<String>,
}

impl Lemmatizer {
    pub fn new(table: BTreeMap<String, String>) -> Self {
        Lemmatizer {
            table,
            vocabulary: BTreeSet::new(),
        }
    }

    pub fn with_vocabulary<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.vocabulary.extend(words.into_iter().map(Into::into));
        self
    }

    pub fn lemma<'a>(&'a self, word: &'a str) -> &'a str {
        if let Some(l) = self.table.get(word) {
            return l;
        }
        for suffix in ["ing", "ed", "s"] {
            if let Some(stem) = word.strip_suffix(suffix) {
                if stem.chars().count() >= 3 && self.vocabulary.contains(stem) {
                    return stem;
                }
            }
        }
        word
    }
}

/// Stop words and lemmas used by the P2 and P3 levels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TextResources {
    pub stopwords: BTreeSet<String>,
    pub lemmatizer: Lemmatizer,
}

impl TextResources {
    /// Bundled English stop words and an empty lemma table.
    pub fn english() -> Self {
        TextResources {
            stopwords: default_stopwords(),
            lemmatizer: Lemmatizer::default(),
        }
    }

    /// Registers the P2-processed vocabulary of `corpus` for the lemma fallback.
    pub fn learn_vocabulary<'a, I>(&mut self, corpus: I)
    where
        I: IntoIterator<Item = &'a [Token]>,
    {
        for tokens in corpus {
            for t in process(tokens, ProcessingLevel::P2, self) {
                if t.kind == TokenKind::Word {
                    self.lemmatizer.vocabulary.insert(t.text);
                }
            }
        }
    }
}

/// Applies a processing level. Only Word tokens are altered or dropped.
pub fn process(tokens: &[Token], level: ProcessingLevel, resources: &TextResources) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    for tok in tokens {
        if tok.kind != TokenKind::Word {
            out.push(tok.clone());
            continue;
        }
        let mut text = normalize_word(&tok.text);
        if text.is_empty() {
            continue;
        }
        if level >= ProcessingLevel::P2 && resources.stopwords.contains(&text) {
            continue;
        }
        if level == ProcessingLevel::P3 {
            let lemma = resources.lemmatizer.lemma(&text);
            if lemma != text {
                text = lemma.to_owned();
            }
        }
        out.push(Token::new(text, TokenKind::Word));
    }
    out
}

/// Reads a stop word file: one token per line, `#` comments allowed.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let w = line.trim();
        if !w.is_empty() && !w.starts_with('#') {
            out.insert(w.to_owned());
        }
    }
    Ok(out)
}

/// Reads a lemma table: `surface<TAB>lemma` per line.
pub fn load_lemmas(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (surface, lemma) = line.split_once('\t').ok_or_else(|| {
            Error::Format(format!("{}:{}: expected surface<TAB>lemma", path.display(), i + 1))
        })?;
        out.insert(surface.trim().to_owned(), lemma.trim().to_owned());
    }
    Ok(out)
}

// Punctuation-free English stop words, so they match P1 output ("dont", "youre").
const STOPWORDS: &str = "a about above after again against ain all am an and any are aren arent as at \
be because been before being below between both but by can couldn couldnt d did didn didnt do does \
doesn doesnt doing don dont down during each few for from further had hadn hadnt has hasn hasnt have \
haven havent having he her here hers herself him himself his how i if in into is isn isnt it its itself \
just ll m ma me mightn mightnt more most mustn mustnt my myself needn neednt no nor not now o of off on \
once only or other our ours ourselves out over own re s same shan shant she shes should shouldve \
shouldn shouldnt so some such t than that thatll the their theirs them themselves then there these they \
this those through to too under until up ve very was wasn wasnt we were weren werent what when where \
which while who whom why will with won wont wouldn wouldnt y you youd youll youre youve your yours \
yourself yourselves";

pub fn default_stopwords() -> BTreeSet<String> {
    STOPWORDS.split_whitespace().map(str::to_owned).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict(codes: &[&str]) -> EmoteDictionary {
        codes.iter().copied().collect()
    }

    fn word(s: &str) -> Token {
        Token::new(s, TokenKind::Word)
    }

    #[test]
    fn tokenize_priority() {
        let toks = tokenize("Kappa hello :)", &dict(&["Kappa"]));
        assert_eq!(
            toks,
            vec![
                Token::new("Kappa", TokenKind::Emote),
                Token::new("hello", TokenKind::Word),
                Token::new(":)", TokenKind::Emoticon),
            ]
        );
    }

    #[test]
    fn tokenize_empty_and_single_emote() {
        assert!(tokenize("", &dict(&[])).is_empty());
        assert!(tokenize("  \t\n ", &dict(&[])).is_empty());
        assert_eq!(
            tokenize("LUL", &dict(&["LUL"])),
            vec![Token::new("LUL", TokenKind::Emote)]
        );
    }

    #[test]
    fn emote_match_is_case_sensitive() {
        assert_eq!(tokenize("kappa", &dict(&["Kappa"]))[0].kind, TokenKind::Word);
    }

    #[test]
    fn emote_beats_emoticon() {
        // a dictionary entry shadows the emoticon pattern
        assert_eq!(tokenize("D:", &dict(&["D:"]))[0].kind, TokenKind::Emote);
        assert_eq!(tokenize("D:", &dict(&[]))[0].kind, TokenKind::Emoticon);
    }

    #[test]
    fn emoji_detection() {
        assert!(is_emoji("😂"));
        assert!(is_emoji("😂😂"));
        assert!(is_emoji("👍🏽"));
        assert!(is_emoji("❤️"));
        assert!(is_emoji("👨‍👩‍👧"));
        assert!(!is_emoji("a😂"));
        assert!(!is_emoji("\u{200d}"));
        assert!(!is_emoji(""));
    }

    #[test]
    fn emoticon_detection() {
        for e in [":)", ":(", "D:", ":D", ";)", ":P", ":-)", "<3", ":'(", "xD", ":/", "=)", "):", ":))"] {
            assert!(is_emoticon(e), "{e}");
        }
        for w in ["hello", "D", ":", "lol", "8", "Dx1"] {
            assert!(!is_emoticon(w), "{w}");
        }
    }

    #[test]
    fn p1_examples() {
        let r = TextResources::default();
        let p = |s: &str| process(&[word(s)], ProcessingLevel::P1, &r);
        assert_eq!(p("loooove")[0].text, "looove");
        assert_eq!(p("Hello!!!")[0].text, "hello");
        assert!(p("!!!").is_empty());
        let emote = Token::new("FeelsGoodMan", TokenKind::Emote);
        assert_eq!(process(&[emote.clone()], ProcessingLevel::P1, &r), vec![emote]);
        let emoticon = Token::new(":)", TokenKind::Emoticon);
        assert_eq!(process(&[emoticon.clone()], ProcessingLevel::P1, &r), vec![emoticon]);
    }

    #[test]
    fn squeeze_after_strip() {
        // stripping merges the runs before squeezing
        assert_eq!(normalize_word("aa!aa"), "aaa");
        assert_eq!(normalize_word("haaaaaate"), "haaate");
    }

    #[test]
    fn p2_drops_stopwords() {
        let r = TextResources {
            stopwords: ["the".to_string()].into(),
            ..Default::default()
        };
        let out = process(&[word("the"), word("The"), word("cat")], ProcessingLevel::P2, &r);
        assert_eq!(out, vec![word("cat")]);
        // P1 keeps them
        assert_eq!(process(&[word("the")], ProcessingLevel::P1, &r).len(), 1);
    }

    #[test]
    fn p3_lemmas_and_fallback() {
        let mut r = TextResources::default();
        r.lemmatizer.table.insert("went".into(), "go".into());
        r.lemmatizer.vocabulary.insert("play".into());
        let out = process(
            &[word("went"), word("playing"), word("played"), word("plays"), word("bus"), word("sing")],
            ProcessingLevel::P3,
            &r,
        );
        let texts: Vec<_> = out.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["go", "play", "play", "play", "bus", "sing"]);
    }

    #[test]
    fn learn_vocabulary_enables_fallback() {
        let mut r = TextResources::english();
        let corpus = vec![vec![word("Jump!")], vec![word("jumping")]];
        r.learn_vocabulary(corpus.iter().map(Vec::as_slice));
        let out = process(&[word("jumped"), word("dancing")], ProcessingLevel::P3, &r);
        assert_eq!(out[0].text, "jump");
        assert_eq!(out[1].text, "dancing");
    }

    #[test]
    fn bundled_stopwords() {
        let s = default_stopwords();
        assert!(s.len() >= 150);
        assert!(s.contains("the") && s.contains("dont"));
    }

    #[test]
    fn resource_files() {
        let dir = tempfile::tempdir().unwrap();
        let sw = dir.path().join("stop.txt");
        fs::write(&sw, "the\n# c\na\n\n").unwrap();
        assert_eq!(load_stopwords(&sw).unwrap().len(), 2);
        let lm = dir.path().join("lemma.tsv");
        fs::write(&lm, "went\tgo\nmice\tmouse\n").unwrap();
        assert_eq!(load_lemmas(&lm).unwrap()["mice"], "mouse");
        fs::write(&lm, "broken line\n").unwrap();
        assert!(load_lemmas(&lm).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn token_strategy() -> impl Strategy<Value = Token> {
            (
                "[a-zA-Z!?.,'ÄÖéß]{0,4}(a{0,7})[a-zA-Z!:)]{0,4}",
                prop_oneof![
                    Just(TokenKind::Word),
                    Just(TokenKind::Word),
                    Just(TokenKind::Emote),
                    Just(TokenKind::Emoticon),
                    Just(TokenKind::Emoji)
                ],
            )
                .prop_map(|(t, k)| Token::new(t, k))
        }

        proptest! {
            #[test]
            fn p1_idempotent(tokens in proptest::collection::vec(token_strategy(), 0..12)) {
                let r = TextResources::english();
                let once = process(&tokens, ProcessingLevel::P1, &r);
                let twice = process(&once, ProcessingLevel::P1, &r);
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn kinds_order_and_runs(tokens in proptest::collection::vec(token_strategy(), 0..12)) {
                let r = TextResources::english();
                for level in ProcessingLevel::ALL {
                    let out = process(&tokens, level, &r);
                    // order and kinds: output is a subsequence of input by kind,
                    // and every non-word token survives untouched.
                    let non_words_in: Vec<_> = tokens.iter().filter(|t| t.kind != TokenKind::Word).collect();
                    let non_words_out: Vec<_> = out.iter().filter(|t| t.kind != TokenKind::Word).collect();
                    prop_assert_eq!(non_words_in, non_words_out);
                    let mut it = tokens.iter();
                    for o in &out {
                        prop_assert!(it.any(|t| t.kind == o.kind));
                    }
                    for o in out.iter().filter(|t| t.kind == TokenKind::Word) {
                        let chars: Vec<char> = o.text.chars().collect();
                        prop_assert!(!chars.windows(4).any(|w| w.iter().all(|c| *c == w[0])));
                    }
                }
            }

            #[test]
            fn p2_subset_of_p1(tokens in proptest::collection::vec(token_strategy(), 0..12)) {
                let r = TextResources::english();
                let p1 = process(&tokens, ProcessingLevel::P1, &r);
                let p2 = process(&tokens, ProcessingLevel::P2, &r);
                let mut it = p1.iter();
                for t in &p2 {
                    prop_assert!(it.any(|u| u == t));
                }
            }
        }
    }
}
