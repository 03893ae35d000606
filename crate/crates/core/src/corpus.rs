//! Loaders for chat logs, labeled datasets, sentiment lexicons and emote
//! dictionaries, plus deterministic stratified splitting.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One raw line of unlabeled chat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub channel_id: String,
    /// UTC milliseconds.
    pub timestamp: u64,
    pub text: String,
}

/// Ternary sentiment label.
///
/// Integer codes are fixed: `Negative = -1`, `Neutral = 0`, `Positive = +1`.
/// The declaration order doubles as the class index order (0, 1, 2) used by
/// every classifier and as the argmax tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
        SentimentLabel::Positive,
    ];

    pub fn code(self) -> i8 {
        match self {
            SentimentLabel::Negative => -1,
            SentimentLabel::Neutral => 0,
            SentimentLabel::Positive => 1,
        }
    }

    pub fn from_code(code: i8) -> Option<Self> {
        match code {
            -1 => Some(SentimentLabel::Negative),
            0 => Some(SentimentLabel::Neutral),
            1 => Some(SentimentLabel::Positive),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "1" | "+1" => Ok(SentimentLabel::Positive),
            "neutral" | "neu" | "0" => Ok(SentimentLabel::Neutral),
            "negative" | "neg" | "-1" => Ok(SentimentLabel::Negative),
            other => Err(Error::Format(format!("unknown sentiment label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub text: String,
    pub label: SentimentLabel,
}

impl LabeledExample {
    pub fn new(text: impl Into<String>, label: SentimentLabel) -> Self {
        LabeledExample {
            text: text.into(),
            label,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Result of [`load_chat_log`].
#[derive(Debug, Clone, Default)]
pub struct ChatLog {
    pub messages: Vec<ChatMessage>,
    pub skipped: usize,
}

#[derive(Deserialize)]
struct RawChatLine {
    channel: String,
    ts: i64,
    text: String,
}

fn parse_chat_line(line: &str) -> Option<ChatMessage> {
    let raw: RawChatLine = serde_json::from_str(line).ok()?;
    if raw.ts < 0 || raw.text.trim().is_empty() {
        return None;
    }
    Some(ChatMessage {
        channel_id: raw.channel,
        timestamp: raw.ts as u64,
        text: raw.text,
    })
}

/// Reads a JSON-lines chat log with `channel`, `ts` and `text` fields.
///
/// Blank lines are ignored. Malformed records are skipped and counted; if more
/// than half of the non-blank lines are malformed the file is rejected.
pub fn load_chat_log(path: impl AsRef<Path>) -> Result<ChatLog> {
    let path = path.as_ref();
    parse_chat_log(open(path)?, path)
}

fn parse_chat_log(reader: impl BufRead, path: &Path) -> Result<ChatLog> {
    let mut log = ChatLog::default();
    let mut total = 0usize;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        match parse_chat_line(&line) {
            Some(msg) => log.messages.push(msg),
            None => log.skipped += 1,
        }
    }
    if log.skipped * 2 > total {
        return Err(Error::Format(format!(
            "{}: {} of {} chat lines are malformed",
            path.display(),
            log.skipped,
            total
        )));
    }
    if log.skipped > 0 {
        log::warn!("{}: skipped {} malformed chat lines", path.display(), log.skipped);
    }
    Ok(log)
}

/// Reads a labeled dataset in `text<TAB>label` form.
///
/// Labels are case-insensitive `positive`/`neutral`/`negative` (or the integer
/// codes). A header row whose label column does not parse is ignored; any
/// other bad row is a format error.
pub fn load_labeled_tsv(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (lineno, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((text, label)) = line.rsplit_once('\t') else {
            return Err(Error::Format(format!(
                "{}:{}: expected text<TAB>label",
                path.display(),
                lineno + 1
            )));
        };
        match label.parse::<SentimentLabel>() {
            Ok(label) => out.push(LabeledExample::new(text, label)),
            Err(_) if lineno == 0 => continue,
            Err(e) => {
                return Err(Error::Format(format!(
                    "{}:{}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn save_labeled_tsv(path: impl AsRef<Path>, data: &[LabeledExample]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::new();
    for ex in data {
        buf.push_str(&ex.text.replace(['\t', '\n'], " "));
        buf.push('\t');
        buf.push_str(ex.label.as_str());
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Provenance of a lexicon entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexiconSource {
    Vader,
    Emoji,
    Emoticon,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub valence: f64,
    pub source: LexiconSource,
}

/// Token to valence table. Keys are exact strings; no case folding is applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

/// Scale native VADER valences are divided by.
pub const VADER_SCALE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LexiconFormat {
    /// `token<TAB>valence[<TAB>extra...]`; valences divided by `scale`.
    Tsv { scale: f64 },
    /// JSON object mapping token to valence; valences divided by `scale`.
    Json { scale: f64 },
}

impl LexiconFormat {
    pub fn vader() -> Self {
        LexiconFormat::Tsv { scale: VADER_SCALE }
    }
}

/// Result of [`load_lexicon`] with counters for rows that were dropped or overridden.
#[derive(Debug, Clone, Default)]
pub struct LexiconLoad {
    pub lexicon: SentimentLexicon,
    pub skipped: usize,
    pub duplicates: usize,
}

fn rescale(raw: f64, scale: f64) -> Option<f64> {
    if !raw.is_finite() {
        return None;
    }
    Some((raw / scale).clamp(-1.0, 1.0))
}

impl SentimentLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces an entry, clamping the valence into [-1, 1].
    /// Returns true when an existing entry was replaced.
    pub fn insert(&mut self, token: impl Into<String>, valence: f64, source: LexiconSource) -> bool {
        let valence = if valence.is_finite() {
            valence.clamp(-1.0, 1.0)
        } else {
            0.0
        };
        self.entries
            .insert(token.into(), LexiconEntry { valence, source })
            .is_some()
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.entries.get(token).map(|e| e.valence)
    }

    pub fn get(&self, token: &str) -> Option<&LexiconEntry> {
        self.entries.get(token)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexiconEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Adds every entry of `other`; entries of `other` win on conflicts.
    pub fn merge(&mut self, other: &SentimentLexicon) -> usize {
        let mut replaced = 0;
        for (token, entry) in &other.entries {
            if self.entries.insert(token.clone(), *entry).is_some() {
                replaced += 1;
            }
        }
        replaced
    }

    /// Token to valence view, for code that does not care about sources.
    pub fn valences(&self) -> HashMap<String, f64> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), v.valence))
            .collect()
    }

    /// Writes `token<TAB>valence` rows with valences already in [-1, 1].
    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = String::new();
        for (token, entry) in &self.entries {
            buf.push_str(&format!("{token}\t{}\n", entry.valence));
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

fn guess_source(path: &Path) -> LexiconSource {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    if name.contains("vader") {
        LexiconSource::Vader
    } else if name.contains("emoji") {
        LexiconSource::Emoji
    } else if name.contains("emoticon") {
        LexiconSource::Emoticon
    } else {
        LexiconSource::User
    }
}

/// Loads a lexicon file. Rows with a non-numeric or non-finite valence are
/// skipped; duplicate tokens keep the last occurrence.
pub fn load_lexicon(path: impl AsRef<Path>, format: LexiconFormat) -> Result<LexiconLoad> {
    let path = path.as_ref();
    let source = guess_source(path);
    let mut load = LexiconLoad::default();
    match format {
        LexiconFormat::Tsv { scale } => {
            for line in open(path)?.lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let mut cols = line.split('\t');
                let token = cols.next().unwrap_or_default();
                let value = cols
                    .next()
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .and_then(|v| rescale(v, scale));
                match value {
                    Some(v) if !token.is_empty() => {
                        if load.lexicon.insert(token, v, source) {
                            load.duplicates += 1;
                        }
                    }
                    _ => load.skipped += 1,
                }
            }
        }
        LexiconFormat::Json { scale } => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            // serde_json keeps the last value for repeated keys; walk pairs by hand
            // so duplicates can be counted.
            let map: Vec<(String, serde_json::Value)> = parse_json_pairs(&text)?;
            for (token, value) in map {
                match value.as_f64().and_then(|v| rescale(v, scale)) {
                    Some(v) => {
                        if load.lexicon.insert(token, v, source) {
                            load.duplicates += 1;
                        }
                    }
                    None => load.skipped += 1,
                }
            }
        }
    }
    if load.duplicates > 0 {
        log::warn!(
            "{}: {} duplicate lexicon tokens (last occurrence kept)",
            path.display(),
            load.duplicates
        );
    }
    Ok(load)
}

fn parse_json_pairs(text: &str) -> Result<Vec<(String, serde_json::Value)>> {
    use serde::de::{Deserializer, MapAccess, Visitor};

    struct Pairs;
    impl<'de> Visitor<'de> for Pairs {
        type Value = Vec<(String, serde_json::Value)>;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a JSON object of token to valence")
        }
        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(pair) = map.next_entry::<String, serde_json::Value>()? {
                out.push(pair);
            }
            Ok(out)
        }
    }
    let mut de = serde_json::Deserializer::from_str(text);
    Ok((&mut de).deserialize_map(Pairs)?)
}

/// Where an emote code was first seen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmoteSource {
    Twitch,
    Ffz,
    Bttv,
    User,
}

impl EmoteSource {
    fn from_path(path: &Path) -> Self {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if name.contains("bttv") {
            EmoteSource::Bttv
        } else if name.contains("ffz") {
            EmoteSource::Ffz
        } else if name.contains("twitch") {
            EmoteSource::Twitch
        } else {
            EmoteSource::User
        }
    }
}

/// Case-sensitive set of emote codes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmoteDictionary {
    codes: BTreeMap<String, EmoteSource>,
}

impl EmoteDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a code unless already present; the first source seen is kept.
    pub fn insert(&mut self, code: impl Into<String>, source: EmoteSource) -> bool {
        let code = code.into();
        if self.codes.contains_key(&code) {
            return false;
        }
        self.codes.insert(code, source);
        true
    }

    pub fn contains(&self, code: &str) -> bool {
        self.codes.contains_key(code)
    }

    pub fn source(&self, code: &str) -> Option<EmoteSource> {
        self.codes.get(code).copied()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.codes.keys().map(String::as_str)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for code in self.codes.keys() {
            writeln!(file, "{code}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

impl<S: Into<String>> FromIterator<S> for EmoteDictionary {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut dict = EmoteDictionary::new();
        for code in iter {
            dict.insert(code, EmoteSource::User);
        }
        dict
    }
}

/// Loads and unions emote code files (one code per line, `#` comments).
///
/// The source of each file is guessed from its name (`twitch`, `ffz`, `bttv`,
/// otherwise `user`).
pub fn load_emote_dictionary<P: AsRef<Path>>(paths: &[P]) -> Result<EmoteDictionary> {
    let mut dict = EmoteDictionary::new();
    for path in paths {
        let path = path.as_ref();
        let source = EmoteSource::from_path(path);
        for line in open(path)?.lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let code = line.trim();
            if code.is_empty() || code.starts_with('#') {
                continue;
            }
            dict.insert(code, source);
        }
    }
    if dict.is_empty() {
        let names: Vec<PathBuf> = paths.iter().map(|p| p.as_ref().to_path_buf()).collect();
        return Err(Error::Config(format!("no emote codes found in {names:?}")));
    }
    Ok(dict)
}

/// Parameters for [`stratified_split`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }
}

/// Splits labeled data per class.
///
/// Each class contributes `floor(fraction * n_class)` examples to train. If the
/// per-class floors fall short of `floor(fraction * n)`, the shortfall goes to
/// train from the classes with the largest fractional remainders. Both halves
/// keep the original input order.
pub fn stratified_split(
    data: &[LabeledExample],
    spec: SplitSpec,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    let spec = SplitSpec::new(spec.train_fraction, spec.seed)?;
    let mut by_class: [Vec<usize>; 3] = Default::default();
    for (i, ex) in data.iter().enumerate() {
        by_class[ex.label.index()].push(i);
    }
    for label in SentimentLabel::ALL {
        let n = by_class[label.index()].len();
        if n < 2 {
            return Err(Error::Split(format!(
                "class {label} has {n} examples; at least 2 are required"
            )));
        }
    }

    let ideal: Vec<f64> = by_class
        .iter()
        .map(|c| spec.train_fraction * c.len() as f64)
        .collect();
    let mut quota: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let target = (spec.train_fraction * data.len() as f64).floor() as usize;
    let mut shortfall = target.saturating_sub(quota.iter().sum());
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in &order {
        if shortfall == 0 {
            break;
        }
        if quota[c] + 1 < by_class[c].len() {
            quota[c] += 1;
            shortfall -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; data.len()];
    for (c, indices) in by_class.iter().enumerate() {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        for &i in &shuffled[..quota[c]] {
            in_train[i] = true;
        }
    }
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(data.len() - target);
    for (ex, &t) in data.iter().zip(&in_train) {
        if t {
            train.push(ex.clone());
        } else {
            test.push(ex.clone());
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn chat_single_record() {
        let log = parse_chat_log(
            Cursor::new(r#"{"channel":"c1","ts":0,"text":"Kappa"}"#),
            Path::new("x"),
        )
        .unwrap();
        assert_eq!(
            log.messages,
            vec![ChatMessage {
                channel_id: "c1".into(),
                timestamp: 0,
                text: "Kappa".into()
            }]
        );
        assert_eq!(log.skipped, 0);
    }

    #[test]
    fn chat_empty_file() {
        let f = write_tmp("");
        let log = load_chat_log(f.path()).unwrap();
        assert!(log.messages.is_empty());
        assert_eq!(log.skipped, 0);
    }

    #[test]
    fn chat_skips_malformed() {
        let f = write_tmp(
            "{\"channel\":\"a\",\"ts\":1,\"text\":\"hi\"}\nnot json\n{\"channel\":\"b\",\"ts\":2,\"text\":\"LUL\"}\n",
        );
        let log = load_chat_log(f.path()).unwrap();
        assert_eq!(log.messages.len(), 2);
        assert_eq!(log.skipped, 1);
    }

    #[test]
    fn chat_rejects_mostly_malformed() {
        let f = write_tmp("{\"channel\":\"a\",\"ts\":1,\"text\":\"hi\"}\nbad\n{\"channel\":\"a\",\"ts\":-5,\"text\":\"x\"}\n");
        assert!(matches!(load_chat_log(f.path()), Err(Error::Format(_))));
    }

    #[test]
    fn chat_missing_file_is_io() {
        assert!(matches!(
            load_chat_log("/nonexistent/chat.jsonl"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn chat_blank_text_is_malformed() {
        let f = write_tmp("{\"channel\":\"a\",\"ts\":1,\"text\":\"   \"}\n{\"channel\":\"a\",\"ts\":1,\"text\":\"ok\"}\n{\"channel\":\"a\",\"ts\":1,\"text\":\"ok\"}\n");
        let log = load_chat_log(f.path()).unwrap();
        assert_eq!(log.skipped, 1);
    }

    #[test]
    fn lexicon_vader_rescale() {
        let f = write_tmp("good\t1.9\t0.9\t[1,2]\n:)\t2.0\nx\tNaN\ny\tabc\n");
        let load = load_lexicon(f.path(), LexiconFormat::vader()).unwrap();
        assert!((load.lexicon.valence("good").unwrap() - 0.475).abs() < 1e-12);
        assert!((load.lexicon.valence(":)").unwrap() - 0.5).abs() < 1e-12);
        assert!(!load.lexicon.contains("x"));
        assert_eq!(load.skipped, 2);
    }

    #[test]
    fn lexicon_clamps_and_dedups() {
        let f = write_tmp("a\t9\nb\t1\nb\t-2\n");
        let load = load_lexicon(f.path(), LexiconFormat::vader()).unwrap();
        assert_eq!(load.lexicon.valence("a"), Some(1.0));
        assert_eq!(load.lexicon.valence("b"), Some(-0.5));
        assert_eq!(load.duplicates, 1);
    }

    #[test]
    fn lexicon_json_duplicates_last_wins() {
        let f = write_tmp(r#"{"😀": 0.8, "x": "bad", "😀": 0.6}"#);
        let load = load_lexicon(f.path(), LexiconFormat::Json { scale: 1.0 }).unwrap();
        assert_eq!(load.lexicon.valence("😀"), Some(0.6));
        assert_eq!(load.duplicates, 1);
        assert_eq!(load.skipped, 1);
    }

    #[test]
    fn lexicon_is_case_sensitive() {
        let mut lex = SentimentLexicon::new();
        lex.insert("Good", 0.5, LexiconSource::User);
        assert!(lex.valence("good").is_none());
    }

    #[test]
    fn emote_union_keeps_first_source() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("twitch.txt");
        let b = dir.path().join("bttv.txt");
        fs::write(&a, "Kappa\nLUL\n").unwrap();
        fs::write(&b, "# comment\nLUL\nSadge\n").unwrap();
        let dict = load_emote_dictionary(&[&a, &b]).unwrap();
        assert_eq!(dict.iter().collect::<Vec<_>>(), vec!["Kappa", "LUL", "Sadge"]);
        assert_eq!(dict.source("LUL"), Some(EmoteSource::Twitch));
        assert_eq!(dict.source("Sadge"), Some(EmoteSource::Bttv));
        assert!(!dict.contains("kappa"));
    }

    #[test]
    fn emote_single_and_counted_union() {
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.txt");
        fs::write(&one, "FeelsGoodMan\n").unwrap();
        assert_eq!(load_emote_dictionary(&[&one]).unwrap().len(), 1);

        // 10 lines over three files, two of which repeat earlier codes.
        let f1 = dir.path().join("f1.txt");
        let f2 = dir.path().join("f2.txt");
        let f3 = dir.path().join("f3.txt");
        fs::write(&f1, "a\nb\nc\nd\n").unwrap();
        fs::write(&f2, "e\nf\na\n").unwrap();
        fs::write(&f3, "g\nh\nb\n").unwrap();
        assert_eq!(load_emote_dictionary(&[&f1, &f2, &f3]).unwrap().len(), 8);
    }

    #[test]
    fn emote_empty_union_is_config_error() {
        let f = write_tmp("# only a comment\n\n");
        assert!(matches!(
            load_emote_dictionary(&[f.path()]),
            Err(Error::Config(_))
        ));
    }

    fn labeled(counts: [usize; 3]) -> Vec<LabeledExample> {
        let mut v = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                v.push(LabeledExample::new(
                    format!("{c}-{i}"),
                    SentimentLabel::from_index(c),
                ));
            }
        }
        v
    }

    fn per_class(data: &[LabeledExample]) -> [usize; 3] {
        let mut c = [0; 3];
        for ex in data {
            c[ex.label.index()] += 1;
        }
        c
    }

    #[test]
    fn split_exact_divisibility() {
        let data = labeled([5, 5, 5]);
        let (train, test) = stratified_split(&data, SplitSpec::new(0.8, 7).unwrap()).unwrap();
        assert_eq!(per_class(&train), [4, 4, 4]);
        assert_eq!(per_class(&test), [1, 1, 1]);
    }

    #[test]
    fn split_ec_sized() {
        // 40.6 / 38.0 / 21.4 percent of 1880.
        let data = labeled([403, 714, 763]);
        let (train, test) = stratified_split(&data, SplitSpec::new(0.8, 1).unwrap()).unwrap();
        assert_eq!(train.len(), 1504);
        assert_eq!(test.len(), 376);
    }

    #[test]
    fn split_is_deterministic() {
        let data = labeled([13, 17, 9]);
        let spec = SplitSpec::new(0.7, 42).unwrap();
        assert_eq!(
            stratified_split(&data, spec).unwrap(),
            stratified_split(&data, spec).unwrap()
        );
        let other = stratified_split(&data, SplitSpec::new(0.7, 43).unwrap()).unwrap();
        assert_ne!(stratified_split(&data, spec).unwrap(), other);
    }

    #[test]
    fn split_rejects_tiny_class() {
        let data = labeled([5, 1, 5]);
        assert!(matches!(
            stratified_split(&data, SplitSpec::new(0.8, 0).unwrap()),
            Err(Error::Split(_))
        ));
    }

    #[test]
    fn split_spec_validates_fraction() {
        assert!(SplitSpec::new(1.0, 0).is_err());
        assert!(SplitSpec::new(0.0, 0).is_err());
    }

    #[test]
    fn label_codes_round_trip() {
        for l in SentimentLabel::ALL {
            assert_eq!(SentimentLabel::from_code(l.code()), Some(l));
            assert_eq!(l.as_str().parse::<SentimentLabel>().unwrap(), l);
        }
        assert_eq!("POSITIVE".parse::<SentimentLabel>().unwrap(), SentimentLabel::Positive);
    }

    #[test]
    fn labeled_tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.tsv");
        fs::write(&p, "text\tlabel\nhi Kappa\tPositive\nmeh\tneutral\nugh\tNEGATIVE\n").unwrap();
        let data = load_labeled_tsv(&p).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data[0].label, SentimentLabel::Positive);
        let q = dir.path().join("e.tsv");
        save_labeled_tsv(&q, &data).unwrap();
        assert_eq!(load_labeled_tsv(&q).unwrap(), data);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_is_stratified(
                counts in proptest::array::uniform3(2usize..60),
                frac in 0.05f64..0.95,
                seed in any::<u64>(),
            ) {
                let data = labeled(counts);
                let (train, test) = stratified_split(&data, SplitSpec::new(frac, seed).unwrap()).unwrap();
                prop_assert_eq!(train.len() + test.len(), data.len());
                let tc = per_class(&train);
                for c in 0..3 {
                    let n = counts[c] as f64;
                    prop_assert!((tc[c] as f64 / n - frac).abs() <= 1.0 / n + 1e-12);
                }
                let mut all: Vec<String> = train.iter().chain(&test).map(|e| e.text.clone()).collect();
                all.sort();
                let mut orig: Vec<String> = data.iter().map(|e| e.text.clone()).collect();
                orig.sort();
                prop_assert_eq!(all, orig);
            }

            #[test]
            fn lexicon_tsv_round_trip(
                entries in proptest::collection::btree_map("[a-z:()]{1,8}", -1.0f64..=1.0, 1..40)
            ) {
                let mut lex = SentimentLexicon::new();
                for (k, v) in &entries {
                    lex.insert(k.clone(), *v, LexiconSource::User);
                }
                let dir = tempfile::tempdir().unwrap();
                let p = dir.path().join("lex.tsv");
                lex.save_tsv(&p).unwrap();
                let back = load_lexicon(&p, LexiconFormat::Tsv { scale: 1.0 }).unwrap().lexicon;
                prop_assert_eq!(back.len(), lex.len());
                for (k, v) in &entries {
                    prop_assert!((back.valence(k).unwrap() - v).abs() < 1e-6);
                }
            }
        }
    }
}
