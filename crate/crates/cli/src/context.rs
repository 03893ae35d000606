use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use loove::classify::{Algorithm, TextModelConfig};
use loove::config::RunConfig;
use loove::corpus::{load_emote_dictionary, load_lexicon, EmoteDictionary, SentimentLexicon};
use loove::embed::EmbeddingStore;
use loove::features::{NgramOrder, Weighting};
use loove::manifest::RunManifest;
use loove::pseudodict::PseudoDict;
use serde::Serialize;

use crate::args::{Cli, EmoteArgs, LexiconArgs, OutArg, TextArgs, VectorArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Core(loove::Error),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Core(e) => match e {
                loove::Error::Config(_) | loove::Error::NotFound(_) | loove::Error::Unsupported(_) => 2,
                _ => 3,
            },
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<loove::Error> for CliError {
    fn from(e: loove::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Effective configuration after the config file and global flags.
pub struct Ctx {
    pub config: RunConfig,
}

impl Ctx {
    pub fn new(cli: &Cli) -> CliResult<Self> {
        let mut config = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        if let Some(t) = cli.threads {
            if t == 0 {
                return Err(usage("--threads must be positive"));
            }
            config.threads = Some(t);
        }
        if let Some(t) = config.threads {
            config.embed.threads = config.embed.threads.clamp(1, t);
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
        }
        config.embed.seed = config.seed;
        Ok(Ctx { config })
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn emotes(&self, args: &EmoteArgs) -> CliResult<EmoteDictionary> {
        if args.emotes.is_empty() {
            Ok(self.config.emote_dictionary()?)
        } else {
            Ok(load_emote_dictionary(&args.emotes)?)
        }
    }

    pub fn emote_paths(&self, args: &EmoteArgs) -> Vec<PathBuf> {
        if args.emotes.is_empty() {
            self.config.paths.emotes.clone()
        } else {
            args.emotes.clone()
        }
    }

    pub fn lexicon_paths(&self, args: &LexiconArgs) -> Vec<PathBuf> {
        if args.lexicons.is_empty() {
            self.config.paths.lexicons.clone()
        } else {
            args.lexicons.clone()
        }
    }

    pub fn lexicon(&self, args: &LexiconArgs) -> CliResult<SentimentLexicon> {
        let paths = self.lexicon_paths(args);
        if paths.is_empty() {
            return Err(usage("no sentiment lexicon given (--lexicon or paths.lexicons)"));
        }
        let mut lexicon = SentimentLexicon::new();
        for p in &paths {
            let load = load_lexicon(p, loove::config::lexicon_format_for(p))?;
            if load.skipped > 0 {
                log::warn!("{}: skipped {} malformed rows", p.display(), load.skipped);
            }
            lexicon.merge(&load.lexicon);
        }
        Ok(lexicon)
    }

    pub fn text_config(&self, args: &TextArgs) -> CliResult<TextModelConfig> {
        let mut c = self.config.text;
        if let Some(l) = &args.level {
            c.level = l.parse()?;
        }
        if let Some(o) = args.order {
            c.order = parse_order(o)?;
        }
        if let Some(a) = &args.algorithm {
            c.algorithm = a.parse()?;
        }
        if let Some(m) = args.min_count {
            c.min_count = m;
        }
        if args.binary {
            c.weighting = Weighting::Binary;
        }
        Ok(c)
    }

    pub fn vector_paths(&self, args: &VectorArgs) -> CliResult<(PathBuf, Option<PathBuf>)> {
        let vectors = require(&args.vectors, &self.config.paths.embeddings, "--vectors")?;
        let sidecar = match &args.sidecar {
            Some(p) => Some(p.clone()),
            None => {
                let guess = sidecar_for(&vectors);
                guess.exists().then_some(guess)
            }
        };
        Ok((vectors, sidecar))
    }

    pub fn load_store(&self, args: &VectorArgs) -> CliResult<EmbeddingStore> {
        let (vectors, sidecar) = self.vector_paths(args)?;
        let store = EmbeddingStore::load(&vectors, sidecar.as_deref())?;
        if sidecar.is_none() {
            log::warn!("no sidecar for {}; all tokens are treated as words", vectors.display());
        }
        Ok(store)
    }

    pub fn pseudodict_path(&self, flag: &Option<PathBuf>) -> CliResult<PathBuf> {
        require(flag, &self.config.paths.pseudodict, "--pseudodict")
    }

    pub fn out_dir(&self, out: &OutArg) -> CliResult<PathBuf> {
        let dir = require(&out.out, &self.config.paths.output, "--out")?;
        fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

pub fn parse_order(o: u8) -> CliResult<NgramOrder> {
    match o {
        1 => Ok(NgramOrder::Unigram),
        2 => Ok(NgramOrder::UnigramBigram),
        _ => Err(usage(format!("n-gram order must be 1 or 2, got {o}"))),
    }
}

pub fn parse_algorithm(s: &str) -> CliResult<Algorithm> {
    Ok(s.parse()?)
}

/// `vectors.txt` -> `vectors.json`.
pub fn sidecar_for(vectors: &Path) -> PathBuf {
    vectors.with_extension("json")
}

pub fn require(flag: &Option<PathBuf>, fallback: &Option<PathBuf>, name: &str) -> CliResult<PathBuf> {
    flag.clone()
        .or_else(|| fallback.clone())
        .ok_or_else(|| usage(format!("missing {name} (flag or config file)")))
}

pub fn load_pseudodict(path: &Path) -> CliResult<PseudoDict> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(PseudoDict::load_json(path)?)
    } else {
        Ok(PseudoDict::load_tsv(path)?)
    }
}

/// An output directory being filled, with its manifest.
pub struct Run {
    pub dir: PathBuf,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct RecordedConfig<'a, A: Serialize> {
    run: &'a RunConfig,
    args: &'a A,
}

impl Run {
    pub fn new(ctx: &Ctx, command: &str, args: &impl Serialize, dir: PathBuf) -> CliResult<Self> {
        let recorded = RecordedConfig {
            run: &ctx.config,
            args,
        };
        Ok(Run {
            dir,
            manifest: RunManifest::new(command, ctx.seed(), &recorded)?,
        })
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        Ok(self.manifest.add_input(path)?)
    }

    pub fn inputs<'a>(&mut self, paths: impl IntoIterator<Item = &'a PathBuf>) -> CliResult<()> {
        for p in paths {
            self.input(p)?;
        }
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Records a file already written into the directory.
    pub fn output(&mut self, name: &str) -> CliResult<()> {
        Ok(self.manifest.add_output(&self.dir, name)?)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        self.output(name)
    }

    /// Writes CSV produced by `f` into `name`.
    pub fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> loove::Result<()>) -> CliResult<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        self.write(name, text.as_bytes())
    }

    pub fn finish(self) -> CliResult<()> {
        self.manifest.save(&self.dir)?;
        println!("wrote {}", self.dir.display());
        Ok(())
    }
}
