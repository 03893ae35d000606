use std::collections::HashMap;
use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};

use loove::analyze::{
    export_vectors, frequency_table, kind_frequencies, neighbor_type_distribution, sentiment_neighborhood_histogram,
    token_type_stats, top_feature_rank_histogram, write_rank_frequency_csv, zipf_fit, RankRange,
};
use loove::classify::{TextClassifier, TextModelConfig};
use loove::config::NamedDataset;
use loove::corpus::{load_chat_log, load_labeled_tsv, save_labeled_tsv, stratified_split, LabeledExample, SplitSpec};
use loove::embed::{train_embeddings, Query};
use loove::features::NgramVocab;
use loove::grid::{run_baseline_grid, run_loove_grid, LooveGridConfig};
use loove::loove::{train_loove, Clf1Encoding, LooveModel};
use loove::manifest::RunManifest;
use loove::pseudodict::{build_pseudodict, build_word_targeted, evaluate_pseudodict, PseudoDict, Pooling};
use loove::tokenize::{process, tokenize, ProcessingLevel, Token, TokenKind};
use serde::Serialize;

use crate::args::*;
use crate::context::{load_pseudodict, parse_algorithm, require, usage, CliError, CliResult, Ctx, Run};

fn read_lines(text: &[String], input: &Option<PathBuf>) -> CliResult<Vec<String>> {
    if !text.is_empty() {
        return Ok(text.to_vec());
    }
    let lines: io::Result<Vec<String>> = match input {
        Some(p) => fs::read_to_string(p)
            .map(|t| t.lines().map(str::to_string).collect())
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display()))),
        None => io::stdin().lock().lines().collect(),
    };
    lines.map_err(|e| CliError::Data(e.to_string()))
}

fn dataset_path(ctx: &Ctx, flag: &Option<PathBuf>) -> CliResult<PathBuf> {
    require(flag, &ctx.config.paths.dataset, "--data")
}

fn chat_path(ctx: &Ctx, flag: &Option<PathBuf>) -> CliResult<PathBuf> {
    require(flag, &ctx.config.paths.corpus, "--chat")
}

fn split_spec(ctx: &Ctx, flag: Option<f64>) -> CliResult<SplitSpec> {
    Ok(SplitSpec::new(flag.unwrap_or(ctx.config.grid.train_fraction), ctx.seed())?)
}

fn tokenized_chat(path: &Path, emotes: &loove::corpus::EmoteDictionary) -> CliResult<Vec<Vec<Token>>> {
    let log = load_chat_log(path)?;
    if log.skipped > 0 {
        log::warn!("{}: skipped {} malformed messages", path.display(), log.skipped);
    }
    Ok(log.messages.iter().map(|m| tokenize(&m.text, emotes)).collect())
}

pub fn corpus(ctx: &Ctx, cmd: CorpusCmd) -> CliResult<()> {
    match cmd {
        CorpusCmd::Stats(a) => {
            if a.chat.is_none() && a.data.is_none() && ctx.config.paths.corpus.is_none() && ctx.config.paths.dataset.is_none() {
                return Err(usage("give --chat or --data"));
            }
            if let Some(p) = a.chat.as_ref().or(ctx.config.paths.corpus.as_ref()) {
                let log = load_chat_log(p)?;
                let channels: std::collections::BTreeSet<&str> =
                    log.messages.iter().map(|m| m.channel_id.as_str()).collect();
                println!("chat\t{}\tmessages={}\tskipped={}\tchannels={}", p.display(), log.messages.len(), log.skipped, channels.len());
            }
            if let Some(p) = a.data.as_ref().or(ctx.config.paths.dataset.as_ref()) {
                let data = load_labeled_tsv(p)?;
                let mut counts = [0usize; 3];
                for e in &data {
                    counts[e.label.index()] += 1;
                }
                println!(
                    "data\t{}\texamples={}\tnegative={}\tneutral={}\tpositive={}",
                    p.display(),
                    data.len(),
                    counts[0],
                    counts[1],
                    counts[2]
                );
            }
            Ok(())
        }
        CorpusCmd::Split(a) => {
            let path = dataset_path(ctx, &a.data)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "corpus split", &a, dir)?;
            run.input(&path)?;
            let (train, test) = stratified_split(&load_labeled_tsv(&path)?, split_spec(ctx, a.train_fraction)?)?;
            save_labeled_tsv(run.path("train.tsv"), &train)?;
            save_labeled_tsv(run.path("test.tsv"), &test)?;
            run.output("train.tsv")?;
            run.output("test.tsv")?;
            println!("train={} test={}", train.len(), test.len());
            run.finish()
        }
    }
}

pub fn tokenize_cmd(ctx: &Ctx, a: TokenizeArgs) -> CliResult<()> {
    let emotes = ctx.emotes(&a.emotes)?;
    let level: Option<ProcessingLevel> = a.level.as_deref().map(str::parse).transpose()?;
    let resources = ctx.config.text_resources()?;
    for line in read_lines(&a.text, &a.input)? {
        let mut tokens = tokenize(&line, &emotes);
        if let Some(l) = level {
            tokens = process(&tokens, l, &resources);
        }
        println!("{}", serde_json::to_string(&tokens).map_err(|e| CliError::Internal(e.to_string()))?);
    }
    Ok(())
}

fn processed_corpus(
    data: &[LabeledExample],
    emotes: &loove::corpus::EmoteDictionary,
    config: &TextModelConfig,
    ctx: &Ctx,
) -> CliResult<Vec<Vec<Token>>> {
    let mut resources = ctx.config.text_resources()?;
    let raw: Vec<Vec<Token>> = data.iter().map(|e| tokenize(&e.text, emotes)).collect();
    if config.level == ProcessingLevel::P3 {
        resources.learn_vocabulary(raw.iter().map(Vec::as_slice));
    }
    Ok(raw.iter().map(|t| process(t, config.level, &resources)).collect())
}

pub fn features(ctx: &Ctx, a: FeaturesArgs) -> CliResult<()> {
    let path = dataset_path(ctx, &a.data)?;
    let emotes = ctx.emotes(&a.emotes)?;
    let config = ctx.text_config(&a.text)?;
    let dir = ctx.out_dir(&a.out)?;
    let mut run = Run::new(ctx, "features", &a, dir)?;
    run.input(&path)?;
    run.inputs(&ctx.emote_paths(&a.emotes))?;
    let data = load_labeled_tsv(&path)?;
    let corpus = processed_corpus(&data, &emotes, &config, ctx)?;
    let vocab = NgramVocab::build(&corpus, config.order, config.min_count)?;
    vocab.save(run.path("vocab.json"))?;
    run.output("vocab.json")?;
    let f = vocab.kind_fractions();
    run.csv("feature_kinds.csv", |buf| {
        let mut w = csv_writer(buf);
        w.write_record(["kind", "fraction"])?;
        for (name, v) in ["emote_only", "emote_plus", "other"].iter().zip(f) {
            w.write_record([name.to_string(), format!("{v:.6}")])?;
        }
        flush(w)
    })?;
    println!("features={} emote_only={:.4} emote_plus={:.4} other={:.4}", vocab.len(), f[0], f[1], f[2]);
    run.finish()
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::Writer::from_writer(buf)
}

fn flush(mut w: csv::Writer<&mut Vec<u8>>) -> loove::Result<()> {
    w.flush().map_err(|e| loove::Error::Csv(e.into()))
}

pub fn train(ctx: &Ctx, a: TrainArgs) -> CliResult<()> {
    let path = dataset_path(ctx, &a.data)?;
    let emotes = ctx.emotes(&a.emotes)?;
    let config = ctx.text_config(&a.text)?;
    let dir = ctx.out_dir(&a.out)?;
    let mut run = Run::new(ctx, "train", &a, dir)?;
    run.input(&path)?;
    run.inputs(&ctx.emote_paths(&a.emotes))?;
    let data = load_labeled_tsv(&path)?;
    let clf = TextClassifier::train(&data, &emotes, &config, &ctx.config.text_resources()?, ctx.seed())?;
    clf.save(run.path("model.json"))?;
    run.output("model.json")?;
    println!("trained {} on {} examples, {} features", config.algorithm, data.len(), clf.vocab.len());
    run.finish()
}

pub fn eval(ctx: &Ctx, a: EvalArgs) -> CliResult<()> {
    let path = dataset_path(ctx, &a.data)?;
    let emotes = ctx.emotes(&a.emotes)?;
    let dir = ctx.out_dir(&a.out)?;
    let mut run = Run::new(ctx, "eval", &a, dir)?;
    run.input(&a.model)?;
    run.input(&path)?;
    run.inputs(&ctx.emote_paths(&a.emotes))?;
    let clf = TextClassifier::load(&a.model)?;
    let report = clf.evaluate(&load_labeled_tsv(&path)?, &emotes)?;
    run.csv("report.csv", |b| report.write_csv(b))?;
    run.json("report.json", &report)?;
    if a.importance {
        let imp = clf.importance_report()?;
        run.csv("importance.csv", |b| imp.write_csv(b, usize::MAX))?;
        run.csv("importance_groups.csv", |b| imp.write_group_csv(b))?;
    }
    println!("accuracy={:.4} n={}", report.accuracy, report.n);
    run.finish()
}

pub fn embed(ctx: &Ctx, cmd: EmbedCmd) -> CliResult<()> {
    match cmd {
        EmbedCmd::Train(a) => {
            let path = chat_path(ctx, &a.chat)?;
            let emotes = ctx.emotes(&a.emotes)?;
            let mut config = ctx.config.embed;
            if let Some(v) = a.dim {
                config.dim = v;
            }
            if let Some(v) = a.window {
                config.window = v;
            }
            if let Some(v) = a.min_count {
                config.min_count = v;
            }
            if let Some(v) = a.negatives {
                config.negatives = v;
            }
            if let Some(v) = a.epochs {
                config.epochs = v;
            }
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "embed train", &a, dir)?;
            run.input(&path)?;
            run.inputs(&ctx.emote_paths(&a.emotes))?;
            let corpus = tokenized_chat(&path, &emotes)?;
            let store = train_embeddings(&corpus, &config)?;
            store.save(run.path("vectors.txt"), run.path("vectors.json"))?;
            run.output("vectors.txt")?;
            run.output("vectors.json")?;
            let emote_count = (0..store.len()).filter(|&i| store.kind(i) == TokenKind::Emote).count();
            println!("embedded {} tokens ({} emotes), dim {}", store.len(), emote_count, store.dim());
            run.finish()
        }
        EmbedCmd::Nn(a) => {
            let store = ctx.load_store(&a.vectors)?;
            let kinds: Vec<TokenKind> = a.kind.iter().map(|k| k.parse()).collect::<loove::Result<_>>()?;
            let filter = (!kinds.is_empty()).then_some(kinds.as_slice());
            print_neighbors(&store.nearest(Query::Token(&a.token), a.k, filter)?);
            Ok(())
        }
        EmbedCmd::Analogy(a) => {
            let store = ctx.load_store(&a.vectors)?;
            let pos: Vec<&str> = a.positive.iter().map(String::as_str).collect();
            let neg: Vec<&str> = a.negative.iter().map(String::as_str).collect();
            print_neighbors(&store.analogy(&pos, &neg, a.k)?);
            Ok(())
        }
    }
}

fn print_neighbors(r: &loove::embed::NeighborResult) {
    for n in &r.neighbors {
        println!("{}\t{:.6}\t{}", n.token, n.similarity, n.kind);
    }
}

fn pd_config(ctx: &Ctx, k: Option<usize>, cap: Option<usize>, weighted: bool) -> loove::pseudodict::PseudoDictConfig {
    let mut c = ctx.config.pseudodict;
    if let Some(k) = k {
        c.k = k;
    }
    if let Some(cap) = cap {
        c.search_cap = cap;
    }
    if weighted {
        c.pooling = Pooling::SimilarityWeighted;
    }
    c
}

pub fn pseudodict(ctx: &Ctx, cmd: PseudodictCmd) -> CliResult<()> {
    match cmd {
        PseudodictCmd::Build(a) => {
            let (vectors, sidecar) = ctx.vector_paths(&a.vectors)?;
            let lexicon = ctx.lexicon(&a.lexicon)?;
            let config = pd_config(ctx, a.k, a.search_cap, a.weighted);
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "pseudodict build", &a, dir)?;
            run.input(&vectors)?;
            if let Some(s) = &sidecar {
                run.input(s)?;
            }
            run.inputs(&ctx.lexicon_paths(&a.lexicon))?;
            let store = ctx.load_store(&a.vectors)?;
            let dict = build_pseudodict(&store, &lexicon, &config)?;
            dict.save_tsv(run.path("pseudodict.tsv"))?;
            dict.save_json(run.path("pseudodict.json"))?;
            run.output("pseudodict.tsv")?;
            run.output("pseudodict.json")?;
            let emotes = (0..store.len()).filter(|&i| store.kind(i) == TokenKind::Emote).count();
            println!("entries={} of {} emotes", dict.len(), emotes);
            run.finish()
        }
        PseudodictCmd::Eval(a) => {
            let report = if a.self_test {
                let store = ctx.load_store(&a.vectors)?;
                let lexicon = ctx.lexicon(&a.lexicon)?;
                let words = build_word_targeted(&store, &lexicon, &pd_config(ctx, a.k, a.search_cap, false))?;
                evaluate_pseudodict(&words, &lexicon.valences())?
            } else {
                let dict = load_pseudodict(&ctx.pseudodict_path(&a.dict)?)?;
                let reference = match &a.reference {
                    Some(p) => PseudoDict::load_tsv(p)?.valences(),
                    None => ctx.lexicon(&a.lexicon)?.valences(),
                };
                evaluate_pseudodict(&dict, &reference)?
            };
            println!("rmse={:.4} n={}", report.rmse, report.n);
            Ok(())
        }
        PseudodictCmd::Lookup(a) => {
            let dict = load_pseudodict(&ctx.pseudodict_path(&a.dict)?)?;
            let e = dict
                .get(&a.emote)
                .ok_or_else(|| CliError::Core(loove::Error::NotFound(a.emote.clone())))?;
            println!("{}\t{}\t{}", e.emote, e.valence, e.k_used);
            for ev in &e.evidence {
                println!("  {}\t{:.6}\t{}", ev.token, ev.similarity, ev.valence);
            }
            Ok(())
        }
    }
}

pub fn loove_cmd(ctx: &Ctx, cmd: LooveCmd) -> CliResult<()> {
    match cmd {
        LooveCmd::Train(a) => {
            let path = dataset_path(ctx, &a.data)?;
            let pd_path = ctx.pseudodict_path(&a.pseudodict)?;
            let emotes = ctx.emotes(&a.emotes)?;
            let mut config = ctx.config.loove;
            if let Some(alg) = &a.clf2 {
                config.clf2_algorithm = parse_algorithm(alg)?;
            }
            if a.no_stats {
                config.use_stats = false;
            }
            if a.probabilities {
                config.encoding = Clf1Encoding::Probabilities;
            }
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "loove train", &a, dir.clone())?;
            run.input(&path)?;
            run.input(&pd_path)?;
            if let Some(c) = &a.clf1 {
                run.input(c)?;
            }
            run.inputs(&ctx.emote_paths(&a.emotes))?;
            let clf1 = a.clf1.as_ref().map(TextClassifier::load).transpose()?;
            let dict = load_pseudodict(&pd_path)?;
            let data = load_labeled_tsv(&path)?;
            let model = train_loove(&data, clf1.as_ref(), &a.clf1_tag, &dict, &emotes, &config, ctx.seed())?;
            model.save_bundle(dir.join(BUNDLE_DIR))?;
            for name in ["clf1.json", "pseudodict.tsv", "clf2.json", "emotes.txt", "manifest.json"] {
                if dir.join(BUNDLE_DIR).join(name).exists() {
                    run.output(&format!("{BUNDLE_DIR}/{name}"))?;
                }
            }
            println!("fusion features={} clf2={}", model.layout.len(), model.clf2.is_some());
            run.finish()
        }
        LooveCmd::Predict(a) => {
            let model = load_bundle(&a.bundle)?;
            for line in read_lines(&a.text, &a.input)? {
                let p = model.predict(&line);
                let fusion: Vec<String> = p.fusion.iter().map(|v| format!("{v}")).collect();
                println!("{}\t{}\t{}", p.label.code(), fusion.join(","), line);
            }
            Ok(())
        }
        LooveCmd::Eval(a) => {
            let path = dataset_path(ctx, &a.data)?;
            let model = load_bundle(&a.bundle)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "loove eval", &a, dir)?;
            run.input(&path)?;
            let report = model.evaluate(&load_labeled_tsv(&path)?)?;
            run.csv("report.csv", |b| report.write_csv(b))?;
            run.json("report.json", &report)?;
            println!("accuracy={:.4} n={}", report.accuracy, report.n);
            run.finish()
        }
        LooveCmd::Importance(a) => {
            let model = load_bundle(&a.bundle)?;
            let imp = model.feature_importance()?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "loove importance", &a, dir)?;
            run.csv("importance.csv", |b| imp.write_csv(b, usize::MAX))?;
            run.csv("importance_groups.csv", |b| imp.write_group_csv(b))?;
            for (g, v) in &imp.mean_group_sums {
                println!("{g}\t{v:.4}");
            }
            run.finish()
        }
    }
}

const BUNDLE_DIR: &str = "bundle";

/// Accepts a bundle directory or a `loove train` output directory.
fn load_bundle(dir: &Path) -> CliResult<LooveModel> {
    let nested = dir.join(BUNDLE_DIR);
    if nested.join("manifest.json").exists() {
        Ok(LooveModel::load_bundle(nested)?)
    } else {
        Ok(LooveModel::load_bundle(dir)?)
    }
}

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    analysis: &'a str,
    files: Vec<&'a str>,
    result: &'a T,
}

pub fn analyze(ctx: &Ctx, cmd: AnalyzeCmd) -> CliResult<()> {
    match cmd {
        AnalyzeCmd::Tokens(a) => {
            let path = chat_path(ctx, &a.chat)?;
            let emotes = ctx.emotes(&a.emotes)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "analyze tokens", &a, dir)?;
            run.input(&path)?;
            run.inputs(&ctx.emote_paths(&a.emotes))?;
            let stats = token_type_stats(&frequency_table(&tokenized_chat(&path, &emotes)?));
            run.csv("tokens.csv", |b| stats.write_csv(b))?;
            run.json("tokens.json", &Sidecar { analysis: "token_types", files: vec!["tokens.csv"], result: &stats })?;
            for k in TokenKind::ALL {
                println!("{k}\t{}\t{:.4}", stats.unique[k.index()], stats.fractions[k.index()]);
            }
            run.finish()
        }
        AnalyzeCmd::Zipf(a) => {
            let path = chat_path(ctx, &a.chat)?;
            let emotes = ctx.emotes(&a.emotes)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "analyze zipf", &a, dir)?;
            run.input(&path)?;
            run.inputs(&ctx.emote_paths(&a.emotes))?;
            let table = frequency_table(&tokenized_chat(&path, &emotes)?);
            let range = RankRange {
                start: a.rank_start,
                end: a.rank_end,
            };
            let mut fits = Vec::new();
            let mut files = Vec::new();
            for kind in TokenKind::ALL {
                let freqs = kind_frequencies(&table, kind);
                if freqs.is_empty() {
                    continue;
                }
                let name = format!("rank_frequency_{kind}.csv");
                run.csv(&name, |b| write_rank_frequency_csv(&freqs, b))?;
                files.push(name);
                let as_f64: Vec<f64> = freqs.iter().map(|&f| f as f64).collect();
                match zipf_fit(&as_f64, Some(kind), range) {
                    Ok(fit) => {
                        println!("{kind}\texponent={:.4}\tr2={:?}", fit.exponent, fit.r_squared);
                        fits.push(fit);
                    }
                    Err(e) => log::warn!("{kind}: {e}"),
                }
            }
            run.csv("zipf.csv", |b| {
                let mut w = csv_writer(b);
                w.write_record(["kind", "exponent", "intercept", "rank_start", "rank_end", "n_points", "r_squared"])?;
                for f in &fits {
                    w.write_record([
                        f.kind.map(|k| k.as_str()).unwrap_or("all").to_string(),
                        format!("{:.6}", f.exponent),
                        format!("{:.6}", f.intercept),
                        f.rank_start.to_string(),
                        f.rank_end.to_string(),
                        f.n_points.to_string(),
                        f.r_squared.map(|r| format!("{r:.6}")).unwrap_or_default(),
                    ])?;
                }
                flush(w)
            })?;
            files.push("zipf.csv".into());
            let files_ref: Vec<&str> = files.iter().map(String::as_str).collect();
            run.json("zipf.json", &Sidecar { analysis: "zipf", files: files_ref, result: &fits })?;
            run.finish()
        }
        AnalyzeCmd::Neighbors(a) => {
            let store = ctx.load_store(&a.vectors)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "analyze neighbors", &a, dir)?;
            record_vectors(ctx, &mut run, &a.vectors)?;
            let d = neighbor_type_distribution(&store, a.per_kind, a.k);
            run.csv("neighbors.csv", |b| d.write_csv(b))?;
            run.json("neighbors.json", &Sidecar { analysis: "neighbor_types", files: vec!["neighbors.csv"], result: &d })?;
            run.finish()
        }
        AnalyzeCmd::Senthist(a) => {
            let store = ctx.load_store(&a.vectors)?;
            let mut valences: HashMap<String, f64> = ctx.lexicon(&a.lexicon)?.valences();
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "analyze senthist", &a, dir)?;
            record_vectors(ctx, &mut run, &a.vectors)?;
            run.inputs(&ctx.lexicon_paths(&a.lexicon))?;
            if let Some(p) = &a.pseudodict {
                run.input(p)?;
                valences.extend(load_pseudodict(p)?.valences());
            }
            let h = sentiment_neighborhood_histogram(&store, &valences, a.bins, a.neighbors)?;
            run.csv("senthist.csv", |b| h.write_csv(b))?;
            run.json("senthist.json", &Sidecar { analysis: "sentiment_neighborhood", files: vec!["senthist.csv"], result: &h })?;
            run.finish()
        }
        AnalyzeCmd::Features(a) => {
            let clf = TextClassifier::load(&a.model)?;
            let report = clf.importance_report()?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "analyze features", &a, dir)?;
            run.input(&a.model)?;
            let h = top_feature_rank_histogram(&report, a.top_n, |g| g.starts_with("emote"));
            run.csv("feature_ranks.csv", |b| h.write_csv(b))?;
            run.csv("importance_groups.csv", |b| report.write_group_csv(b))?;
            run.json(
                "feature_ranks.json",
                &Sidecar { analysis: "top_feature_ranks", files: vec!["feature_ranks.csv", "importance_groups.csv"], result: &h },
            )?;
            println!(
                "emote mean/median rank {:?}/{:?}; other {:?}/{:?}",
                h.emote.mean_rank, h.emote.median_rank, h.other.mean_rank, h.other.median_rank
            );
            run.finish()
        }
        AnalyzeCmd::ExportVectors(a) => {
            let store = ctx.load_store(&a.vectors)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "analyze export-vectors", &a, dir)?;
            record_vectors(ctx, &mut run, &a.vectors)?;
            let mut n = 0;
            run.csv("vectors.csv", |b| {
                n = export_vectors(&store, a.per_kind, b)?;
                Ok(())
            })?;
            println!("exported {n} tokens");
            run.finish()
        }
    }
}

fn record_vectors(ctx: &Ctx, run: &mut Run, args: &VectorArgs) -> CliResult<()> {
    let (vectors, sidecar) = ctx.vector_paths(args)?;
    run.input(&vectors)?;
    if let Some(s) = sidecar {
        run.input(&s)?;
    }
    Ok(())
}

fn parse_external(ctx: &Ctx, flags: &[String]) -> CliResult<Vec<NamedDataset>> {
    if flags.is_empty() {
        return Ok(ctx.config.paths.external.clone());
    }
    flags
        .iter()
        .map(|f| {
            let (tag, path) = f
                .split_once('=')
                .ok_or_else(|| usage(format!("--external expects TAG=PATH, got {f:?}")))?;
            Ok(NamedDataset {
                tag: tag.to_string(),
                path: PathBuf::from(path),
            })
        })
        .collect()
}

pub fn grid(ctx: &Ctx, cmd: GridCmd) -> CliResult<()> {
    match cmd {
        GridCmd::Baseline(a) => {
            let path = dataset_path(ctx, &a.data)?;
            let emotes = ctx.emotes(&a.emotes)?;
            let split = split_spec(ctx, a.train_fraction)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "grid baseline", &a, dir)?;
            run.input(&path)?;
            run.inputs(&ctx.emote_paths(&a.emotes))?;
            let data = load_labeled_tsv(&path)?;
            let g = run_baseline_grid(&data, &emotes, &ctx.config.text_resources()?, &ctx.config.text, split, ctx.seed())?;
            run.csv("baseline.csv", |b| g.write_csv(b))?;
            run.json("baseline.json", &g)?;
            println!(
                "cells={} majority={:.4} best={:?}",
                g.cells.len(),
                g.majority_baseline,
                g.best().map(|c| (c.level, c.algorithm, c.order.suffix(), c.accuracy))
            );
            run.finish()
        }
        GridCmd::Loove(a) => {
            let path = dataset_path(ctx, &a.data)?;
            let pd_path = ctx.pseudodict_path(&a.pseudodict)?;
            let external = parse_external(ctx, &a.external)?;
            let emotes = ctx.emotes(&a.emotes)?;
            let dir = ctx.out_dir(&a.out)?;
            let mut run = Run::new(ctx, "grid loove", &a, dir)?;
            run.input(&path)?;
            run.input(&pd_path)?;
            for d in &external {
                run.input(&d.path)?;
            }
            run.inputs(&ctx.emote_paths(&a.emotes))?;
            let datasets: Vec<(String, Vec<LabeledExample>)> = external
                .iter()
                .map(|d| Ok((d.tag.clone(), load_labeled_tsv(&d.path)?)))
                .collect::<loove::Result<_>>()?;
            let config = LooveGridConfig {
                text: ctx.config.text,
                clf1_algorithm: ctx.config.grid.clf1_algorithm,
                hyper: ctx.config.loove.hyper,
                train_fraction: a.train_fraction.unwrap_or(ctx.config.grid.train_fraction),
                ..LooveGridConfig::default()
            };
            let g = run_loove_grid(
                &load_labeled_tsv(&path)?,
                &datasets,
                &load_pseudodict(&pd_path)?,
                &emotes,
                &ctx.config.text_resources()?,
                &config,
                ctx.seed(),
            )?;
            run.csv("loove.csv", |b| g.write_csv(b))?;
            run.json("loove.json", &g)?;
            println!("rows={} columns={}", g.rows.len(), g.columns.len());
            run.finish()
        }
    }
}

pub fn verify(a: VerifyArgs) -> CliResult<()> {
    let manifest = RunManifest::load(&a.path)?;
    let dir = if a.path.is_dir() {
        a.path.clone()
    } else {
        a.path.parent().map(Path::to_path_buf).unwrap_or_default()
    };
    let bad = manifest.verify(&dir);
    for m in &bad {
        eprintln!(
            "warning: {:?} {} hash mismatch (expected {}, found {})",
            m.role,
            m.path,
            m.expected,
            m.actual.as_deref().unwrap_or("missing")
        );
    }
    if bad.is_empty() {
        println!(
            "ok: {} inputs, {} outputs match",
            manifest.inputs.len(),
            manifest.outputs.len()
        );
        Ok(())
    } else {
        Err(CliError::Data(format!("{} file(s) changed since the run", bad.len())))
    }
}
