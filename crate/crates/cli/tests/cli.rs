use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn loove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loove"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

const FILLER: [&str; 8] = ["stream", "game", "chat", "today", "boss", "map", "team", "song"];

impl Fixture {
    fn new() -> Self {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        let mut data = String::new();
        let mut ext = String::new();
        for i in 0..45 {
            let w = FILLER[i % FILLER.len()];
            let v = FILLER[(i * 3 + 1) % FILLER.len()];
            data.push_str(&format!("{w} love {v} PogU\tpositive\n"));
            data.push_str(&format!("{v} hate {w} BibleThump\tnegative\n"));
            data.push_str(&format!("{w} {v} schedule\tneutral\n"));
            ext.push_str(&format!("{w} love it\tpositive\n{v} hate it\tnegative\n{w} the schedule\tneutral\n"));
        }
        fs::write(f.path("data.tsv"), data).unwrap();
        fs::write(f.path("ext.tsv"), ext).unwrap();
        fs::write(f.path("emotes.txt"), "PogU\nBibleThump\n").unwrap();
        fs::write(f.path("pd.tsv"), "PogU\t0.8\nBibleThump\t-0.7\n").unwrap();
        fs::write(f.path("config.toml"), "[text.hyper.rf]\nn_trees = 15\n").unwrap();
        let mut chat = String::new();
        for i in 0..400 {
            let w = FILLER[i % FILLER.len()];
            let line = if i % 2 == 0 {
                format!("good {w} PogU nice")
            } else {
                format!("bad {w} BibleThump awful")
            };
            chat.push_str(&format!("{{\"channel\":\"c\",\"ts\":{i},\"text\":\"{line}\"}}\n"));
        }
        fs::write(f.path("chat.jsonl"), chat).unwrap();
        fs::write(f.path("lexicon.tsv"), "good\t0.6\nnice\t0.5\nbad\t-0.6\nawful\t-0.8\n").unwrap();
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        let config = self.path("config.toml");
        let mut all = vec!["--config", s(&config)];
        all.extend_from_slice(args);
        loove(&all)
    }
}

#[test]
fn missing_required_input_is_a_usage_error() {
    let o = loove(&["grid", "baseline"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = loove(&["no-such-command"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_data_is_a_data_error() {
    let f = Fixture::new();
    fs::write(f.path("bad.tsv"), "fine\tpositive\nbroken line\tnot-a-label\n").unwrap();
    let out = f.path("out");
    let o = f.run(&["train", "--data", s(&f.path("bad.tsv")), "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let o = f.run(&["train", "--data", s(&f.path("missing.tsv")), "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn baseline_grid_has_24_cells_and_reruns_identically() {
    let f = Fixture::new();
    let (a, b) = (f.path("a"), f.path("b"));
    for d in [&a, &b] {
        let o = f.run(&["grid", "baseline", "--data", s(&f.path("data.tsv")), "--emotes", s(&f.path("emotes.txt")), "--out", s(d)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let csv = fs::read_to_string(a.join("baseline.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 9);
    let cells: usize = lines[1..].iter().map(|l| l.split(',').count() - 1).sum();
    assert_eq!(cells, 24);
    for name in ["manifest.json", "baseline.csv", "baseline.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let o = loove(&["verify", s(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_detects_a_flipped_byte() {
    let f = Fixture::new();
    let out = f.path("m");
    let o = f.run(&["train", "--data", s(&f.path("data.tsv")), "--algorithm", "NB", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let model = out.join("model.json");
    let mut bytes = fs::read(&model).unwrap();
    let i = bytes.len() / 2;
    bytes[i] ^= 0x01;
    fs::write(&model, bytes).unwrap();
    let o = loove(&["verify", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("model.json"), "{}", stderr(&o));
}

#[test]
fn loove_train_and_predict() {
    let f = Fixture::new();
    let clf1 = f.path("clf1");
    let o = f.run(&["train", "--data", s(&f.path("ext.tsv")), "--algorithm", "NB", "--out", s(&clf1)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fused = f.path("fused");
    let o = f.run(&[
        "loove",
        "train",
        "--data",
        s(&f.path("data.tsv")),
        "--clf1",
        s(&clf1.join("model.json")),
        "--clf1-tag",
        "T",
        "--pseudodict",
        s(&f.path("pd.tsv")),
        "--emotes",
        s(&f.path("emotes.txt")),
        "--out",
        s(&fused),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = loove(&["loove", "predict", "--bundle", s(&fused), "game PogU", "map BibleThump"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let labels: Vec<&str> = stdout.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(labels, ["1", "-1"]);
    let o = loove(&["verify", s(&fused)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn loove_grid_shape() {
    let f = Fixture::new();
    let ext = format!("T={}", s(&f.path("ext.tsv")));
    let ext2 = format!("U={}", s(&f.path("ext.tsv")));
    let out = f.path("g");
    let o = f.run(&[
        "grid",
        "loove",
        "--data",
        s(&f.path("data.tsv")),
        "--external",
        &ext,
        "--external",
        &ext2,
        "--pseudodict",
        s(&f.path("pd.tsv")),
        "--emotes",
        s(&f.path("emotes.txt")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("loove.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 3);
    assert!(lines.iter().all(|l| l.split(',').count() == 1 + 4), "{csv}");
}

#[test]
fn embed_and_pseudodict_commands() {
    let f = Fixture::new();
    let emb = f.path("emb");
    let o = f.run(&[
        "embed",
        "train",
        "--chat",
        s(&f.path("chat.jsonl")),
        "--dim",
        "12",
        "--min-count",
        "5",
        "--epochs",
        "3",
        "--emotes",
        s(&f.path("emotes.txt")),
        "--out",
        s(&emb),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let vectors = emb.join("vectors.txt");
    let o = loove(&["embed", "nn", "PogU", "-k", "3", "--vectors", s(&vectors)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
    let o = loove(&["embed", "nn", "NotAToken", "--vectors", s(&vectors)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let pd = f.path("pd");
    let o = f.run(&["pseudodict", "build", "--vectors", s(&vectors), "--lexicon", s(&f.path("lexicon.tsv")), "--out", s(&pd)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_dir(&pd).unwrap().count() >= 2);
}

#[test]
fn remaining_subcommands_run() {
    let f = Fixture::new();
    let data = f.path("data.tsv");
    let emotes = f.path("emotes.txt");
    let chat = f.path("chat.jsonl");
    let ok = |args: &[&str]| {
        let o = f.run(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        String::from_utf8(o.stdout).unwrap()
    };
    ok(&["corpus", "stats", "--data", s(&data)]);
    ok(&["corpus", "stats", "--chat", s(&chat)]);
    let split = f.path("split");
    ok(&["corpus", "split", "--data", s(&data), "--out", s(&split)]);
    let tokens = ok(&["tokenize", "--level", "P1", "--emotes", s(&emotes), "Sooooo GOOD PogU :)"]);
    assert!(tokens.contains("sooo") && tokens.contains("PogU"), "{tokens}");
    ok(&["features", "--data", s(&data), "--emotes", s(&emotes), "--out", s(&f.path("feat"))]);

    let model = f.path("model");
    ok(&["train", "--data", s(&data), "--emotes", s(&emotes), "--out", s(&model)]);
    let model_json = model.join("model.json");
    ok(&["eval", "--model", s(&model_json), "--data", s(&data), "--importance", "--emotes", s(&emotes), "--out", s(&f.path("eval"))]);
    ok(&["analyze", "features", "--model", s(&model_json), "--top-n", "10", "--out", s(&f.path("af"))]);

    ok(&["analyze", "tokens", "--chat", s(&chat), "--emotes", s(&emotes), "--out", s(&f.path("at"))]);
    ok(&["analyze", "zipf", "--chat", s(&chat), "--emotes", s(&emotes), "--out", s(&f.path("az"))]);

    let emb = f.path("emb");
    ok(&["embed", "train", "--chat", s(&chat), "--dim", "8", "--min-count", "2", "--emotes", s(&emotes), "--out", s(&emb)]);
    let vectors = emb.join("vectors.txt");
    ok(&["embed", "analogy", "--positive", "PogU,bad", "--negative", "good", "-k", "2", "--vectors", s(&vectors)]);
    ok(&["analyze", "neighbors", "--vectors", s(&vectors), "-k", "5", "--out", s(&f.path("an"))]);
    let lexicon = f.path("lexicon.tsv");
    ok(&["analyze", "senthist", "--vectors", s(&vectors), "--lexicon", s(&lexicon), "--bins", "4", "--neighbors", "10", "--out", s(&f.path("as"))]);
    ok(&["analyze", "export-vectors", "--vectors", s(&vectors), "--per-kind", "5", "--out", s(&f.path("ae"))]);

    let pd = f.path("pd");
    ok(&["pseudodict", "build", "--vectors", s(&vectors), "--lexicon", s(&lexicon), "--out", s(&pd)]);
    ok(&["pseudodict", "eval", "--self-test", "--vectors", s(&vectors), "--lexicon", s(&lexicon)]);
    ok(&["pseudodict", "eval", "--dict", s(&f.path("pd.tsv")), "--reference", s(&f.path("pd.tsv"))]);
    let entry = ok(&["pseudodict", "lookup", "PogU", "--dict", s(&f.path("pd.tsv"))]);
    assert!(entry.contains("0.8"), "{entry}");

    let fused = f.path("fused");
    ok(&["loove", "train", "--data", s(&data), "--pseudodict", s(&f.path("pd.tsv")), "--emotes", s(&emotes), "--clf2", "ME", "--out", s(&fused)]);
    let acc = ok(&["loove", "eval", "--bundle", s(&fused), "--data", s(&data), "--out", s(&f.path("le"))]);
    assert!(acc.contains("accuracy="), "{acc}");
    let o = f.run(&["loove", "importance", "--bundle", s(&fused), "--out", s(&f.path("li"))]);
    assert_eq!(code(&o), 2, "importances need a forest: {}", stderr(&o));
}
