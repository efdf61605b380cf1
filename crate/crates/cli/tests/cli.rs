use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lectalign(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lectalign"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = lectalign(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("json error on stderr")
}

fn prepare(dir: &Path) {
    ok_json(dir, &["synth", "--out", "synth", "--documents", "6"]);
    ok_json(
        dir,
        &["translate", "--manifest", "synth/manifest.json", "--out", "mt", "--src-command", "cat", "--cache-dir", "cache"],
    );
}

#[test]
fn align_and_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    let out = ok_json(
        dir,
        &["align", "--manifest", "mt/manifest.json", "--embeddings", "synth/embeddings.txt", "--skip-penalty", "-0.1", "--out", "align.jsonl"],
    );
    assert_eq!(out["pairs"], 6);
    let lines = fs::read_to_string(dir.join("align.jsonl")).unwrap().lines().count();
    assert_eq!(out["alignments"], lines);
    let eval = ok_json(dir, &["eval-align", "--pred", "align.jsonl", "--gold", "synth/gold.jsonl"]);
    assert!(eval["macro_f1"].as_f64().unwrap() >= 0.95, "{eval}");
    assert_eq!(eval["documents"].as_array().unwrap().len(), 6);

    let text = fs::read_to_string(dir.join("align.jsonl")).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.contains("doc005")).collect();
    fs::write(dir.join("short.jsonl"), kept.join("\n") + "\n").unwrap();
    let out = lectalign(dir, &["eval-align", "--pred", "short.jsonl", "--gold", "synth/gold.jsonl"]);
    assert_eq!(out.status.code(), Some(4));
    let err = error_json(&out);
    assert_eq!(err["error"]["code"], 4);
    assert!(err["error"]["message"].as_str().unwrap().contains("synth/doc005/en-ja"), "{err}");
}

#[test]
fn review_split_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    ok_json(
        dir,
        &["align", "--manifest", "mt/manifest.json", "--embeddings", "synth/embeddings.txt", "--out", "align.jsonl"],
    );
    let session = ["--manifest", "mt/manifest.json", "--alignments", "align.jsonl", "--log", "j.jsonl", "--test-volume", "10", "--dev-volume", "10"];
    let ranked = ok_json(dir, &["rank", "--manifest", "mt/manifest.json", "--alignments", "align.jsonl"]);
    assert_eq!(ranked.as_array().unwrap().len(), 6);
    let mut args = vec!["review", "auto", "--judge", "gold:synth/gold.jsonl"];
    args.extend(session);
    let auto = ok_json(dir, &args);
    assert_eq!(auto["progress"]["phase"], "done");
    let mut args = vec!["split", "--out", "splits"];
    args.extend(session);
    let split = ok_json(dir, &args);
    let total = ["test", "dev", "train"].iter().map(|k| split[k].as_u64().unwrap()).sum::<u64>();
    let aligned = fs::read_to_string(dir.join("align.jsonl")).unwrap().lines().count();
    let decisions = auto["decisions"].as_array().unwrap();
    let count = |split: &str, verdict: &str, field: &str| -> u64 {
        decisions
            .iter()
            .filter(|d| d["split"] == split && d["verdict"] == verdict)
            .map(|d| if field == "good" { d["good"].as_array().unwrap().len() as u64 } else { d["candidates"].as_u64().unwrap() })
            .sum()
    };
    assert_eq!(split["test"].as_u64().unwrap(), count("test", "accepted", "good"));
    assert_eq!(split["dev"].as_u64().unwrap(), count("dev", "accepted", "good"));
    let accepted = count("test", "accepted", "candidates") + count("dev", "accepted", "candidates");
    assert_eq!(total - split["test"].as_u64().unwrap() - split["dev"].as_u64().unwrap(), aligned as u64 - accepted);
    assert!(split["test"].as_u64().unwrap() >= 10);
    for f in ["test.src", "test.tgt", "dev.src", "dev.tgt", "train.src", "train.tgt", "manifest.json"] {
        assert!(dir.join("splits").join(f).exists(), "{f}");
    }
    let stats = ok_json(dir, &["stats", "--manifest", "synth/manifest.json"]);
    assert!(stats["en"]["sentences"].as_u64().unwrap() > 0, "{stats}");
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    fs::write(
        dir.join("run.toml"),
        "[paths]\nmanifest = \"mt/manifest.json\"\nembeddings = \"synth/embeddings.txt\"\nalignments = \"from-config.jsonl\"\n[aligner]\nmethod = \"greedy\"\n",
    )
    .unwrap();
    let out = ok_json(dir, &["--config", "run.toml", "align"]);
    assert_eq!(out["method"], "greedy");
    assert!(dir.join("from-config.jsonl").exists());
    let out = ok_json(dir, &["--config", "run.toml", "align", "--method", "dp", "--out", "flag.jsonl"]);
    assert_eq!(out["method"], "dp");
    assert!(dir.join("flag.jsonl").exists());

    fs::write(dir.join("bad.toml"), "[aligner]\nmethd = \"dp\"\n").unwrap();
    let out = lectalign(dir, &["--config", "bad.toml", "align"]);
    assert_eq!(out.status.code(), Some(3));
    let out = lectalign(dir, &["align", "--manifest", "missing.json", "--out", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_json(&out)["error"]["kind"], "config");
}

#[test]
fn usage_and_help() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(lectalign(tmp.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(lectalign(tmp.path(), &["align", "--help"]).status.code(), Some(0));
    assert_eq!(lectalign(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(lectalign(tmp.path(), &["align", "--max-chunk", "many"]).status.code(), Some(2));
}

#[test]
fn clean_raw_transcripts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::create_dir(dir.join("raw")).unwrap();
    fs::write(
        dir.join("raw/a.en"),
        "[Music] Welcome to the course. Today we talk about graphs.\nA graph has nodes and edges.\n",
    )
    .unwrap();
    fs::write(dir.join("raw/a.ja"), "コースへようこそ。今日はグラフについて話します。\nグラフには頂点と辺があります。\n").unwrap();
    fs::write(dir.join("raw/b.en"), "this transcript has no sentence punctuation at all\n").unwrap();
    fs::write(dir.join("raw/b.ja"), "これは文です。\n").unwrap();
    let entry = |lecture: &str, stem: &str| {
        serde_json::json!({
            "course_id": "c", "lecture_id": lecture,
            "src": {"language": "en", "path": format!("raw/{stem}.en")},
            "tgt": {"language": "ja", "path": format!("raw/{stem}.ja")},
        })
    };
    let manifest = serde_json::json!({"pairs": [entry("l1", "a"), entry("l2", "b")]});
    fs::write(dir.join("raw.json"), manifest.to_string()).unwrap();
    let out = ok_json(dir, &["clean", "--manifest", "raw.json", "--out", "clean"]);
    assert_eq!(out["kept"], 1);
    assert_eq!(out["rejected"], 1);
    let en = fs::read_to_string(dir.join("clean/docs/c/l1.en")).unwrap();
    assert_eq!(en.lines().collect::<Vec<_>>(), ["Welcome to the course.", "Today we talk about graphs.", "A graph has nodes and edges."]);
    assert_eq!(fs::read_to_string(dir.join("clean/docs/c/l1.ja")).unwrap().lines().count(), 3);
    let report = fs::read_to_string(dir.join("clean/cleaning_report.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report.contains("rejected"));
    let next: Value = serde_json::from_str(&fs::read_to_string(dir.join("clean/manifest.json")).unwrap()).unwrap();
    assert_eq!(next["pairs"].as_array().unwrap().len(), 1);
}

#[test]
fn lm_similarity_and_plan() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let write = |name: &str, words: &[&str], n: usize| {
        let lines: Vec<String> = (0..n)
            .map(|i| (0..6).map(|k| words[(i + k) % words.len()]).collect::<Vec<_>>().join(" "))
            .collect();
        fs::write(dir.join(name), lines.join("\n") + "\n").unwrap();
    };
    write("in.txt", &["graph", "node", "edge", "path", "tree"], 40);
    write("out1.txt", &["graph", "node", "edge", "cell", "gene"], 60);
    write("out2.txt", &["stock", "price", "bond", "rate", "loan"], 80);
    let out = ok_json(dir, &["lm", "train", "--corpus", "in.txt", "--out", "in.lm.json"]);
    assert_eq!(out["sentences"], 40);
    assert!(dir.join("in.lm.json").exists());
    let m = ok_json(dir, &["lm", "sim", "--corpora", "in=in.txt,out1=out1.txt,out2=out2.txt", "--out", "m.json"]);
    assert_eq!(m["labels"].as_array().unwrap().len(), 3);
    let plan = ok_json(dir, &["plan", "--in-domain", "in", "--corpora", "in=in.txt,out1=out1.txt,out2=out2.txt"]);
    let from_matrix = ok_json(dir, &["plan", "--in-domain", "in", "--matrix", "m.json", "--sizes", "in=40,out1=60,out2=80"]);
    assert_eq!(plan, from_matrix);
    let stages = plan["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 3);
    let last = stages[2]["datasets"].as_array().unwrap();
    assert_eq!(last.last().unwrap()["name"], "in");
    assert_eq!(last.last().unwrap()["multiplier"], 2);
}
