use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use seqcompact::persist;
use seqcompact_core::{Alphabet, Sequence, SuffixIndex};

const Y: &str = "ABACDCBEDEDE";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_seqcompact"));
    c.env_remove("SEQCOMPACT_OUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout_lines(o: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&o.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

struct Toy {
    dir: tempfile::TempDir,
}

impl Toy {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("y.txt"), format!("{Y}\n")).unwrap();
        fs::write(dir.path().join("f.txt"), "A\nBA\nC\nCD\n").unwrap();
        fs::write(dir.path().join("x.fa"), ">X\nAABDADAD\n").unwrap();
        fs::write(dir.path().join("yx.fa"), format!(">Y\n{Y}\n>X\nAABDADAD\n")).unwrap();
        Toy { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn build_reports_length_and_roundtrips() {
    let t = Toy::new();
    let o = run(t.path(), &["build", "y.txt", "--lmax", "3", "-o", "y.sqidx"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout_lines(&o);
    assert_eq!(out[0]["n_prime"], 12);
    let mut r = fs::File::open(t.file("y.sqidx")).unwrap();
    let (loaded, config) = persist::read_index(&mut r, None).unwrap();
    assert!(config.contains("\"command\":\"build\""));
    let a = Alphabet::new(b"ABCDE").unwrap();
    let mem = SuffixIndex::build(&Sequence::from_symbols(&a, Y.as_bytes()).unwrap(), &a, 3).unwrap();
    for w in [&b"A"[..], b"BA", b"ED", b"EDE", b"CC", b"DC"] {
        let w = a.encode(w).unwrap();
        assert_eq!(loaded.count(&w).unwrap(), mem.count(&w).unwrap());
    }
}

#[test]
fn missing_input_is_io_error_without_output() {
    let t = Toy::new();
    let o = run(t.path(), &["build", "nope.txt", "-o", "out.sqidx"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!t.file("out.sqidx").exists());
    assert_eq!(fs::read_dir(t.path()).unwrap().count(), 4);
}

#[test]
fn zero_lmax_is_usage_error() {
    let t = Toy::new();
    let o = run(t.path(), &["build", "y.txt", "--lmax", "0", "-o", "out.sqidx"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!t.file("out.sqidx").exists());
}

#[test]
fn bad_data_exits_three() {
    let t = Toy::new();
    fs::write(t.file("two.fa"), ">a\nAC\n>b\nGT\n").unwrap();
    let o = run(t.path(), &["build", "two.fa", "-o", "two.sqidx"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!t.file("two.sqidx").exists());
    fs::write(t.file("junk.sqidx"), "not an index").unwrap();
    let o = run(t.path(), &["compact", "--index", "junk.sqidx", "--epsilon", "0.1", "--bigN", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn toy_scores_filters_and_sorts() {
    let t = Toy::new();
    let base = ["--features", "f.txt", "--training", "y.txt"];
    let o = run(t.path(), &[&["score"][..], &base, &["x.fa"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(text.contains("\"D\":-0.1,"), "{text}");
    let lines = stdout_lines(&o);
    assert!(lines[0].get("config").is_some());
    assert_eq!(lines[1]["exact"]["D"], "-1/10");
    assert_eq!(lines[1]["exact"]["L_Y"], "7/5");
    assert_eq!(lines[1]["exact"]["L_X_given_Y"], "6/5");

    let o = run(t.path(), &[&["filter"][..], &base, &["x.fa", "--threshold", "0"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_lines(&o)[1]["decision"], "not-acceptable");
    let o = run(t.path(), &[&["filter"][..], &base, &["x.fa", "--threshold", "-0.2", "--accepted", "acc.fa"]].concat());
    assert_eq!(stdout_lines(&o)[1]["decision"], "acceptable");
    assert_eq!(fs::read_to_string(t.file("acc.fa")).unwrap(), ">X\nAABDADAD\n");

    let o = run(t.path(), &[&["sort"][..], &base, &["yx.fa"]].concat());
    let lines = stdout_lines(&o);
    assert_eq!(lines[1]["name"], "Y");
    assert_eq!(lines[1]["rank"], 1);
    assert_eq!(lines[2]["name"], "X");
}

#[test]
fn alphabet_mismatch_is_flagged_and_run_continues() {
    let t = Toy::new();
    fs::write(t.file("odd.fa"), ">odd\nAZZA\n>X\nAABDADAD\n").unwrap();
    let o = run(t.path(), &["score", "--features", "f.txt", "--training", "y.txt", "odd.fa"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = stdout_lines(&o);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["flags"][0], "alphabet_mismatch");
    assert_eq!(lines[1]["profile_summary"]["unknown_symbols"], 2);
    assert_eq!(lines[2]["exact"]["D"], "-1/10");
}

fn leaf_lines(tree: &str) -> Vec<String> {
    tree.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

#[test]
fn noop_compaction_dumps_every_maximal_context() {
    let t = Toy::new();
    run(t.path(), &["build", "y.txt", "--lmax", "3", "-o", "y.sqidx"]);
    let o = run(t.path(), &["compact", "--index", "y.sqidx", "--epsilon", "1/1000", "--bigN", "1", "--features-budget", "1", "-o", "y.tree"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_lines(&o)[0]["min_count"], 1);
    // maximal contexts of length <= 3 by exhaustive enumeration
    let y = Y.as_bytes();
    let mut all: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    for i in 1..=y.len() {
        for j in 1..=3.min(i) {
            *all.entry((0..j).map(|k| y[i - 1 - k]).collect()).or_insert(0) += 1;
        }
    }
    let expected: Vec<String> = all
        .iter()
        .filter(|(w, _)| w.len() == 3 || !all.keys().any(|v| v.len() == w.len() + 1 && v.starts_with(w)))
        .map(|(w, c)| format!("{}\t{c}", String::from_utf8_lossy(w)))
        .collect();
    assert_eq!(leaf_lines(&fs::read_to_string(t.file("y.tree")).unwrap()), expected);
}

#[test]
fn threshold_above_one_gives_empty_tree_with_warning() {
    let t = Toy::new();
    run(t.path(), &["build", "y.txt", "--lmax", "3", "-o", "y.sqidx"]);
    let o = run(t.path(), &["compact", "--index", "y.sqidx", "--epsilon", "100", "--bigN", "1", "--features-budget", "1", "-o", "e.tree"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let tree = fs::read_to_string(t.file("e.tree")).unwrap();
    assert!(tree.contains("# leaves 0"));
    assert!(leaf_lines(&tree).is_empty());
}

#[test]
fn text_and_binary_trees_score_identically() {
    let t = Toy::new();
    run(t.path(), &["build", "y.txt", "--lmax", "3", "-o", "y.sqidx"]);
    let args = ["compact", "--index", "y.sqidx", "--epsilon", "1/2", "--bigN", "1", "--features-budget", "4"];
    run(t.path(), &[&args[..], &["-o", "y.tree"]].concat());
    run(t.path(), &[&args[..], &["-o", "y.treeb", "--tree-format", "binary"]].concat());
    let text = fs::read_to_string(t.file("y.tree")).unwrap();
    assert_eq!(leaf_lines(&text), ["A\t2", "B\t2", "C\t2", "DE\t2", "EDE\t2"]);
    let a = run(t.path(), &["score", "--tree", "y.tree", "yx.fa"]);
    let b = run(t.path(), &["score", "--tree", "y.treeb", "yx.fa"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let (la, lb) = (stdout_lines(&a), stdout_lines(&b));
    assert_eq!(la[1..], lb[1..]);
    assert_eq!(la[1]["name"], "Y");
    assert_eq!(la[1]["exact"]["D"], "0");
}

#[test]
fn eval_without_pruning_passes_with_zero_delta() {
    let t = Toy::new();
    let o = run(t.path(), &["gen", "--length", "3000", "--seed", "5", "--feature-count", "3", "--min-len", "5", "--max-len", "7", "-o", "c"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(
        t.path(),
        &["eval", "--training", "c.fasta", "--lmax", "8", "--epsilon", "1/100000", "--bigN", "50", "--threshold", "-1/20"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = &stdout_lines(&o)[1];
    assert_eq!(rec["min_count"], 1);
    assert_eq!(rec["exact_p_delta"], "0");
    assert_eq!(rec["pass"], true);
    assert_eq!(rec["windows"], 2950);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS"));
}

#[test]
fn eval_feature_mode_uses_manifest() {
    let t = Toy::new();
    run(t.path(), &["gen", "--length", "20000", "--seed", "9", "--weights", "64,8,1,1", "-o", "c"]);
    let o = run(
        t.path(),
        &["eval", "--training", "c.fasta", "--features", "c.features.tsv", "--epsilon", "0.05", "--bigN", "200", "--threshold", "-0.05", "--flips", "flips.jsonl"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = &stdout_lines(&o)[1];
    assert_eq!(rec["mode"], "features");
    assert_eq!(rec["f"], 4);
    assert!(t.file("flips.jsonl").exists());
}

#[test]
fn gen_is_deterministic() {
    let t = Toy::new();
    let args = ["gen", "--length", "5000", "--seed", "42", "--background", "mixing"];
    run(t.path(), &[&args[..], &["-o", "a"]].concat());
    run(t.path(), &[&args[..], &["-o", "b"]].concat());
    for ext in ["fasta", "features.tsv"] {
        let a = fs::read(t.file(&format!("a.{ext}"))).unwrap();
        let b = fs::read(t.file(&format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext}");
    }
    let fasta = fs::read_to_string(t.file("a.fasta")).unwrap();
    assert!(fasta.starts_with(">synthetic seed=42 config="));
}

#[test]
fn out_dir_env_sets_default_location() {
    let t = Toy::new();
    let out = t.file("artifacts");
    fs::create_dir(&out).unwrap();
    let o = bin().current_dir(t.path()).env("SEQCOMPACT_OUT_DIR", &out).args(["build", "y.txt"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("y.sqidx").exists());
}

#[test]
fn sweep_over_three_epsilons() {
    let t = Toy::new();
    run(t.path(), &["gen", "--length", "20000", "--seed", "1", "-o", "c"]);
    run(t.path(), &["build", "c.fasta", "--lmax", "8", "-o", "c.sqidx"]);
    let o = run(
        t.path(),
        &["sweep", "--index", "c.sqidx", "--epsilon", "0.01,0.05,0.1", "--bigN", "100", "--threshold", "-1", "--seed", "1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config {"));
    let body = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers.iter().take(9).collect::<Vec<_>>(), &["epsilon", "f", "N", "T", "leaf_count", "q", "p_delta", "bound", "pass"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let leaves: Vec<u64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(leaves.windows(2).all(|w| w[0] >= w[1]), "{leaves:?}");
    assert!(rows.iter().all(|r| &r[12] == "1"));
}

#[test]
fn output_is_independent_of_thread_count() {
    let t = Toy::new();
    run(t.path(), &["gen", "--length", "20000", "--seed", "2", "-o", "c"]);
    let args = ["eval", "--training", "c.fasta", "--lmax", "12", "--epsilon", "0.02", "--bigN", "100", "--threshold", "-0.1"];
    let one = run(t.path(), &[&args[..], &["--threads", "1"]].concat());
    let four = run(t.path(), &[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}
