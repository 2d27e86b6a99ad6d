mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::sample_corpus;

fn glovev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glovev")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> Output {
    let o = glovev(args);
    assert!(o.status.success(), "glovev {}: {}", args.join(" "), stderr(&o));
    o
}

/// A trained model and covariance file built from the head of the sample
/// corpus.
struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let text = fs::read_to_string(sample_corpus()).unwrap();
        let head: String = text.lines().take(600).map(|l| format!("{l}\n")).collect();
        fs::write(dir.path().join("corpus.txt"), head).unwrap();
        let f = Fixture { dir };
        ok(&["vocab", "--corpus", &f.p("corpus.txt"), "--out", &f.p("vocab.txt")]);
        ok(&["cooccur", "--corpus", &f.p("corpus.txt"), "--vocab", &f.p("vocab.txt"), "--out", &f.p("cooc.bin")]);
        ok(&[
            "train", "--vocab", &f.p("vocab.txt"), "--cooccur", &f.p("cooc.bin"), "--out", &f.p("m"), "--dim", "5",
            "--epochs", "5",
        ]);
        ok(&["variance", "--cooccur", &f.p("cooc.bin"), "--model", &f.p("m"), "--out", &f.p("cov.bin")]);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, body: &str) -> String {
        fs::write(self.path(name), body).unwrap();
        self.p(name)
    }

    fn query(&self, cmd: &str, extra: &[&str]) -> Output {
        let (m, c) = (self.p("m"), self.p("cov.bin"));
        glovev(&[&[cmd, "--model", &m, "--covariance", &c], extra].concat())
    }
}

/// Data rows of a TSV table, split into fields.
fn rows(table: &str) -> Vec<Vec<String>> {
    table.lines().skip(1).map(|l| l.split('\t').map(str::to_string).collect()).collect()
}

fn files_with_prefix(dir: &Path, prefix: &str) -> Vec<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with(prefix))
        .collect()
}

#[test]
fn help_exits_zero() {
    let o = glovev(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("variance"));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(glovev(&["train", "--dim"]).status.code(), Some(1));
    assert_eq!(glovev(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(glovev(&["vocab", "--corpus", "/nonexistent/corpus.txt", "--out", "/tmp/x"]).status.code(), Some(1));
}

#[test]
fn diverging_training_exits_two_without_output() {
    let f = Fixture::new();
    let o = glovev(&[
        "train", "--vocab", &f.p("vocab.txt"), "--cooccur", &f.p("cooc.bin"), "--out", &f.p("bad"), "--dim", "5",
        "--epochs", "5", "--lr", "1e300",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(files_with_prefix(f.dir.path(), "bad").is_empty());
}

#[test]
fn format_errors_name_the_offset() {
    let f = Fixture::new();
    let bytes = fs::read(f.path("cooc.bin")).unwrap();
    fs::write(f.path("trunc.bin"), &bytes[..bytes.len() - 5]).unwrap();
    let o = glovev(&["roundtrip", "--format", "cooccur", &f.p("trunc.bin")]);
    assert_eq!(o.status.code(), Some(1));
    let expected = format!("{}", (bytes.len() - 5) / 16 * 16);
    assert!(stderr(&o).contains(&expected), "{}", stderr(&o));

    let bad = f.write("bad_vocab.txt", "the 10\nof x\n");
    let o = glovev(&["roundtrip", "--format", "vocab", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("10"), "{}", stderr(&o));
}

#[test]
fn roundtrip_reports_identical_files() {
    let f = Fixture::new();
    for (format, file) in
        [("vocab", "vocab.txt"), ("cooccur", "cooc.bin"), ("vectors", "m.center.txt"), ("covariance", "cov.bin")]
    {
        let o = ok(&["roundtrip", "--format", format, &f.p(file)]);
        assert!(stdout(&o).contains("identical"), "{format}");
    }
}

#[test]
fn empty_corpus_gives_empty_matrix_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    fs::write(dir.path().join("empty.txt"), "").unwrap();
    ok(&["vocab", "--corpus", &p("empty.txt"), "--out", &p("vocab.txt")]);
    let o = ok(&["cooccur", "--corpus", &p("empty.txt"), "--vocab", &p("vocab.txt"), "--out", &p("cooc.bin")]);
    assert!(stderr(&o).contains("empty"));
    assert_eq!(fs::metadata(dir.path().join("cooc.bin")).unwrap().len(), 0);
}

#[test]
fn vocabulary_mismatch_fails_before_training() {
    let f = Fixture::new();
    let other = f.write("other.txt", "a b c a b c a b c a b c a b c\n");
    ok(&["vocab", "--corpus", &other, "--out", &f.p("other_vocab.txt"), "--min-count", "1"]);
    let o = glovev(&["train", "--vocab", &f.p("other_vocab.txt"), "--cooccur", &f.p("cooc.bin"), "--out", &f.p("mm")]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(files_with_prefix(f.dir.path(), "mm").is_empty());
}

#[test]
fn finished_stage_is_skipped_until_forced() {
    let f = Fixture::new();
    let args = ["vocab", "--corpus", &f.p("corpus.txt"), "--out", &f.p("vocab.txt")];
    assert!(stderr(&ok(&args)).contains("up to date"));
    assert!(!stderr(&ok(&[&args[..], &["--force"]].concat())).contains("up to date"));
    assert!(!stderr(&ok(&[&args[..], &["--min-count", "3"]].concat())).contains("up to date"));
}

#[test]
fn similarity_of_a_word_with_itself_is_one() {
    let f = Fixture::new();
    let o = f.query("similarity", &["--pair", "the", "the", "--pair", "the", "of"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    assert!((r[0][1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!(r[0][2].parse::<f64>().unwrap() < 1e-12);
    assert!(r[1][2].parse::<f64>().unwrap() > 0.0);
    assert!(stderr(&o).contains("tests performed: 0"));
}

#[test]
fn bias_with_identical_groups_is_zero() {
    let f = Fixture::new();
    let attrs = f.write("attrs.txt", "the\nof\n");
    let group = f.write("group.txt", "and\nto\n");
    let o = f.query("bias", &["--attributes", &attrs, "--group-a", &group, "--group-b", &group]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[0][6].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn unknown_words_need_allow_skip() {
    let f = Fixture::new();
    let o = f.query("similarity", &["--pair", "the", "qqqq"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--allow-skip"), "{}", stderr(&o));

    let o = f.query("similarity", &["--pair", "the", "qqqq", "--pair", "the", "of", "--allow-skip"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 1);
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn jsonl_output_parses() {
    let f = Fixture::new();
    let o = f.query("similarity", &["--pair", "the", "of", "--format", "jsonl", "--method", "mc", "--draws", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(v["method"], "monte_carlo");
    assert_eq!(v["draws"], 50);
}
