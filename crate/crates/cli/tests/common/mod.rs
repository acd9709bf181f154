#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CHAIN: [&str; 6] = [
    "ingest",
    "sessions",
    "fit-transitions",
    "build-needs",
    "normalize-needs",
    "fit-temporal",
];

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

pub fn expected() -> serde_json::Value {
    let text = std::fs::read_to_string(fixture_dir().join("expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Runs `needcast` against the mini-world config with artifacts in `work`.
pub fn needcast(work: &Path, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_needcast"));
    cmd.arg("--config")
        .arg(fixture_dir().join("needcast.conf"))
        .arg("--set")
        .arg(format!("work_dir={}", work.display()))
        .args(args)
        .env_remove("NEEDCAST_CONFIG")
        .env_remove("NEEDCAST_LOG");
    cmd.output().expect("spawn needcast")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Every pipeline step in order; returns each step's stdout, failing on the
/// first non-zero exit.
pub fn run_chain(work: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut steps: Vec<Vec<&str>> = CHAIN.iter().map(|c| vec![*c]).collect();
    steps.push(vec!["rank", "--last-activity", "food", "--model", "m2", "--k", "3"]);
    steps.push(vec!["evaluate", "--models", "m0,m1,m2,m3"]);
    let mut outputs = Vec::new();
    for args in steps {
        let out = needcast(work, &args);
        if !out.status.success() {
            return Err(format!("`{}` failed: {}", args.join(" "), stderr(&out).trim()));
        }
        outputs.push((args.join(" "), out.stdout));
    }
    Ok(outputs)
}

/// Parses the per-transition block of `results.tsv`.
pub fn result_rows(text: &str) -> Vec<(String, usize, String, String, f64)> {
    text.lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (
                f[0].into(),
                f[1].parse().unwrap(),
                f[2].into(),
                f[3].into(),
                f[4].parse().unwrap(),
            )
        })
        .collect()
}

/// Parses the summary block of `results.tsv` into ((model, k), mean).
pub fn summary_means(text: &str) -> Vec<((String, usize), f64)> {
    let mut lines = text.lines().skip_while(|l| *l != "# summary").skip(2);
    let mut out = Vec::new();
    for l in lines.by_ref() {
        if l.is_empty() {
            break;
        }
        let f: Vec<&str> = l.split('\t').collect();
        out.push(((f[0].to_owned(), f[1].parse().unwrap()), f[2].parse().unwrap()));
    }
    out
}
