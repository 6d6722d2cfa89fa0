//! Fixture helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dslrepair::codes;
use dslrepair::resources::Resources;
use dslrepair::sql::SchemaSet;
use dslrepair::{Language, ValidationReport};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn read(rel: &str) -> String {
    let p = fixture(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn read_json(rel: &str) -> serde_json::Value {
    serde_json::from_str(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn read_jsonl(rel: &str) -> Vec<serde_json::Value> {
    read(rel)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn resources() -> Resources {
    Resources {
        schemas: SchemaSet::load(&fixture("schema.json")).expect("schema fixture"),
        ..Resources::default()
    }
}

/// `"a/b"` as a float; the fixtures keep hand computations exact.
pub fn ratio(s: &str) -> f64 {
    let (n, d) = s.split_once('/').expect("num/den");
    n.trim().parse::<f64>().unwrap() / d.trim().parse::<f64>().unwrap()
}

/// Error-severity codes of a report, sorted and deduplicated.
pub fn error_codes(report: &ValidationReport) -> Vec<String> {
    let mut codes: Vec<String> = report
        .diagnostics
        .iter()
        .filter(|d| codes::is_error(&d.code))
        .map(|d| d.code.clone())
        .collect();
    codes.sort();
    codes.dedup();
    codes
}

pub struct CorpusEntry {
    pub file: PathBuf,
    pub db_id: Option<String>,
    /// Empty when the program is annotated valid.
    pub expected: Vec<String>,
}

/// `corpus/<lang>/manifest.tsv`: `file [db_id] codes|ok`.
pub fn corpus(language: Language) -> Vec<CorpusEntry> {
    let dir = fixture(&format!("corpus/{language}"));
    let manifest = std::fs::read_to_string(dir.join("manifest.tsv")).unwrap();
    manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split('\t').collect();
            let (file, db_id, expected) = match cols.as_slice() {
                [f, db, e] => (*f, Some(db.to_string()), *e),
                [f, e] => (*f, None, *e),
                _ => panic!("bad manifest line `{line}`"),
            };
            let mut expected: Vec<String> = if expected == "ok" {
                Vec::new()
            } else {
                expected.split(',').map(str::to_string).collect()
            };
            expected.sort();
            CorpusEntry {
                file: dir.join(file),
                db_id,
                expected,
            }
        })
        .collect()
}

/// Run the CLI in-process.
pub fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["dslrepair"];
    argv.extend_from_slice(args);
    dslrepair::cli::run(argv)
}
