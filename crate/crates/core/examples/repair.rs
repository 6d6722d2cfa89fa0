//! Generate, validate and repair with scripted model endpoints.
//!
//!     cargo run --example repair

use std::sync::Arc;

use dslrepair::modelclient::{Budget, Client, MockCompleter};
use dslrepair::pipeline::{run_inference, PipelineOptions, QueryInput};
use dslrepair::resources::Resources;
use dslrepair::Language;

const GENERATOR: &str = r#"{
  "rules": [
    {"contains": "Task: count lines\n", "replies": ["wc -l notes.txt\n```"]},
    {"contains": "Task: list files\n", "replies": ["ls -l |\n```"]}
  ],
  "default": ["echo unknown\n```"]
}"#;

const FIXER: &str = r#"{
  "rules": [{"contains": "User query: list files\n", "replies": ["ls -l\n```"]}],
  "default": ["echo still broken |\n```"]
}"#;

fn main() {
    let budget = Budget::new(20);
    let generator = Client::new("generator", MockCompleter::from_json(GENERATOR).unwrap(), Arc::clone(&budget));
    let fixer = Client::new("fixer", MockCompleter::from_json(FIXER).unwrap(), Arc::clone(&budget));
    let queries: Vec<QueryInput> = ["count lines", "list files"]
        .iter()
        .enumerate()
        .map(|(i, q)| QueryInput {
            id: format!("q{i}"),
            query: q.to_string(),
            db_id: None,
        })
        .collect();
    let records = run_inference(
        &queries,
        Language::Bash,
        &generator,
        &fixer,
        &Resources::default(),
        &PipelineOptions::default(),
    );
    for r in &records {
        println!("{}", serde_json::to_string_pretty(r).unwrap());
    }
    println!("requests used: {}", budget.used());
}
