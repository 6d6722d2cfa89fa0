//! Sample candidates from two endpoints per seed and write a resumable
//! dataset file.
//!
//!     cargo run --example synth

use std::sync::Arc;

use dslrepair::modelclient::{Budget, Client, Completer, ClientError};
use dslrepair::pipeline::{synthesize_dataset, PipelineOptions, Seed, SynthesisSink};
use dslrepair::resources::Resources;
use dslrepair::Language;

/// Replies with a fixed list, one entry per sample.
struct Canned(Vec<&'static str>);

impl Completer for Canned {
    fn complete(&self, _prompt: &str, sample: usize) -> Result<String, ClientError> {
        Ok(format!("{}\n```", self.0[sample % self.0.len()]))
    }
}

fn main() {
    let budget = Budget::new(100);
    let endpoints = [
        Client::new("alpha", Canned(vec!["ls -l /tmp", "ls /tmp", "ls -l |"]), Arc::clone(&budget)),
        Client::new("beta", Canned(vec!["wc -l access.log", "cat access.log | wc -l"]), Arc::clone(&budget)),
    ];
    let seeds = vec![
        Seed {
            id: "s1".into(),
            query: "List all files in /tmp with details".into(),
            ground_truth: "ls -l /tmp".into(),
            db_id: None,
        },
        Seed {
            id: "s2".into(),
            query: "Count lines in access.log".into(),
            ground_truth: "wc -l access.log".into(),
            db_id: None,
        },
    ];
    let dir = std::env::temp_dir().join(format!("dslrepair-synth-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("synth.jsonl");
    for pass in 1..=2 {
        let mut sink = SynthesisSink::open(&path).unwrap();
        let summary = synthesize_dataset(
            &seeds,
            Language::Bash,
            &endpoints,
            3,
            &Resources::default(),
            &PipelineOptions::default(),
            &mut sink,
        )
        .unwrap();
        println!("pass {pass}: {summary:?}");
    }
    print!("{}", std::fs::read_to_string(&path).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}
