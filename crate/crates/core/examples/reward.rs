//! Adaptive rewards for a batch: the pass rate decides how much the
//! semantic score counts against the validator verdict.
//!
//!     cargo run --example reward

use dslrepair::reward::{compute_rewards, BatchItem};
use dslrepair::SemanticScore;

fn item(id: &str, passed: bool, semantic: f64) -> BatchItem {
    BatchItem {
        id: id.into(),
        passed,
        semantic: SemanticScore::new(semantic).unwrap(),
    }
}

fn main() {
    let batches = [
        vec![item("a", false, 0.9), item("b", false, 0.2), item("c", true, 0.4), item("d", false, 0.7)],
        vec![item("a", true, 0.9), item("b", true, 0.2), item("c", true, 0.4), item("d", false, 0.7)],
    ];
    for batch in batches {
        let out = compute_rewards(batch).unwrap();
        println!("pass rate {:.2}", out.pass_rate);
        for r in out.records() {
            println!("  {} reward {:.3}", r.id, r.reward);
        }
    }
}
