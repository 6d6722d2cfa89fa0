//! Adaptive batch reward: a blend of the pass indicator and the semantic
//! score, weighted by the batch pass rate.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::SemanticScore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub id: String,
    pub passed: bool,
    pub semantic: SemanticScore,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewardBatch {
    pub items: Vec<BatchItem>,
    pub pass_rate: f64,
    pub rewards: Vec<f64>,
}

/// Output line of the JSONL batch format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub id: String,
    pub reward: f64,
    pub pass_rate: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum RewardError {
    #[error("cannot compute rewards for an empty batch")]
    EmptyBatch,
    #[error("line {line}: {source}")]
    Record { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `r_i = (1 - pr) * 1[passed_i] + pr * semantic_i` with `pr` the fraction
/// of passed items in this batch.
pub fn compute_rewards(items: Vec<BatchItem>) -> Result<RewardBatch, RewardError> {
    if items.is_empty() {
        return Err(RewardError::EmptyBatch);
    }
    let passed = items.iter().filter(|i| i.passed).count();
    let pass_rate = passed as f64 / items.len() as f64;
    let rewards = items
        .iter()
        .map(|i| (1.0 - pass_rate) * f64::from(u8::from(i.passed)) + pass_rate * i.semantic.value())
        .collect();
    Ok(RewardBatch {
        items,
        pass_rate,
        rewards,
    })
}

impl RewardBatch {
    pub fn records(&self) -> impl Iterator<Item = RewardRecord> + '_ {
        self.items.iter().zip(&self.rewards).map(|(i, &reward)| RewardRecord {
            id: i.id.clone(),
            reward,
            pass_rate: self.pass_rate,
        })
    }
}

/// Read `{id, passed, semantic}` lines. Blank lines are skipped.
pub fn read_batch(input: impl BufRead) -> Result<Vec<BatchItem>, RewardError> {
    let mut items = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| RewardError::Record { line: n + 1, source })?;
        items.push(item);
    }
    Ok(items)
}

pub fn write_rewards(batch: &RewardBatch, mut out: impl Write) -> std::io::Result<()> {
    for r in batch.records() {
        serde_json::to_writer(&mut out, &r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
