use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dslrepair::reward::{compute_rewards, BatchItem};
use dslrepair::SemanticScore;

use crate::Outcome;

fn batch(bits: &[bool], sem: &[f64]) -> Vec<BatchItem> {
    bits.iter()
        .zip(sem)
        .enumerate()
        .map(|(i, (&passed, &s))| BatchItem {
            id: i.to_string(),
            passed,
            semantic: SemanticScore::new(s).unwrap(),
        })
        .collect()
}

pub fn run() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=64);
        let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let sem: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let got = compute_rewards(batch(&bits, &sem)).map_err(|e| e.to_string())?;
        let pr = bits.iter().filter(|&&b| b).count() as f64 / n as f64;
        for i in 0..n {
            let want = (1.0 - pr) * f64::from(u8::from(bits[i])) + pr * sem[i];
            let err = (got.rewards[i] - want).abs();
            worst = worst.max(err);
            if err > 1e-12 {
                return Err(format!("batch {trial} item {i}: {} vs {want}", got.rewards[i]));
            }
        }
    }

    // Boundaries: nobody passes, everybody passes.
    for n in [1, 7, 64] {
        let sem: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let none = compute_rewards(batch(&vec![false; n], &sem)).unwrap();
        if none.rewards.iter().any(|&r| r != 0.0) {
            return Err(format!("pr = 0 with n = {n} did not give the indicator"));
        }
        let all = compute_rewards(batch(&vec![true; n], &sem)).unwrap();
        if all.rewards != sem {
            return Err(format!("pr = 1 with n = {n} did not give the semantic vector"));
        }
    }
    Ok(format!("1000 batches, max error {worst:.1e}; boundaries exact"))
}
