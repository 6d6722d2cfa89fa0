use dslrepair::metrics::bleu;

use crate::support;
use crate::Outcome;

fn tokens(v: &serde_json::Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|t| t.as_str().unwrap().to_string()).collect()
}

pub fn run() -> Outcome {
    let golden = support::read_json("bleu_golden.json");
    let fixtures = golden["fixtures"].as_array().ok_or("no fixtures")?;
    if fixtures.len() != 20 {
        return Err(format!("{} fixtures, expected 20", fixtures.len()));
    }
    let mut worst = 0.0f64;
    for f in fixtures {
        let id = f["id"].as_str().unwrap();
        let pairs: Vec<(Vec<String>, Vec<String>)> = f["pairs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (tokens(&p["prediction"]), tokens(&p["reference"])))
            .collect();
        let want = f["bleu"].as_f64().unwrap();
        let got = bleu(&pairs).map_err(|e| format!("{id}: {e}"))?;
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 1e-6 {
            return Err(format!("{id}: {got} vs golden {want}"));
        }
        for side in [0, 1] {
            let same: Vec<_> = pairs
                .iter()
                .map(|(p, r)| {
                    let x = if side == 0 { p } else { r };
                    (x.clone(), x.clone())
                })
                .collect();
            let b = bleu(&same).map_err(|e| format!("{id}: {e}"))?;
            if (b - 1.0).abs() > 1e-12 {
                return Err(format!("{id}: BLEU(x, x) = {b}"));
            }
        }
    }
    Ok(format!("20 fixtures, max deviation {worst:.1e}; BLEU(x, x) = 1 on every fixture"))
}
