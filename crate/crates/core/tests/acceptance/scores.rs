use dslrepair::Language;

use crate::support;
use crate::Outcome;

const REQUIRED: &[&str] = &[
    "identical",
    "missing task",
    "extra prediction task",
    "value mismatch",
    "name-only change",
    "play reordering",
];

fn check(language: Language, rel: &str, want_len: usize) -> Result<Vec<serde_json::Value>, String> {
    let pairs = support::read_json(rel);
    let pairs = pairs.as_array().ok_or("fixture is not an array")?.clone();
    if pairs.len() != want_len {
        return Err(format!("{rel}: {} pairs, expected {want_len}", pairs.len()));
    }
    let res = support::resources();
    for p in &pairs {
        let id = p["id"].as_str().unwrap();
        let scored = res
            .score(language, p["ground_truth"].as_str().unwrap(), p["prediction"].as_str().unwrap())
            .map_err(|e| format!("{id}: {e}"))?;
        let want = support::ratio(p["expected"].as_str().unwrap());
        let got = scored.score.value();
        if (got - want).abs() > 1e-9 {
            return Err(format!("{id}: got {got}, expected {want} ({})", p["expected"]));
        }
    }
    Ok(pairs)
}

pub fn ansible() -> Outcome {
    let pairs = check(Language::Ansible, "ansible_score_pairs.json", 12)?;
    let covered: Vec<&str> = pairs.iter().filter_map(|p| p["covers"].as_str()).collect();
    for need in REQUIRED {
        if !covered.contains(need) {
            return Err(format!("no pair covers `{need}`"));
        }
    }
    Ok(format!("12 pairs within 1e-9, covering {}", REQUIRED.join(", ")))
}

pub fn bash() -> Outcome {
    let pairs = check(Language::Bash, "bash_score_pairs.json", 10)?;
    let grep = pairs
        .iter()
        .find(|p| p["ground_truth"] == "grep -r foo ." && p["expected"] == "3/4");
    if grep.is_none() {
        return Err("the grep 3/4 example is missing".into());
    }
    Ok("10 pairs within 1e-9, including grep -r foo . vs grep foo . = 0.75".into())
}
