use std::collections::BTreeMap;
use std::path::Path;

use crate::support;
use crate::Outcome;

const LANGUAGES: [&str; 3] = ["ansible", "bash", "sql"];

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn repair(lang: &str, dir: &Path, tag: &str, concurrency: usize) -> Result<Vec<u8>, String> {
    let config = support::fixture(&format!("e2e/{lang}.toml"));
    let queries = support::fixture(&format!("e2e/queries_{lang}.jsonl"));
    let out = dir.join(format!("repair-{lang}-{tag}.jsonl"));
    let manifest = dir.join(format!("repair-{lang}-{tag}-manifest.json"));
    let c = concurrency.to_string();
    let code = support::cli(&[
        "repair",
        "--config",
        path(&config),
        "--concurrency",
        &c,
        "--out",
        path(&out),
        "--manifest",
        path(&manifest),
        path(&queries),
    ]);
    if code != 0 {
        return Err(format!("repair {lang} exited {code}"));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn synth(dir: &Path, tag: &str, concurrency: usize) -> Result<Vec<u8>, String> {
    let config = support::fixture("e2e/synth_bash.toml");
    let seeds = support::fixture("e2e/seeds_bash.jsonl");
    let out = dir.join(format!("synth-{tag}.jsonl"));
    let manifest = dir.join(format!("synth-{tag}-manifest.json"));
    let c = concurrency.to_string();
    let code = support::cli(&[
        "synth",
        "--config",
        path(&config),
        "--concurrency",
        &c,
        "--out",
        path(&out),
        "--manifest",
        path(&manifest),
        path(&seeds),
    ]);
    if code != 0 {
        return Err(format!("synth exited {code}"));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn records(bytes: &[u8]) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for lang in LANGUAGES {
        let reference = repair(lang, dir.path(), "ref", 4)?;
        for (k, c) in [(0, 4), (1, 4), (2, 1)] {
            let again = repair(lang, dir.path(), &format!("{k}-{c}"), c)?;
            if again != reference {
                return Err(format!("repair {lang}: run {k} at concurrency {c} differs"));
            }
            runs += 1;
        }
        let golden = std::fs::read(support::fixture(&format!("e2e/golden_repair_{lang}.jsonl"))).unwrap();
        if reference != golden {
            return Err(format!("repair {lang}: output differs from the frozen golden file"));
        }
        for r in records(&reference) {
            if r["initial_report"]["passed"] == true && r["final"] != r["initial"] {
                return Err(format!("repair {lang} {}: valid initial program was changed", r["id"]));
            }
        }
    }
    let reference = synth(dir.path(), "ref", 4)?;
    for (k, c) in [(0, 4), (1, 4), (2, 1)] {
        if synth(dir.path(), &format!("{k}-{c}"), c)? != reference {
            return Err(format!("synth: run {k} at concurrency {c} differs"));
        }
        runs += 1;
    }
    if reference != std::fs::read(support::fixture("e2e/golden_synth_bash.jsonl")).unwrap() {
        return Err("synth output differs from the frozen golden file".into());
    }
    Ok(format!("{runs} reruns byte-identical at concurrency 1 and 4; valid initial programs untouched"))
}

pub fn end_to_end() -> Outcome {
    let expected = support::read_json("e2e/expected.json");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (mut total, mut passed, mut invalid, mut fixed) = (0, 0, 0, 0);
    for lang in LANGUAGES {
        let want = &expected[lang];
        let recs = records(&repair(lang, dir.path(), "e2e", 4)?);
        let mut status = BTreeMap::new();
        for r in &recs {
            let initial = r["initial_report"]["passed"] == true;
            let fin = r["final_report"]["passed"] == true;
            let s = match (initial, fin) {
                (true, _) => "ok",
                (false, true) => "fixed",
                (false, false) => "broken",
            };
            // Only invalid programs are routed to the fixer.
            if r["repair_attempted"] != !initial {
                return Err(format!("{lang} {}: repair_attempted is {}", r["id"], r["repair_attempted"]));
            }
            status.insert(r["id"].as_str().unwrap().to_string(), s);
            total += 1;
            passed += usize::from(fin);
            invalid += usize::from(!initial);
            fixed += usize::from(!initial && fin);
        }
        let want_status: BTreeMap<String, &str> = want["status"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().unwrap()))
            .collect();
        if status != want_status {
            return Err(format!("{lang}: routing {status:?}, expected {want_status:?}"));
        }
    }
    let summary = &expected["summary"];
    let got = format!("{passed}/{total}");
    if summary["final_pass_rate"] != got.as_str()
        || summary["invalid_initial"] != invalid
        || summary["fixed"] != fixed
    {
        return Err(format!("final pass rate {got} ({invalid} invalid, {fixed} fixed), expected {summary}"));
    }
    Ok(format!("final pass rate {got} = {:.2}; {invalid} initially invalid, {fixed} fixed", passed as f64 / total as f64))
}
