//! Corpus evaluation: BLEU over code tokens, validator pass rate and mean
//! AST Diff.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::resources::Resources;
use crate::Language;

const MAX_ORDER: usize = 4;
const EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Code tokenizer: whitespace separates, quoted literals stay whole, runs of
/// word characters form one token, any other character is its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '\'' || c == '"' {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != c {
                if chars[j] == '\\' && c == '"' {
                    j += 1;
                }
                j += 1;
            }
            let end = (j + 1).min(chars.len());
            out.push(chars[i..end].iter().collect());
            i = end;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
    out
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    for w in tokens.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// Corpus BLEU-4 over `(prediction, reference)` pairs.
///
/// Clipped n-gram matches and candidate counts are summed over the corpus.
/// An order with candidate n-grams but zero clipped hits gets
/// `1e-9 / count`; orders with no candidate n-grams at all are dropped and
/// the weights spread over the remaining ones. No unigram match scores 0.
pub fn bleu(corpus: &[(Vec<String>, Vec<String>)]) -> Result<f64, MetricsError> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut c, mut r) = (0usize, 0usize);
    for (pred, reference) in corpus {
        c += pred.len();
        r += reference.len();
        for n in 1..=MAX_ORDER {
            let cand = ngrams(pred, n);
            let refs = ngrams(reference, n);
            totals[n - 1] += cand.values().sum::<usize>();
            matches[n - 1] += cand
                .iter()
                .map(|(g, &k)| k.min(refs.get(g).copied().unwrap_or(0)))
                .sum::<usize>();
        }
    }
    if c == 0 {
        return Ok(if r == 0 { 1.0 } else { 0.0 });
    }
    if matches[0] == 0 {
        return Ok(0.0);
    }
    let order = totals.iter().take_while(|&&t| t > 0).count();
    let log_sum: f64 = (0..order)
        .map(|i| {
            let num = if matches[i] == 0 { EPSILON } else { matches[i] as f64 };
            (num / totals[i] as f64).ln()
        })
        .sum();
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    Ok(bp * (log_sum / order as f64).exp())
}

/// One input line: `{id, language?, query, prediction, ground_truth, db_id?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalInput {
    pub id: String,
    #[serde(default)]
    pub language: Option<Language>,
    #[serde(default)]
    pub query: String,
    pub prediction: String,
    pub ground_truth: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub id: String,
    pub language: Language,
    pub query: String,
    pub prediction: String,
    pub ground_truth: String,
    pub passed: bool,
    /// The prediction parses.
    pub parsed: bool,
    /// Present iff both sides parse.
    pub ast_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub total: usize,
    pub parsed: usize,
    pub passed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub bleu: f64,
    /// Not computed here; reserved for externally supplied values.
    pub codebertscore: Option<f64>,
    pub pass_rate: f64,
    pub mean_ast_diff: Option<f64>,
    pub ast_diff_count: usize,
    pub counts: Counts,
}

fn evaluate_one(input: &EvalInput, language: Language, resources: &Resources) -> EvalRecord {
    let language = input.language.unwrap_or(language);
    let mut error = None;
    let passed = match resources.validate(language, &input.prediction, input.db_id.as_deref()) {
        Ok(report) => report.passed,
        Err(e) => {
            error = Some(e.to_string());
            false
        }
    };
    let (parsed, ast_diff) = match resources.score(language, &input.ground_truth, &input.prediction) {
        Ok(s) => (s.parsed, s.parsed.then(|| s.score.value())),
        Err(e) => {
            error.get_or_insert(e.to_string());
            (resources.parses(language, &input.prediction), None)
        }
    };
    EvalRecord {
        id: input.id.clone(),
        language,
        query: input.query.clone(),
        prediction: input.prediction.clone(),
        ground_truth: input.ground_truth.clone(),
        passed,
        parsed,
        ast_diff,
        error,
    }
}

/// Score every record and aggregate. Records come back sorted by
/// `(id, prediction, ground_truth)`, the order the aggregates are reduced in.
pub fn evaluate_corpus(
    inputs: &[EvalInput],
    language: Language,
    resources: &Resources,
) -> Result<(EvalReport, Vec<EvalRecord>), MetricsError> {
    if inputs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut records: Vec<EvalRecord> = inputs.par_iter().map(|i| evaluate_one(i, language, resources)).collect();
    records.sort_by(|a, b| {
        (&a.id, &a.prediction, &a.ground_truth).cmp(&(&b.id, &b.prediction, &b.ground_truth))
    });
    let pairs: Vec<_> = records
        .iter()
        .map(|r| (tokenize(&r.prediction), tokenize(&r.ground_truth)))
        .collect();
    let diffs: Vec<f64> = records.iter().filter_map(|r| r.ast_diff).collect();
    let counts = Counts {
        total: records.len(),
        parsed: records.iter().filter(|r| r.parsed).count(),
        passed: records.iter().filter(|r| r.passed).count(),
    };
    let report = EvalReport {
        bleu: bleu(&pairs)?,
        codebertscore: None,
        pass_rate: counts.passed as f64 / counts.total as f64,
        mean_ast_diff: (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64),
        ast_diff_count: diffs.len(),
        counts,
    };
    Ok((report, records))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    language: &'a str,
    passed: bool,
    parsed: bool,
    ast_diff: Option<f64>,
    error: Option<&'a str>,
}

/// Per-record values as CSV.
pub fn write_records_csv(records: &[EvalRecord], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            id: &r.id,
            language: r.language.as_str(),
            passed: r.passed,
            parsed: r.parsed,
            ast_diff: r.ast_diff,
            error: r.error.as_deref(),
        })?;
    }
    w.flush()?;
    Ok(())
}
