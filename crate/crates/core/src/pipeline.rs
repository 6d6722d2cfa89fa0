//! Generate, validate and repair queries, and synthesize scored candidate
//! datasets from several endpoints.

use std::collections::{HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modelclient::{extract_code, format_examples, render_prompt, template, Client, ClientError, PromptRole};
use crate::resources::Resources;
use crate::{render_report, Language, SemanticScore, ValidationReport};

/// Longest feedback passed to the fixer, in characters.
pub const FEEDBACK_CAP: usize = 4000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryInput {
    pub id: String,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub id: String,
    pub query: String,
    pub ground_truth: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordError {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Budget,
    Transport,
    Resource,
}

impl From<ClientError> for RecordError {
    fn from(e: ClientError) -> Self {
        let kind = match e {
            ClientError::Budget { .. } => ErrorKind::Budget,
            _ => ErrorKind::Transport,
        };
        RecordError {
            kind,
            message: e.to_string(),
        }
    }
}

/// One query's trip through generation and repair. Fields after the first
/// failing step stay empty and `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub id: String,
    pub query: String,
    pub initial: Option<String>,
    pub initial_report: Option<ValidationReport>,
    /// Feedback of the last repair prompt sent.
    pub feedback: Option<String>,
    pub revised: Option<String>,
    #[serde(rename = "final")]
    pub final_program: Option<String>,
    pub final_report: Option<ValidationReport>,
    pub repair_attempted: bool,
    pub repair_rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RecordError>,
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Repair rounds per query; the fixer runs again only while the program
    /// still fails validation.
    pub rounds: usize,
    /// Worker threads.
    pub concurrency: usize,
    /// Few-shot (task, answer) pairs; when present generation uses the
    /// in-context-learning template.
    pub examples: Vec<(String, String)>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            rounds: 1,
            concurrency: 4,
            examples: Vec::new(),
        }
    }
}

impl PipelineOptions {
    fn pool(&self) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.concurrency.max(1))
            .build()
            .expect("thread pool")
    }

    fn generation_prompt(&self, language: Language, task: &str) -> String {
        let examples;
        let (role, fills) = if self.examples.is_empty() {
            (PromptRole::Generate, HashMap::from([("task", task)]))
        } else {
            examples = format_examples(self.examples.iter().map(|(t, a)| (t.as_str(), a.as_str())));
            (PromptRole::Icl, HashMap::from([("task", task), ("examples", examples.as_str())]))
        };
        render_prompt(&template(role, language), &fills).expect("all placeholders filled")
    }
}

fn cap(feedback: String) -> String {
    match feedback.char_indices().nth(FEEDBACK_CAP) {
        Some((i, _)) => feedback[..i].to_string(),
        None => feedback,
    }
}

struct Ctx<'a> {
    language: Language,
    generator: &'a Client,
    fixer: &'a Client,
    resources: &'a Resources,
    opts: &'a PipelineOptions,
}

impl Ctx<'_> {
    fn validate(&self, text: &str, db_id: Option<&str>) -> Result<ValidationReport, RecordError> {
        self.resources.validate(self.language, text, db_id).map_err(|e| RecordError {
            kind: ErrorKind::Resource,
            message: e.to_string(),
        })
    }

    fn run(&self, q: &QueryInput) -> RepairRecord {
        let mut rec = RepairRecord {
            id: q.id.clone(),
            query: q.query.clone(),
            initial: None,
            initial_report: None,
            feedback: None,
            revised: None,
            final_program: None,
            final_report: None,
            repair_attempted: false,
            repair_rounds: 0,
            error: None,
        };
        if let Err(e) = self.fill(q, &mut rec) {
            rec.error = Some(e);
        }
        rec
    }

    fn fill(&self, q: &QueryInput, rec: &mut RepairRecord) -> Result<(), RecordError> {
        let prompt = self.opts.generation_prompt(self.language, &q.query);
        let initial = extract_code(&self.generator.complete(&prompt, 0)?, self.language);
        let report = self.validate(&initial, q.db_id.as_deref())?;
        rec.initial = Some(initial.clone());
        rec.initial_report = Some(report.clone());
        let (mut program, mut report) = (initial, report);
        let repair = template(PromptRole::Repair, self.language);
        while !report.passed && rec.repair_rounds < self.opts.rounds {
            rec.repair_attempted = true;
            rec.repair_rounds += 1;
            let feedback = cap(render_report(&report));
            let fills = HashMap::from([("query", q.query.as_str()), ("output", program.as_str()), ("feedback", feedback.as_str())]);
            let prompt = render_prompt(&repair, &fills).expect("all placeholders filled");
            rec.feedback = Some(feedback);
            let revised = extract_code(&self.fixer.complete(&prompt, 0)?, self.language);
            report = self.validate(&revised, q.db_id.as_deref())?;
            rec.revised = Some(revised.clone());
            program = revised;
        }
        rec.final_program = Some(program);
        rec.final_report = Some(report);
        Ok(())
    }
}

/// One record per query, in input order.
pub fn run_inference(
    queries: &[QueryInput],
    language: Language,
    generator: &Client,
    fixer: &Client,
    resources: &Resources,
    opts: &PipelineOptions,
) -> Vec<RepairRecord> {
    let ctx = Ctx {
        language,
        generator,
        fixer,
        resources,
        opts,
    };
    opts.pool().install(|| queries.par_iter().map(|q| ctx.run(q)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub seed_id: String,
    pub query: String,
    pub ground_truth: String,
    pub model: String,
    pub sample: usize,
    pub candidate: String,
    pub passed: bool,
    pub semantic: SemanticScore,
    /// The candidate did not parse, so `semantic` is 0 by convention.
    pub parse_failed: bool,
}

impl SynthesisRecord {
    pub fn key(&self) -> (String, String, usize) {
        (self.seed_id.clone(), self.model.clone(), self.sample)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no seeds given")]
    NoSeeds,
    #[error("samples per seed must be at least 1")]
    NoSamples,
    #[error("seed {seed}: {message}")]
    BadSeed { seed: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SynthesisSummary {
    pub written: usize,
    pub skipped_existing: usize,
    pub failed: usize,
    pub budget_exhausted: bool,
}

/// Append-only JSONL output keyed by (seed, endpoint, sample).
pub struct SynthesisSink {
    out: BufWriter<File>,
    done: HashSet<(String, String, usize)>,
}

impl SynthesisSink {
    /// Open for appending, remembering records already present.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
        let mut done = HashSet::new();
        for (n, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<SynthesisRecord>(&line) {
                Ok(r) => {
                    done.insert(r.key());
                }
                Err(e) => log::warn!("{}:{}: ignoring unreadable record: {e}", path.display(), n + 1),
            }
        }
        // Terminate a line cut short by an interrupted run.
        let len = file.metadata()?.len();
        if len > 0 {
            let mut last = [0u8];
            file.seek(SeekFrom::Start(len - 1))?;
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                file.write_all(b"\n")?;
            }
        }
        Ok(SynthesisSink {
            out: BufWriter::new(file),
            done,
        })
    }

    pub fn contains(&self, key: &(String, String, usize)) -> bool {
        self.done.contains(key)
    }

    fn write(&mut self, r: &SynthesisRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, r)?;
        self.out.write_all(b"\n")?;
        self.done.insert(r.key());
        Ok(())
    }
}

/// Cells are processed in fixed-size chunks so the output order does not
/// depend on the thread count.
const CHUNK: usize = 64;

/// Generate `samples_per_seed` candidates per seed from every endpoint,
/// validate and score each, and stream records to `sink` in
/// seed/endpoint/sample order. Cells already in the sink are skipped; a
/// failed cell is logged and skipped; an exhausted budget stops the run.
pub fn synthesize_dataset(
    seeds: &[Seed],
    language: Language,
    endpoints: &[Client],
    samples_per_seed: usize,
    resources: &Resources,
    opts: &PipelineOptions,
    sink: &mut SynthesisSink,
) -> Result<SynthesisSummary, PipelineError> {
    if seeds.is_empty() {
        return Err(PipelineError::NoSeeds);
    }
    if samples_per_seed == 0 {
        return Err(PipelineError::NoSamples);
    }
    for s in seeds {
        if let Err(e) = resources.score(language, &s.ground_truth, &s.ground_truth) {
            return Err(PipelineError::BadSeed {
                seed: s.id.clone(),
                message: e.to_string(),
            });
        }
    }
    let mut summary = SynthesisSummary::default();
    let mut cells = Vec::new();
    for seed in seeds {
        for client in endpoints {
            for sample in 0..samples_per_seed {
                if sink.contains(&(seed.id.clone(), client.name().to_string(), sample)) {
                    summary.skipped_existing += 1;
                } else {
                    cells.push((seed, client, sample));
                }
            }
        }
    }
    let pool = opts.pool();
    for chunk in cells.chunks(CHUNK) {
        let results: Vec<_> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(seed, client, sample)| synth_cell(seed, client, sample, language, resources, opts))
                .collect()
        });
        for (result, &(seed, client, sample)) in results.into_iter().zip(chunk) {
            match result {
                Ok(r) => {
                    sink.write(&r)?;
                    summary.written += 1;
                }
                Err(e) => {
                    log::warn!("seed {} endpoint {} sample {sample}: {}", seed.id, client.name(), e.message);
                    summary.failed += 1;
                    summary.budget_exhausted |= e.kind == ErrorKind::Budget;
                }
            }
        }
        sink.out.flush()?;
        if summary.budget_exhausted {
            break;
        }
    }
    Ok(summary)
}

fn synth_cell(
    seed: &Seed,
    client: &Client,
    sample: usize,
    language: Language,
    resources: &Resources,
    opts: &PipelineOptions,
) -> Result<SynthesisRecord, RecordError> {
    let prompt = opts.generation_prompt(language, &seed.query);
    let candidate = extract_code(&client.complete(&prompt, sample)?, language);
    let resource_err = |message: String| RecordError {
        kind: ErrorKind::Resource,
        message,
    };
    let report = resources
        .validate(language, &candidate, seed.db_id.as_deref())
        .map_err(|e| resource_err(e.to_string()))?;
    let scored = resources
        .score(language, &seed.ground_truth, &candidate)
        .map_err(|e| resource_err(e.to_string()))?;
    Ok(SynthesisRecord {
        seed_id: seed.id.clone(),
        query: seed.query.clone(),
        ground_truth: seed.ground_truth.clone(),
        model: client.name().to_string(),
        sample,
        candidate,
        passed: report.passed,
        semantic: scored.score,
        parse_failed: !scored.parsed,
    })
}
