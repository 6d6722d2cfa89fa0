//! Command-line front end. Exit codes: 0 success, 1 validation or scoring
//! failure, 2 configuration or I/O error, 3 budget or transport failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ansible::{infill_playbook, parse_playbook, ModuleSpecRegistry, RoleContext};
use crate::bash::ArityTable;
use crate::metrics::{evaluate_corpus, write_records_csv, EvalInput};
use crate::modelclient::{Budget, Client, EndpointConfig, RequestLog, DEFAULT_BUDGET};
use crate::pipeline::{run_inference, synthesize_dataset, ErrorKind, PipelineOptions, QueryInput, Seed, SynthesisSink};
use crate::resources::Resources;
use crate::reward::{compute_rewards, read_batch, write_rewards};
use crate::sql::SchemaSet;
use crate::Language;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_TRANSPORT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dslrepair", version, about = "Validate, score, reward and repair Ansible, Bash and SQL programs")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate program files; exit 1 if any fails.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Program files (`-` for stdin). Language is inferred from the
        /// extension when --language is absent.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Score (ground_truth, prediction) pairs from JSONL.
    Score {
        #[command(flatten)]
        common: Common,
        pairs: PathBuf,
    },
    /// Adaptive rewards for a JSONL batch of {id, passed, semantic}.
    Reward {
        batch: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, validate and repair programs for JSONL queries.
    Repair {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        queries: PathBuf,
        /// Repair rounds per failing program.
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Sample candidates for JSONL seeds from every endpoint.
    Synth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        seeds: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Corpus metrics for JSONL prediction records.
    Eval {
        #[command(flatten)]
        common: Common,
        records: PathBuf,
        /// Also write per-record values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Inline roles and resolve variables in a playbook.
    Infill {
        playbook: PathBuf,
        /// Directory containing `roles/`.
        #[arg(long)]
        roles: Option<PathBuf>,
        /// YAML/JSON variable files, in increasing precedence.
        #[arg(long = "inventory-vars")]
        inventory_vars: Vec<PathBuf>,
        #[arg(long = "extra-vars")]
        extra_vars: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = Language::from_str)]
    language: Option<Language>,
    /// Ansible module-spec registry JSON.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Bash arity table JSON.
    #[arg(long)]
    arity: Option<PathBuf>,
    /// Spider-style tables.json.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Database id used for SQL records that name none.
    #[arg(long)]
    db: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    #[arg(long)]
    concurrency: Option<usize>,
    /// Request budget for the whole run.
    #[arg(long)]
    budget: Option<usize>,
    /// JSONL request/response log.
    #[arg(long = "request-log")]
    request_log: Option<PathBuf>,
    /// Run manifest JSON.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Contents of a `--config` TOML file. Relative paths resolve against the
/// file's directory; `${VAR}` is expanded in `api_key` values only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub language: Option<Language>,
    pub registry: Option<PathBuf>,
    pub arity: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub db_id: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub concurrency: usize,
    pub budget: usize,
    /// Seed for few-shot example selection.
    pub seed: u64,
    pub rounds: usize,
    pub samples_per_seed: usize,
    /// JSONL of {query, ground_truth} few-shot candidates.
    pub icl_examples: Option<PathBuf>,
    pub icl_shots: usize,
    pub generator: Option<EndpointConfig>,
    pub fixer: Option<EndpointConfig>,
    /// Synthesis endpoints; the generator when empty.
    pub endpoints: Vec<EndpointConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            language: None,
            registry: None,
            arity: None,
            schema: None,
            db_id: None,
            output_dir: None,
            concurrency: 4,
            budget: DEFAULT_BUDGET,
            seed: 0,
            rounds: 1,
            samples_per_seed: 3,
            icl_examples: None,
            icl_shots: 5,
            generator: None,
            fixer: None,
            endpoints: Vec::new(),
        }
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn config_err(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.to_string(),
    }
}

type Res<T> = Result<T, Failure>;

/// Expand `${VAR}` from the environment.
fn interpolate(s: &str) -> Res<String> {
    let mut out = String::new();
    let mut rest = s;
    while let Some(i) = rest.find("${") {
        out.push_str(&rest[..i]);
        let Some(j) = rest[i..].find('}') else {
            return Err(config_err(format!("unterminated ${{ in `{s}`")));
        };
        let var = &rest[i + 2..i + j];
        let value = std::env::var(var).map_err(|_| config_err(format!("environment variable {var} is not set")))?;
        out.push_str(&value);
        rest = &rest[i + j + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve(base).map_err(|f| f.message)?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) -> Res<()> {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.registry);
        fix(&mut self.arity);
        fix(&mut self.schema);
        fix(&mut self.output_dir);
        fix(&mut self.icl_examples);
        let endpoints = self.generator.iter_mut().chain(self.fixer.iter_mut()).chain(self.endpoints.iter_mut());
        for ep in endpoints {
            if let Some(k) = &ep.api_key {
                ep.api_key = Some(interpolate(k)?);
            }
            if let Some(script) = ep.base_url.strip_prefix("mock:") {
                let p = Path::new(script);
                if p.is_relative() {
                    ep.base_url = format!("mock:{}", base.join(p).display());
                }
            }
        }
        Ok(())
    }
}

struct Setup {
    config: RunConfig,
    resources: Resources,
}

fn setup(common: &Common, need_language: bool) -> Res<(Setup, Option<Language>)> {
    let mut config = match &common.config {
        Some(p) => RunConfig::load(p).map_err(config_err)?,
        None => RunConfig::default(),
    };
    // Flags override the file.
    if common.language.is_some() {
        config.language = common.language;
    }
    for (flag, slot) in [
        (&common.registry, &mut config.registry),
        (&common.arity, &mut config.arity),
        (&common.schema, &mut config.schema),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    if common.db.is_some() {
        config.db_id.clone_from(&common.db);
    }
    let mut resources = Resources::default();
    if let Some(p) = &config.registry {
        resources.registry = ModuleSpecRegistry::load(p).map_err(config_err)?;
    }
    if let Some(p) = &config.arity {
        resources.arity = ArityTable::load(p).map_err(config_err)?;
    }
    if let Some(p) = &config.schema {
        resources.schemas = SchemaSet::load(p).map_err(config_err)?;
    }
    if let Some(db) = &config.db_id {
        resources.schemas.get(db).map_err(config_err)?;
        resources.default_db = Some(db.clone());
    }
    if need_language && config.language.is_none() {
        return Err(config_err("--language (or `language` in the config) is required"));
    }
    let language = config.language;
    Ok((Setup { config, resources }, language))
}

fn open_in(path: &Path) -> Res<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| config_err(format!("cannot open {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

fn open_out(path: Option<&Path>) -> Res<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| config_err(format!("cannot create {}: {e}", dir.display())))?;
            }
            let f = File::create(p).map_err(|e| config_err(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Res<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in open_in(path)?.lines().enumerate() {
        let line = line.map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| config_err(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(item);
    }
    Ok(out)
}

fn write_line(out: &mut dyn Write, value: &impl Serialize) -> Res<()> {
    serde_json::to_writer(&mut *out, value)
        .map_err(io::Error::from)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| config_err(format!("write failed: {e}")))
}

fn finish(out: &mut dyn Write) -> Res<()> {
    out.flush().map_err(|e| config_err(format!("write failed: {e}")))
}

fn language_for(path: &Path, flag: Option<Language>) -> Res<Language> {
    if let Some(l) = flag {
        return Ok(l);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("yml" | "yaml") => Ok(Language::Ansible),
        Some("sh" | "bash") => Ok(Language::Bash),
        Some("sql") => Ok(Language::Sql),
        _ => Err(config_err(format!("cannot infer the language of {}; pass --language", path.display()))),
    }
}

#[derive(Serialize)]
struct FileReport<'a> {
    file: String,
    language: Language,
    #[serde(flatten)]
    report: &'a crate::ValidationReport,
}

fn cmd_validate(common: &Common, files: &[PathBuf]) -> Res<i32> {
    let (s, language) = setup(common, false)?;
    let mut out = open_out(common.out.as_deref())?;
    let mut all_passed = true;
    for path in files {
        let language = language_for(path, language)?;
        let mut text = String::new();
        open_in(path)?
            .read_to_string(&mut text)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let report = s.resources.validate(language, &text, None).map_err(config_err)?;
        all_passed &= report.passed;
        write_line(
            &mut out,
            &FileReport {
                file: path.display().to_string(),
                language,
                report: &report,
            },
        )?;
    }
    finish(&mut out)?;
    Ok(if all_passed { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Deserialize)]
struct PairInput {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    language: Option<Language>,
    ground_truth: String,
    prediction: String,
}

#[derive(Serialize)]
struct PairScore {
    id: Option<String>,
    score: Option<f64>,
    parsed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_score(common: &Common, pairs: &Path) -> Res<i32> {
    let (s, language) = setup(common, false)?;
    let inputs: Vec<PairInput> = read_jsonl(pairs)?;
    let mut out = open_out(common.out.as_deref())?;
    let mut code = EXIT_OK;
    for p in inputs {
        let language = p
            .language
            .or(language)
            .ok_or_else(|| config_err("pair has no language; pass --language"))?;
        let line = match s.resources.score(language, &p.ground_truth, &p.prediction) {
            Ok(sc) => PairScore {
                id: p.id,
                score: Some(sc.score.value()),
                parsed: sc.parsed,
                error: None,
            },
            Err(e) => {
                code = EXIT_FAILED;
                PairScore {
                    id: p.id,
                    score: None,
                    parsed: false,
                    error: Some(e.to_string()),
                }
            }
        };
        write_line(&mut out, &line)?;
    }
    finish(&mut out)?;
    Ok(code)
}

fn cmd_reward(batch: &Path, out: Option<&Path>) -> Res<i32> {
    let items = read_batch(open_in(batch)?).map_err(config_err)?;
    let batch = compute_rewards(items).map_err(config_err)?;
    let mut out = open_out(out)?;
    write_rewards(&batch, &mut out).map_err(|e| config_err(format!("write failed: {e}")))?;
    finish(&mut out)?;
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
struct ExampleInput {
    query: String,
    #[serde(alias = "answer")]
    ground_truth: String,
}

struct Run {
    setup: Setup,
    language: Language,
    budget: std::sync::Arc<Budget>,
    log: Option<std::sync::Arc<RequestLog>>,
    opts: PipelineOptions,
}

fn run_setup(common: &Common, run: &RunArgs) -> Res<Run> {
    let (mut s, language) = setup(common, true)?;
    let language = language.expect("checked by setup");
    if let Some(c) = run.concurrency {
        s.config.concurrency = c;
    }
    if let Some(b) = run.budget {
        s.config.budget = b;
    }
    let log_path = run
        .request_log
        .clone()
        .or_else(|| s.config.output_dir.as_ref().map(|d| d.join("requests.jsonl")));
    let log = match log_path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(config_err)?;
            }
            Some(RequestLog::create(&p).map_err(|e| config_err(format!("cannot create {}: {e}", p.display())))?)
        }
        None => None,
    };
    let mut examples = Vec::new();
    if let Some(p) = &s.config.icl_examples {
        let pool: Vec<ExampleInput> = read_jsonl(p)?;
        let k = s.config.icl_shots.min(pool.len());
        let mut rng = ChaCha8Rng::seed_from_u64(s.config.seed);
        let mut picked: Vec<usize> = sample(&mut rng, pool.len(), k).into_vec();
        picked.sort_unstable();
        examples = picked.into_iter().map(|i| (pool[i].query.clone(), pool[i].ground_truth.clone())).collect();
    }
    let opts = PipelineOptions {
        rounds: s.config.rounds,
        concurrency: s.config.concurrency,
        examples,
    };
    Ok(Run {
        budget: Budget::new(s.config.budget),
        setup: s,
        language,
        log,
        opts,
    })
}

impl Run {
    fn client(&self, cfg: Option<&EndpointConfig>, role: &str) -> Res<Client> {
        let cfg = cfg.ok_or_else(|| config_err(format!("the config has no [{role}] endpoint")))?;
        let client = Client::from_config(cfg, self.budget.clone()).map_err(|e| config_err(format!("[{role}] {e}")))?;
        Ok(match &self.log {
            Some(l) => client.with_log(l.clone()),
            None => client,
        })
    }

    fn default_out(&self, name: &str) -> Option<PathBuf> {
        self.setup.config.output_dir.as_ref().map(|d| d.join(name))
    }

    fn write_manifest(&self, explicit: Option<&Path>, command: &str, counts: serde_json::Value) -> Res<()> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| self.default_out(&format!("{command}-manifest.json")));
        let Some(path) = path else {
            return Ok(());
        };
        let manifest = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.setup.config,
            "budget_used": self.budget.used(),
            "counts": counts,
        });
        let mut out = open_out(Some(&path))?;
        serde_json::to_writer_pretty(&mut out, &manifest).map_err(config_err)?;
        out.write_all(b"\n").map_err(config_err)?;
        finish(&mut out)
    }
}

fn cmd_repair(common: &Common, run: &RunArgs, queries: &Path, rounds: Option<usize>) -> Res<i32> {
    let mut r = run_setup(common, run)?;
    if let Some(n) = rounds {
        r.opts.rounds = n;
    }
    let inputs: Vec<QueryInput> = read_jsonl(queries)?;
    let out_path = common.out.clone().or_else(|| r.default_out("repair.jsonl"));
    let mut out = open_out(out_path.as_deref())?;
    let mut code = EXIT_OK;
    let mut counts = serde_json::json!({"total": inputs.len(), "initial_passed": 0, "final_passed": 0, "repaired": 0, "errors": 0});
    if !inputs.is_empty() {
        let generator = r.client(r.setup.config.generator.as_ref(), "generator")?;
        let fixer = r.client(r.setup.config.fixer.as_ref(), "fixer")?;
        let records = run_inference(&inputs, r.language, &generator, &fixer, &r.setup.resources, &r.opts);
        let passed = |rep: &Option<crate::ValidationReport>| rep.as_ref().is_some_and(|x| x.passed);
        counts["initial_passed"] = records.iter().filter(|x| passed(&x.initial_report)).count().into();
        counts["final_passed"] = records.iter().filter(|x| passed(&x.final_report)).count().into();
        counts["repaired"] = records.iter().filter(|x| x.repair_attempted).count().into();
        counts["errors"] = records.iter().filter(|x| x.error.is_some()).count().into();
        for rec in &records {
            write_line(&mut out, rec)?;
            if let Some(e) = &rec.error {
                let c = if e.kind == ErrorKind::Resource { EXIT_CONFIG } else { EXIT_TRANSPORT };
                code = code.max(c);
            }
        }
    }
    finish(&mut out)?;
    r.write_manifest(run.manifest.as_deref(), "repair", counts)?;
    Ok(code)
}

fn cmd_synth(common: &Common, run: &RunArgs, seeds: &Path, samples: Option<usize>) -> Res<i32> {
    let r = run_setup(common, run)?;
    let samples = samples.unwrap_or(r.setup.config.samples_per_seed);
    let seeds: Vec<Seed> = read_jsonl(seeds)?;
    let out_path = common
        .out
        .clone()
        .or_else(|| r.default_out("synth.jsonl"))
        .ok_or_else(|| config_err("synth writes a resumable file; pass --out or set output_dir"))?;
    let cfg = &r.setup.config;
    let endpoint_cfgs: Vec<&EndpointConfig> = if cfg.endpoints.is_empty() {
        cfg.generator.iter().collect()
    } else {
        cfg.endpoints.iter().collect()
    };
    if endpoint_cfgs.is_empty() {
        return Err(config_err("the config has no [[endpoints]] or [generator]"));
    }
    let clients = endpoint_cfgs
        .into_iter()
        .map(|c| r.client(Some(c), "endpoints"))
        .collect::<Res<Vec<_>>>()?;
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(config_err)?;
    }
    let mut sink = SynthesisSink::open(&out_path).map_err(|e| config_err(format!("{}: {e}", out_path.display())))?;
    let summary = synthesize_dataset(&seeds, r.language, &clients, samples, &r.setup.resources, &r.opts, &mut sink)
        .map_err(config_err)?;
    drop(sink);
    r.write_manifest(run.manifest.as_deref(), "synth", serde_json::to_value(summary).map_err(config_err)?)?;
    Ok(if summary.failed > 0 || summary.budget_exhausted {
        EXIT_TRANSPORT
    } else {
        EXIT_OK
    })
}

fn cmd_eval(common: &Common, records: &Path, csv: Option<&Path>) -> Res<i32> {
    let (s, language) = setup(common, false)?;
    let inputs: Vec<EvalInput> = read_jsonl(records)?;
    let language = match language {
        Some(l) => l,
        None => inputs
            .first()
            .and_then(|i| i.language)
            .ok_or_else(|| config_err("records carry no language; pass --language"))?,
    };
    let (report, recs) = evaluate_corpus(&inputs, language, &s.resources).map_err(config_err)?;
    let mut out = open_out(common.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(config_err)?;
    out.write_all(b"\n").map_err(config_err)?;
    finish(&mut out)?;
    if let Some(p) = csv {
        write_records_csv(&recs, open_out(Some(p))?).map_err(config_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_infill(playbook: &Path, roles: Option<&Path>, inventory: &[PathBuf], extra: &[PathBuf], out: Option<&Path>) -> Res<i32> {
    let text = std::fs::read_to_string(playbook).map_err(|e| config_err(format!("cannot read {}: {e}", playbook.display())))?;
    let pb = match parse_playbook(&text) {
        Ok(pb) => pb,
        Err(e) => {
            eprintln!("{}: {e}", playbook.display());
            return Ok(EXIT_FAILED);
        }
    };
    let root = roles
        .map(Path::to_path_buf)
        .unwrap_or_else(|| playbook.parent().unwrap_or(Path::new(".")).to_path_buf());
    let mut ctx = RoleContext::new(root);
    for p in inventory {
        ctx.inventory_vars.extend(RoleContext::load_vars(p).map_err(config_err)?);
    }
    for p in extra {
        ctx.extra_vars.extend(RoleContext::load_vars(p).map_err(config_err)?);
    }
    let infilled = match infill_playbook(&pb, &ctx) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_FAILED);
        }
    };
    for d in &infilled.diagnostics {
        eprintln!("{d}");
    }
    let mut out = open_out(out)?;
    out.write_all(infilled.playbook.to_yaml_string().as_bytes()).map_err(config_err)?;
    finish(&mut out)?;
    Ok(EXIT_OK)
}

/// Parse arguments and run one subcommand, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    let result = match &cli.command {
        Command::Validate { common, files } => cmd_validate(common, files),
        Command::Score { common, pairs } => cmd_score(common, pairs),
        Command::Reward { batch, out } => cmd_reward(batch, out.as_deref()),
        Command::Repair {
            common,
            run,
            queries,
            rounds,
        } => cmd_repair(common, run, queries, *rounds),
        Command::Synth {
            common,
            run,
            seeds,
            samples,
        } => cmd_synth(common, run, seeds, *samples),
        Command::Eval { common, records, csv } => cmd_eval(common, records, csv.as_deref()),
        Command::Infill {
            playbook,
            roles,
            inventory_vars,
            extra_vars,
            out,
        } => cmd_infill(playbook, roles.as_deref(), inventory_vars, extra_vars, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
