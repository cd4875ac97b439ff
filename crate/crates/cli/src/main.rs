//! `dst-eval`: score dialogue state tracking prediction files.
//!
//! Exit codes: 0 on success, 1 when an input cannot be parsed or evaluated,
//! 2 on usage errors (bad flags, unreadable paths, out-of-range parameters).

use std::fs;
use std::io::{self, Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use dst_eval::analysis::trace_conversation;
use dst_eval::ingest::{digest, parse_ontology, parse_predictions, write_predictions};
use dst_eval::metrics::{evaluate_dataset, lambda_from_forgetting, Lambda, MetricConfig};
use dst_eval::report::{render_report, InputDigest, MetricReport, ReportFormat, ReportRow};
use dst_eval::synth::{generate, SynthConfig};
use dst_eval::{Conversation, NormalizationPolicy};

#[derive(Parser, Debug)]
#[command(name = "dst-eval", version, about = "Dialogue state tracking metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one prediction file.
    Evaluate(EvaluateArgs),
    /// Score several prediction files side by side.
    Compare(CompareArgs),
    /// Show per-turn error classes and weights for one dialogue.
    Trace(TraceArgs),
    /// Derive λ from a forgetting horizon and factor.
    Lambda(LambdaArgs),
    /// Write a seeded synthetic prediction file.
    Synth(SynthArgs),
    /// Conversation and turn counts of a prediction file.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Comma-separated FGA decay rates.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1")]
    lambdas: Vec<Lambda>,

    /// Domain-slot list; slot accuracy is unavailable without it.
    #[arg(long)]
    ontology: Option<String>,

    /// Keep token case as written.
    #[arg(long)]
    no_lowercase: bool,

    /// Keep surrounding whitespace.
    #[arg(long)]
    no_trim: bool,

    /// Value treated as "no assignment" by AGA (repeatable; replaces the
    /// default of "none" and the empty string).
    #[arg(long = "empty-value")]
    empty_values: Vec<String>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Prediction file, or `-` for standard input.
    #[arg(long)]
    predictions: String,

    /// Row label; defaults to the file stem.
    #[arg(long)]
    model: Option<String>,

    #[arg(long, default_value = "table")]
    format: ReportFormat,

    #[command(flatten)]
    metrics: MetricArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// `name=path` entries, one per model, in display order.
    #[arg(long, required = true)]
    predictions: Vec<String>,

    #[arg(long, default_value = "table")]
    format: ReportFormat,

    #[command(flatten)]
    metrics: MetricArgs,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    predictions: String,

    #[arg(long)]
    dialogue_id: String,

    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1")]
    lambdas: Vec<Lambda>,

    /// `text` or `jsonlines`.
    #[arg(long, default_value = "text")]
    format: String,

    #[arg(long)]
    no_lowercase: bool,

    #[arg(long)]
    no_trim: bool,
}

#[derive(Args, Debug)]
struct LambdaArgs {
    /// Turns needed to forget a mistake.
    #[arg(long = "tf", value_parser = clap::value_parser!(u32).range(1..))]
    tf: u32,

    /// Fraction forgotten after `tf` turns, in [0, 1).
    #[arg(long)]
    p: f64,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,

    #[arg(long, default_value_t = 100)]
    conversations: usize,

    /// Turns per conversation: `N`, `A..B` or `A..=B` (both ends inclusive).
    #[arg(long, default_value = "1..10", value_parser = parse_turn_range)]
    turns: RangeInclusive<usize>,

    #[arg(long, default_value_t = 5)]
    domains: usize,

    #[arg(long, default_value_t = 6)]
    slots: usize,

    #[arg(long, default_value_t = 8)]
    values: usize,

    #[arg(long, default_value_t = 0.1)]
    p_type1: f64,

    #[arg(long, default_value_t = 0.05)]
    p_drop: f64,

    #[arg(long, default_value_t = 0.05)]
    p_spurious: f64,

    #[arg(long, default_value_t = 0.1)]
    p_overwrite: f64,

    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    predictions: String,
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Evaluation(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Evaluation(_) => 1,
        }
    }
}

type CmdResult = Result<Vec<u8>, Failure>;

fn parse_turn_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (parse(a)?, parse(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (parse(a)?, parse(b)?)
    } else {
        let n = parse(s)?;
        (n, n)
    };
    if lo == 0 || lo > hi {
        return Err(format!(
            "turn range {lo}..{hi} must satisfy 1 <= start <= end"
        ));
    }
    Ok(lo..=hi)
}

fn warn(message: impl std::fmt::Display) {
    eprintln!("warning: {message}");
}

fn read_input(path: &str) -> Result<Vec<u8>, Failure> {
    if path == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::Usage(anyhow!("reading standard input: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::Usage(anyhow!("cannot read {path}: {e}")))
}

fn dedup_lambdas(lambdas: &[Lambda]) -> Vec<Lambda> {
    let mut out: Vec<Lambda> = Vec::with_capacity(lambdas.len());
    for lam in lambdas {
        if out.contains(lam) {
            warn(format_args!("duplicate lambda {lam} ignored"));
        } else {
            out.push(*lam);
        }
    }
    out
}

fn policy(no_lowercase: bool, no_trim: bool, empty_values: &[String]) -> NormalizationPolicy {
    let mut policy = NormalizationPolicy {
        lowercase: !no_lowercase,
        trim_whitespace: !no_trim,
        ..Default::default()
    };
    if !empty_values.is_empty() {
        policy.empty_values = empty_values
            .iter()
            .map(|v| policy.normalize_token(v))
            .collect();
    }
    policy
}

fn threads_from_env() -> Option<usize> {
    let raw = std::env::var("DST_EVAL_THREADS").ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            warn(format_args!("ignoring DST_EVAL_THREADS={raw:?}"));
            None
        }
    }
}

fn metric_config(args: &MetricArgs) -> Result<MetricConfig, Failure> {
    let policy = policy(args.no_lowercase, args.no_trim, &args.empty_values);
    let ontology = match &args.ontology {
        Some(path) => {
            let bytes = read_input(path)?;
            Some(
                parse_ontology(&bytes, &policy)
                    .map_err(|e| Failure::Evaluation(anyhow!("{path}: {e}")))?,
            )
        }
        None => None,
    };
    Ok(MetricConfig {
        lambdas: dedup_lambdas(&args.lambdas),
        policy,
        ontology,
        parallel: rayon::current_num_threads() > 1,
    })
}

fn load(
    path: &str,
    policy: &NormalizationPolicy,
) -> Result<(Vec<Conversation>, InputDigest), Failure> {
    let bytes = read_input(path)?;
    let parsed = parse_predictions(&bytes, policy)
        .map_err(|e| Failure::Evaluation(anyhow!("{path}: {e}")))?;
    for w in &parsed.warnings {
        warn(format_args!("{path}: {w}"));
    }
    let digest = InputDigest {
        name: path.to_string(),
        sha256: digest(&bytes),
    };
    Ok((parsed.conversations, digest))
}

fn score(
    model: String,
    convs: &[Conversation],
    config: &MetricConfig,
) -> Result<ReportRow, Failure> {
    let metrics = evaluate_dataset(convs, config)
        .map_err(|e| Failure::Evaluation(anyhow!("{model}: {e}")))?;
    Ok(ReportRow { model, metrics })
}

fn cmd_evaluate(args: &EvaluateArgs) -> CmdResult {
    let config = metric_config(&args.metrics)?;
    let (convs, digest) = load(&args.predictions, &config.policy)?;
    let model = args.model.clone().unwrap_or_else(|| {
        if args.predictions == "-" {
            "stdin".to_string()
        } else {
            Path::new(&args.predictions).file_stem().map_or_else(
                || args.predictions.clone(),
                |s| s.to_string_lossy().into_owned(),
            )
        }
    });
    let row = score(model, &convs, &config)?;
    let report = MetricReport::new(vec![row], vec![digest], &config);
    Ok(render_report(&report, args.format))
}

fn cmd_compare(args: &CompareArgs) -> CmdResult {
    if args.predictions.len() < 2 {
        return Err(Failure::Usage(anyhow!(
            "compare needs at least two --predictions name=path entries"
        )));
    }
    let config = metric_config(&args.metrics)?;
    let mut rows = Vec::with_capacity(args.predictions.len());
    let mut digests = Vec::with_capacity(args.predictions.len());
    for entry in &args.predictions {
        let (name, path) = entry
            .split_once('=')
            .filter(|(n, p)| !n.is_empty() && !p.is_empty())
            .ok_or_else(|| Failure::Usage(anyhow!("expected name=path, got {entry:?}")))?;
        let (convs, digest) = load(path, &config.policy)?;
        rows.push(score(name.to_string(), &convs, &config)?);
        digests.push(digest);
    }
    let first = rows[0].metrics.n_turns;
    if rows.iter().any(|r| r.metrics.n_turns != first) {
        let counts: Vec<String> = rows
            .iter()
            .map(|r| format!("{}={}", r.model, r.metrics.n_turns))
            .collect();
        warn(format_args!(
            "models were scored on different numbers of turns ({})",
            counts.join(", ")
        ));
    }
    let report = MetricReport::new(rows, digests, &config);
    Ok(render_report(&report, args.format))
}

fn cmd_trace(args: &TraceArgs) -> CmdResult {
    let jsonl = match args.format.as_str() {
        "text" => false,
        "jsonlines" | "jsonl" => true,
        other => return Err(Failure::Usage(anyhow!("unknown trace format {other:?}"))),
    };
    let policy = policy(args.no_lowercase, args.no_trim, &[]);
    let lambdas = dedup_lambdas(&args.lambdas);
    let (convs, _) = load(&args.predictions, &policy)?;
    let conv = convs
        .iter()
        .find(|c| c.id() == args.dialogue_id)
        .ok_or_else(|| Failure::Evaluation(anyhow!("dialogue {:?} not found", args.dialogue_id)))?;
    let trace = trace_conversation(conv, &lambdas);
    let out = if jsonl {
        trace.render_jsonlines()
    } else {
        trace.render_text(&lambdas)
    };
    Ok(out.into_bytes())
}

fn cmd_lambda(args: &LambdaArgs) -> CmdResult {
    let lam = lambda_from_forgetting(args.tf, args.p).map_err(|e| Failure::Usage(e.into()))?;
    Ok(format!("lambda: {}\nrounded: {:.3}\n", lam.value(), lam.value()).into_bytes())
}

fn cmd_synth(args: &SynthArgs) -> CmdResult {
    let config = SynthConfig {
        seed: args.seed,
        conversations: args.conversations,
        turns_per_conversation: args.turns.clone(),
        domains: args.domains,
        slots_per_domain: args.slots,
        values_per_slot: args.values,
        p_type1: args.p_type1,
        p_drop: args.p_drop,
        p_spurious: args.p_spurious,
        p_overwrite: args.p_overwrite,
    };
    let corpus = generate(&config).map_err(|e| Failure::Usage(e.into()))?;
    let bytes = write_predictions(&corpus);
    match &args.output {
        Some(path) => {
            fs::write(path, &bytes)
                .map_err(|e| Failure::Usage(anyhow!("cannot write {path}: {e}")))?;
            Ok(Vec::new())
        }
        None => Ok(bytes),
    }
}

fn cmd_stats(args: &StatsArgs) -> CmdResult {
    let (convs, _) = load(&args.predictions, &NormalizationPolicy::default())?;
    let turns: usize = convs.iter().map(Conversation::len).sum();
    let avg = if convs.is_empty() {
        0.0
    } else {
        turns as f64 / convs.len() as f64
    };
    Ok(format!(
        "conversations: {}\nturns: {turns}\navg turns: {avg:.2}\n",
        convs.len()
    )
    .into_bytes())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Lambda(a) => cmd_lambda(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Stats(a) => cmd_stats(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = threads_from_env() {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            warn(format_args!("could not size thread pool: {e}"));
        }
    }
    match run(&cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(&out).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            let code = failure.exit_code();
            let (Failure::Usage(e) | Failure::Evaluation(e)) = failure;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
