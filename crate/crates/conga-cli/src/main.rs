//! `conga` — corpus validation, tag statistics, gender evaluation, system
//! comparison and translation batches from one binary.
//!
//! Exit codes: 0 success, 1 validation failure (or a translation batch with
//! failed lines), 2 usage, IO or parse failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use conga_core::corpus::CorpusFormat;
use conga_core::eval::classify_corpus;
use conga_core::provider::{translate_batch, BatchManifest, ProviderConfig};
use conga_core::report::{
    build_report, compare_systems, corpus_digest, emit_distribution_table, emit_outcome_csv,
    emit_sentence_log, emit_summary, EvaluationReport, SummaryFormat,
};
use conga_core::validate::{validate, Severity};
use conga_core::{Corpus, Outcome};

#[derive(Parser)]
#[command(
    name = "conga",
    version,
    about = "Entity-level gender evaluation for machine translation output",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lint a corpus against the annotation guidelines
    Validate(ValidateArgs),
    /// Print the per-side tag distribution of a corpus
    Stats(StatsArgs),
    /// Classify one system's output and write metrics and reports
    Evaluate(EvaluateArgs),
    /// Evaluate several systems and report their metric deltas
    Compare(CompareArgs),
    /// Request candidate translations from an HTTP provider
    Translate(TranslateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

#[derive(Args)]
struct CorpusInput {
    /// Corpus file (JSONL canonical, TSV convenience)
    corpus: PathBuf,

    /// Input format; default is inferred from the file extension
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl CorpusInput {
    fn format(&self) -> CorpusFormat {
        match self.format {
            Some(FormatArg::Jsonl) => CorpusFormat::Jsonl,
            Some(FormatArg::Tsv) => CorpusFormat::Tsv,
            None => CorpusFormat::from_extension(&self.corpus.to_string_lossy()),
        }
    }

    /// Loads the corpus, keeping the raw bytes' digest for report metadata.
    fn load(&self) -> Result<(Corpus, String)> {
        let bytes = std::fs::read(&self.corpus)
            .with_context(|| format!("reading {}", self.corpus.display()))?;
        let text = std::str::from_utf8(&bytes)
            .with_context(|| format!("{} is not valid UTF-8", self.corpus.display()))?;
        let corpus = Corpus::load(text, self.format())
            .map_err(|e| anyhow::anyhow!("{}: {e}", self.corpus.display()))?;
        Ok((corpus, corpus_digest(&bytes)))
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: CorpusInput,

    /// Treat warnings as failures
    #[arg(long)]
    strict: bool,

    /// Emit diagnostics as JSON lines instead of human-readable text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: CorpusInput,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: CorpusInput,

    /// System to evaluate (a key of the records' target maps)
    #[arg(long)]
    system: String,

    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: CorpusInput,

    /// Comma-separated systems to compare (at least two)
    #[arg(long, value_delimiter = ',', required = true)]
    systems: Vec<String>,

    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory for outcome CSVs, per-sentence logs and summaries
    #[arg(long)]
    out: Option<PathBuf>,

    /// Summary formats to write under --out
    #[arg(long, value_delimiter = ',', default_values = ["json", "table"])]
    report: Vec<ReportFormatArg>,

    /// Evaluate even when validation reports errors
    #[arg(long)]
    force: bool,

    /// Treat validation warnings as blocking (implies nothing under --force)
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormatArg {
    Json,
    Table,
}

#[derive(Args)]
struct TranslateArgs {
    /// Plain text file, one untagged source line per translation
    input: PathBuf,

    /// Provider endpoint URL (JSON POST)
    #[arg(long)]
    endpoint: String,

    /// Model identifier sent to the provider
    #[arg(long)]
    model: String,

    /// Sampling temperature in [0, 2]
    #[arg(long, default_value_t = conga_core::provider::DEFAULT_TEMPERATURE)]
    temperature: f64,

    /// Maximum concurrent requests
    #[arg(long, default_value_t = 1)]
    parallel: usize,

    #[arg(long, default_value = "en")]
    source_lang: String,

    #[arg(long, default_value = "it")]
    target_lang: String,

    /// JSON request template file; placeholders {{text}}, {{model}},
    /// {{source_lang}}, {{target_lang}}, {{temperature}}
    #[arg(long)]
    request_template: Option<PathBuf>,

    /// Dot-separated path of the translation string in the response
    #[arg(long, default_value = conga_core::provider::DEFAULT_RESPONSE_PATH)]
    response_path: String,

    /// Per-request timeout in seconds
    #[arg(long, default_value_t = 120)]
    timeout: u64,

    /// Base delay between retry attempts, in milliseconds
    #[arg(long, default_value_t = 250)]
    retry_delay_ms: u64,

    /// Directory for translations.tsv and manifest.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Translate(args) => cmd_translate(args),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let (corpus, _) = args.input.load()?;
    let diagnostics = validate(&corpus);
    for diagnostic in &diagnostics {
        if args.json {
            println!("{}", diagnostic.to_json_line());
        } else {
            println!("{diagnostic}");
        }
    }
    let blocking = diagnostics
        .iter()
        .any(|d| d.severity == Severity::Error || args.strict);
    Ok(ExitCode::from(u8::from(blocking)))
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode> {
    let (corpus, _) = args.input.load()?;
    let table = emit_distribution_table(&corpus);
    print!("{}", String::from_utf8(table).expect("table is UTF-8"));
    Ok(ExitCode::SUCCESS)
}

/// Runs the implicit validation gate for evaluate/compare. Exit 1 when the
/// corpus is rejected.
fn validation_gate(corpus: &Corpus, report: &ReportArgs) -> Option<ExitCode> {
    if report.force {
        return None;
    }
    let diagnostics = validate(corpus);
    let blocking: Vec<_> = diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error || report.strict)
        .collect();
    if blocking.is_empty() {
        return None;
    }
    eprintln!(
        "corpus rejected by validation ({} blocking diagnostic(s); use --force to override):",
        blocking.len()
    );
    for diagnostic in blocking {
        eprintln!("  {diagnostic}");
    }
    Some(ExitCode::from(1))
}

fn sanitize_file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_report_files(
    out: &Path,
    report: &EvaluationReport,
    outcomes_by_system: &[(String, Vec<Outcome>)],
    formats: &[ReportFormatArg],
    suffix_system_names: bool,
) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for ((system, outcomes), system_report) in outcomes_by_system.iter().zip(&report.systems) {
        let stem = if suffix_system_names {
            format!(".{}", sanitize_file_stem(system))
        } else {
            String::new()
        };
        write_file(out, &format!("outcomes{stem}.csv"), &emit_outcome_csv(outcomes))?;
        write_file(
            out,
            &format!("sentences{stem}.csv"),
            &emit_sentence_log(&system_report.log),
        )?;
    }
    if formats.contains(&ReportFormatArg::Json) {
        write_file(out, "summary.json", &emit_summary(report, SummaryFormat::Json))?;
    }
    if formats.contains(&ReportFormatArg::Table) {
        write_file(out, "summary.txt", &emit_summary(report, SummaryFormat::Table))?;
    }
    Ok(())
}

fn classify_systems(
    corpus: &Corpus,
    systems: &[String],
) -> Result<Vec<(String, Vec<Outcome>)>> {
    systems
        .iter()
        .map(|system| {
            let outcomes = classify_corpus(corpus, system)?;
            Ok((system.clone(), outcomes))
        })
        .collect()
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let (corpus, digest) = args.input.load()?;
    if let Some(code) = validation_gate(&corpus, &args.report) {
        return Ok(code);
    }
    let outcomes = classify_systems(&corpus, std::slice::from_ref(&args.system))?;
    let report = build_report(&corpus, &outcomes, digest);
    if let Some(out) = &args.report.out {
        write_report_files(out, &report, &outcomes, &args.report.report, false)?;
    }
    print!(
        "{}",
        String::from_utf8(emit_summary(&report, SummaryFormat::Table)).expect("UTF-8")
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    if args.systems.len() < 2 {
        bail!("--systems needs at least two comma-separated names");
    }
    let (corpus, digest) = args.input.load()?;
    if let Some(code) = validation_gate(&corpus, &args.report) {
        return Ok(code);
    }
    let outcomes = classify_systems(&corpus, &args.systems)?;
    let report = build_report(&corpus, &outcomes, digest);
    let deltas = compare_systems(&report)?;

    let mut delta_text = String::from("System deltas (first listed minus second)\n");
    for delta in &deltas {
        delta_text.push_str(&format!("  {}\n", delta.render()));
    }

    if let Some(out) = &args.report.out {
        write_report_files(out, &report, &outcomes, &args.report.report, true)?;
        write_file(out, "deltas.txt", delta_text.as_bytes())?;
    }
    print!(
        "{}",
        String::from_utf8(emit_summary(&report, SummaryFormat::Table)).expect("UTF-8")
    );
    println!();
    print!("{delta_text}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_translate(args: TranslateArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let lines: Vec<(usize, String)> = text
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| (i + 1, line.to_string()))
        .collect();
    if lines.is_empty() {
        bail!("{} contains no non-empty lines", args.input.display());
    }

    let mut config = ProviderConfig::new(&args.endpoint, &args.model);
    config.source_lang = args.source_lang.clone();
    config.target_lang = args.target_lang.clone();
    config.temperature = args.temperature;
    config.parallelism = args.parallel;
    config.request_timeout = Duration::from_secs(args.timeout);
    config.retry_base_delay = Duration::from_millis(args.retry_delay_ms);
    config.response_path = args.response_path.clone();
    if let Some(template) = &args.request_template {
        config.request_template = std::fs::read_to_string(template)
            .with_context(|| format!("reading {}", template.display()))?;
    }

    let started = chrono::Utc::now();
    let outcomes = translate_batch(&lines, &config)?;
    let finished = chrono::Utc::now();

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_file(
        &args.out,
        "translations.tsv",
        &conga_core::provider::render_tsv(&outcomes),
    )?;
    let manifest = BatchManifest::new(&config, &outcomes, started, finished);
    let mut manifest_bytes =
        serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    manifest_bytes.push(b'\n');
    write_file(&args.out, "manifest.json", &manifest_bytes)?;

    let failed: Vec<_> = outcomes.iter().filter(|o| o.result.is_err()).collect();
    for failure in &failed {
        eprintln!(
            "line {} failed after {} attempt(s): {}",
            failure.id,
            failure.attempts,
            failure.result.as_ref().unwrap_err()
        );
    }
    println!(
        "translated {}/{} line(s); output in {}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        args.out.display()
    );
    Ok(ExitCode::from(u8::from(!failed.is_empty())))
}
