use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chatprofiler::pipeline::{self, Output};
use chatprofiler::resources::{ResourcePaths, Resources};
use chatprofiler::transcript::{validate_corpus, Session};
use chatprofiler::{emit_html, emit_json, Error, GuidelineCatalog, InterviewConfig};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

const RESOURCES_ENV: &str = "CHATPROFILER_RESOURCES";
const GUIDELINES_FILE: &str = "guidelines.json";

/// Profile an interview chatbot from its transcripts.
#[derive(Parser)]
#[command(name = "chatprofiler", version)]
struct Cli {
    /// Print every warning (repeat for stage progress).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the inputs parse; writes nothing.
    Validate(InputArgs),
    /// Emit the chatbot profile as JSON.
    Profile(RunArgs),
    /// Emit the profile plus design suggestions and evidence as JSON.
    Suggest(RunArgs),
    /// Like `suggest`, and also write the HTML report.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// JSONL transcript file, one session per line.
    #[arg(long)]
    transcripts: PathBuf,

    /// Interview configuration JSON.
    #[arg(long)]
    interview: PathBuf,

    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct ResourceArgs {
    /// Directory of resource files under their default names
    /// (defaults to $CHATPROFILER_RESOURCES).
    #[arg(long, value_name = "DIR")]
    resources: Option<PathBuf>,
    /// Word frequency table (word<TAB>count).
    #[arg(long, value_name = "FILE")]
    frequency: Option<PathBuf>,
    /// Empathy lexicon, one word per line.
    #[arg(long, value_name = "FILE")]
    empathy: Option<PathBuf>,
    /// Sentiment lexicon.
    #[arg(long, value_name = "FILE")]
    sentiment: Option<PathBuf>,
    /// Offensive term list.
    #[arg(long, value_name = "FILE")]
    offensive: Option<PathBuf>,
    /// PII detector definitions (JSON).
    #[arg(long, value_name = "FILE")]
    pii: Option<PathBuf>,
    /// Word embeddings in GloVe text format.
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Design guideline catalog (JSON).
    #[arg(long, value_name = "FILE")]
    guidelines: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Where to write the JSON document (default: standard output).
    #[arg(long, value_name = "FILE")]
    out_json: Option<PathBuf>,

    /// Seed for evidence sampling; overrides the config's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    run: RunArgs,

    /// Where to write the HTML report.
    #[arg(long, value_name = "FILE")]
    out_html: PathBuf,
}

/// A failed run: the exit code and the lines to print.
struct Failure {
    code: u8,
    messages: Vec<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { 1 } else { 2 },
            messages: vec![e.to_string()],
        }
    }
}

struct Inputs {
    corpus: Vec<Session>,
    config: InterviewConfig,
    resources: Resources,
    catalog: GuidelineCatalog,
    warnings: Vec<String>,
}

fn resource_dir(args: &ResourceArgs) -> Option<PathBuf> {
    args.resources
        .clone()
        .or_else(|| std::env::var_os(RESOURCES_ENV).map(PathBuf::from))
}

/// Reads and checks every input, collecting all transcript errors.
fn load_inputs(args: &InputArgs) -> Result<Inputs, Failure> {
    let file = File::open(&args.transcripts).map_err(|e| Failure {
        code: 1,
        messages: vec![format!(
            "failed to open {}: {e}",
            args.transcripts.display()
        )],
    })?;
    let (corpus, errors) = validate_corpus(BufReader::new(file));
    let mut messages: Vec<String> = errors
        .iter()
        .map(|e| format!("{}: {e}", args.transcripts.display()))
        .collect();

    let config = InterviewConfig::load(&args.interview).map_err(|e| messages.push(e.to_string()));

    let r = &args.resources;
    let dir = resource_dir(r);
    let paths = ResourcePaths {
        dir: dir.clone(),
        frequency: r.frequency.clone(),
        empathy: r.empathy.clone(),
        sentiment: r.sentiment.clone(),
        offensive: r.offensive.clone(),
        pii: r.pii.clone(),
        embeddings: r.embeddings.clone(),
    };
    let mut warnings = Vec::new();
    let resources =
        Resources::load(&paths, &mut warnings).map_err(|e| messages.push(e.to_string()));

    let guidelines = r
        .guidelines
        .clone()
        .or_else(|| dir.map(|d| d.join(GUIDELINES_FILE)).filter(|p| p.is_file()));
    let catalog = match guidelines {
        Some(p) => GuidelineCatalog::load(&p),
        None => Ok(GuidelineCatalog::bundled()),
    }
    .map_err(|e| messages.push(e.to_string()));

    match (config, resources, catalog) {
        (Ok(config), Ok(resources), Ok(catalog)) if messages.is_empty() => Ok(Inputs {
            corpus,
            config,
            resources,
            catalog,
            warnings,
        }),
        _ => Err(Failure { code: 1, messages }),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|source| {
        Error::Write {
            path: path.display().to_string(),
            source,
        }
        .into()
    })
}

fn write_json(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure {
            code: 1,
            messages: vec![format!("failed to write to standard output: {e}")],
        }),
    }
}

fn report_warnings(warnings: &[String], verbose: u8) {
    if warnings.is_empty() {
        return;
    }
    if verbose > 0 {
        for w in warnings {
            eprintln!("warning: {w}");
        }
    } else {
        eprintln!("{} warnings (use -v to list them)", warnings.len());
    }
}

fn progress(verbose: u8, msg: &str) {
    if verbose > 1 {
        eprintln!("{msg}");
    }
}

fn execute(
    args: &RunArgs,
    output: Output,
    html: Option<&Path>,
    verbose: u8,
) -> Result<(), Failure> {
    let mut inputs = load_inputs(&args.input)?;
    if let Some(seed) = args.seed {
        inputs.config.rng_seed = seed;
    }
    progress(verbose, &format!("loaded {} sessions", inputs.corpus.len()));
    let doc = pipeline::run(
        &inputs.corpus,
        &inputs.config,
        &inputs.resources,
        &inputs.catalog,
        output,
        inputs.warnings,
    )?;
    report_warnings(&doc.warnings, verbose);
    progress(verbose, &format!("{} flags", doc.profile.flags.len()));

    let json = emit_json(&doc).map_err(Error::from)?;
    write_json(args.out_json.as_deref(), &json)?;
    if let Some(path) = html {
        write_file(path, &emit_html(&doc))?;
        progress(verbose, &format!("wrote {}", path.display()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate(args) => {
            let inputs = load_inputs(args)?;
            report_warnings(&inputs.warnings, cli.verbose);
            eprintln!(
                "ok: {} sessions, {} questions",
                inputs.corpus.len(),
                inputs.config.questions.len()
            );
            Ok(())
        }
        Command::Profile(args) => execute(args, Output::Profile, None, cli.verbose),
        Command::Suggest(args) => execute(args, Output::Suggestions, None, cli.verbose),
        Command::Report(args) => execute(
            &args.run,
            Output::Suggestions,
            Some(&args.out_html),
            cli.verbose,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            for m in &f.messages {
                eprintln!("error: {m}");
            }
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(2),
    }
}
