//! Command-line front end. Exit codes: 0 success, 1 internal error,
//! 2 input or usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{load_corpus, CorpusFormat};
use crate::dump::parse_dump;
use crate::error::{Error, Result};
use crate::eval::evaluate_with_workers;
use crate::linker::{explain, link_corpus, write_annotations, LinkerConfig};
use crate::rules::InfoboxRules;
use crate::scoring::{Module, ScorerConfig};
use crate::snapshot::{build_snapshot, BuildOptions};
use crate::store::load_snapshot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nedkit",
    version,
    about = "Link marked entity mentions to a wiki snapshot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a dump and write a snapshot file.
    BuildSnapshot {
        /// Dump file in the line-delimited page format.
        #[arg(long)]
        input: PathBuf,
        /// Snapshot file to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Link the mentions of a corpus and write one record per mention.
    Disambiguate(RunConfig),
    /// Link a gold-annotated corpus and report micro precision, recall and F1.
    Evaluate(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Native,
    Nif,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportArg {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct RunConfig {
    #[arg(long)]
    snapshot: PathBuf,
    /// Corpus file.
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "native")]
    format: FormatArg,
    /// Comma-separated subset of infobox,textual,llc1,llc2.
    #[arg(long, default_value = "infobox,textual,llc1,llc2")]
    modules: String,
    #[arg(long, default_value_t = 0.05)]
    nil_threshold: f64,
    /// TOML file of cue phrases per infobox class.
    #[arg(long)]
    infobox_rules: Option<PathBuf>,
    /// Include the ranked rejected candidates of every mention.
    #[arg(long)]
    verbose_ambiguity: bool,
    /// Output style. Defaults to json for disambiguate, text for evaluate.
    #[arg(long, value_enum)]
    report: Option<ReportArg>,
    /// Documents linked in parallel.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl RunConfig {
    fn scorer(&self) -> Result<ScorerConfig> {
        let mut cfg = ScorerConfig {
            enabled_modules: Module::parse_list(&self.modules)?,
            ..Default::default()
        };
        if let Some(path) = &self.infobox_rules {
            cfg.infobox_rules = InfoboxRules::load(path)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn linker(&self) -> Result<LinkerConfig> {
        let cfg = LinkerConfig {
            nil_threshold: self.nil_threshold,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn format(&self) -> CorpusFormat {
        match self.format {
            FormatArg::Native => CorpusFormat::Native,
            FormatArg::Nif => CorpusFormat::Nif,
        }
    }
}

fn emit(output: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn build_timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        })
}

pub fn cmd_build_snapshot(input: &Path, output: &Path, stdout: &mut dyn Write) -> Result<()> {
    let file = std::fs::File::open(input).map_err(|e| Error::io(input, e))?;
    let records = parse_dump(std::io::BufReader::new(file))?;
    let data = build_snapshot(
        &records,
        BuildOptions {
            build_timestamp: build_timestamp(),
        },
    )?;
    data.write_atomic(output)?;
    let m = &data.manifest;
    let summary = format!(
        "wrote {}\nformat_version   {}\nentities         {}\nredirects        {}\ndisambiguations  {}\nvocabulary       {}\nbuild_timestamp  {}\n",
        output.display(),
        m.format_version,
        m.entity_count,
        m.redirect_count,
        m.disambig_count,
        m.vocabulary_size,
        m.build_timestamp
    );
    emit(None, &summary, stdout)
}

fn cmd_disambiguate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let (scorer, linker) = (cfg.scorer()?, cfg.linker()?);
    let snapshot = load_snapshot(&cfg.snapshot)?;
    let corpus = load_corpus(&cfg.input, cfg.format())?;
    let annotations = link_corpus(&corpus.documents, &snapshot, &scorer, &linker, cfg.workers)?;
    let text = match cfg.report.unwrap_or(ReportArg::Json) {
        ReportArg::Json => write_annotations(&annotations, cfg.verbose_ambiguity),
        ReportArg::Text => annotations
            .iter()
            .map(|a| explain(a).to_string())
            .collect::<Vec<_>>()
            .join("\n"),
    };
    emit(cfg.output.as_deref(), &text, stdout)
}

fn cmd_evaluate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let (scorer, linker) = (cfg.scorer()?, cfg.linker()?);
    let snapshot = load_snapshot(&cfg.snapshot)?;
    let corpus = load_corpus(&cfg.input, cfg.format())?;
    let report = evaluate_with_workers(&corpus, &snapshot, &scorer, &linker, cfg.workers)?;
    let text = match cfg.report.unwrap_or(ReportArg::Text) {
        ReportArg::Json => report.to_json(),
        ReportArg::Text => report.to_string(),
    };
    emit(cfg.output.as_deref(), &text, stdout)
}

/// Run the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::BuildSnapshot { input, output } => cmd_build_snapshot(input, output, stdout),
        Command::Disambiguate(cfg) => cmd_disambiguate(cfg, stdout),
        Command::Evaluate(cfg) => cmd_evaluate(cfg, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            }
        }
    }
}
