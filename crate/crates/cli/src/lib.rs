//! Command-line workflows: translate, check, merge, conform and classify.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use umlsat_core::analysis::{analyze, AnalysisError, Backend};
use umlsat_core::loader::{parse_unvalidated, serialize_model, LoadError, SourceSpan, SpanTable};
use umlsat_core::model::{count_elements, merge, validate, Census, ElementRef, UmlModel};
use umlsat_core::oracle::SearchBound;
use umlsat_core::owl::{emit, serialize_functional, AxiomSet, EmitOptions};
use umlsat_core::reasoner::{self, internalize, ReasonerConfig, SatReport};

/// Process exit status. The numeric values are part of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    /// Consistent, every concept satisfiable.
    Clean = 0,
    /// Inconsistent model or unsatisfiable concepts.
    Findings = 1,
    /// Unreadable, malformed or invalid input, or bad arguments.
    InputError = 2,
    /// Resource limit hit or the two backends disagree.
    Indeterminate = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Input(_) | CliError::Output { .. } => ExitStatus::InputError,
            CliError::Analysis(_) => ExitStatus::Indeterminate,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Tableau,
    Bounded,
    Both,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Tableau => Backend::Tableau,
            BackendArg::Bounded => Backend::Bounded,
            BackendArg::Both => Backend::Both,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "umlsat", version, about = "Consistency checking of UML models via OWL 2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Decision procedure used for reasoning.
    #[arg(long, value_enum, default_value = "tableau", global = true)]
    backend: BackendArg,
    /// Largest domain the bounded model finder tries.
    #[arg(long, default_value_t = SearchBound::default().max_domain_size, global = true)]
    bound: usize,
    /// Read `size() > n` as at-least-n and `size() < n` as at-most-n.
    #[arg(long, global = true)]
    strict_paper_cardinality: bool,
    /// Do not assert absent links between objects.
    #[arg(long, global = true)]
    no_link_completion: bool,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the OWL 2 functional-syntax ontology of the (merged) inputs.
    Translate { #[arg(required = true)] inputs: Vec<PathBuf> },
    /// Report consistency and unsatisfiable concepts.
    Check { #[arg(required = true)] inputs: Vec<PathBuf> },
    /// Merge several models into one.
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Check the merged model and report instead of printing it.
        #[arg(long)]
        check: bool,
    },
    /// Check an object model against a class model.
    Conform { class_model: PathBuf, object_model: PathBuf },
    /// Print the class hierarchy.
    Classify { #[arg(required = true)] inputs: Vec<PathBuf> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Translate,
    Check,
    Merge,
    Conform,
    Classify,
}

/// Fully resolved invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub inputs: Vec<PathBuf>,
    pub backend: Backend,
    pub bound: SearchBound,
    pub options: EmitOptions,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Only meaningful for merge.
    pub check: bool,
    pub reasoner: ReasonerConfig,
}

impl RunConfig {
    pub fn new(command: CommandKind, inputs: Vec<PathBuf>) -> Self {
        RunConfig {
            command,
            inputs,
            backend: Backend::default(),
            bound: SearchBound::default(),
            options: EmitOptions::default(),
            output: None,
            format: Format::default(),
            check: false,
            reasoner: ReasonerConfig::from_env(),
        }
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let (command, inputs, check) = match cli.command {
            Command::Translate { inputs } => (CommandKind::Translate, inputs, false),
            Command::Check { inputs } => (CommandKind::Check, inputs, false),
            Command::Merge { inputs, check } => (CommandKind::Merge, inputs, check),
            Command::Conform { class_model, object_model } => (CommandKind::Conform, vec![class_model, object_model], false),
            Command::Classify { inputs } => (CommandKind::Classify, inputs, false),
        };
        let c = cli.common;
        let mut cfg = RunConfig::new(command, inputs);
        cfg.backend = c.backend.into();
        cfg.bound.max_domain_size = c.bound;
        cfg.options = EmitOptions { strict_paper_cardinality: c.strict_paper_cardinality, no_link_completion: c.no_link_completion };
        cfg.output = c.output;
        cfg.format = c.format;
        cfg.check = check;
        cfg
    }
}

/// Where an individual named in a clash was declared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    /// Index into `clashes`.
    pub clash: usize,
    pub individual: String,
    pub span: SourceSpan,
}

/// Machine-readable report of check, merge --check and conform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    #[serde(flatten)]
    pub report: SatReport,
    pub census: Census,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub origins: Vec<Origin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonHierarchy {
    pub census: Census,
    pub consistent: bool,
    pub tree: String,
    pub unsatisfiable: Vec<String>,
    pub timings: reasoner::Timings,
}

/// Loaded inputs: the merged model and where its elements came from.
pub struct Inputs {
    pub model: UmlModel,
    pub spans: SpanTable,
}

/// Parses every input, merges them and validates the result. Individual
/// files need not validate on their own, so an object model may refer to
/// classes declared in another file.
pub fn load_inputs(paths: &[PathBuf]) -> Result<Inputs, CliError> {
    let mut models = Vec::with_capacity(paths.len());
    let mut spans = SpanTable::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let loaded = parse_unvalidated(&text, &path.display().to_string())?;
        for (element, span) in loaded.spans {
            // Positional references are renumbered by the merge.
            let positional = matches!(element, ElementRef::Link(_) | ElementRef::NegLink(_) | ElementRef::Transition { .. });
            if paths.len() == 1 || !positional {
                spans.entry(element).or_insert(span);
            }
        }
        models.push(loaded.model);
    }
    let model = if models.len() == 1 {
        models.pop().expect("one model")
    } else {
        let merged = merge(&models);
        if !merged.conflicts.is_empty() {
            return Err(CliError::Input(render_diagnostics(merged.conflicts.iter().map(|d| (d.to_string(), spans.get(&d.element))))));
        }
        merged.model
    };
    let diagnostics = validate(&model);
    if !diagnostics.is_empty() {
        return Err(CliError::Input(render_diagnostics(diagnostics.iter().map(|d| (d.to_string(), spans.get(&d.element))))));
    }
    Ok(Inputs { model, spans })
}

fn render_diagnostics<'a>(items: impl Iterator<Item = (String, Option<&'a SourceSpan>)>) -> String {
    items
        .map(|(msg, span)| match span {
            Some(s) => format!("{s}: {msg}"),
            None => msg,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn translate(model: &UmlModel, options: EmitOptions) -> Result<(AxiomSet, f64), CliError> {
    let start = Instant::now();
    let ax = emit(model, options).map_err(|e| CliError::Input(e.to_string()))?;
    Ok((ax, start.elapsed().as_secs_f64() * 1000.0))
}

fn verdict(report: &SatReport) -> ExitStatus {
    if report.is_clean() {
        ExitStatus::Clean
    } else {
        ExitStatus::Findings
    }
}

/// Output of one command: the text to write and the resulting status.
pub struct Outcome {
    pub text: String,
    pub status: ExitStatus,
}

fn check_model(cfg: &RunConfig, inputs: &Inputs, object_file: Option<&Path>) -> Result<Outcome, CliError> {
    let (ax, translate_ms) = translate(&inputs.model, cfg.options)?;
    let mut report = analyze(&ax, cfg.backend, &cfg.bound, &cfg.reasoner)?;
    report.timings.translate_ms = translate_ms;
    let origins = object_file.map(|f| origins(&report, &inputs.spans, f)).unwrap_or_default();
    let status = verdict(&report);
    let text = match cfg.format {
        Format::Json => {
            let json = JsonReport { report, census: count_elements(&inputs.model), origins };
            serde_json::to_string_pretty(&json).expect("report serializes") + "\n"
        }
        Format::Text => {
            let mut text = String::new();
            if object_file.is_some() {
                text.push_str(if status == ExitStatus::Clean { "Conforms: Yes\n" } else { "Conforms: No\n" });
            }
            text.push_str(&report.render_text());
            for o in &origins {
                text.push_str(&format!("  {} declared at {}\n", o.individual, o.span));
            }
            text
        }
    };
    Ok(Outcome { text, status })
}

/// Clash participants that were declared in `object_file`.
fn origins(report: &SatReport, spans: &SpanTable, object_file: &Path) -> Vec<Origin> {
    let file = object_file.display().to_string();
    let mut out = Vec::new();
    for (k, clash) in report.clashes.iter().enumerate() {
        for p in &clash.participants {
            if let Some(span) = spans.get(&ElementRef::Object(p.clone())) {
                if span.file == file {
                    out.push(Origin { clash: k, individual: p.clone(), span: span.clone() });
                }
            }
        }
    }
    out
}

fn classify_model(cfg: &RunConfig, inputs: &Inputs) -> Result<Outcome, CliError> {
    let census = count_elements(&inputs.model);
    let (ax, translate_ms) = translate(&inputs.model, cfg.options)?;
    let start = Instant::now();
    let report = analyze(&ax, cfg.backend, &cfg.bound, &cfg.reasoner)?;
    let (tree, unsatisfiable) = if report.consistent {
        let h = reasoner::classify(&internalize(&ax), &cfg.reasoner).map_err(AnalysisError::from)?;
        (h.render(), h.unsatisfiable)
    } else {
        (report.render_text(), Vec::new())
    };
    let timings = reasoner::Timings { translate_ms, reason_ms: start.elapsed().as_secs_f64() * 1000.0 };
    let status = if report.consistent && unsatisfiable.is_empty() { ExitStatus::Clean } else { ExitStatus::Findings };
    let text = match cfg.format {
        Format::Text => format!("Classifying {} elements\n{tree}", census.total),
        Format::Json => {
            let json = JsonHierarchy { census, consistent: report.consistent, tree, unsatisfiable, timings };
            serde_json::to_string_pretty(&json).expect("hierarchy serializes") + "\n"
        }
    };
    Ok(Outcome { text, status })
}

/// Executes a resolved configuration and returns what it would print.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let inputs = load_inputs(&cfg.inputs)?;
    match cfg.command {
        CommandKind::Translate => {
            let (ax, _) = translate(&inputs.model, cfg.options)?;
            Ok(Outcome { text: serialize_functional(&ax), status: ExitStatus::Clean })
        }
        CommandKind::Check => check_model(cfg, &inputs, None),
        CommandKind::Merge if cfg.check => check_model(cfg, &inputs, None),
        CommandKind::Merge => {
            let mut model = inputs.model;
            model.canonicalize();
            Ok(Outcome { text: serialize_model(&model), status: ExitStatus::Clean })
        }
        CommandKind::Conform => check_model(cfg, &inputs, cfg.inputs.get(1).map(PathBuf::as_path)),
        CommandKind::Classify => classify_model(cfg, &inputs),
    }
}

/// Parses `args` (program name first), runs the command and writes results
/// to `out` or the `--output` file and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { ExitStatus::InputError } else { ExitStatus::Clean };
        }
    };
    let cfg = RunConfig::from(cli);
    let result = execute(&cfg).and_then(|o| {
        match &cfg.output {
            Some(path) => std::fs::write(path, &o.text).map_err(|source| CliError::Output { path: path.display().to_string(), source })?,
            None => {
                let _ = out.write_all(o.text.as_bytes());
            }
        }
        Ok(o.status)
    });
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.status()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::from(Cli::try_parse_from(args).unwrap())
    }

    #[test]
    fn flags_resolve() {
        let cfg = parse(&["umlsat", "check", "a.uml", "--backend", "both", "--bound", "6", "--format", "json", "--strict-paper-cardinality"]);
        assert_eq!(cfg.command, CommandKind::Check);
        assert_eq!(cfg.backend, Backend::Both);
        assert_eq!(cfg.bound.max_domain_size, 6);
        assert_eq!(cfg.format, Format::Json);
        assert!(cfg.options.strict_paper_cardinality);
        assert!(!cfg.options.no_link_completion);
    }

    #[test]
    fn conform_takes_two_files() {
        let cfg = parse(&["umlsat", "conform", "c.uml", "o.uml", "--no-link-completion"]);
        assert_eq!(cfg.inputs, vec![PathBuf::from("c.uml"), PathBuf::from("o.uml")]);
        assert!(cfg.options.no_link_completion);
        assert!(Cli::try_parse_from(["umlsat", "conform", "c.uml"]).is_err());
    }

    #[test]
    fn merge_check_flag() {
        assert!(parse(&["umlsat", "merge", "--check", "a", "b"]).check);
        assert!(!parse(&["umlsat", "merge", "a", "b"]).check);
    }

    #[test]
    fn bad_arguments_are_input_errors() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["umlsat", "check"], &mut out, &mut err), ExitStatus::InputError);
        assert_eq!(run(["umlsat", "check", "x", "--backend", "nope"], &mut out, &mut err), ExitStatus::InputError);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [ExitStatus::Clean, ExitStatus::Findings, ExitStatus::InputError, ExitStatus::Indeterminate].map(ExitStatus::code);
        assert_eq!(codes, [0, 1, 2, 3]);
    }
}
