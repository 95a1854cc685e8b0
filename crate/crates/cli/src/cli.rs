//! Subcommand definitions and dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lftab_core::dataset::{CanonicalRecord, DEFAULT_CONTENT_CAP};
use lftab_core::logic_types::{AnswerKind, Question};
use lftab_core::{
    bleu4, check_splits, compute_stats, export_model_input, fixtures, load_dataset, rouge, validate_dataset, Answer,
    Dataset, ExecConfig, FieldMap, LogicType, RougeVariant, Split, Table,
};
use serde::Serialize;

use crate::error::{ApiError, Kind};
use crate::ops;
use crate::service::{self, AppState, ServiceConfig};
use crate::session::Session;

#[derive(Parser, Debug)]
#[command(name = "lftab", version, about = "Logical forms over semi-structured tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct LogicArg {
    /// Program text, e.g. "eq { count { all_rows } ; 7 }".
    #[arg(long, short)]
    pub logic: String,
    /// Print structured JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct TableArg {
    /// Table file (.json record, or .csv/.tsv/.psv with a header row), or
    /// the id of a bundled table such as `opec_2012`.
    #[arg(long, short)]
    pub table: String,
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// Dataset file or directory of .json/.jsonl files.
    #[arg(long, short, env = "LFTAB_DATA")]
    pub data: PathBuf,
    /// Field-name overrides, `field = name1, name2` per line.
    #[arg(long)]
    pub fields: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Bleu4,
    Rouge1,
    Rouge2,
    Rouge4,
    #[value(name = "rougeL", alias = "rouge-l")]
    RougeL,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    /// One space-joined token line per example.
    Text,
    /// One JSON record per example with the four segments.
    Json,
    /// Canonical dataset records.
    Canonical,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a program and print its canonical form and node counts.
    Parse(LogicArg),
    /// Type check a program.
    Check(LogicArg),
    /// Execute a program against a table.
    Exec {
        #[command(flatten)]
        table: TableArg,
        #[command(flatten)]
        logic: LogicArg,
        /// Execution settings, `key = value` per line.
        #[arg(long, short, env = "LFTAB_EXEC_CONFIG")]
        config: Option<PathBuf>,
        /// Include the evaluation trace (with --json).
        #[arg(long)]
        trace: bool,
    },
    /// Name the logic type of a program.
    Classify(LogicArg),
    /// Render a program as a sentence from the templates.
    Realize {
        #[command(flatten)]
        table: TableArg,
        #[command(flatten)]
        logic: LogicArg,
    },
    /// Render a program as an explicit step-by-step reading.
    Interpret(LogicArg),
    /// Print the depth-first token sequence of a program.
    Linearize(LogicArg),
    /// Parse, type check and execute every example of a dataset.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, short, env = "LFTAB_EXEC_CONFIG")]
        config: Option<PathBuf>,
        /// Failures to list after the summary.
        #[arg(long, default_value_t = 20)]
        failures: usize,
    },
    /// Corpus statistics.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// Also write the node-count histogram as CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Split sizes and tables shared between splits. Exits 1 on overlap.
    Splits {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Write generator inputs, one line per example.
    ExportInputs {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Text)]
        format: ExportFormat,
        /// Maximum table-content tokens per example.
        #[arg(long, default_value_t = DEFAULT_CONTENT_CAP)]
        cap: usize,
        /// Only this split (train, dev or test).
        #[arg(long)]
        split: Option<String>,
    },
    /// Score candidate sentences against references, one per line.
    Score {
        #[arg(long, short, value_enum)]
        metric: Metric,
        #[arg(long)]
        cand: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
    /// Answer a logic type's questions in the terminal and derive a program.
    Derive {
        #[command(flatten)]
        table: TableArg,
        /// count, superlative, comparative, aggregation, majority, unique or ordinal.
        #[arg(long = "type")]
        logic_type: String,
        #[arg(long, short, env = "LFTAB_EXEC_CONFIG")]
        config: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "LFTAB_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long, env = "LFTAB_DATA_DIR")]
        data_dir: Option<PathBuf>,
        #[arg(long, env = "LFTAB_EXEC_CONFIG")]
        exec_config: Option<PathBuf>,
        /// Idle minutes before a session is dropped.
        #[arg(long, default_value_t = 30)]
        session_ttl_minutes: u64,
    },
}

fn json_line<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn text_or_json<T: Serialize>(json: bool, text: String, value: &T) -> String {
    if json {
        json_line(value)
    } else {
        text
    }
}

pub fn load_table(spec: &str) -> Result<Table, ApiError> {
    let path = Path::new(spec);
    if !path.exists() {
        let fixture = fixtures::opec_2012();
        if spec == fixture.table_id {
            return Ok(fixture);
        }
        return Err(ApiError::new(Kind::NotFound, "UnknownTable", format!("no table file or bundled table `{spec}`")));
    }
    Table::load(path).map_err(ApiError::domain)
}

pub fn load_config(path: Option<&Path>) -> Result<ExecConfig, ApiError> {
    match path {
        None => Ok(ExecConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| ApiError::io(format!("{}: {e}", p.display())))?;
            ops::parse_config(&text)
        }
    }
}

fn load_data(args: &DataArgs) -> Result<Dataset, ApiError> {
    let map = match &args.fields {
        None => FieldMap::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| ApiError::io(format!("{}: {e}", p.display())))?;
            text.parse().map_err(|e: lftab_core::error::ConfigError| {
                ApiError::new(Kind::Usage, "InvalidFieldMap", e.to_string())
            })?
        }
    };
    let data = load_dataset(&args.data, &map).map_err(|e| ApiError::io(e.to_string()))?;
    for issue in data.issues.iter().take(20) {
        log::warn!("{}: {:?}: {}", issue.record, issue.kind, issue.message);
    }
    if data.issues.len() > 20 {
        log::warn!("{} more load issues", data.issues.len() - 20);
    }
    Ok(data)
}

fn read_lines(path: &Path) -> Result<Vec<String>, ApiError> {
    let text = fs::read_to_string(path).map_err(|e| ApiError::io(format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Outcome of a subcommand: text for stdout and the exit status.
pub struct Outcome {
    pub stdout: String,
    pub status: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, status: 0 }
    }
}

/// Runs every subcommand except the interactive and long-running ones,
/// which need real stdio and a runtime.
pub fn run_command(cmd: &Command) -> Result<Outcome, ApiError> {
    match cmd {
        Command::Parse(l) => {
            let p = ops::parse_report(&l.logic)?;
            let s = p.node_stats;
            let text = format!(
                "{}\nnodes {} (function {}, text {}), linearized length {}",
                p.logic_str, s.total_nodes, s.function_nodes, s.text_nodes, s.linearized_length
            );
            Ok(Outcome::ok(text_or_json(l.json, text, &p)))
        }
        Command::Check(l) => {
            let c = ops::check(&l.logic)?;
            let text = format!("ok: {}", c.ty);
            Ok(Outcome::ok(text_or_json(l.json, text, &c)))
        }
        Command::Exec { table, logic, config, trace } => {
            let t = load_table(&table.table)?;
            let cfg = load_config(config.as_deref())?;
            let out = ops::execute(&t, &logic.logic, &cfg, *trace)?;
            Ok(Outcome::ok(text_or_json(logic.json, out.display(), &out)))
        }
        Command::Classify(l) => {
            let c = ops::classify_str(&l.logic)?;
            Ok(Outcome::ok(text_or_json(l.json, c.logic_type.to_string(), &c)))
        }
        Command::Realize { table, logic } => {
            let t = load_table(&table.table)?;
            let r = ops::realize(&t, &logic.logic)?;
            Ok(Outcome::ok(text_or_json(logic.json, r.sentence.clone(), &r)))
        }
        Command::Interpret(l) => {
            let i = ops::interpret_str(&l.logic)?;
            Ok(Outcome::ok(text_or_json(l.json, i.interpretation.clone(), &i)))
        }
        Command::Linearize(l) => {
            let tokens = ops::parse(&l.logic)?.linearize();
            Ok(Outcome::ok(text_or_json(l.json, tokens.join(" "), &tokens)))
        }
        Command::Validate { data, config, failures } => {
            let cfg = load_config(config.as_deref())?;
            let ds = load_data(data)?;
            let report = validate_dataset(&ds.examples, &cfg);
            if data.json {
                return Ok(Outcome::ok(json_line(&report)));
            }
            let mut text = report.render();
            for f in report.failures.iter().take(*failures) {
                text.push_str(&format!(
                    "\n{} [{}] {:?}: {}\n  {}",
                    f.id, f.logic_type, f.stage, f.diagnostic, f.logic_str
                ));
            }
            if report.failures.len() > *failures {
                text.push_str(&format!("\n... {} more failures", report.failures.len() - failures));
            }
            Ok(Outcome::ok(text))
        }
        Command::Stats { data, histogram } => {
            let ds = load_data(data)?;
            let stats = compute_stats(&ds.examples);
            if let Some(p) = histogram {
                fs::write(p, stats.histogram_csv()).map_err(|e| ApiError::io(format!("{}: {e}", p.display())))?;
            }
            Ok(Outcome::ok(text_or_json(data.json, stats.render(), &stats)))
        }
        Command::Splits { data } => {
            let ds = load_data(data)?;
            let r = check_splits(&ds.examples);
            let mut text: String = r.sizes.iter().map(|(s, n)| format!("{s} {n}\n")).collect();
            text.push_str(&format!("unassigned {}\nshared tables {}", r.unassigned, r.overlaps.len()));
            let status = if r.is_clean() { 0 } else { 1 };
            Ok(Outcome { stdout: text_or_json(data.json, text, &r), status })
        }
        Command::ExportInputs { data, out, format, cap, split } => {
            let split = match split {
                None => None,
                Some(s) => Some(Split::from_name(s).ok_or_else(|| ApiError::usage(format!("unknown split `{s}`")))?),
            };
            let ds = load_data(data)?;
            let mut buf = String::new();
            let mut n = 0;
            for e in ds.examples.iter().filter(|e| split.is_none() || e.split == split) {
                let line = match format {
                    ExportFormat::Text => export_model_input(e, *cap).to_line(),
                    ExportFormat::Json => serde_json::to_string(&export_model_input(e, *cap)).expect("serializable"),
                    ExportFormat::Canonical => serde_json::to_string(&CanonicalRecord::from(e)).expect("serializable"),
                };
                buf.push_str(&line);
                buf.push('\n');
                n += 1;
            }
            fs::write(out, buf).map_err(|e| ApiError::io(format!("{}: {e}", out.display())))?;
            Ok(Outcome::ok(format!("wrote {n} examples to {}", out.display())))
        }
        Command::Score { metric, cand, reference } => {
            let (c, r) = (read_lines(cand)?, read_lines(reference)?);
            let score = match metric {
                Metric::Bleu4 => bleu4(&c, &r),
                Metric::Rouge1 => rouge(&c, &r, RougeVariant::R1),
                Metric::Rouge2 => rouge(&c, &r, RougeVariant::R2),
                Metric::Rouge4 => rouge(&c, &r, RougeVariant::R4),
                Metric::RougeL => rouge(&c, &r, RougeVariant::L),
            }
            .map_err(ApiError::domain)?;
            Ok(Outcome::ok(format!("{score:.2}")))
        }
        Command::Derive { .. } | Command::Serve { .. } => {
            Err(ApiError::new(Kind::Internal, "Internal", "interactive commands run through `run`"))
        }
    }
}

fn describe(q: &Question) -> String {
    let hint = match q.kind {
        AnswerKind::Choice => format!("one of: {}", q.choices.join(", ")),
        AnswerKind::Column => "a column name".into(),
        AnswerKind::Columns => "column names separated by commas, or empty for none".into(),
        AnswerKind::Row => "a row number".into(),
        AnswerKind::Value => "a value".into(),
        AnswerKind::Bool => "yes or no".into(),
    };
    format!("[{}] {} ({hint})", q.id, q.prompt)
}

/// Reads a typed answer from one line of terminal input.
pub fn parse_answer(q: &Question, line: &str) -> Result<Answer, String> {
    let line = line.trim();
    Ok(match q.kind {
        AnswerKind::Choice => {
            let choice = match line.parse::<usize>() {
                Ok(i) if (1..=q.choices.len()).contains(&i) => q.choices[i - 1].clone(),
                _ => line.to_string(),
            };
            Answer::Choice(choice)
        }
        AnswerKind::Column => Answer::Column(line.to_string()),
        AnswerKind::Columns => Answer::Columns(
            line.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "none").map(str::to_string).collect(),
        ),
        AnswerKind::Row => Answer::Row(line.parse().map_err(|_| format!("`{line}` is not a row number"))?),
        AnswerKind::Value => {
            if line.is_empty() {
                return Err("a value is required".into());
            }
            Answer::Value(line.to_string())
        }
        AnswerKind::Bool => match line.to_lowercase().as_str() {
            "y" | "yes" | "true" => Answer::Bool(true),
            "n" | "no" | "false" => Answer::Bool(false),
            _ => return Err(format!("`{line}` is not yes or no")),
        },
    })
}

fn render_table(t: &Table) -> String {
    let mut out = format!("{}\n row | {}\n", t.caption, t.columns.join(" | "));
    for (i, row) in t.rows.iter().enumerate() {
        let cells: Vec<&str> = row.iter().map(|c| c.raw.as_str()).collect();
        out.push_str(&format!("{i:>4} | {}\n", cells.join(" | ")));
    }
    out
}

/// The terminal question-and-answer flow. Returns the exit status: 0 when
/// the derived program executes to true.
pub fn derive(
    table: Table,
    logic_type: LogicType,
    cfg: ExecConfig,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<u8, ApiError> {
    let io = |e: std::io::Error| ApiError::io(e.to_string());
    let mut session = Session::new("terminal", Arc::new(table), logic_type, cfg);
    write!(out, "{}", render_table(&session.table)).map_err(io)?;
    while let Some(q) = session.current() {
        writeln!(out, "{}", describe(&q)).map_err(io)?;
        write!(out, "> ").map_err(io)?;
        out.flush().map_err(io)?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io)? == 0 {
            return Err(ApiError::new(Kind::Domain, "IncompleteSession", format!("input ended before {}", q.id)));
        }
        let result = parse_answer(&q, &line).map_err(|m| ApiError::new(Kind::Domain, "WrongAnswerType", m));
        if let Err(e) = result.and_then(|a| session.answer(&q.id, a)) {
            writeln!(out, "  {e}").map_err(io)?;
        }
    }
    let view = session.view();
    if let Some(e) = view.build_error {
        return Err(e);
    }
    let p = view.preview.expect("complete sessions have a preview or a build error");
    writeln!(out, "program: {}\ninterpretation: {}\nexecutes to: {}", p.logic_str, p.interpretation, p.exec_result)
        .map_err(io)?;
    if let Some(e) = &p.exec_error {
        writeln!(out, "error: {e}").map_err(io)?;
    }
    Ok(if p.exec_result { 0 } else { 1 })
}

fn serve(bind: &str, data_dir: Option<PathBuf>, exec_config: Option<&Path>, ttl_minutes: u64) -> Result<u8, ApiError> {
    let cfg = ServiceConfig {
        data_dir,
        exec_config: load_config(exec_config)?,
        session_ttl: std::time::Duration::from_secs(ttl_minutes * 60),
    };
    let state = Arc::new(AppState::new(cfg)?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| ApiError::io(e.to_string()))?;
    rt.block_on(service::serve(bind, state))?;
    Ok(0)
}

/// Parses arguments, runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Derive { table, logic_type, config } => (|| {
            let t = load_table(&table.table)?;
            let lt: LogicType = logic_type.parse().map_err(|m| ApiError::new(Kind::Usage, "UnknownLogicType", m))?;
            let cfg = load_config(config.as_deref())?;
            let stdin = std::io::stdin();
            derive(t, lt, cfg, &mut stdin.lock(), &mut std::io::stdout())
        })(),
        Command::Serve { bind, data_dir, exec_config, session_ttl_minutes } => {
            serve(bind, data_dir.clone(), exec_config.as_deref(), *session_ttl_minutes)
        }
        cmd => run_command(cmd).map(|o| {
            println!("{}", o.stdout);
            o.status
        }),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
