//! Operations shared by the command line and the service, so both give
//! identical results for identical inputs.

use lftab_core::logic_types::question_set;
use lftab_core::semantics::{evaluate_typed, typecheck_expr, EvalLog, EvalNote, TraceStep, TypedAst};
use lftab_core::table::TableRecord;
use lftab_core::{
    classify, interpret, parse_logic_str, realize_template, Ast, ExecConfig, LogicType, NodeStats, SemType, Table,
    Value,
};
use serde::Serialize;
use serde_json::json;

use crate::error::{ApiError, Kind};

pub fn parse(logic_str: &str) -> Result<Ast, ApiError> {
    parse_logic_str(logic_str).map_err(ApiError::domain)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parsed {
    pub logic_str: String,
    pub ast: Ast,
    pub node_stats: NodeStats,
}

pub fn parse_report(logic_str: &str) -> Result<Parsed, ApiError> {
    let ast = parse(logic_str)?;
    Ok(Parsed { logic_str: ast.to_logic_str(), node_stats: ast.node_stats(), ast })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checked {
    pub logic_str: String,
    #[serde(rename = "type")]
    pub ty: String,
    /// Whether the program is a statement (evaluates to true or false).
    pub statement: bool,
}

pub fn check(logic_str: &str) -> Result<Checked, ApiError> {
    let ast = parse(logic_str)?;
    let ty = typecheck_expr(&ast.root).map_err(ApiError::domain)?.ty();
    Ok(Checked { logic_str: ast.to_logic_str(), ty: ty.to_string(), statement: ty == SemType::Bool })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Executed {
    /// `true`/`false`, a cell's text, `{"row": i}` or `{"rows": [..]}`.
    pub value: serde_json::Value,
    #[serde(rename = "type")]
    pub ty: &'static str,
    pub notes: Vec<EvalNote>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
}

impl Executed {
    /// The value as the command line prints it.
    pub fn display(&self) -> String {
        match &self.value {
            serde_json::Value::String(s) => s.clone(),
            other => match (other.get("row"), other.get("rows")) {
                (Some(r), _) => format!("row {r}"),
                (_, Some(rs)) => format!("rows {rs}"),
                _ => other.to_string(),
            },
        }
    }
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Bool(b) => json!(b),
        Value::Scalar(c) => json!(c.text),
        Value::Row(r) => json!({ "row": r.index }),
        Value::View(view) => json!({ "rows": view.row_indices }),
    }
}

pub fn execute(table: &Table, logic_str: &str, cfg: &ExecConfig, trace: bool) -> Result<Executed, ApiError> {
    let ast = parse(logic_str)?;
    let typed = TypedAst { root: typecheck_expr(&ast.root).map_err(ApiError::domain)? };
    let mut log = EvalLog::default();
    let value = evaluate_typed(&typed, table, cfg, &mut log).map_err(ApiError::domain)?;
    Ok(Executed {
        value: value_json(&value),
        ty: value.type_name(),
        notes: log.notes,
        trace: trace.then_some(log.trace),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classified {
    pub logic_type: LogicType,
}

pub fn classify_str(logic_str: &str) -> Result<Classified, ApiError> {
    let ast = parse(logic_str)?;
    Ok(Classified { logic_type: classify(&ast).map_err(ApiError::domain)? })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realized {
    pub logic_type: LogicType,
    pub sentence: String,
}

pub fn realize(table: &Table, logic_str: &str) -> Result<Realized, ApiError> {
    let ast = parse(logic_str)?;
    let logic_type = classify(&ast).map_err(ApiError::domain)?;
    Ok(Realized { logic_type, sentence: realize_template(&ast, table).map_err(ApiError::domain)? })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interpreted {
    pub interpretation: String,
}

pub fn interpret_str(logic_str: &str) -> Result<Interpreted, ApiError> {
    Ok(Interpreted { interpretation: interpret(&parse(logic_str)?) })
}

#[derive(Debug, Clone, Serialize)]
pub struct LogicTypeInfo {
    pub name: &'static str,
    pub definition: &'static str,
    pub prototype: &'static str,
    pub questions: Vec<lftab_core::logic_types::Question>,
}

pub fn logic_types() -> Vec<LogicTypeInfo> {
    LogicType::ALL
        .into_iter()
        .map(|t| LogicTypeInfo {
            name: t.name(),
            definition: t.definition(),
            prototype: t.prototype(),
            questions: question_set(t),
        })
        .collect()
}

pub fn inline_table(rec: TableRecord) -> Result<Table, ApiError> {
    Table::from_record(rec).map_err(ApiError::domain)
}

pub fn parse_config(text: &str) -> Result<ExecConfig, ApiError> {
    text.parse().map_err(|e: lftab_core::error::ConfigError| ApiError::new(Kind::Usage, "InvalidConfig", e.to_string()))
}
