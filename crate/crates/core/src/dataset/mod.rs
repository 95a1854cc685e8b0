//! Dataset ingestion, whole-corpus validation, statistics, split checks and
//! model-input export.

mod input;
mod stats;
mod validate;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::ast::{parse_logic_str, Ast};
use crate::error::{ConfigError, DatasetError};
use crate::logic_types::LogicType;
use crate::table::Table;

pub use input::{export_model_input, ModelInput, DEFAULT_CONTENT_CAP};
pub use stats::{check_splits, compute_stats, DatasetStats, SplitOverlap, SplitReport, TypeStats};
pub use validate::{classify_agreement, validate_dataset, Agreement, Failure, Stage, Tally, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    /// Recognizes `train`, `dev`/`valid`/`validation` and `test`, also as
    /// the stem of a file name.
    pub fn from_name(name: &str) -> Option<Split> {
        let stem = name.rsplit(['/', '\\']).next().unwrap_or(name);
        let stem = stem.split('.').next().unwrap_or(stem).to_lowercase();
        match stem.as_str() {
            "train" => Some(Split::Train),
            "dev" | "valid" | "validation" => Some(Split::Dev),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

/// One statement with its program and table.
#[derive(Debug, Clone)]
pub struct Example {
    pub id: String,
    pub table: Arc<Table>,
    pub logic_type: LogicType,
    pub logic_str: String,
    /// `None` when `logic_str` does not parse; the failure is in the load issues.
    pub ast: Option<Ast>,
    pub sentence: String,
    pub interpretation: Option<String>,
    pub split: Option<Split>,
}

/// Source field names for each canonical field, tried in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMap {
    pub id: Vec<String>,
    pub table_id: Vec<String>,
    pub caption: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    pub logic_type: Vec<String>,
    pub logic_str: Vec<String>,
    pub sentence: Vec<String>,
    pub interpretation: Vec<String>,
    pub split: Vec<String>,
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Canonical names first, then the names used by the released files.
impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            id: names(&["id", "nid"]),
            table_id: names(&["table_id", "url", "wiki"]),
            caption: names(&["caption", "topic"]),
            columns: names(&["columns", "table_header"]),
            rows: names(&["rows", "table_cont"]),
            logic_type: names(&["logic_type", "action"]),
            logic_str: names(&["logic_str"]),
            sentence: names(&["sentence", "sent"]),
            interpretation: names(&["interpretation", "interpret"]),
            split: names(&["split"]),
        }
    }
}

/// `field = name1, name2` lines override the defaults; `#` comments.
impl FromStr for FieldMap {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut map = FieldMap::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let invalid = |message: String| ConfigError::Invalid { line: i + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| invalid(format!("expected field = names, got `{line}`")))?;
            let list: Vec<String> = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            let slot = match key.trim() {
                "id" => &mut map.id,
                "table_id" => &mut map.table_id,
                "caption" => &mut map.caption,
                "columns" => &mut map.columns,
                "rows" => &mut map.rows,
                "logic_type" => &mut map.logic_type,
                "logic_str" => &mut map.logic_str,
                "sentence" => &mut map.sentence,
                "interpretation" => &mut map.interpretation,
                "split" => &mut map.split,
                other => return Err(invalid(format!("unknown field `{other}`"))),
            };
            *slot = list;
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LoadIssueKind {
    MissingField,
    InvalidField,
    BadTable,
    ParseFailure,
}

/// A record-level problem found while loading; never fatal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadIssue {
    pub record: String,
    pub kind: LoadIssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub examples: Vec<Example>,
    /// Distinct tables, in first-seen order.
    pub tables: Vec<Arc<Table>>,
    pub issues: Vec<LoadIssue>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &Example> {
        self.examples.iter().filter(move |e| e.split == Some(split))
    }
}

fn lookup<'a>(rec: &'a Json, keys: &[String]) -> Option<&'a Json> {
    keys.iter().find_map(|k| rec.get(k)).filter(|v| !v.is_null())
}

fn json_text(v: &Json) -> String {
    match v {
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn string_list(v: &Json) -> Option<Vec<String>> {
    v.as_array().map(|a| a.iter().map(json_text).collect())
}

fn grid(v: &Json) -> Option<Vec<Vec<String>>> {
    v.as_array()?.iter().map(string_list).collect()
}

struct Loader<'m> {
    map: &'m FieldMap,
    tables: HashMap<String, Arc<Table>>,
    out: Dataset,
}

impl Loader<'_> {
    fn issue(&mut self, record: &str, kind: LoadIssueKind, message: impl Into<String>) {
        self.out.issues.push(LoadIssue { record: record.to_string(), kind, message: message.into() });
    }

    fn record(&mut self, rec: &Json, fallback_id: String, file_split: Option<Split>) {
        let map = self.map;
        let id = lookup(rec, &map.id).map(json_text).unwrap_or(fallback_id);
        let mut missing = Vec::new();
        let mut field = |keys: &Vec<String>, name: &str| {
            let v = lookup(rec, keys);
            if v.is_none() {
                missing.push(name.to_string());
            }
            v
        };
        let columns = field(&map.columns, "columns");
        let rows = field(&map.rows, "rows");
        let logic_type = field(&map.logic_type, "logic_type");
        let logic_str = field(&map.logic_str, "logic_str");
        let sentence = field(&map.sentence, "sentence");
        if !missing.is_empty() {
            self.issue(&id, LoadIssueKind::MissingField, format!("missing {}", missing.join(", ")));
            return;
        }
        let (columns, rows) = (columns.unwrap(), rows.unwrap());
        let (Some(columns), Some(rows)) = (string_list(columns), grid(rows)) else {
            self.issue(&id, LoadIssueKind::InvalidField, "columns must be a list and rows a list of lists");
            return;
        };
        let lt_text = json_text(logic_type.unwrap());
        let Ok(logic_type) = lt_text.parse::<LogicType>() else {
            self.issue(&id, LoadIssueKind::InvalidField, format!("unknown logic type `{lt_text}`"));
            return;
        };
        let caption = lookup(rec, &map.caption).map(json_text).unwrap_or_default();
        let table_id = lookup(rec, &map.table_id).map(json_text).unwrap_or_default();
        let table = match Table::new(table_id, caption, columns, rows) {
            Ok(t) => t,
            Err(e) => {
                self.issue(&id, LoadIssueKind::BadTable, e.to_string());
                return;
            }
        };
        let hash = table.content_hash();
        let table = match self.tables.get(&hash) {
            Some(t) => Arc::clone(t),
            None => {
                let t = Arc::new(table);
                self.tables.insert(hash, Arc::clone(&t));
                self.out.tables.push(Arc::clone(&t));
                t
            }
        };
        let logic_str = json_text(logic_str.unwrap());
        let ast = match parse_logic_str(&logic_str) {
            Ok(a) => Some(a),
            Err(e) => {
                self.issue(&id, LoadIssueKind::ParseFailure, e.to_string());
                None
            }
        };
        let split = lookup(rec, &map.split).and_then(|v| Split::from_name(&json_text(v))).or(file_split);
        self.out.examples.push(Example {
            id,
            table,
            logic_type,
            logic_str,
            ast,
            sentence: json_text(sentence.unwrap()),
            interpretation: lookup(rec, &map.interpretation).map(json_text),
            split,
        });
    }

    fn file(&mut self, path: &Path) -> Result<(), DatasetError> {
        let text = fs::read_to_string(path)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let file_split = Split::from_name(&name);
        let format_err = |message: String| DatasetError::Format { path: path.display().to_string(), message };
        if text.trim_start().starts_with('[') {
            let records: Vec<Json> = serde_json::from_str(&text).map_err(|e| format_err(e.to_string()))?;
            for (i, rec) in records.iter().enumerate() {
                self.record(rec, format!("{name}:{i}"), file_split);
            }
        } else {
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: Json = serde_json::from_str(line).map_err(|e| format_err(format!("line {}: {e}", i + 1)))?;
                self.record(&rec, format!("{name}:{}", i + 1), file_split);
            }
        }
        Ok(())
    }
}

/// Data files under `path`: the file itself, or every `.json`/`.jsonl`
/// file in the directory, sorted by name.
fn data_files(path: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json" || x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a file or directory of JSON-array or JSON-lines records. Records
/// that cannot become examples are reported in `issues`, as are programs
/// that do not parse (those still become examples, without an AST).
pub fn load_dataset(path: &Path, map: &FieldMap) -> Result<Dataset, DatasetError> {
    let mut loader = Loader { map, tables: HashMap::new(), out: Dataset::default() };
    for file in data_files(path)? {
        loader.file(&file)?;
    }
    Ok(loader.out)
}

/// Canonical one-record-per-line form of an example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub table_id: String,
    pub caption: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub logic_type: LogicType,
    pub logic_str: String,
    pub sentence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl From<&Example> for CanonicalRecord {
    fn from(e: &Example) -> Self {
        let rec = e.table.to_record();
        CanonicalRecord {
            table_id: rec.table_id,
            caption: rec.caption,
            columns: rec.columns,
            rows: rec.rows,
            logic_type: e.logic_type,
            logic_str: e.logic_str.clone(),
            sentence: e.sentence.clone(),
            split: e.split,
        }
    }
}
