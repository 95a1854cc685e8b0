//! Semi-structured tables and cell normalization.
//!
//! Cells arrive as tokenized strings. Each one is classified once, at load
//! time, into a [`CellValue`] carrying its numeric, date and text facets so
//! the evaluator never re-parses raw content.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::TableError;

/// Classification of a cell's content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Number,
    Date,
    Text,
}

/// A calendar date whose month and day may be unknown.
///
/// Ordering compares the shared prefix of known fields only, so `1975`
/// and `january 1975` are neither before nor after each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Date {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

impl Date {
    pub fn year(year: i32) -> Self {
        Date { year, month: None, day: None }
    }

    pub fn ymd(year: i32, month: u32, day: u32) -> Self {
        Date { year, month: Some(month), day: Some(day) }
    }

    pub fn is_year_only(&self) -> bool {
        self.month.is_none()
    }

    pub fn chrono_cmp(&self, other: &Date) -> Ordering {
        self.year.cmp(&other.year).then_with(|| match (self.month, other.month) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| match (self.day, other.day) {
                (Some(x), Some(y)) => x.cmp(&y),
                _ => Ordering::Equal,
            }),
            _ => Ordering::Equal,
        })
    }

    /// Day number with missing fields defaulting to the first month/day.
    pub(crate) fn day_number(&self) -> Option<i64> {
        use chrono::Datelike;
        chrono::NaiveDate::from_ymd_opt(self.year, self.month.unwrap_or(1), self.day.unwrap_or(1))
            .map(|d| i64::from(d.num_days_from_ce()))
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.month, self.day) {
            (Some(m), Some(d)) => write!(f, "{:04}-{:02}-{:02}", self.year, m, d),
            (Some(m), None) => write!(f, "{:04}-{:02}", self.year, m),
            _ => write!(f, "{:04}", self.year),
        }
    }
}

/// The parsed facets of a cell (or of a literal in a logical form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellValue {
    pub kind: CellKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub number: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date: Option<Date>,
    /// Lowercased, trimmed, whitespace-collapsed text.
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_number: Option<f64>,
}

impl CellValue {
    /// A number produced by computation rather than read from a cell.
    pub fn from_number(n: f64) -> Self {
        CellValue { kind: CellKind::Number, number: Some(n), date: None, text: format_number(n), first_number: Some(n) }
    }

    pub fn from_date(d: Date) -> Self {
        CellValue {
            kind: CellKind::Date,
            number: None,
            date: Some(d),
            text: d.to_string(),
            first_number: Some(f64::from(d.year)),
        }
    }

    /// The value used for numeric arithmetic: the number itself, or the
    /// first number embedded in mixed text.
    pub fn numeric(&self) -> Option<f64> {
        match self.kind {
            CellKind::Number => self.number,
            CellKind::Text => self.first_number,
            CellKind::Date => None,
        }
    }

    /// Number of digits after the decimal point in the leading number of the
    /// text facet; 0 when there is none.
    pub fn decimal_places(&self) -> usize {
        let text = strip_digit_commas(&self.text);
        let Some(m) = NUMBER_RUN.find(&text) else {
            return 0;
        };
        m.as_str().split_once('.').map_or(0, |(_, frac)| frac.len())
    }

    /// Whether equality predicates may be tested against this value.
    pub fn is_blank(&self) -> bool {
        fuzzy_tokens(&self.text).is_empty()
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Formats a computed number the way dataset cells write them: integers
/// without a fractional part, other values with trailing zeros trimmed.
pub fn format_number(n: f64) -> String {
    let n = if n == 0.0 { 0.0 } else { n };
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{n:.0}")
    } else {
        let s = format!("{n:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub raw: String,
    pub value: CellValue,
}

impl Cell {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let value = parse_cell(&raw);
        Cell { raw, value }
    }
}

/// A captioned, rectangular grid of parsed cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub table_id: String,
    pub caption: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// The structured-record form of a table, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    #[serde(default)]
    pub table_id: String,
    #[serde(default)]
    pub caption: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(
        table_id: impl Into<String>,
        caption: impl Into<String>,
        columns: Vec<String>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self, TableError> {
        if rows.is_empty() {
            return Err(TableError::EmptyTable);
        }
        if columns.is_empty() {
            return Err(TableError::NoColumns);
        }
        if let Some(idx) = columns.iter().position(|c| c.trim().is_empty()) {
            return Err(TableError::BlankColumnName { index: idx });
        }
        let col_count = columns.len();
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != col_count) {
            return Err(TableError::RaggedRows { row, expected: col_count, found: r.len() });
        }
        let rows = rows.into_iter().map(|r| r.into_iter().map(Cell::new).collect()).collect();
        Ok(Table {
            table_id: table_id.into(),
            caption: caption.into(),
            columns: columns.into_iter().map(|c| c.trim().to_string()).collect(),
            rows,
        })
    }

    pub fn from_record(rec: TableRecord) -> Result<Self, TableError> {
        Table::new(rec.table_id, rec.caption, rec.columns, rec.rows)
    }

    pub fn to_record(&self) -> TableRecord {
        TableRecord {
            table_id: self.table_id.clone(),
            caption: self.caption.clone(),
            columns: self.columns.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(|c| c.raw.clone()).collect()).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let rec: TableRecord = serde_json::from_str(text).map_err(|e| TableError::Malformed(e.to_string()))?;
        Table::from_record(rec)
    }

    /// Delimited text whose first record is the header row.
    pub fn from_delimited(
        table_id: impl Into<String>,
        caption: impl Into<String>,
        text: &str,
        delimiter: u8,
    ) -> Result<Self, TableError> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let columns: Vec<String> = match records.next() {
            Some(h) => h.map_err(|e| TableError::Malformed(e.to_string()))?.iter().map(str::to_string).collect(),
            None => return Err(TableError::EmptyTable),
        };
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| TableError::Malformed(e.to_string()))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Table::new(table_id, caption, columns, rows)
    }

    /// Loads a table from a `.json` structured record, or from delimited text
    /// (`.csv`, `.tsv`, anything else pipe-delimited) with an optional
    /// `<stem>.caption` sidecar file.
    pub fn load(path: &Path) -> Result<Self, TableError> {
        let text = std::fs::read_to_string(path).map_err(|e| TableError::Io(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let mut t = Table::from_json(&text)?;
                if t.table_id.is_empty() {
                    t.table_id = stem;
                }
                Ok(t)
            }
            ext => {
                let delimiter = match ext {
                    Some("csv") => b',',
                    Some("tsv") => b'\t',
                    _ => b'|',
                };
                let caption = std::fs::read_to_string(path.with_extension("caption"))
                    .map(|c| c.trim().to_string())
                    .unwrap_or_default();
                Table::from_delimited(stem, caption, &text, delimiter)
            }
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.columns.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    /// Resolves a column mention: exact (normalized) match first, then the
    /// first column that fuzzily matches.
    pub fn find_column(&self, name: &str) -> Option<usize> {
        let wanted = fuzzy_tokens(name);
        if wanted.is_empty() {
            return None;
        }
        let cols: Vec<Vec<String>> = self.columns.iter().map(|c| fuzzy_tokens(c)).collect();
        cols.iter().position(|c| *c == wanted).or_else(|| {
            cols.iter().position(|c| !c.is_empty() && (contains_run(c, &wanted) || contains_run(&wanted, c)))
        })
    }

    /// Hash of caption, header and raw cells; identifies a table across
    /// examples independently of its id.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.caption.as_bytes());
        for c in &self.columns {
            h.update([0x1f]);
            h.update(c.as_bytes());
        }
        for row in &self.rows {
            h.update([0x1e]);
            for c in row {
                h.update([0x1f]);
                h.update(c.raw.as_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// An ordered subset of a table's rows, ascending in table order.
#[derive(Debug, Clone, PartialEq)]
pub struct View<'t> {
    pub table: &'t Table,
    pub row_indices: Vec<usize>,
}

impl<'t> View<'t> {
    pub fn len(&self) -> usize {
        self.row_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_indices.is_empty()
    }

    /// Keeps rows satisfying `keep`, preserving order.
    pub fn retain_rows(&self, mut keep: impl FnMut(usize) -> bool) -> View<'t> {
        View { table: self.table, row_indices: self.row_indices.iter().copied().filter(|&r| keep(r)).collect() }
    }
}

/// The whole-table view.
pub fn all_rows(table: &Table) -> View<'_> {
    View { table, row_indices: (0..table.row_count()).collect() }
}

const MONTHS: [(&str, u32); 24] = [
    ("january", 1),
    ("february", 2),
    ("march", 3),
    ("april", 4),
    ("may", 5),
    ("june", 6),
    ("july", 7),
    ("august", 8),
    ("september", 9),
    ("october", 10),
    ("november", 11),
    ("december", 12),
    ("jan", 1),
    ("feb", 2),
    ("mar", 3),
    ("apr", 4),
    ("jun", 6),
    ("jul", 7),
    ("aug", 8),
    ("sep", 9),
    ("sept", 9),
    ("oct", 10),
    ("nov", 11),
    ("dec", 12),
];

const MONTH_ALT: &str = "january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec";

static MDY_NAMED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^({MONTH_ALT})\.? (\d{{1,2}})(?:st|nd|rd|th)? ?,? (\d{{4}})$")).unwrap());
static DMY_NAMED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^(\d{{1,2}})(?:st|nd|rd|th)? ({MONTH_ALT})\.? ?,? (\d{{4}})$")).unwrap());
static MY_NAMED: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"^({MONTH_ALT})\.? ?,? (\d{{4}})$")).unwrap());
static YMD_DASH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{4}) ?- ?(\d{1,2}) ?- ?(\d{1,2})$").unwrap());
static MDY_SLASH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{1,2}) ?/ ?(\d{1,2}) ?/ ?(\d{4})$").unwrap());
static PLAIN_NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)$").unwrap());
static NUMBER_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?").unwrap());
static DIGIT_COMMA: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\d),(\d)").unwrap());

fn month_number(name: &str) -> u32 {
    MONTHS.iter().find(|(m, _)| *m == name).map(|&(_, n)| n).unwrap_or(0)
}

fn checked_date(year: &str, month: u32, day: Option<&str>) -> Option<Date> {
    let year: i32 = year.parse().ok()?;
    match day {
        Some(d) => {
            let day: u32 = d.parse().ok()?;
            chrono::NaiveDate::from_ymd_opt(year, month, day)?;
            Some(Date::ymd(year, month, day))
        }
        None => (1..=12).contains(&month).then_some(Date { year, month: Some(month), day: None }),
    }
}

fn parse_date(text: &str) -> Option<Date> {
    if let Some(c) = MDY_NAMED.captures(text) {
        return checked_date(&c[3], month_number(&c[1]), Some(&c[2]));
    }
    if let Some(c) = DMY_NAMED.captures(text) {
        return checked_date(&c[3], month_number(&c[2]), Some(&c[1]));
    }
    if let Some(c) = MY_NAMED.captures(text) {
        return checked_date(&c[2], month_number(&c[1]), None);
    }
    if let Some(c) = YMD_DASH.captures(text) {
        return checked_date(&c[1], c[2].parse().ok()?, Some(&c[3]));
    }
    if let Some(c) = MDY_SLASH.captures(text) {
        return checked_date(&c[3], c[1].parse().ok()?, Some(&c[2]));
    }
    None
}

fn strip_digit_commas(s: &str) -> String {
    // Applied twice so overlapping groups such as "1,2,3" are all removed.
    let once = DIGIT_COMMA.replace_all(s, "$1$2");
    DIGIT_COMMA.replace_all(&once, "$1$2").into_owned()
}

fn parse_number(text: &str) -> Option<f64> {
    let mut s = text.trim();
    for sym in ["$", "€", "£", "¥"] {
        if let Some(rest) = s.strip_prefix(sym) {
            s = rest.trim_start();
            break;
        }
    }
    if let Some(rest) = s.strip_suffix('%') {
        s = rest.trim_end();
    }
    let s = strip_digit_commas(s);
    if PLAIN_NUMBER.is_match(&s) {
        s.parse().ok()
    } else {
        None
    }
}

/// First run of digits (with optional fraction and sign) after separator
/// stripping. A leading `-` or `+` counts as a sign only when it starts the
/// string or follows whitespace or an opening bracket.
fn first_number(text: &str) -> Option<f64> {
    let s = strip_digit_commas(text);
    let m = NUMBER_RUN.find(&s)?;
    let value: f64 = m.as_str().parse().ok()?;
    let before = &s[..m.start()];
    let mut rev = before.chars().rev();
    let sign = match rev.next() {
        Some(c @ ('-' | '+')) if rev.next().is_none_or(|p| p.is_whitespace() || p == '(') => c,
        _ => '+',
    };
    Some(if sign == '-' { -value } else { value })
}

fn normalize_text(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Classifies raw cell text. Dates take precedence over numbers, numbers
/// over text; unparseable content degrades to text.
pub fn parse_cell(raw: &str) -> CellValue {
    let text = normalize_text(raw);
    let first_number = first_number(&text);
    if let Some(date) = parse_date(&text) {
        return CellValue { kind: CellKind::Date, number: None, date: Some(date), text, first_number };
    }
    if let Some(n) = parse_number(&text) {
        return CellValue { kind: CellKind::Number, number: Some(n), date: None, text, first_number: Some(n) };
    }
    CellValue { kind: CellKind::Text, number: None, date: None, text, first_number }
}

/// Tokens used for fuzzy string comparison: lowercase, punctuation
/// stripped, digit separators removed, decimal points kept.
pub fn fuzzy_tokens(s: &str) -> Vec<String> {
    let s = strip_digit_commas(&s.to_lowercase());
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || (c == '.'
                && i > 0
                && chars[i - 1].is_ascii_digit()
                && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit()));
        out.push(if keep { c } else { ' ' });
    }
    out.split_whitespace().map(str::to_string).collect()
}

/// Whether `needle` occurs as a contiguous run inside `hay`.
fn contains_run(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Result of comparing two cell values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComparisonOutcome {
    Less,
    Equal,
    Greater,
    FuzzyEqual,
    Incomparable,
}

impl ComparisonOutcome {
    pub fn is_equalish(self) -> bool {
        matches!(self, ComparisonOutcome::Equal | ComparisonOutcome::FuzzyEqual)
    }

    pub fn reversed(self) -> Self {
        match self {
            ComparisonOutcome::Less => ComparisonOutcome::Greater,
            ComparisonOutcome::Greater => ComparisonOutcome::Less,
            other => other,
        }
    }
}

impl From<Ordering> for ComparisonOutcome {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => ComparisonOutcome::Less,
            Ordering::Equal => ComparisonOutcome::Equal,
            Ordering::Greater => ComparisonOutcome::Greater,
        }
    }
}

fn as_year(n: f64) -> Option<Date> {
    (n.fract() == 0.0 && (1000.0..3000.0).contains(&n)).then(|| Date::year(n as i32))
}

fn numeric_outcome(a: f64, b: f64) -> ComparisonOutcome {
    a.partial_cmp(&b).map_or(ComparisonOutcome::Incomparable, Into::into)
}

/// Compares two values: numbers numerically, dates chronologically (a
/// four-digit integer counts as a year against a date), everything else by
/// normalized token sequences. Mixed text falls back to its embedded
/// number for ordering. Text never orders lexicographically.
pub fn compare_cells(a: &CellValue, b: &CellValue) -> ComparisonOutcome {
    use CellKind::*;
    match (a.kind, b.kind) {
        (Number, Number) => return numeric_outcome(a.number.unwrap_or(f64::NAN), b.number.unwrap_or(f64::NAN)),
        (Date, Date) => {
            if let (Some(x), Some(y)) = (a.date, b.date) {
                return x.chrono_cmp(&y).into();
            }
        }
        (Date, Number) => {
            if let (Some(x), Some(y)) = (a.date, b.number.and_then(as_year)) {
                return x.chrono_cmp(&y).into();
            }
        }
        (Number, Date) => {
            if let (Some(x), Some(y)) = (a.number.and_then(as_year), b.date) {
                return x.chrono_cmp(&y).into();
            }
        }
        _ => {}
    }
    let ta = fuzzy_tokens(&a.text);
    let tb = fuzzy_tokens(&b.text);
    if ta.is_empty() || tb.is_empty() {
        return if ta.is_empty() && tb.is_empty() { ComparisonOutcome::Equal } else { ComparisonOutcome::Incomparable };
    }
    if ta == tb {
        return ComparisonOutcome::Equal;
    }
    if contains_run(&ta, &tb) || contains_run(&tb, &ta) {
        return ComparisonOutcome::FuzzyEqual;
    }
    let mixed = a.kind == Text || b.kind == Text;
    match (a.numeric(), b.numeric()) {
        (Some(x), Some(y)) if mixed && x != y => numeric_outcome(x, y),
        _ => ComparisonOutcome::Incomparable,
    }
}
