//! Bottom-up evaluation of typed programs against a table.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use super::check::{typecheck, TypedAst, TypedNode, ALL_ROWS};
use super::config::{ExecConfig, HopViewPolicy};
use super::functions::{AggKind, CompareKind, Extreme, Function, Predicate, SemType};
use crate::ast::Ast;
use crate::error::EvalError;
use crate::table::{all_rows, compare_cells, parse_cell, CellKind, CellValue, ComparisonOutcome, Date, Table, View};

/// Result of evaluating a node.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<'t> {
    Bool(bool),
    /// Number, date or text.
    Scalar(CellValue),
    Row(RowRef<'t>),
    View(View<'t>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowRef<'t> {
    pub table: &'t Table,
    pub index: usize,
}

impl Value<'_> {
    /// Whether this runtime value inhabits the static type.
    pub fn conforms_to(&self, ty: SemType) -> bool {
        match (self, ty) {
            (Value::Bool(_), SemType::Bool) => true,
            (Value::Scalar(v), SemType::Number) => matches!(v.kind, CellKind::Number | CellKind::Date),
            (Value::Scalar(_), SemType::Obj) => true,
            (Value::Row(_), SemType::Row) => true,
            (Value::View(_), SemType::View) => true,
            _ => false,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Scalar(_) => "object",
            Value::Row(_) => "row",
            Value::View(_) => "view",
        }
    }
}

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Scalar(v) => f.write_str(&v.text),
            Value::Row(r) => write!(f, "row {}", r.index),
            Value::View(v) => write!(f, "view {:?}", v.row_indices),
        }
    }
}

/// Something the evaluator wants recorded without failing: skipped cells,
/// vacuous quantifiers, policy decisions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalNote {
    pub func: String,
    pub message: String,
}

/// One evaluated function node, post-order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub func: String,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EvalLog {
    pub notes: Vec<EvalNote>,
    pub trace: Vec<TraceStep>,
}

impl EvalLog {
    fn note(&mut self, func: impl Into<String>, message: impl Into<String>) {
        self.notes.push(EvalNote { func: func.into(), message: message.into() });
    }
}

/// Type checks and evaluates a program.
pub fn evaluate<'t>(ast: &Ast, table: &'t Table, cfg: &ExecConfig) -> Result<Value<'t>, EvalError> {
    let typed = typecheck(ast)?;
    evaluate_typed(&typed, table, cfg, &mut EvalLog::default())
}

/// Evaluates an already checked program, recording notes and a trace.
pub fn evaluate_typed<'t>(
    typed: &TypedAst,
    table: &'t Table,
    cfg: &ExecConfig,
    log: &mut EvalLog,
) -> Result<Value<'t>, EvalError> {
    let mut ev = Evaluator { table, cfg, log };
    match ev.eval(&typed.root)? {
        Arg::Value(v) => Ok(v),
        _ => unreachable!("root of a typed program is a call"),
    }
}

enum Arg<'t> {
    Value(Value<'t>),
    Column(usize),
    Ordinal(f64),
}

struct Evaluator<'t, 'a> {
    table: &'t Table,
    cfg: &'a ExecConfig,
    log: &'a mut EvalLog,
}

impl<'t> Evaluator<'t, '_> {
    fn eval(&mut self, node: &TypedNode) -> Result<Arg<'t>, EvalError> {
        match node {
            TypedNode::Leaf { text, ty } => self.leaf(text, *ty),
            TypedNode::Call { func, name, args, .. } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                let v = self.apply(*func, vals)?;
                self.log.trace.push(TraceStep { func: name.clone(), value: v.to_string() });
                Ok(Arg::Value(v))
            }
        }
    }

    fn leaf(&mut self, text: &str, ty: SemType) -> Result<Arg<'t>, EvalError> {
        Ok(match ty {
            SemType::View => {
                debug_assert_eq!(text, ALL_ROWS);
                Arg::Value(Value::View(all_rows(self.table)))
            }
            SemType::HeaderStr => {
                Arg::Column(self.table.find_column(text).ok_or_else(|| EvalError::ColumnNotFound(text.to_string()))?)
            }
            SemType::Number => Arg::Ordinal(parse_cell(text).first_number.unwrap_or(f64::NAN)),
            _ => Arg::Value(Value::Scalar(parse_cell(text))),
        })
    }

    fn apply(&mut self, func: Function, args: Vec<Arg<'t>>) -> Result<Value<'t>, EvalError> {
        let mut it = args.into_iter();
        let mut next = || it.next().expect("arity checked");
        let cfg = self.cfg;
        Ok(match func {
            Function::Count => Value::Scalar(CellValue::from_number(eval_count(&view(next())) as f64)),
            Function::Only => Value::Bool(eval_only(&view(next()))),
            Function::Hop => {
                let target = match next() {
                    Arg::Value(Value::Row(r)) => RowOrView::Row(r.index),
                    Arg::Value(Value::View(v)) => RowOrView::View(v),
                    _ => unreachable!("checked"),
                };
                let col = column(next());
                Value::Scalar(eval_hop(self.table, target, col, cfg.hop_view_policy, self.log)?)
            }
            Function::And => Value::Bool(boolean(next()) & boolean(next())),
            Function::Aggregate(kind) => {
                let v = view(next());
                Value::Scalar(eval_aggregate(kind, &v, column(next()), self.log)?)
            }
            Function::NthValue(e) => {
                let v = view(next());
                let c = column(next());
                Value::Scalar(eval_nth_value(e, &v, c, ordinal(next()), self.log)?)
            }
            Function::ArgExtreme(e) => {
                let v = view(next());
                let index = eval_arg_extreme(e, &v, column(next()), self.log)?;
                Value::Row(RowRef { table: self.table, index })
            }
            Function::NthArgExtreme(e) => {
                let v = view(next());
                let c = column(next());
                let index = eval_nth_arg_extreme(e, &v, c, ordinal(next()), self.log)?;
                Value::Row(RowRef { table: self.table, index })
            }
            Function::Compare(kind) => {
                let a = scalar(next());
                Value::Bool(eval_compare(kind, &a, &scalar(next()), cfg)?)
            }
            Function::Diff => {
                let a = scalar(next());
                Value::Scalar(eval_diff(&a, &scalar(next()))?)
            }
            Function::Filter(p) => {
                let v = view(next());
                let c = column(next());
                Value::View(eval_filter(Some(p), &v, c, Some(&scalar(next())), self.log))
            }
            Function::FilterAll => {
                let v = view(next());
                let _ = column(next());
                Value::View(eval_filter(None, &v, 0, None, self.log))
            }
            Function::All(p) => {
                let v = view(next());
                let c = column(next());
                Value::Bool(eval_all_quantifier(p, &v, c, &scalar(next()), self.log))
            }
            Function::Most(p) => {
                let v = view(next());
                let c = column(next());
                Value::Bool(eval_most_quantifier(p, &v, c, &scalar(next()), cfg.most_threshold, self.log))
            }
        })
    }
}

fn view(a: Arg<'_>) -> View<'_> {
    match a {
        Arg::Value(Value::View(v)) => v,
        _ => unreachable!("checked: view"),
    }
}

fn column(a: Arg<'_>) -> usize {
    match a {
        Arg::Column(c) => c,
        _ => unreachable!("checked: header"),
    }
}

fn ordinal(a: Arg<'_>) -> f64 {
    match a {
        Arg::Ordinal(n) => n,
        Arg::Value(Value::Scalar(v)) => v.numeric().unwrap_or(f64::NAN),
        _ => unreachable!("checked: number"),
    }
}

fn boolean(a: Arg<'_>) -> bool {
    match a {
        Arg::Value(Value::Bool(b)) => b,
        _ => unreachable!("checked: bool"),
    }
}

fn scalar(a: Arg<'_>) -> CellValue {
    match a {
        Arg::Value(Value::Scalar(v)) => v,
        _ => unreachable!("checked: object"),
    }
}

pub enum RowOrView<'t> {
    Row(usize),
    View(View<'t>),
}

pub fn eval_count(view: &View<'_>) -> usize {
    view.len()
}

pub fn eval_only(view: &View<'_>) -> bool {
    view.len() == 1
}

pub fn eval_hop(
    table: &Table,
    target: RowOrView<'_>,
    col: usize,
    policy: HopViewPolicy,
    log: &mut EvalLog,
) -> Result<CellValue, EvalError> {
    let row = match target {
        RowOrView::Row(r) => r,
        RowOrView::View(v) => match (v.row_indices.as_slice(), policy) {
            ([], _) => return Err(EvalError::EmptyViewError("hop".into())),
            ([r], _) => *r,
            (rows, HopViewPolicy::FirstRow) => {
                log.note("hop", format!("view has {} rows; using the first", rows.len()));
                rows[0]
            }
            (rows, HopViewPolicy::RequireSingleton) => {
                return Err(EvalError::NonSingletonView { func: "hop".into(), rows: rows.len() })
            }
        },
    };
    Ok(table.cell(row, col).value.clone())
}

/// Ordering key of a cell within a column.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Key {
    Num(f64),
    Date(Date),
}

impl Key {
    fn total_cmp(&self, other: &Key) -> Ordering {
        match (self, other) {
            (Key::Num(a), Key::Num(b)) => a.total_cmp(b),
            (Key::Date(a), Key::Date(b)) => (a.year, a.month.unwrap_or(0), a.day.unwrap_or(0)).cmp(&(
                b.year,
                b.month.unwrap_or(0),
                b.day.unwrap_or(0),
            )),
            (Key::Num(_), Key::Date(_)) => Ordering::Less,
            (Key::Date(_), Key::Num(_)) => Ordering::Greater,
        }
    }

    fn into_value(self) -> CellValue {
        match self {
            Key::Num(n) => CellValue::from_number(n),
            Key::Date(d) => CellValue::from_date(d),
        }
    }
}

/// Parseable keys of a column within a view, in table order. A column
/// holding more dates than numbers is ordered chronologically; otherwise
/// numerically (mixed text contributes its first number).
fn column_keys(func: &str, view: &View<'_>, col: usize, numeric_only: bool, log: &mut EvalLog) -> Vec<(usize, Key)> {
    let cells: Vec<(usize, &CellValue)> =
        view.row_indices.iter().map(|&r| (r, &view.table.cell(r, col).value)).collect();
    let dates = cells.iter().filter(|(_, v)| v.kind == CellKind::Date).count();
    let numbers = cells.iter().filter(|(_, v)| v.numeric().is_some()).count();
    let by_date = !numeric_only && dates > numbers;
    let keys: Vec<(usize, Key)> = cells
        .iter()
        .filter_map(|&(r, v)| {
            let key = if by_date {
                match v.kind {
                    CellKind::Date => v.date.map(Key::Date),
                    _ => v
                        .number
                        .filter(|n| n.fract() == 0.0 && (1000.0..3000.0).contains(n))
                        .map(|n| Key::Date(Date::year(n as i32))),
                }
            } else {
                v.numeric().map(Key::Num)
            };
            key.map(|k| (r, k))
        })
        .collect();
    if keys.len() < cells.len() {
        log.note(func, format!("skipped {} unparseable cells", cells.len() - keys.len()));
    }
    keys
}

pub fn eval_aggregate(kind: AggKind, view: &View<'_>, col: usize, log: &mut EvalLog) -> Result<CellValue, EvalError> {
    let name = match kind {
        AggKind::Max => "max",
        AggKind::Min => "min",
        AggKind::Avg => "avg",
        AggKind::Sum => "sum",
    };
    let numeric_only = matches!(kind, AggKind::Avg | AggKind::Sum);
    let keys = column_keys(name, view, col, numeric_only, log);
    let nums = || {
        keys.iter().map(|(_, k)| match k {
            Key::Num(n) => *n,
            Key::Date(_) => unreachable!("numeric keys"),
        })
    };
    match kind {
        AggKind::Sum => Ok(CellValue::from_number(nums().fold(0.0, |acc, n| acc + n))),
        _ if keys.is_empty() => Err(EvalError::EmptyViewError(name.into())),
        AggKind::Avg => Ok(CellValue::from_number(nums().fold(0.0, |acc, n| acc + n) / keys.len() as f64)),
        AggKind::Max => Ok(keys.iter().map(|(_, k)| *k).max_by(|a, b| a.total_cmp(b)).unwrap().into_value()),
        AggKind::Min => Ok(keys.iter().map(|(_, k)| *k).min_by(|a, b| a.total_cmp(b)).unwrap().into_value()),
    }
}

/// Rows sorted by key (descending for `Max`), ties in table order.
fn ranked(func: &str, extreme: Extreme, view: &View<'_>, col: usize, log: &mut EvalLog) -> Vec<(usize, Key)> {
    let mut keys = column_keys(func, view, col, false, log);
    match extreme {
        Extreme::Max => keys.sort_by(|a, b| b.1.total_cmp(&a.1)),
        Extreme::Min => keys.sort_by(|a, b| a.1.total_cmp(&b.1)),
    }
    keys
}

fn pick_nth(func: &str, ranked: &[(usize, Key)], n: f64) -> Result<(usize, Key), EvalError> {
    if ranked.is_empty() {
        return Err(EvalError::EmptyViewError(func.into()));
    }
    if n.fract() != 0.0 || n < 1.0 || n > ranked.len() as f64 {
        return Err(EvalError::OrdinalOutOfRange {
            func: func.into(),
            n: crate::table::format_number(n),
            len: ranked.len(),
        });
    }
    Ok(ranked[n as usize - 1])
}

fn nth_name(prefix: &str, e: Extreme) -> String {
    format!("{prefix}{}", if e == Extreme::Max { "max" } else { "min" })
}

pub fn eval_nth_value(
    e: Extreme,
    view: &View<'_>,
    col: usize,
    n: f64,
    log: &mut EvalLog,
) -> Result<CellValue, EvalError> {
    let name = nth_name("nth_", e);
    let r = ranked(&name, e, view, col, log);
    Ok(pick_nth(&name, &r, n)?.1.into_value())
}

pub fn eval_arg_extreme(e: Extreme, view: &View<'_>, col: usize, log: &mut EvalLog) -> Result<usize, EvalError> {
    let name = nth_name("arg", e);
    let keys = column_keys(&name, view, col, false, log);
    let mut best: Option<(usize, Key)> = None;
    for (r, k) in keys {
        let better = match best {
            None => true,
            Some((_, b)) => match e {
                Extreme::Max => k.total_cmp(&b) == Ordering::Greater,
                Extreme::Min => k.total_cmp(&b) == Ordering::Less,
            },
        };
        if better {
            best = Some((r, k));
        }
    }
    best.map(|(r, _)| r).ok_or(EvalError::EmptyViewError(name))
}

pub fn eval_nth_arg_extreme(
    e: Extreme,
    view: &View<'_>,
    col: usize,
    n: f64,
    log: &mut EvalLog,
) -> Result<usize, EvalError> {
    let name = nth_name("nth_arg", e);
    let r = ranked(&name, e, view, col, log);
    Ok(pick_nth(&name, &r, n)?.0)
}

fn round_eq_tolerance(reference: &CellValue, reference_value: f64, cfg: &ExecConfig) -> f64 {
    let floor = cfg.round_eq_absolute_floor.unwrap_or_else(|| 0.5 * 10f64.powi(-(reference.decimal_places() as i32)));
    (cfg.round_eq_relative_tol * reference_value.abs()).max(floor)
}

pub fn eval_compare(kind: CompareKind, a: &CellValue, b: &CellValue, cfg: &ExecConfig) -> Result<bool, EvalError> {
    let outcome = compare_cells(a, b);
    let incomparable =
        |func: &str| EvalError::IncomparableOperands { func: func.into(), left: a.text.clone(), right: b.text.clone() };
    Ok(match kind {
        CompareKind::Eq => outcome.is_equalish(),
        CompareKind::NotEq => !outcome.is_equalish(),
        CompareKind::RoundEq => {
            outcome.is_equalish()
                || match (a.numeric(), b.numeric()) {
                    (Some(x), Some(y)) => (x - y).abs() <= round_eq_tolerance(b, y, cfg),
                    _ => false,
                }
        }
        CompareKind::Greater => match outcome {
            ComparisonOutcome::Incomparable => return Err(incomparable("greater")),
            o => o == ComparisonOutcome::Greater,
        },
        CompareKind::Less => match outcome {
            ComparisonOutcome::Incomparable => return Err(incomparable("less")),
            o => o == ComparisonOutcome::Less,
        },
    })
}

/// `a - b`: numeric difference, or for dates whole years when both only
/// carry a year and days otherwise.
pub fn eval_diff(a: &CellValue, b: &CellValue) -> Result<CellValue, EvalError> {
    let as_date = |v: &CellValue| match v.kind {
        CellKind::Date => v.date,
        CellKind::Number => {
            v.number.filter(|n| n.fract() == 0.0 && (1000.0..3000.0).contains(n)).map(|n| Date::year(n as i32))
        }
        CellKind::Text => None,
    };
    if a.kind != CellKind::Date && b.kind != CellKind::Date {
        if let (Some(x), Some(y)) = (a.numeric(), b.numeric()) {
            return Ok(CellValue::from_number(x - y));
        }
    } else if let (Some(x), Some(y)) = (as_date(a), as_date(b)) {
        if x.is_year_only() || y.is_year_only() {
            return Ok(CellValue::from_number(f64::from(x.year - y.year)));
        }
        if let (Some(dx), Some(dy)) = (x.day_number(), y.day_number()) {
            return Ok(CellValue::from_number((dx - dy) as f64));
        }
    }
    Err(EvalError::IncomparableOperands { func: "diff".into(), left: a.text.clone(), right: b.text.clone() })
}

/// Whether a cell satisfies `pred` against `value`.
pub fn satisfies(pred: Predicate, cell: &CellValue, value: &CellValue) -> bool {
    let o = compare_cells(cell, value);
    match pred {
        Predicate::Eq => o.is_equalish(),
        Predicate::NotEq => !cell.is_blank() && !o.is_equalish(),
        Predicate::Greater => o == ComparisonOutcome::Greater,
        Predicate::Less => o == ComparisonOutcome::Less,
        Predicate::GreaterEq => o == ComparisonOutcome::Greater || o.is_equalish(),
        Predicate::LessEq => o == ComparisonOutcome::Less || o.is_equalish(),
    }
}

/// Rows of `view` whose cell in `col` satisfies the predicate; with no
/// predicate (`filter_all`) the view itself.
pub fn eval_filter<'t>(
    pred: Option<Predicate>,
    view: &View<'t>,
    col: usize,
    value: Option<&CellValue>,
    log: &mut EvalLog,
) -> View<'t> {
    let (Some(pred), Some(value)) = (pred, value) else {
        return view.clone();
    };
    let out = view.retain_rows(|r| satisfies(pred, &view.table.cell(r, col).value, value));
    if matches!(pred, Predicate::Greater | Predicate::Less | Predicate::GreaterEq | Predicate::LessEq) {
        let incomparable = view
            .row_indices
            .iter()
            .filter(|&&r| compare_cells(&view.table.cell(r, col).value, value) == ComparisonOutcome::Incomparable)
            .count();
        if incomparable > 0 {
            log.note(format!("filter_{}", pred.suffix()), format!("skipped {incomparable} incomparable cells"));
        }
    }
    out
}

fn satisfying(pred: Predicate, view: &View<'_>, col: usize, value: &CellValue) -> usize {
    view.row_indices.iter().filter(|&&r| satisfies(pred, &view.table.cell(r, col).value, value)).count()
}

pub fn eval_all_quantifier(pred: Predicate, view: &View<'_>, col: usize, value: &CellValue, log: &mut EvalLog) -> bool {
    if view.is_empty() {
        log.note(format!("all_{}", pred.suffix()), "vacuously true on an empty view");
        return true;
    }
    satisfying(pred, view, col, value) == view.len()
}

pub fn eval_most_quantifier(
    pred: Predicate,
    view: &View<'_>,
    col: usize,
    value: &CellValue,
    threshold: f64,
    log: &mut EvalLog,
) -> bool {
    if view.is_empty() {
        log.note(format!("most_{}", pred.suffix()), "false on an empty view");
        return false;
    }
    satisfying(pred, view, col, value) as f64 > threshold * view.len() as f64
}
