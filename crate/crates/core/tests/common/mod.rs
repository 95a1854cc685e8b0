//! Random tables and programs, and a brute-force reference evaluator that
//! works on the generator's own typed view of each cell.
#![allow(dead_code)]

use std::cmp::Ordering;

use lftab_core::ast::{Ast, FuncNode, Node};
use lftab_core::logic_types::{all_questions, AnswerKind, Dependency};
use lftab_core::semantics::{evaluate_typed, typecheck_expr, EvalLog, ExecConfig, Function, TypedAst, Value};
use lftab_core::{
    build_from_answers, classify, compare_cells, parse_logic_str, typecheck, Answer, AnswerRecord, CellKind, CellValue,
    ComparisonOutcome, LogicType, SemType, Table,
};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const COLUMNS: [&str; 5] = ["alpha", "beta", "gamma", "delta", "epsilon"];
const WORDS: [&str; 10] =
    ["africa", "asia", "europe", "north africa", "east asia", "red", "blue", "green", "river", "lake"];
const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Num(f64),
    Date(i32, Option<u32>, Option<u32>),
    Text,
}

/// A scalar as the reference sees it: its kind, the normalized text, the
/// comparison tokens and the decimals written after the leading number.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    pub kind: Kind,
    pub raw: String,
    pub toks: Vec<String>,
    pub decimals: usize,
}

fn group_thousands(n: i64) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl Scalar {
    pub fn int(n: i64, commas: bool) -> Scalar {
        let raw = if commas { group_thousands(n) } else { n.to_string() };
        Scalar { kind: Kind::Num(n as f64), raw, toks: vec![n.to_string()], decimals: 0 }
    }

    pub fn tenths(t: i64) -> Scalar {
        let raw = format!("{}.{}", t / 10, t % 10);
        Scalar { kind: Kind::Num(t as f64 / 10.0), toks: vec![raw.clone()], raw, decimals: 1 }
    }

    pub fn date(y: i32, m: u32, d: u32, named: bool) -> Scalar {
        let (raw, toks) = if named {
            let name = MONTHS[m as usize - 1];
            (format!("{name} {d} , {y}"), vec![name.to_string(), d.to_string(), y.to_string()])
        } else {
            (format!("{y}-{m:02}-{d:02}"), vec![y.to_string(), format!("{m:02}"), format!("{d:02}")])
        };
        Scalar { kind: Kind::Date(y, Some(m), Some(d)), raw, toks, decimals: 0 }
    }

    pub fn word(w: &str) -> Scalar {
        Scalar { kind: Kind::Text, raw: w.to_string(), toks: w.split(' ').map(str::to_string).collect(), decimals: 0 }
    }

    pub fn blank() -> Scalar {
        Scalar { kind: Kind::Text, raw: "-".into(), toks: vec![], decimals: 0 }
    }

    /// A number produced by a function rather than read from a cell.
    pub fn computed(n: f64) -> Scalar {
        let n = if n == 0.0 { 0.0 } else { n };
        let raw = if n.fract() == 0.0 && n.abs() < 1e15 {
            format!("{n:.0}")
        } else {
            format!("{n:.6}").trim_end_matches('0').trim_end_matches('.').to_string()
        };
        let unsigned = raw.trim_start_matches('-').to_string();
        let decimals = unsigned.split_once('.').map_or(0, |(_, f)| f.len());
        Scalar { kind: Kind::Num(n), raw, toks: vec![unsigned], decimals }
    }

    pub fn computed_date(y: i32, m: Option<u32>, d: Option<u32>) -> Scalar {
        let (raw, toks) = match (m, d) {
            (Some(m), Some(d)) => {
                (format!("{y:04}-{m:02}-{d:02}"), vec![format!("{y:04}"), format!("{m:02}"), format!("{d:02}")])
            }
            _ => (format!("{y:04}"), vec![format!("{y:04}")]),
        };
        Scalar { kind: Kind::Date(y, m, d), raw, toks, decimals: 0 }
    }

    fn numeric(&self) -> Option<f64> {
        match self.kind {
            Kind::Num(n) => Some(n),
            // Generated text never embeds digits.
            _ => None,
        }
    }

    fn is_blank(&self) -> bool {
        self.toks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColKind {
    SmallInt,
    BigInt,
    Tenths,
    Year,
    Word,
    Date,
}

const COL_KINDS: [ColKind; 6] =
    [ColKind::SmallInt, ColKind::BigInt, ColKind::Tenths, ColKind::Year, ColKind::Word, ColKind::Date];

#[derive(Debug, Clone)]
pub struct GenTable {
    pub kinds: Vec<ColKind>,
    /// Row-major.
    pub cells: Vec<Vec<Scalar>>,
}

impl GenTable {
    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.kinds.len()
    }

    pub fn to_table(&self) -> Table {
        let columns = COLUMNS[..self.cols()].iter().map(|c| c.to_string()).collect();
        let rows = self.cells.iter().map(|r| r.iter().map(|c| c.raw.clone()).collect()).collect();
        Table::new("generated", "generated table", columns, rows).expect("generated table is rectangular")
    }
}

fn fresh(rng: &mut ChaCha8Rng, kind: ColKind) -> Scalar {
    match kind {
        ColKind::SmallInt => Scalar::int(rng.random_range(0..40), false),
        ColKind::BigInt => Scalar::int(rng.random_range(500..200_000), rng.random_bool(0.7)),
        ColKind::Tenths => Scalar::tenths(rng.random_range(0..400)),
        ColKind::Year => Scalar::int(rng.random_range(1985..2015), false),
        ColKind::Word => Scalar::word(WORDS.choose(rng).unwrap()),
        ColKind::Date => Scalar::date(
            rng.random_range(1995..2005),
            rng.random_range(1..=12),
            rng.random_range(1..=28),
            rng.random_bool(0.5),
        ),
    }
}

fn rerender(rng: &mut ChaCha8Rng, s: &Scalar) -> Scalar {
    match s.kind {
        Kind::Date(y, Some(m), Some(d)) => Scalar::date(y, m, d, rng.random_bool(0.5)),
        _ => s.clone(),
    }
}

/// Up to 8 rows and 5 columns; each column draws from a small pool so
/// ties are common, with some blank and filler cells mixed in.
pub fn random_table(rng: &mut ChaCha8Rng) -> GenTable {
    let rows = rng.random_range(1..=8);
    let cols = rng.random_range(1..=5);
    let kinds: Vec<ColKind> = (0..cols).map(|_| *COL_KINDS.choose(rng).unwrap()).collect();
    let pools: Vec<Vec<Scalar>> =
        kinds.iter().map(|&k| (0..rng.random_range(2..=5)).map(|_| fresh(rng, k)).collect()).collect();
    let cells = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|c| {
                    let roll: f64 = rng.random();
                    if roll < 0.06 {
                        Scalar::blank()
                    } else if roll < 0.09 {
                        Scalar::word("none")
                    } else if roll < 0.75 {
                        let s = pools[c].choose(rng).unwrap().clone();
                        rerender(rng, &s)
                    } else {
                        fresh(rng, kinds[c])
                    }
                })
                .collect()
        })
        .collect();
    GenTable { kinds, cells }
}

/// A generated program. Literals carry the reference's view of their value.
#[derive(Debug, Clone)]
pub enum P {
    AllRows,
    Col(usize),
    Lit(Scalar),
    Ord(i64),
    Call(&'static str, Vec<P>),
}

impl P {
    pub fn print(&self) -> String {
        match self {
            P::AllRows => "all_rows".into(),
            P::Col(c) => COLUMNS[*c].into(),
            P::Lit(s) => s.raw.clone(),
            P::Ord(n) => n.to_string(),
            P::Call(name, args) => {
                let inner: Vec<String> = args.iter().map(P::print).collect();
                format!("{name} {{ {} }}", inner.join(" ; "))
            }
        }
    }
}

pub const FILTERS: [&str; 7] = [
    "filter_eq",
    "filter_not_eq",
    "filter_greater",
    "filter_less",
    "filter_greater_eq",
    "filter_less_eq",
    "filter_all",
];
const SUFFIXES: [&str; 6] = ["eq", "not_eq", "greater", "less", "greater_eq", "less_eq"];
const COMPARES: [&str; 5] = ["eq", "not_eq", "round_eq", "greater", "less"];

fn leak(s: String) -> &'static str {
    Box::leak(s.into_boxed_str())
}

pub struct Gen<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub table: &'a GenTable,
}

impl Gen<'_> {
    fn p(&mut self, prob: f64) -> bool {
        self.rng.random_bool(prob)
    }

    pub fn col(&mut self) -> usize {
        self.rng.random_range(0..self.table.cols())
    }

    pub fn literal(&mut self, c: usize) -> Scalar {
        if self.p(0.65) {
            let r = self.rng.random_range(0..self.table.rows());
            let s = self.table.cells[r][c].clone();
            if !s.is_blank() {
                return rerender(self.rng, &s);
            }
        }
        fresh(self.rng, self.table.kinds[c])
    }

    fn ordinal(&mut self) -> P {
        P::Ord(self.rng.random_range(0..=self.table.rows() as i64 + 1))
    }

    pub fn view(&mut self, d: usize) -> P {
        if d == 0 || self.p(0.35) {
            P::AllRows
        } else {
            self.filter(d)
        }
    }

    pub fn filter(&mut self, d: usize) -> P {
        let c = self.col();
        let name = *FILTERS.choose(self.rng).unwrap();
        let v = self.view(d - 1);
        if name == "filter_all" {
            return P::Call(name, vec![v, P::Col(c)]);
        }
        let value = if d >= 2 && self.p(0.15) { self.obj_for(c, d - 1) } else { P::Lit(self.literal(c)) };
        P::Call(name, vec![v, P::Col(c), value])
    }

    pub fn row(&mut self, d: usize) -> P {
        let c = self.col();
        let v = self.view(d - 1);
        match self.rng.random_range(0..4) {
            0 => P::Call("argmax", vec![v, P::Col(c)]),
            1 => P::Call("argmin", vec![v, P::Col(c)]),
            2 => P::Call("nth_argmax", vec![v, P::Col(c), self.ordinal()]),
            _ => P::Call("nth_argmin", vec![v, P::Col(c), self.ordinal()]),
        }
    }

    pub fn hop(&mut self, c: usize, d: usize) -> P {
        let target = if d >= 2 && self.p(0.7) { self.row(d - 1) } else { self.view(d - 1) };
        P::Call("hop", vec![target, P::Col(c)])
    }

    pub fn aggregate(&mut self, c: usize, d: usize) -> P {
        let name = *["max", "min", "avg", "sum"].choose(self.rng).unwrap();
        P::Call(name, vec![self.view(d - 1), P::Col(c)])
    }

    pub fn nth_value(&mut self, c: usize, d: usize) -> P {
        let name = if self.p(0.5) { "nth_max" } else { "nth_min" };
        P::Call(name, vec![self.view(d - 1), P::Col(c), self.ordinal()])
    }

    /// A scalar about column `c`.
    pub fn obj_for(&mut self, c: usize, d: usize) -> P {
        if d == 0 {
            return P::Lit(self.literal(c));
        }
        match self.rng.random_range(0..4) {
            0 => P::Lit(self.literal(c)),
            1 => self.hop(c, d),
            2 => self.aggregate(c, d),
            _ => self.nth_value(c, d),
        }
    }

    pub fn obj(&mut self, d: usize) -> P {
        let c = self.col();
        if d == 0 {
            return P::Lit(self.literal(c));
        }
        match self.rng.random_range(0..6) {
            0 => P::Call("count", vec![self.view(d - 1)]),
            1 => self.diff(d),
            _ => self.obj_for(c, d),
        }
    }

    pub fn diff(&mut self, d: usize) -> P {
        let c = self.col();
        let c2 = if self.p(0.8) { c } else { self.col() };
        P::Call("diff", vec![self.obj_for(c, d - 1), self.obj_for(c2, d - 1)])
    }

    pub fn compare(&mut self, d: usize) -> P {
        let name = *COMPARES.choose(self.rng).unwrap();
        let c = self.col();
        let (a, b) = match self.rng.random_range(0..5) {
            0 if d >= 2 => {
                (P::Call("count", vec![self.view(d - 2)]), P::Lit(Scalar::int(self.rng.random_range(0..9), false)))
            }
            1 => (self.obj(d - 1), self.obj(d - 1)),
            _ => (self.obj_for(c, d - 1), P::Lit(self.literal(c))),
        };
        P::Call(name, vec![a, b])
    }

    pub fn quantifier(&mut self, prefix: &str, d: usize) -> P {
        let c = self.col();
        let name = leak(format!("{prefix}_{}", SUFFIXES.choose(self.rng).unwrap()));
        P::Call(name, vec![self.view(d - 1), P::Col(c), P::Lit(self.literal(c))])
    }

    pub fn boolean(&mut self, d: usize) -> P {
        match self.rng.random_range(0..6) {
            0 => P::Call("only", vec![self.view(d - 1)]),
            1 => self.quantifier("all", d),
            2 => self.quantifier("most", d),
            3 if d >= 2 => P::Call("and", vec![self.boolean(d - 1), self.boolean(d - 1)]),
            _ => self.compare(d),
        }
    }

    /// A program of at most four function levels whose root belongs to
    /// `family`.
    pub fn rooted(&mut self, family: Family) -> P {
        let d = 4;
        let c = self.col();
        match family {
            Family::Count => P::Call("count", vec![self.view(d - 1)]),
            Family::Only => P::Call("only", vec![self.view(d - 1)]),
            Family::Hop => self.hop(c, d),
            Family::Aggregate => self.aggregate(c, d),
            Family::NthValue => self.nth_value(c, d),
            Family::ArgExtreme => {
                let name = if self.p(0.5) { "argmax" } else { "argmin" };
                P::Call(name, vec![self.view(d - 1), P::Col(c)])
            }
            Family::NthArgExtreme => {
                let name = if self.p(0.5) { "nth_argmax" } else { "nth_argmin" };
                P::Call(name, vec![self.view(d - 1), P::Col(c), self.ordinal()])
            }
            Family::Compare => self.compare(d),
            Family::Diff => self.diff(d),
            Family::Filter => self.filter(d),
            Family::All => self.quantifier("all", d),
            Family::Most => self.quantifier("most", d),
            Family::And => P::Call("and", vec![self.boolean(d - 1), self.boolean(d - 1)]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Count,
    Only,
    Hop,
    Aggregate,
    NthValue,
    ArgExtreme,
    NthArgExtreme,
    Compare,
    Diff,
    Filter,
    All,
    Most,
    And,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Count,
        Family::Only,
        Family::Hop,
        Family::Aggregate,
        Family::NthValue,
        Family::ArgExtreme,
        Family::NthArgExtreme,
        Family::Compare,
        Family::Diff,
        Family::Filter,
        Family::All,
        Family::Most,
        Family::And,
    ];
}

// Reference evaluator.

#[derive(Debug, Clone, PartialEq)]
pub enum OV {
    Bool(bool),
    S(Scalar),
    Row(usize),
    View(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Less,
    Equal,
    Greater,
    Fuzzy,
    Incomparable,
}

fn year_like(n: f64) -> Option<i32> {
    (n.fract() == 0.0 && (1000.0..3000.0).contains(&n)).then_some(n as i32)
}

fn from_ordering(o: Ordering) -> Outcome {
    match o {
        Ordering::Less => Outcome::Less,
        Ordering::Equal => Outcome::Equal,
        Ordering::Greater => Outcome::Greater,
    }
}

/// Year, then month and day only when both sides know them.
fn date_prefix_cmp(a: (i32, Option<u32>, Option<u32>), b: (i32, Option<u32>, Option<u32>)) -> Ordering {
    let mut o = a.0.cmp(&b.0);
    if o == Ordering::Equal {
        if let (Some(x), Some(y)) = (a.1, b.1) {
            o = x.cmp(&y);
            if o == Ordering::Equal {
                if let (Some(x), Some(y)) = (a.2, b.2) {
                    o = x.cmp(&y);
                }
            }
        }
    }
    o
}

fn contains(hay: &[String], needle: &[String]) -> bool {
    (0..hay.len()).any(|i| hay[i..].starts_with(needle))
}

fn compare(a: &Scalar, b: &Scalar) -> Outcome {
    match (&a.kind, &b.kind) {
        (Kind::Num(x), Kind::Num(y)) => return x.partial_cmp(y).map_or(Outcome::Incomparable, from_ordering),
        (&Kind::Date(ya, ma, da), &Kind::Date(yb, mb, db)) => {
            return from_ordering(date_prefix_cmp((ya, ma, da), (yb, mb, db)))
        }
        (&Kind::Date(ya, ma, da), &Kind::Num(y)) => {
            if let Some(y) = year_like(y) {
                return from_ordering(date_prefix_cmp((ya, ma, da), (y, None, None)));
            }
        }
        (&Kind::Num(x), &Kind::Date(yb, mb, db)) => {
            if let Some(x) = year_like(x) {
                return from_ordering(date_prefix_cmp((x, None, None), (yb, mb, db)));
            }
        }
        _ => {}
    }
    match (a.toks.is_empty(), b.toks.is_empty()) {
        (true, true) => Outcome::Equal,
        (true, false) | (false, true) => Outcome::Incomparable,
        _ if a.toks == b.toks => Outcome::Equal,
        _ if contains(&a.toks, &b.toks) || contains(&b.toks, &a.toks) => Outcome::Fuzzy,
        _ => Outcome::Incomparable,
    }
}

fn equalish(o: Outcome) -> bool {
    matches!(o, Outcome::Equal | Outcome::Fuzzy)
}

fn satisfies(suffix: &str, cell: &Scalar, value: &Scalar) -> bool {
    let o = compare(cell, value);
    match suffix {
        "eq" => equalish(o),
        "not_eq" => !cell.is_blank() && !equalish(o),
        "greater" => o == Outcome::Greater,
        "less" => o == Outcome::Less,
        "greater_eq" => o == Outcome::Greater || equalish(o),
        "less_eq" => o == Outcome::Less || equalish(o),
        _ => unreachable!("{suffix}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Key {
    Num(f64),
    Date(i32, Option<u32>, Option<u32>),
}

impl Key {
    fn cmp(&self, other: &Key) -> Ordering {
        match (self, other) {
            (Key::Num(a), Key::Num(b)) => a.total_cmp(b),
            (Key::Date(y1, m1, d1), Key::Date(y2, m2, d2)) => {
                (y1, m1.unwrap_or(0), d1.unwrap_or(0)).cmp(&(y2, m2.unwrap_or(0), d2.unwrap_or(0)))
            }
            _ => unreachable!("one key kind per column"),
        }
    }

    fn value(self) -> Scalar {
        match self {
            Key::Num(n) => Scalar::computed(n),
            Key::Date(y, m, d) => Scalar::computed_date(y, m, d),
        }
    }
}

/// Days since 0001-01-01 in the proleptic Gregorian calendar.
fn day_number(y: i32, m: u32, d: u32) -> i64 {
    let (y, m) = (i64::from(y), i64::from(m));
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe
}

pub struct Oracle<'a> {
    pub t: &'a GenTable,
    pub most_threshold: f64,
    pub rel_tol: f64,
}

type R = Result<OV, ()>;

impl<'a> Oracle<'a> {
    pub fn new(t: &'a GenTable) -> Self {
        Oracle { t, most_threshold: 0.5, rel_tol: 0.05 }
    }

    fn view(&self, p: &P) -> Result<Vec<usize>, ()> {
        match p {
            P::AllRows => Ok((0..self.t.rows()).collect()),
            _ => match self.eval(p)? {
                OV::View(v) => Ok(v),
                other => panic!("expected a view, got {other:?}"),
            },
        }
    }

    fn scalar(&self, p: &P) -> Result<Scalar, ()> {
        match p {
            P::Lit(s) => Ok(s.clone()),
            _ => match self.eval(p)? {
                OV::S(s) => Ok(s),
                other => panic!("expected a scalar, got {other:?}"),
            },
        }
    }

    fn boolean(&self, p: &P) -> Result<bool, ()> {
        match self.eval(p)? {
            OV::Bool(b) => Ok(b),
            other => panic!("expected a bool, got {other:?}"),
        }
    }

    fn col(p: &P) -> usize {
        match p {
            P::Col(c) => *c,
            _ => panic!("expected a column"),
        }
    }

    fn ord(p: &P) -> i64 {
        match p {
            P::Ord(n) => *n,
            _ => panic!("expected an ordinal"),
        }
    }

    fn cell(&self, r: usize, c: usize) -> &Scalar {
        &self.t.cells[r][c]
    }

    fn keys(&self, rows: &[usize], c: usize, numeric_only: bool) -> Vec<(usize, Key)> {
        let dates = rows.iter().filter(|&&r| matches!(self.cell(r, c).kind, Kind::Date(..))).count();
        let numbers = rows.iter().filter(|&&r| self.cell(r, c).numeric().is_some()).count();
        let by_date = !numeric_only && dates > numbers;
        rows.iter()
            .filter_map(|&r| {
                let k = match (&self.cell(r, c).kind, by_date) {
                    (&Kind::Date(y, m, d), true) => Key::Date(y, m, d),
                    (&Kind::Num(n), true) => Key::Date(year_like(n)?, None, None),
                    (&Kind::Num(n), false) => Key::Num(n),
                    _ => return None,
                };
                Some((r, k))
            })
            .collect()
    }

    fn ranked(&self, rows: &[usize], c: usize, max: bool) -> Vec<(usize, Key)> {
        let mut keys = self.keys(rows, c, false);
        // Stable: ties keep table order.
        keys.sort_by(|a, b| if max { b.1.cmp(&a.1) } else { a.1.cmp(&b.1) });
        keys
    }

    fn nth(ranked: &[(usize, Key)], n: i64) -> Result<(usize, Key), ()> {
        if n < 1 || n as usize > ranked.len() {
            return Err(());
        }
        Ok(ranked[n as usize - 1])
    }

    fn diff(a: &Scalar, b: &Scalar) -> R {
        let as_date = |s: &Scalar| match s.kind {
            Kind::Date(y, m, d) => Some((y, m, d)),
            Kind::Num(n) => year_like(n).map(|y| (y, None, None)),
            Kind::Text => None,
        };
        let is_date = |s: &Scalar| matches!(s.kind, Kind::Date(..));
        if !is_date(a) && !is_date(b) {
            return match (a.numeric(), b.numeric()) {
                (Some(x), Some(y)) => Ok(OV::S(Scalar::computed(x - y))),
                _ => Err(()),
            };
        }
        match (as_date(a), as_date(b)) {
            (Some((y1, m1, d1)), Some((y2, m2, d2))) => match (m1.zip(d1), m2.zip(d2)) {
                (Some((m1, d1)), Some((m2, d2))) => {
                    Ok(OV::S(Scalar::computed((day_number(y1, m1, d1) - day_number(y2, m2, d2)) as f64)))
                }
                _ => Ok(OV::S(Scalar::computed(f64::from(y1 - y2)))),
            },
            _ => Err(()),
        }
    }

    fn round_eq(&self, a: &Scalar, b: &Scalar) -> bool {
        if equalish(compare(a, b)) {
            return true;
        }
        match (a.numeric(), b.numeric()) {
            (Some(x), Some(y)) => {
                let floor = 0.5 * 10f64.powi(-(b.decimals as i32));
                (x - y).abs() <= (self.rel_tol * y.abs()).max(floor)
            }
            _ => false,
        }
    }

    pub fn eval(&self, p: &P) -> R {
        let P::Call(name, a) = p else { panic!("eval on a leaf") };
        let name = *name;
        Ok(match name {
            "count" => OV::S(Scalar::computed(self.view(&a[0])?.len() as f64)),
            "only" => OV::Bool(self.view(&a[0])?.len() == 1),
            "and" => {
                let x = self.boolean(&a[0])?;
                let y = self.boolean(&a[1])?;
                OV::Bool(x && y)
            }
            "hop" => {
                let row = match &a[0] {
                    P::AllRows => 0,
                    q => match self.eval(q)? {
                        OV::Row(r) => r,
                        OV::View(v) => *v.first().ok_or(())?,
                        other => panic!("hop on {other:?}"),
                    },
                };
                OV::S(self.cell(row, Self::col(&a[1])).clone())
            }
            "max" | "min" | "avg" | "sum" => {
                let rows = self.view(&a[0])?;
                let c = Self::col(&a[1]);
                let numeric_only = matches!(name, "avg" | "sum");
                let keys = self.keys(&rows, c, numeric_only);
                let nums: Vec<f64> = keys
                    .iter()
                    .map(|(_, k)| match k {
                        Key::Num(n) => *n,
                        Key::Date(..) => f64::NAN,
                    })
                    .collect();
                match name {
                    "sum" => OV::S(Scalar::computed(nums.iter().sum())),
                    _ if keys.is_empty() => return Err(()),
                    "avg" => OV::S(Scalar::computed(nums.iter().sum::<f64>() / nums.len() as f64)),
                    _ => {
                        let mut best = keys[0].1;
                        for (_, k) in &keys[1..] {
                            let better = match name {
                                "max" => k.cmp(&best) == Ordering::Greater,
                                _ => k.cmp(&best) == Ordering::Less,
                            };
                            if better {
                                best = *k;
                            }
                        }
                        OV::S(best.value())
                    }
                }
            }
            "nth_max" | "nth_min" | "nth_argmax" | "nth_argmin" => {
                let rows = self.view(&a[0])?;
                let ranked = self.ranked(&rows, Self::col(&a[1]), name.ends_with("max"));
                if ranked.is_empty() {
                    return Err(());
                }
                let (r, k) = Self::nth(&ranked, Self::ord(&a[2]))?;
                if name.contains("arg") {
                    OV::Row(r)
                } else {
                    OV::S(k.value())
                }
            }
            "argmax" | "argmin" => {
                let rows = self.view(&a[0])?;
                let keys = self.keys(&rows, Self::col(&a[1]), false);
                let mut best: Option<(usize, Key)> = None;
                for (r, k) in keys {
                    let replace = match best {
                        None => true,
                        Some((_, b)) if name == "argmax" => k.cmp(&b) == Ordering::Greater,
                        Some((_, b)) => k.cmp(&b) == Ordering::Less,
                    };
                    if replace {
                        best = Some((r, k));
                    }
                }
                OV::Row(best.ok_or(())?.0)
            }
            "eq" | "not_eq" | "round_eq" | "greater" | "less" => {
                let x = self.scalar(&a[0])?;
                let y = self.scalar(&a[1])?;
                let o = compare(&x, &y);
                OV::Bool(match name {
                    "eq" => equalish(o),
                    "not_eq" => !equalish(o),
                    "round_eq" => self.round_eq(&x, &y),
                    _ if o == Outcome::Incomparable => return Err(()),
                    "greater" => o == Outcome::Greater,
                    _ => o == Outcome::Less,
                })
            }
            "diff" => {
                let x = self.scalar(&a[0])?;
                let y = self.scalar(&a[1])?;
                Self::diff(&x, &y)?
            }
            "filter_all" => OV::View(self.view(&a[0])?),
            _ => {
                let (prefix, suffix) = name.split_once('_').unwrap();
                let rows = self.view(&a[0])?;
                let c = Self::col(&a[1]);
                let value = self.scalar(&a[2])?;
                let hits: Vec<usize> =
                    rows.iter().copied().filter(|&r| satisfies(suffix, self.cell(r, c), &value)).collect();
                match prefix {
                    "filter" => OV::View(hits),
                    "all" => OV::Bool(hits.len() == rows.len()),
                    "most" => OV::Bool(!rows.is_empty() && hits.len() as f64 > self.most_threshold * rows.len() as f64),
                    _ => panic!("unknown function {name}"),
                }
            }
        })
    }
}

/// Evaluates a printed program with the library, any root type allowed.
pub fn run_library<'t>(src: &str, table: &'t Table, cfg: &ExecConfig) -> Result<Value<'t>, String> {
    let ast = parse_logic_str(src).map_err(|e| format!("parse: {e}"))?;
    let root = typecheck_expr(&ast.root).map_err(|e| format!("typecheck: {e}"))?;
    evaluate_typed(&TypedAst { root }, table, cfg, &mut EvalLog::default()).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub fn agrees(lib: &Value<'_>, want: &OV) -> bool {
    match (lib, want) {
        (Value::Bool(a), OV::Bool(b)) => a == b,
        (Value::Row(r), OV::Row(i)) => r.index == *i,
        (Value::View(v), OV::View(rows)) => v.row_indices == *rows,
        (Value::Scalar(v), OV::S(s)) => match (v.kind, &s.kind) {
            (CellKind::Number, Kind::Num(n)) => v.number.is_some_and(|x| close(x, *n)),
            (CellKind::Date, &Kind::Date(y, m, d)) => v.date.is_some_and(|x| (x.year, x.month, x.day) == (y, m, d)),
            (CellKind::Text, Kind::Text) => v.text == s.raw,
            _ => false,
        },
        _ => false,
    }
}

/// Runs `cases` random programs rooted in `family` through both evaluators.
/// Returns the number of cases where the reference produced a value.
pub fn check_family(family: Family, cases: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let cfg = ExecConfig::default();
    let mut valued = 0;
    for i in 0..cases {
        let gt = random_table(&mut rng);
        let program = Gen { rng: &mut rng, table: &gt }.rooted(family);
        let src = program.print();
        let table = gt.to_table();
        let want = Oracle::new(&gt).eval(&program);
        let got = run_library(&src, &table, &cfg);
        let ok = match (&got, &want) {
            (Ok(v), Ok(w)) => agrees(v, w),
            (Err(e), Err(())) => !e.starts_with("parse") && !e.starts_with("typecheck"),
            _ => false,
        };
        if !ok {
            return Err(format!(
                "{family:?} case {i}: `{src}`\n  library: {:?}\n  reference: {want:?}\n  table: {:?}",
                got.map(|v| v.to_string()),
                gt.cells.iter().map(|r| r.iter().map(|c| c.raw.as_str()).collect::<Vec<_>>()).collect::<Vec<_>>()
            ));
        }
        if want.is_ok() {
            valued += 1;
        }
    }
    Ok(valued)
}

// Program strategies for the parser round trip.

pub fn function_names() -> Vec<String> {
    let mut names: Vec<String> = Function::all().into_iter().map(Function::name).collect();
    names.extend(["str_eq", "filter_str_eq", "most_str_eq", "num_hop", "str_hop_first"].map(String::from));
    names
}

pub fn text_leaf() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-z0-9][a-z0-9,.'/_-]{0,6}", 1..4).prop_map(|w| w.join(" "))
}

pub fn arb_ast() -> impl Strategy<Value = Ast> {
    let names = function_names();
    let leaf = text_leaf().prop_map(Node::text);
    let inner_names = names.clone();
    let node = leaf.prop_recursive(5, 64, 4, move |inner| {
        (prop::sample::select(inner_names.clone()), prop::collection::vec(inner, 1..4))
            .prop_map(|(n, children)| Node::func(n, children))
    });
    (prop::sample::select(names), prop::collection::vec(node, 1..4))
        .prop_map(|(n, children)| Ast::new(FuncNode::new(n, children)))
}

// Random answer records.

pub fn answer_for(
    r: &mut ChaCha8Rng,
    lt: LogicType,
    id: &str,
    kind: AnswerKind,
    choices: &[String],
    gt: &GenTable,
) -> Answer {
    let col = |r: &mut ChaCha8Rng| COLUMNS[r.random_range(0..gt.cols())].to_string();
    match kind {
        AnswerKind::Choice => {
            let usable: Vec<&String> = choices.iter().filter(|c| *c != "other").collect();
            Answer::Choice(usable.choose(r).unwrap().to_string())
        }
        AnswerKind::Column => Answer::Column(col(r)),
        AnswerKind::Columns => Answer::Columns((0..r.random_range(0..=2)).map(|_| col(r)).collect()),
        AnswerKind::Row => Answer::Row(r.random_range(0..gt.rows())),
        AnswerKind::Bool => Answer::Bool(r.random_bool(0.5)),
        AnswerKind::Value => match (lt, id) {
            (LogicType::Ordinal, "Q4") => Answer::Value(r.random_range(1..=gt.rows()).to_string()),
            (LogicType::Count, "Q5") => Answer::Value(r.random_range(0..=gt.rows()).to_string()),
            _ => {
                let row = r.random_range(0..gt.rows());
                let c = r.random_range(0..gt.cols());
                Answer::Value(gt.cells[row][c].raw.clone())
            }
        },
    }
}

pub fn holds(rec: &AnswerRecord, dep: &Option<Dependency>) -> bool {
    let choice = |q: &str| match rec.answers.get(q) {
        Some(Answer::Choice(c)) => Some(c.clone()),
        _ => None,
    };
    match dep {
        None => true,
        Some(Dependency::ChoiceIs { question, choice: c }) => choice(question).as_ref() == Some(c),
        Some(Dependency::ChoiceIsNot { question, choice: c }) => choice(question).as_ref() != Some(c),
    }
}

pub fn random_record(r: &mut ChaCha8Rng, gt: &GenTable) -> AnswerRecord {
    let lt = *LogicType::ALL.choose(r).unwrap();
    let mut rec = AnswerRecord::new(lt);
    for q in all_questions(lt) {
        if holds(&rec, &q.depends_on) {
            let a = answer_for(r, lt, &q.id, q.kind, &q.choices, gt);
            rec.answers.insert(q.id.clone(), a);
        }
    }
    rec
}

/// Comparative records must name two rows with different subject values,
/// otherwise both sides of the comparison are the same expression.
pub fn distinct_subjects(rec: &AnswerRecord, t: &Table) -> bool {
    if rec.logic_type != LogicType::Comparative {
        return true;
    }
    match (rec.answers.get("Q2"), rec.answers.get("Q3")) {
        (Some(Answer::Row(a)), Some(Answer::Row(b))) => {
            compare_cells(&t.cell(*a, 0).value, &t.cell(*b, 0).value) == ComparisonOutcome::Incomparable
                && t.cell(*a, 0).raw != t.cell(*b, 0).raw
        }
        _ => false,
    }
}

/// Buildable random records with their tables.
pub fn buildable_records(n: usize, seed: u64) -> Vec<(AnswerRecord, Table, Ast)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 200 * n, "too few buildable records");
        let gt = random_table(&mut r);
        let t = gt.to_table();
        let rec = random_record(&mut r, &gt);
        if !distinct_subjects(&rec, &t) {
            continue;
        }
        if let Ok(ast) = build_from_answers(&rec, &t) {
            out.push((rec, t, ast));
        }
    }
    out
}

// Algebraic laws of the evaluator, each checked on one random table and
// view. `Err` describes the violation.

/// A random table with a random view expression over it.
pub struct ViewCase {
    pub gen: GenTable,
    pub table: Table,
    pub view: String,
    pub col: usize,
    pub rng: ChaCha8Rng,
}

impl ViewCase {
    pub fn new(seed: u64) -> ViewCase {
        let mut r = rng(seed);
        let gen = random_table(&mut r);
        let (view, col) = {
            let mut g = Gen { rng: &mut r, table: &gen };
            (g.view(3).print(), g.col())
        };
        let table = gen.to_table();
        ViewCase { gen, table, view, col, rng: r }
    }

    fn run(&self, src: &str) -> Result<String, String> {
        run_library(src, &self.table, &ExecConfig::default()).map(|v| v.to_string())
    }

    fn scalar(&self, src: &str) -> Option<CellValue> {
        match run_library(src, &self.table, &ExecConfig::default()) {
            Ok(Value::Scalar(v)) => Some(v),
            _ => None,
        }
    }

    fn literal(&mut self) -> String {
        let c = self.col;
        Gen { rng: &mut self.rng, table: &self.gen }.literal(c).raw
    }

    /// Rows of the view, or `None` when evaluating it fails.
    fn rows(&self) -> Option<Vec<usize>> {
        let src = format!("filter_all {{ {} ; {} }}", self.view, COLUMNS[self.col]);
        match run_library(&src, &self.table, &ExecConfig::default()) {
            Ok(Value::View(v)) => Some(v.row_indices),
            _ => None,
        }
    }
}

fn same_outcome(what: &str, a: Result<String, String>, b: Result<String, String>) -> Result<(), String> {
    match (&a, &b) {
        (Ok(x), Ok(y)) if x == y => Ok(()),
        (Err(_), Err(_)) => Ok(()),
        _ => Err(format!("{what}: {a:?} vs {b:?}")),
    }
}

pub fn law_only_iff_single(seed: u64) -> Result<(), String> {
    let c = ViewCase::new(seed);
    let only = c.run(&format!("only {{ {} }}", c.view));
    let count = c.run(&format!("count {{ {} }}", c.view));
    match (&only, &count) {
        (Ok(o), Ok(n)) if (o == "true") == (n == "1") => Ok(()),
        (Err(_), Err(_)) => Ok(()),
        _ => Err(format!("only/count disagree on `{}`: {only:?} vs {count:?}", c.view)),
    }
}

pub fn law_first_ranked_is_extreme(seed: u64) -> Result<(), String> {
    let c = ViewCase::new(seed);
    let (v, col) = (&c.view, COLUMNS[c.col]);
    for e in ["max", "min"] {
        same_outcome(
            &format!("nth_{e} vs {e} on `{v}`"),
            c.run(&format!("nth_{e} {{ {v} ; {col} ; 1 }}")),
            c.run(&format!("{e} {{ {v} ; {col} }}")),
        )?;
        same_outcome(
            &format!("nth_arg{e} vs arg{e} on `{v}`"),
            c.run(&format!("nth_arg{e} {{ {v} ; {col} ; 1 }}")),
            c.run(&format!("arg{e} {{ {v} ; {col} }}")),
        )?;
    }
    Ok(())
}

pub fn law_filter_all_identity(seed: u64) -> Result<(), String> {
    let c = ViewCase::new(seed);
    let filtered = c.rows();
    let plain = match c.view.as_str() {
        "all_rows" => Some((0..c.table.row_count()).collect()),
        v => match run_library(v, &c.table, &ExecConfig::default()) {
            Ok(Value::View(v)) => Some(v.row_indices),
            _ => None,
        },
    };
    if filtered == plain {
        Ok(())
    } else {
        Err(format!("filter_all changed `{}`: {filtered:?} vs {plain:?}", c.view))
    }
}

pub fn law_all_implies_most(seed: u64) -> Result<(), String> {
    let mut c = ViewCase::new(seed);
    let value = c.literal();
    if !c.rows().is_some_and(|r| !r.is_empty()) {
        return Ok(());
    }
    let (v, col) = (&c.view, COLUMNS[c.col]);
    for k in ["eq", "not_eq", "greater", "less", "greater_eq", "less_eq"] {
        let all = c.run(&format!("all_{k} {{ {v} ; {col} ; {value} }}"));
        let most = c.run(&format!("most_{k} {{ {v} ; {col} ; {value} }}"));
        if all.as_deref() == Ok("true") && most.as_deref() != Ok("true") {
            return Err(format!("all_{k} holds but most_{k} does not on `{v}` with `{value}`"));
        }
    }
    Ok(())
}

pub fn law_eq_not_eq_partition(seed: u64) -> Result<(), String> {
    let mut c = ViewCase::new(seed);
    let value = c.literal();
    let Some(rows) = c.rows() else { return Ok(()) };
    let (v, col) = (&c.view, COLUMNS[c.col]);
    let count = |f: &str| -> Result<usize, String> {
        c.run(&format!("count {{ {f} {{ {v} ; {col} ; {value} }} }}"))?.parse().map_err(|e| format!("{e}"))
    };
    let nonblank = rows.iter().filter(|&&i| !c.table.cell(i, c.col).value.is_blank()).count();
    let (eq, ne) = (count("filter_eq")?, count("filter_not_eq")?);
    if eq + ne == nonblank {
        Ok(())
    } else {
        Err(format!("`{v}` / {col} / `{value}`: {eq} equal + {ne} unequal != {nonblank} non-blank rows"))
    }
}

pub fn law_hop_of_arg_extreme(seed: u64) -> Result<(), String> {
    let c = ViewCase::new(seed);
    let (v, col) = (&c.view, COLUMNS[c.col]);
    for e in ["max", "min"] {
        let ext = c.scalar(&format!("{e} {{ {v} ; {col} }}"));
        let hop = c.scalar(&format!("hop {{ arg{e} {{ {v} ; {col} }} ; {col} }}"));
        match (&ext, &hop) {
            (None, None) => {}
            (Some(a), Some(b)) if compare_cells(a, b) == ComparisonOutcome::Equal => {}
            _ => return Err(format!("hop(arg{e}) vs {e} on `{v}`: {hop:?} vs {ext:?}")),
        }
    }
    Ok(())
}

pub fn law_classify_inverts_build(records: &[(AnswerRecord, Table, Ast)]) -> Result<(), String> {
    for (rec, _, ast) in records {
        let got = classify(ast);
        if got != Ok(rec.logic_type) {
            return Err(format!("`{}` built as {} classifies as {got:?}", ast.to_logic_str(), rec.logic_type));
        }
        match typecheck(ast) {
            Ok(t) if t.root_type() == SemType::Bool => {}
            other => return Err(format!("`{}` does not check as bool: {other:?}", ast.to_logic_str())),
        }
    }
    Ok(())
}
