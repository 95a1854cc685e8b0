//! The function set and its typed signatures.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Static type of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemType {
    Bool,
    Number,
    Row,
    View,
    /// Any scalar: number, date or text.
    Obj,
    /// A text node naming a column.
    HeaderStr,
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SemType::Bool => "bool",
            SemType::Number => "number",
            SemType::Row => "row",
            SemType::View => "view",
            SemType::Obj => "object",
            SemType::HeaderStr => "header string",
        };
        f.write_str(s)
    }
}

/// What an argument position accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgType {
    Exactly(SemType),
    /// `hop` takes a row, or a view under the configured policy.
    RowOrView,
}

impl ArgType {
    pub fn accepts(self, actual: SemType) -> bool {
        match self {
            ArgType::RowOrView => matches!(actual, SemType::Row | SemType::View),
            ArgType::Exactly(SemType::Obj) => matches!(actual, SemType::Obj | SemType::Number),
            ArgType::Exactly(t) => t == actual,
        }
    }
}

impl fmt::Display for ArgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgType::Exactly(t) => t.fmt(f),
            ArgType::RowOrView => f.write_str("row or view"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Extreme {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggKind {
    Max,
    Min,
    Avg,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareKind {
    Eq,
    NotEq,
    RoundEq,
    Greater,
    Less,
}

/// Row predicate shared by the filter, all and most families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Predicate {
    Eq,
    NotEq,
    Greater,
    Less,
    GreaterEq,
    LessEq,
}

impl Predicate {
    pub const ALL: [Predicate; 6] =
        [Predicate::Eq, Predicate::NotEq, Predicate::Greater, Predicate::Less, Predicate::GreaterEq, Predicate::LessEq];

    pub fn suffix(self) -> &'static str {
        match self {
            Predicate::Eq => "eq",
            Predicate::NotEq => "not_eq",
            Predicate::Greater => "greater",
            Predicate::Less => "less",
            Predicate::GreaterEq => "greater_eq",
            Predicate::LessEq => "less_eq",
        }
    }

    fn from_suffix(s: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.suffix() == s)
    }
}

/// Every function of the logical-form language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Function {
    Count,
    Only,
    Hop,
    And,
    Aggregate(AggKind),
    NthValue(Extreme),
    ArgExtreme(Extreme),
    NthArgExtreme(Extreme),
    Compare(CompareKind),
    Diff,
    Filter(Predicate),
    FilterAll,
    All(Predicate),
    Most(Predicate),
}

use ArgType::{Exactly, RowOrView};
use SemType::*;

const VIEW_HEADER: &[ArgType] = &[Exactly(View), Exactly(HeaderStr)];
const VIEW_HEADER_N: &[ArgType] = &[Exactly(View), Exactly(HeaderStr), Exactly(Number)];
const VIEW_HEADER_OBJ: &[ArgType] = &[Exactly(View), Exactly(HeaderStr), Exactly(Obj)];
const OBJ_OBJ: &[ArgType] = &[Exactly(Obj), Exactly(Obj)];

/// Alternative spellings found in released data, mapped onto the
/// canonical functions. String-specific variants share the fuzzy string
/// semantics of their plain counterparts.
const ALIASES: &[(&str, &str)] = &[
    ("str_eq", "eq"),
    ("not_str_eq", "not_eq"),
    ("str_hop", "hop"),
    ("num_hop", "hop"),
    ("str_hop_first", "hop"),
    ("num_hop_first", "hop"),
    ("filter_str_eq", "filter_eq"),
    ("filter_str_not_eq", "filter_not_eq"),
    ("all_str_eq", "all_eq"),
    ("all_str_not_eq", "all_not_eq"),
    ("most_str_eq", "most_eq"),
    ("most_str_not_eq", "most_not_eq"),
];

impl Function {
    pub fn from_name(name: &str) -> Option<Function> {
        let name = ALIASES.iter().find(|(a, _)| *a == name).map_or(name, |&(_, c)| c);
        let f = match name {
            "count" => Function::Count,
            "only" => Function::Only,
            "hop" => Function::Hop,
            "and" => Function::And,
            "max" => Function::Aggregate(AggKind::Max),
            "min" => Function::Aggregate(AggKind::Min),
            "avg" => Function::Aggregate(AggKind::Avg),
            "sum" => Function::Aggregate(AggKind::Sum),
            "nth_max" => Function::NthValue(Extreme::Max),
            "nth_min" => Function::NthValue(Extreme::Min),
            "argmax" => Function::ArgExtreme(Extreme::Max),
            "argmin" => Function::ArgExtreme(Extreme::Min),
            "nth_argmax" => Function::NthArgExtreme(Extreme::Max),
            "nth_argmin" => Function::NthArgExtreme(Extreme::Min),
            "eq" => Function::Compare(CompareKind::Eq),
            "not_eq" => Function::Compare(CompareKind::NotEq),
            "round_eq" => Function::Compare(CompareKind::RoundEq),
            "greater" => Function::Compare(CompareKind::Greater),
            "less" => Function::Compare(CompareKind::Less),
            "diff" => Function::Diff,
            "filter_all" => Function::FilterAll,
            other => {
                if let Some(p) = other.strip_prefix("filter_").and_then(Predicate::from_suffix) {
                    Function::Filter(p)
                } else if let Some(p) = other.strip_prefix("all_").and_then(Predicate::from_suffix) {
                    Function::All(p)
                } else if let Some(p) = other.strip_prefix("most_").and_then(Predicate::from_suffix) {
                    Function::Most(p)
                } else {
                    return None;
                }
            }
        };
        Some(f)
    }

    /// True for the string-specific alias spellings (`str_eq`, ...).
    pub fn is_string_alias(name: &str) -> bool {
        name.contains("str_")
    }

    pub fn name(self) -> String {
        match self {
            Function::Count => "count".into(),
            Function::Only => "only".into(),
            Function::Hop => "hop".into(),
            Function::And => "and".into(),
            Function::Aggregate(k) => match k {
                AggKind::Max => "max",
                AggKind::Min => "min",
                AggKind::Avg => "avg",
                AggKind::Sum => "sum",
            }
            .into(),
            Function::NthValue(Extreme::Max) => "nth_max".into(),
            Function::NthValue(Extreme::Min) => "nth_min".into(),
            Function::ArgExtreme(Extreme::Max) => "argmax".into(),
            Function::ArgExtreme(Extreme::Min) => "argmin".into(),
            Function::NthArgExtreme(Extreme::Max) => "nth_argmax".into(),
            Function::NthArgExtreme(Extreme::Min) => "nth_argmin".into(),
            Function::Compare(k) => match k {
                CompareKind::Eq => "eq",
                CompareKind::NotEq => "not_eq",
                CompareKind::RoundEq => "round_eq",
                CompareKind::Greater => "greater",
                CompareKind::Less => "less",
            }
            .into(),
            Function::Diff => "diff".into(),
            Function::Filter(p) => format!("filter_{}", p.suffix()),
            Function::FilterAll => "filter_all".into(),
            Function::All(p) => format!("all_{}", p.suffix()),
            Function::Most(p) => format!("most_{}", p.suffix()),
        }
    }

    pub fn signature(self) -> (&'static [ArgType], SemType) {
        match self {
            Function::Count => (&[Exactly(View)], Number),
            Function::Only => (&[Exactly(View)], Bool),
            Function::Hop => (&[RowOrView, Exactly(HeaderStr)], Obj),
            Function::And => (&[Exactly(Bool), Exactly(Bool)], Bool),
            Function::Aggregate(_) => (VIEW_HEADER, Number),
            Function::NthValue(_) => (VIEW_HEADER_N, Number),
            Function::ArgExtreme(_) => (VIEW_HEADER, Row),
            Function::NthArgExtreme(_) => (VIEW_HEADER_N, Row),
            Function::Compare(_) => (OBJ_OBJ, Bool),
            Function::Diff => (OBJ_OBJ, Obj),
            Function::Filter(_) => (VIEW_HEADER_OBJ, View),
            Function::FilterAll => (VIEW_HEADER, View),
            Function::All(_) | Function::Most(_) => (VIEW_HEADER_OBJ, Bool),
        }
    }

    /// Every canonical function, in a fixed order.
    pub fn all() -> Vec<Function> {
        let mut v = vec![Function::Count, Function::Only, Function::Hop, Function::And];
        v.extend([AggKind::Max, AggKind::Min, AggKind::Avg, AggKind::Sum].map(Function::Aggregate));
        for e in [Extreme::Max, Extreme::Min] {
            v.extend([Function::NthValue(e), Function::ArgExtreme(e), Function::NthArgExtreme(e)]);
        }
        v.extend(
            [CompareKind::Eq, CompareKind::NotEq, CompareKind::RoundEq, CompareKind::Greater, CompareKind::Less]
                .map(Function::Compare),
        );
        v.push(Function::Diff);
        v.extend(Predicate::ALL.map(Function::Filter));
        v.push(Function::FilterAll);
        v.extend(Predicate::ALL.map(Function::All));
        v.extend(Predicate::ALL.map(Function::Most));
        v
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
