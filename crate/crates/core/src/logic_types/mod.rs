//! The seven logic types: annotation questions, program prototypes, the
//! answers-to-program builder and the program classifier.

mod build;
pub(crate) mod classify;
mod questions;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use build::{build_from_answers, missing_answers, validate_answers, ValidationIssue};
pub use classify::classify;
pub use questions::{all_questions, question_set, AnswerKind, Dependency, Question};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicType {
    Count,
    Superlative,
    Comparative,
    Aggregation,
    Majority,
    Unique,
    Ordinal,
}

impl LogicType {
    pub const ALL: [LogicType; 7] = [
        LogicType::Count,
        LogicType::Superlative,
        LogicType::Comparative,
        LogicType::Aggregation,
        LogicType::Majority,
        LogicType::Unique,
        LogicType::Ordinal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LogicType::Count => "count",
            LogicType::Superlative => "superlative",
            LogicType::Comparative => "comparative",
            LogicType::Aggregation => "aggregation",
            LogicType::Majority => "majority",
            LogicType::Unique => "unique",
            LogicType::Ordinal => "ordinal",
        }
    }

    pub fn definition(self) -> &'static str {
        match self {
            LogicType::Count => "how many rows in a scope satisfy a condition on one column",
            LogicType::Superlative => "the row holding the largest or smallest value of a column, and facts about it",
            LogicType::Comparative => "a numeric relation between the same column of two rows",
            LogicType::Aggregation => "the sum or average of a column over a scope",
            LogicType::Majority => "a condition that holds for all or most rows of a scope",
            LogicType::Unique => "the single row in a scope that satisfies a condition, and facts about it",
            LogicType::Ordinal => "the row at a given rank when a column is sorted, and facts about it",
        }
    }

    /// Shape of the programs this type produces. `<x>` marks an answer
    /// slot, `[..]` an optional conjunct and `*` a repeated one.
    pub fn prototype(self) -> &'static str {
        match self {
            LogicType::Count => "eq { count { filter_<criterion> { <scope> ; <column> ; <value> } } ; <result> }",
            LogicType::Superlative => {
                "and { eq { hop { arg<max|min> { <scope> ; <column> } ; <subject column> } ; <subject> } ; \
                 [eq { <max|min> { <scope> ; <column> } ; <value> }] ; \
                 [eq { hop { arg<max|min> { <scope> ; <column> } ; <other column> } ; <other value> }]* }"
            }
            LogicType::Comparative => {
                "and { <relation> { hop { <row 1> ; <column> } ; hop { <row 2> ; <column> } } ; \
                 [eq { hop { <row i> ; <column> } ; <value i> }]* ; [eq { hop { <row i> ; <other column> } ; <other value i> }]* }"
            }
            LogicType::Aggregation => "round_eq { <sum|avg> { <scope> ; <column> } ; <result> }",
            LogicType::Majority => "<all|most>_<criterion> { <scope> ; <column> ; <value> }",
            LogicType::Unique => {
                "and { only { filter_<criterion> { <scope> ; <column> ; <value> } } ; \
                 eq { hop { filter_<criterion> { .. } ; <subject column> } ; <subject> } ; \
                 [eq { hop { filter_<criterion> { .. } ; <other column> } ; <other value> }]* }"
            }
            LogicType::Ordinal => {
                "and { eq { hop { nth_arg<max|min> { <scope> ; <column> ; <n> } ; <subject column> } ; <subject> } ; \
                 [eq { nth_<max|min> { <scope> ; <column> ; <n> } ; <value> }] ; \
                 [eq { hop { nth_arg<max|min> { .. } ; <other column> } ; <other value> }]* }"
            }
        }
    }
}

impl fmt::Display for LogicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogicType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_lowercase();
        LogicType::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown logic type `{s}`"))
    }
}

/// Row-selection criterion picked by an annotator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Equal,
    NotEqual,
    Less,
    LessEq,
    Greater,
    GreaterEq,
    FuzzyMatch,
    All,
    Other,
}

impl Criterion {
    pub const ALL: [Criterion; 9] = [
        Criterion::Equal,
        Criterion::NotEqual,
        Criterion::Less,
        Criterion::LessEq,
        Criterion::Greater,
        Criterion::GreaterEq,
        Criterion::FuzzyMatch,
        Criterion::All,
        Criterion::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Equal => "equal",
            Criterion::NotEqual => "not_equal",
            Criterion::Less => "less",
            Criterion::LessEq => "less_eq",
            Criterion::Greater => "greater",
            Criterion::GreaterEq => "greater_eq",
            Criterion::FuzzyMatch => "fuzzy_match",
            Criterion::All => "all",
            Criterion::Other => "other",
        }
    }

    /// Function-name suffix shared by `filter_`, `all_` and `most_`;
    /// `None` for criteria without a predicate.
    pub fn suffix(self) -> Option<&'static str> {
        Some(match self {
            Criterion::Equal => "eq",
            Criterion::NotEqual => "not_eq",
            Criterion::Less => "less",
            Criterion::LessEq => "less_eq",
            Criterion::Greater => "greater",
            Criterion::GreaterEq => "greater_eq",
            Criterion::FuzzyMatch => "str_eq",
            Criterion::All | Criterion::Other => return None,
        })
    }

    /// Whether the criterion orders values rather than matching them.
    pub fn is_ordering(self) -> bool {
        matches!(self, Criterion::Less | Criterion::LessEq | Criterion::Greater | Criterion::GreaterEq)
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL.into_iter().find(|c| c.name() == s.trim()).ok_or_else(|| format!("unknown criterion `{s}`"))
    }
}

/// One typed answer. Rows are zero-based indices into the table body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Choice(String),
    Column(String),
    Columns(Vec<String>),
    Row(usize),
    Value(String),
    Bool(bool),
}

impl Answer {
    pub fn kind(&self) -> AnswerKind {
        match self {
            Answer::Choice(_) => AnswerKind::Choice,
            Answer::Column(_) => AnswerKind::Column,
            Answer::Columns(_) => AnswerKind::Columns,
            Answer::Row(_) => AnswerKind::Row,
            Answer::Value(_) => AnswerKind::Value,
            Answer::Bool(_) => AnswerKind::Bool,
        }
    }
}

/// Answers to one logic type's questions, keyed by question id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub logic_type: LogicType,
    pub answers: BTreeMap<String, Answer>,
    /// Column naming the row a statement is about; the first column when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_column: Option<String>,
}

impl AnswerRecord {
    pub fn new(logic_type: LogicType) -> Self {
        AnswerRecord { logic_type, answers: BTreeMap::new(), subject_column: None }
    }

    pub fn with(mut self, id: &str, answer: Answer) -> Self {
        self.answers.insert(id.to_string(), answer);
        self
    }
}
