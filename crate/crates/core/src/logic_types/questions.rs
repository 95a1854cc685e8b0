use std::collections::HashMap;
use std::sync::LazyLock;

use serde::Serialize;

use super::{Criterion, LogicType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerKind {
    Choice,
    Column,
    Columns,
    Row,
    Value,
    Bool,
}

/// A question is asked only when another answer has (or lacks) a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependency {
    ChoiceIs { question: String, choice: String },
    ChoiceIsNot { question: String, choice: String },
}

impl Dependency {
    pub fn question(&self) -> &str {
        match self {
            Dependency::ChoiceIs { question, .. } | Dependency::ChoiceIsNot { question, .. } => question,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Question {
    pub id: String,
    pub prompt: String,
    pub kind: AnswerKind,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depends_on: Option<Dependency>,
    /// Questions asked right after this one when their dependency holds.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub follow_ups: Vec<Question>,
}

static PROMPTS: LazyLock<HashMap<String, String>> = LazyLock::new(|| {
    include_str!("../../resources/questions.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
});

fn prompt(key: &str) -> String {
    PROMPTS.get(key).cloned().unwrap_or_else(|| panic!("questions resource lacks `{key}`"))
}

fn q(lt: LogicType, n: usize, kind: AnswerKind, choices: &[&str]) -> Question {
    Question {
        id: format!("Q{n}"),
        prompt: prompt(&format!("{}.Q{n}", lt.name())),
        kind,
        choices: choices.iter().map(|s| s.to_string()).collect(),
        depends_on: None,
        follow_ups: Vec::new(),
    }
}

fn criteria(list: &[Criterion]) -> Vec<&'static str> {
    list.iter().map(|c| c.name()).collect()
}

const SCOPE_CRITERIA: [Criterion; 8] = [
    Criterion::Equal,
    Criterion::NotEqual,
    Criterion::Less,
    Criterion::LessEq,
    Criterion::Greater,
    Criterion::GreaterEq,
    Criterion::FuzzyMatch,
    Criterion::Other,
];

fn scope_question(lt: LogicType) -> Question {
    let mut scope = q(lt, 1, AnswerKind::Choice, &["all", "subset"]);
    let when_subset = || Some(Dependency::ChoiceIs { question: "Q1".into(), choice: "subset".into() });
    let follow = |suffix: &str, kind: AnswerKind, choices: Vec<&str>| Question {
        id: format!("Q1.{suffix}"),
        prompt: prompt(&format!("scope.{suffix}")),
        kind,
        choices: choices.into_iter().map(String::from).collect(),
        depends_on: when_subset(),
        follow_ups: Vec::new(),
    };
    scope.follow_ups = vec![
        follow("column", AnswerKind::Column, vec![]),
        follow("criterion", AnswerKind::Choice, criteria(&SCOPE_CRITERIA)),
        follow("value", AnswerKind::Value, vec![]),
    ];
    scope
}

/// The ordered top-level questions for a logic type. Scope questions carry
/// their subset follow-ups in `follow_ups`.
pub fn question_set(lt: LogicType) -> Vec<Question> {
    use AnswerKind::*;
    match lt {
        LogicType::Count => {
            let mut value = q(lt, 4, Value, &[]);
            value.depends_on = Some(Dependency::ChoiceIsNot { question: "Q3".into(), choice: "all".into() });
            vec![
                scope_question(lt),
                q(lt, 2, Column, &[]),
                q(lt, 3, Choice, &criteria(&Criterion::ALL)),
                value,
                q(lt, 5, Value, &[]),
            ]
        }
        LogicType::Superlative => vec![
            scope_question(lt),
            q(lt, 2, Column, &[]),
            q(lt, 3, Choice, &["max", "min"]),
            q(lt, 4, Row, &[]),
            q(lt, 5, Columns, &[]),
            q(lt, 6, Bool, &[]),
        ],
        LogicType::Aggregation => {
            vec![scope_question(lt), q(lt, 2, Column, &[]), q(lt, 3, Choice, &["sum", "average"]), q(lt, 4, Value, &[])]
        }
        LogicType::Comparative => vec![
            q(lt, 1, Column, &[]),
            q(lt, 2, Row, &[]),
            q(lt, 3, Row, &[]),
            q(lt, 4, Choice, &["greater", "less", "equal", "not_equal", "diff", "other"]),
            q(lt, 5, Bool, &[]),
            q(lt, 6, Columns, &[]),
        ],
        LogicType::Majority => vec![
            scope_question(lt),
            q(lt, 2, Column, &[]),
            q(lt, 3, Choice, &["all", "most"]),
            q(lt, 4, Choice, &criteria(&SCOPE_CRITERIA)),
            q(lt, 5, Value, &[]),
        ],
        LogicType::Ordinal => vec![
            scope_question(lt),
            q(lt, 2, Column, &[]),
            q(lt, 3, Choice, &["max_to_min", "min_to_max"]),
            q(lt, 4, Value, &[]),
            q(lt, 5, Row, &[]),
            q(lt, 6, Columns, &[]),
            q(lt, 7, Bool, &[]),
        ],
        LogicType::Unique => vec![
            scope_question(lt),
            q(lt, 2, Row, &[]),
            q(lt, 3, Column, &[]),
            q(lt, 4, Choice, &criteria(&SCOPE_CRITERIA)),
            q(lt, 5, Value, &[]),
            q(lt, 6, Columns, &[]),
        ],
    }
}

/// Every question including follow-ups, in asking order.
pub fn all_questions(lt: LogicType) -> Vec<Question> {
    let mut out = Vec::new();
    for mut question in question_set(lt) {
        let follow_ups = std::mem::take(&mut question.follow_ups);
        out.push(question);
        out.extend(follow_ups);
    }
    out
}
