//! Derivation sessions: answer a logic type's questions one at a time and
//! watch the derived program update.

use std::collections::BTreeMap;
use std::sync::Arc;

use lftab_core::logic_types::{all_questions, missing_answers, AnswerKind, Question};
use lftab_core::{
    build_from_answers, classify, evaluate, interpret, Answer, AnswerRecord, Ast, ExecConfig, LogicType, Table, Value,
};
use serde::Serialize;

use crate::error::{ApiError, Kind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preview {
    pub ast: Ast,
    pub logic_str: String,
    pub interpretation: String,
    pub exec_result: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finalized {
    pub logic_str: String,
    pub logic_type: LogicType,
    pub interpretation: String,
    pub exec_result: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub table: Arc<Table>,
    pub record: AnswerRecord,
    cfg: ExecConfig,
    preview: Option<Preview>,
    build_error: Option<ApiError>,
    finalized: Option<Finalized>,
}

/// What a client sees of a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub table_id: String,
    pub logic_type: LogicType,
    pub answers: BTreeMap<String, Answer>,
    /// Unanswered questions that currently apply, in asking order.
    pub pending: Vec<String>,
    /// The one question that may be answered next.
    pub current: Option<Question>,
    pub preview: Option<Preview>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build_error: Option<ApiError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finalized: Option<Finalized>,
}

fn answer_error(code: &str, message: String) -> ApiError {
    ApiError::new(Kind::Domain, code, message)
}

impl Session {
    pub fn new(id: impl Into<String>, table: Arc<Table>, logic_type: LogicType, cfg: ExecConfig) -> Self {
        Session {
            id: id.into(),
            table,
            record: AnswerRecord::new(logic_type),
            cfg,
            preview: None,
            build_error: None,
            finalized: None,
        }
    }

    pub fn logic_type(&self) -> LogicType {
        self.record.logic_type
    }

    pub fn pending(&self) -> Vec<String> {
        missing_answers(&self.record)
    }

    pub fn current(&self) -> Option<Question> {
        let next = self.pending().into_iter().next()?;
        all_questions(self.logic_type()).into_iter().find(|q| q.id == next)
    }

    pub fn preview(&self) -> Option<&Preview> {
        self.preview.as_ref()
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            table_id: self.table.table_id.clone(),
            logic_type: self.logic_type(),
            answers: self.record.answers.clone(),
            pending: self.pending(),
            current: self.current(),
            preview: self.preview.clone(),
            build_error: self.build_error.clone(),
            finalized: self.finalized.clone(),
        }
    }

    fn check_answer(&self, q: &Question, answer: &Answer) -> Result<(), ApiError> {
        let kind_ok = answer.kind() == q.kind || (q.kind == AnswerKind::Columns && answer.kind() == AnswerKind::Value);
        if !kind_ok {
            return Err(answer_error(
                "WrongAnswerType",
                format!("{} expects a {:?} answer, got {:?}", q.id, q.kind, answer.kind()).to_lowercase(),
            ));
        }
        let column = |name: &str| match self.table.find_column(name) {
            Some(_) => Ok(()),
            None => Err(answer_error("ColumnNotFound", format!("column `{name}` not found"))),
        };
        match answer {
            Answer::Choice(c) if !q.choices.contains(c) => {
                Err(answer_error("InvalidChoice", format!("`{c}` is not one of {}", q.choices.join(", "))))
            }
            Answer::Column(c) => column(c),
            Answer::Columns(cs) => cs.iter().try_for_each(|c| column(c)),
            Answer::Row(r) if *r >= self.table.row_count() => {
                Err(answer_error("RowNotFound", format!("row {r} not in table of {} rows", self.table.row_count())))
            }
            _ => Ok(()),
        }
    }

    /// Records the answer to the current question and refreshes the preview.
    pub fn answer(&mut self, question_id: &str, answer: Answer) -> Result<(), ApiError> {
        if self.finalized.is_some() {
            return Err(ApiError::new(Kind::Conflict, "SessionFinalized", format!("session {} is finalized", self.id)));
        }
        let Some(q) = all_questions(self.logic_type()).into_iter().find(|q| q.id == question_id) else {
            return Err(answer_error(
                "UnknownQuestion",
                format!("no question {question_id} for {}", self.logic_type()),
            ));
        };
        match self.current() {
            Some(cur) if cur.id == question_id => {}
            Some(cur) => {
                return Err(answer_error(
                    "QuestionNotAskable",
                    format!("{question_id} cannot be answered now; the next question is {}", cur.id),
                ))
            }
            None => {
                return Err(answer_error(
                    "QuestionNotAskable",
                    format!("{question_id} does not apply to these answers"),
                ))
            }
        }
        self.check_answer(&q, &answer)?;
        self.record.answers.insert(question_id.to_string(), answer);
        self.refresh();
        Ok(())
    }

    fn refresh(&mut self) {
        self.preview = None;
        self.build_error = None;
        if !self.pending().is_empty() {
            return;
        }
        match build_from_answers(&self.record, &self.table) {
            Ok(ast) => {
                let (exec_result, exec_error) = match evaluate(&ast, &self.table, &self.cfg) {
                    Ok(v) => (v == Value::Bool(true), None),
                    Err(e) => (false, Some(e.to_string())),
                };
                self.preview = Some(Preview {
                    logic_str: ast.to_logic_str(),
                    interpretation: interpret(&ast),
                    ast,
                    exec_result,
                    exec_error,
                });
            }
            Err(e) => self.build_error = Some(ApiError::domain(e)),
        }
    }

    /// Accepts the derived program only when it executes to true.
    pub fn finalize(&mut self, sentence: Option<String>) -> Result<Finalized, ApiError> {
        if self.finalized.is_some() {
            return Err(ApiError::new(Kind::Conflict, "SessionFinalized", format!("session {} is finalized", self.id)));
        }
        let pending = self.pending();
        if !pending.is_empty() {
            return Err(answer_error("IncompleteSession", format!("unanswered: {}", pending.join(", "))));
        }
        if let Some(e) = &self.build_error {
            return Err(e.clone());
        }
        let preview = self.preview.as_ref().expect("complete sessions have a preview or a build error");
        if !preview.exec_result {
            let why = preview.exec_error.as_deref().unwrap_or("evaluates to false");
            return Err(answer_error("ExecutionFalse", format!("`{}`: {why}", preview.logic_str)));
        }
        let classified = classify(&preview.ast).map_err(ApiError::domain)?;
        if classified != self.logic_type() {
            return Err(answer_error(
                "ClassificationMismatch",
                format!("derived program classifies as {classified}, not {}", self.logic_type()),
            ));
        }
        let done = Finalized {
            logic_str: preview.logic_str.clone(),
            logic_type: self.logic_type(),
            interpretation: preview.interpretation.clone(),
            exec_result: true,
            sentence: sentence.filter(|s| !s.trim().is_empty()),
        };
        self.finalized = Some(done.clone());
        Ok(done)
    }
}
