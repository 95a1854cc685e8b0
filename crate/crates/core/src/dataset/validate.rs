use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::Example;
use crate::logic_types::{classify, LogicType};
use crate::semantics::{evaluate_typed, typecheck, EvalLog, ExecConfig, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Parse,
    Typecheck,
    ExecFalse,
    ExecError,
}

/// Outcome counts. `parse_ok <= examples`, `typecheck_ok <= parse_ok` and
/// the three execution outcomes partition `typecheck_ok`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub examples: usize,
    pub parse_ok: usize,
    pub typecheck_ok: usize,
    pub exec_true: usize,
    pub exec_false: usize,
    pub exec_error: usize,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.examples += o.examples;
        self.parse_ok += o.parse_ok;
        self.typecheck_ok += o.typecheck_ok;
        self.exec_true += o.exec_true;
        self.exec_false += o.exec_false;
        self.exec_error += o.exec_error;
    }

    /// Share of examples that execute to true; 1 for an empty tally.
    pub fn exec_true_rate(&self) -> f64 {
        if self.examples == 0 {
            1.0
        } else {
            self.exec_true as f64 / self.examples as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub id: String,
    pub logic_type: LogicType,
    pub stage: Stage,
    pub diagnostic: String,
    pub logic_str: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub total: Tally,
    pub per_type: BTreeMap<LogicType, Tally>,
    /// In example order.
    pub failures: Vec<Failure>,
}

impl ValidationReport {
    /// Plain-text table of the tallies.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "type", "examples", "parse", "typed", "true", "false", "error", "true%"
        );
        let rows = self.per_type.iter().map(|(t, v)| (t.to_string(), v)).chain([("total".to_string(), &self.total)]);
        for (name, t) in rows {
            out.push_str(&format!(
                "{:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8.2}\n",
                name,
                t.examples,
                t.parse_ok,
                t.typecheck_ok,
                t.exec_true,
                t.exec_false,
                t.exec_error,
                100.0 * t.exec_true_rate()
            ));
        }
        out
    }
}

fn check(e: &Example, cfg: &ExecConfig) -> (Tally, Option<Failure>) {
    let mut t = Tally { examples: 1, ..Tally::default() };
    let fail = |stage, diagnostic: String| Failure {
        id: e.id.clone(),
        logic_type: e.logic_type,
        stage,
        diagnostic,
        logic_str: e.logic_str.clone(),
    };
    let Some(ast) = &e.ast else {
        let diag = crate::ast::parse_logic_str(&e.logic_str).err().map_or_else(String::new, |err| err.to_string());
        return (t, Some(fail(Stage::Parse, diag)));
    };
    t.parse_ok = 1;
    let typed = match typecheck(ast) {
        Ok(typed) => typed,
        Err(err) => return (t, Some(fail(Stage::Typecheck, err.to_string()))),
    };
    t.typecheck_ok = 1;
    let mut log = EvalLog::default();
    match evaluate_typed(&typed, &e.table, cfg, &mut log) {
        Ok(Value::Bool(true)) => {
            t.exec_true = 1;
            (t, None)
        }
        Ok(v) => {
            t.exec_false = 1;
            let notes: Vec<String> = log.notes.iter().map(|n| format!("{}: {}", n.func, n.message)).collect();
            let mut diag = format!("evaluates to {v}");
            if !notes.is_empty() {
                diag.push_str(&format!(" ({})", notes.join("; ")));
            }
            (t, Some(fail(Stage::ExecFalse, diag)))
        }
        Err(err) => {
            t.exec_error = 1;
            (t, Some(fail(Stage::ExecError, err.to_string())))
        }
    }
}

/// Parses, type checks and executes every example in parallel. The report
/// does not depend on thread scheduling.
pub fn validate_dataset(examples: &[Example], cfg: &ExecConfig) -> ValidationReport {
    let outcomes: Vec<(LogicType, Tally, Option<Failure>)> = examples
        .par_iter()
        .map(|e| {
            let (t, f) = check(e, cfg);
            (e.logic_type, t, f)
        })
        .collect();
    let mut report = ValidationReport::default();
    for (lt, t, f) in outcomes {
        report.total.add(&t);
        report.per_type.entry(lt).or_default().add(&t);
        report.failures.extend(f);
    }
    report
}

/// How often the classifier reproduces the annotated logic type.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Agreement {
    /// Examples with a parsed program.
    pub considered: usize,
    pub agree: usize,
    /// `(annotated, predicted)` to count; predicted `None` is unclassifiable.
    pub confusion: BTreeMap<(LogicType, Option<LogicType>), usize>,
}

impl Agreement {
    pub fn rate(&self) -> f64 {
        if self.considered == 0 {
            1.0
        } else {
            self.agree as f64 / self.considered as f64
        }
    }
}

pub fn classify_agreement(examples: &[Example]) -> Agreement {
    let mut a = Agreement::default();
    for e in examples {
        let Some(ast) = &e.ast else { continue };
        let predicted = classify(ast).ok();
        a.considered += 1;
        if predicted == Some(e.logic_type) {
            a.agree += 1;
        }
        *a.confusion.entry((e.logic_type, predicted)).or_default() += 1;
    }
    a
}
