use serde::Serialize;

use super::questions::{all_questions, AnswerKind, Dependency};
use super::{Answer, AnswerRecord, Criterion, LogicType};
use crate::ast::{Ast, Node};
use crate::error::BuildError;
use crate::semantics::{evaluate, ExecConfig, Value, ALL_ROWS};
use crate::table::{parse_cell, CellKind, Table};

/// Ids of questions whose dependency holds but which have no answer.
pub fn missing_answers(rec: &AnswerRecord) -> Vec<String> {
    all_questions(rec.logic_type)
        .into_iter()
        .filter(|q| applies(rec, q.depends_on.as_ref()))
        .filter(|q| !rec.answers.contains_key(&q.id))
        .map(|q| q.id)
        .collect()
}

fn applies(rec: &AnswerRecord, dep: Option<&Dependency>) -> bool {
    let choice = |q: &str| match rec.answers.get(q) {
        Some(Answer::Choice(c)) => Some(c.as_str()),
        _ => None,
    };
    match dep {
        None => true,
        Some(Dependency::ChoiceIs { question, choice: want }) => choice(question) == Some(want),
        Some(Dependency::ChoiceIsNot { question, choice: want }) => choice(question) != Some(want),
    }
}

/// Text usable as a program leaf: structural characters are blanked.
fn literal(raw: &str) -> Node {
    let cleaned: String = raw.chars().map(|c| if matches!(c, '{' | '}' | ';') { ' ' } else { c }).collect();
    if cleaned.trim().is_empty() {
        Node::text("n/a")
    } else {
        Node::text(cleaned)
    }
}

fn call(name: impl Into<String>, children: Vec<Node>) -> Node {
    Node::func(name, children)
}

fn eq(a: Node, b: Node) -> Node {
    call("eq", vec![a, b])
}

fn hop(target: Node, col: Node) -> Node {
    call("hop", vec![target, col])
}

/// Right-nested conjunction of at least one clause.
fn conjoin(mut clauses: Vec<Node>) -> Node {
    let mut acc = clauses.pop().expect("at least one clause");
    while let Some(c) = clauses.pop() {
        acc = call("and", vec![c, acc]);
    }
    acc
}

struct Answers<'a> {
    rec: &'a AnswerRecord,
    table: &'a Table,
}

impl<'a> Answers<'a> {
    fn get(&self, id: &str) -> Result<&'a Answer, BuildError> {
        self.rec.answers.get(id).ok_or_else(|| BuildError::IncompleteAnswers(format!("unanswered: {id}")))
    }

    fn wrong(id: &str, expected: &str) -> BuildError {
        BuildError::WrongAnswerType { question: id.to_string(), expected: expected.to_string() }
    }

    fn choice(&self, id: &str) -> Result<&'a str, BuildError> {
        match self.get(id)? {
            Answer::Choice(c) => Ok(c.as_str()),
            _ => Err(Self::wrong(id, "choice")),
        }
    }

    fn criterion(&self, id: &str) -> Result<Criterion, BuildError> {
        self.choice(id)?.parse().map_err(|_| Self::wrong(id, "criterion"))
    }

    fn resolve_column(&self, name: &str) -> Result<usize, BuildError> {
        self.table.find_column(name).ok_or_else(|| BuildError::ColumnNotFound(name.to_string()))
    }

    fn column(&self, id: &str) -> Result<usize, BuildError> {
        match self.get(id)? {
            Answer::Column(c) => self.resolve_column(c),
            _ => Err(Self::wrong(id, "column")),
        }
    }

    /// `n/a` or an empty list both mean no other columns.
    fn columns(&self, id: &str) -> Result<Vec<usize>, BuildError> {
        match self.get(id)? {
            Answer::Columns(cs) => cs
                .iter()
                .filter(|c| !c.trim().is_empty() && c.trim() != "n/a")
                .map(|c| self.resolve_column(c))
                .collect(),
            Answer::Value(v) if v.trim() == "n/a" => Ok(Vec::new()),
            _ => Err(Self::wrong(id, "columns")),
        }
    }

    fn row(&self, id: &str) -> Result<usize, BuildError> {
        match self.get(id)? {
            Answer::Row(r) if *r < self.table.row_count() => Ok(*r),
            Answer::Row(r) => Err(BuildError::RowNotFound(*r)),
            _ => Err(Self::wrong(id, "row")),
        }
    }

    fn value(&self, id: &str) -> Result<&'a str, BuildError> {
        match self.get(id)? {
            Answer::Value(v) if !v.trim().is_empty() => Ok(v.as_str()),
            Answer::Value(_) => Err(BuildError::IncompleteAnswers(format!("unanswered: {id}"))),
            _ => Err(Self::wrong(id, "value")),
        }
    }

    fn flag(&self, id: &str) -> Result<bool, BuildError> {
        match self.get(id)? {
            Answer::Bool(b) => Ok(*b),
            _ => Err(Self::wrong(id, "yes/no")),
        }
    }

    fn header(&self, col: usize) -> Node {
        literal(&self.table.columns[col])
    }

    fn cell(&self, row: usize, col: usize) -> Node {
        literal(&self.table.cell(row, col).raw)
    }

    fn subject(&self) -> Result<usize, BuildError> {
        match &self.rec.subject_column {
            Some(name) => self.resolve_column(name),
            None => Ok(0),
        }
    }

    /// `filter_<criterion> { view ; col ; value }`.
    fn filter(&self, view: Node, col: usize, criterion: Criterion, value: Option<&str>) -> Result<Node, BuildError> {
        match (criterion, criterion.suffix()) {
            (Criterion::All, _) => Ok(call("filter_all", vec![view, self.header(col)])),
            (_, None) => Err(BuildError::UnbuildableCriterion),
            (_, Some(suffix)) => {
                let value = value.ok_or_else(|| BuildError::IncompleteAnswers("missing filter value".into()))?;
                Ok(call(format!("filter_{suffix}"), vec![view, self.header(col), literal(value)]))
            }
        }
    }

    fn scope(&self) -> Result<Node, BuildError> {
        match self.choice("Q1")? {
            "all" => Ok(Node::text(ALL_ROWS)),
            "subset" => {
                let col = self.column("Q1.column")?;
                let criterion = self.criterion("Q1.criterion")?;
                if criterion == Criterion::All {
                    return Err(BuildError::UnbuildableCriterion);
                }
                self.filter(Node::text(ALL_ROWS), col, criterion, Some(self.value("Q1.value")?))
            }
            _ => Err(Self::wrong("Q1", "all or subset")),
        }
    }

    /// The selection of one row by its subject value.
    fn select_row(&self, row: usize) -> Result<Node, BuildError> {
        let subj = self.subject()?;
        Ok(call("filter_eq", vec![Node::text(ALL_ROWS), self.header(subj), self.cell(row, subj)]))
    }

    /// Conjuncts `eq { hop { target ; c } ; cell }` for the row's subject
    /// followed by the other mentioned columns.
    fn row_facts(&self, target: &Node, row: usize, others: &[usize]) -> Result<Vec<Node>, BuildError> {
        let subj = self.subject()?;
        let mut cols = vec![subj];
        cols.extend(others.iter().copied().filter(|&c| c != subj));
        Ok(cols.into_iter().map(|c| eq(hop(target.clone(), self.header(c)), self.cell(row, c))).collect())
    }
}

/// Instantiates the logic type's prototype with the answers.
pub fn build_from_answers(rec: &AnswerRecord, table: &Table) -> Result<Ast, BuildError> {
    let missing = missing_answers(rec);
    if !missing.is_empty() {
        return Err(BuildError::IncompleteAnswers(format!("unanswered: {}", missing.join(", "))));
    }
    let a = Answers { rec, table };
    let root = match rec.logic_type {
        LogicType::Count => build_count(&a)?,
        LogicType::Superlative => build_superlative(&a)?,
        LogicType::Aggregation => build_aggregation(&a)?,
        LogicType::Comparative => build_comparative(&a)?,
        LogicType::Majority => build_majority(&a)?,
        LogicType::Unique => build_unique(&a)?,
        LogicType::Ordinal => build_ordinal(&a)?,
    };
    match root {
        Node::Func(f) => Ok(Ast::new(f)),
        Node::Text(_) => unreachable!("builders return calls"),
    }
}

fn build_count(a: &Answers) -> Result<Node, BuildError> {
    let scope = a.scope()?;
    let col = a.column("Q2")?;
    let criterion = a.criterion("Q3")?;
    let value = if criterion == Criterion::All { None } else { Some(a.value("Q4")?) };
    let rows = a.filter(scope, col, criterion, value)?;
    Ok(eq(call("count", vec![rows]), literal(a.value("Q5")?)))
}

fn build_superlative(a: &Answers) -> Result<Node, BuildError> {
    let scope = a.scope()?;
    let col = a.column("Q2")?;
    let extreme = match a.choice("Q3")? {
        e @ ("max" | "min") => e,
        _ => return Err(Answers::wrong("Q3", "max or min")),
    };
    let row = a.row("Q4")?;
    let others = a.columns("Q5")?;
    let mentioned = a.flag("Q6")?;
    let target = call(format!("arg{extreme}"), vec![scope.clone(), a.header(col)]);
    let mut clauses = a.row_facts(&target, row, &[])?;
    if mentioned {
        clauses.push(eq(call(extreme, vec![scope, a.header(col)]), a.cell(row, col)));
    }
    clauses.extend(a.row_facts(&target, row, &others)?.into_iter().skip(1));
    Ok(conjoin(clauses))
}

fn build_ordinal(a: &Answers) -> Result<Node, BuildError> {
    let scope = a.scope()?;
    let col = a.column("Q2")?;
    let extreme = match a.choice("Q3")? {
        "max_to_min" => "max",
        "min_to_max" => "min",
        _ => return Err(Answers::wrong("Q3", "max_to_min or min_to_max")),
    };
    let n = a.value("Q4")?;
    if parse_cell(n).first_number.is_none() {
        return Err(Answers::wrong("Q4", "number"));
    }
    let row = a.row("Q5")?;
    let others = a.columns("Q6")?;
    let mentioned = a.flag("Q7")?;
    let target = call(format!("nth_arg{extreme}"), vec![scope.clone(), a.header(col), literal(n)]);
    let mut clauses = a.row_facts(&target, row, &[])?;
    if mentioned {
        clauses.push(eq(call(format!("nth_{extreme}"), vec![scope, a.header(col), literal(n)]), a.cell(row, col)));
    }
    clauses.extend(a.row_facts(&target, row, &others)?.into_iter().skip(1));
    Ok(conjoin(clauses))
}

fn build_aggregation(a: &Answers) -> Result<Node, BuildError> {
    let scope = a.scope()?;
    let col = a.column("Q2")?;
    let func = match a.choice("Q3")? {
        "sum" => "sum",
        "average" | "avg" => "avg",
        _ => return Err(Answers::wrong("Q3", "sum or average")),
    };
    Ok(call("round_eq", vec![call(func, vec![scope, a.header(col)]), literal(a.value("Q4")?)]))
}

fn build_comparative(a: &Answers) -> Result<Node, BuildError> {
    let col = a.column("Q1")?;
    let rows = [a.row("Q2")?, a.row("Q3")?];
    let relation = a.choice("Q4")?;
    let mentioned = a.flag("Q5")?;
    let others = a.columns("Q6")?;
    let sel = [a.select_row(rows[0])?, a.select_row(rows[1])?];
    let lhs = hop(sel[0].clone(), a.header(col));
    let rhs = hop(sel[1].clone(), a.header(col));
    let core = match relation {
        "greater" | "less" => call(relation, vec![lhs, rhs]),
        "equal" => eq(lhs, rhs),
        "not_equal" => call("not_eq", vec![lhs, rhs]),
        "diff" => {
            let x = &a.table.cell(rows[0], col).value;
            let y = &a.table.cell(rows[1], col).value;
            let d = crate::semantics::eval_diff(x, y)?;
            eq(call("diff", vec![lhs, rhs]), literal(&d.text))
        }
        "other" => return Err(BuildError::UnbuildableCriterion),
        _ => return Err(Answers::wrong("Q4", "comparison relation")),
    };
    let mut clauses = vec![core];
    if mentioned {
        for i in 0..2 {
            clauses.push(eq(hop(sel[i].clone(), a.header(col)), a.cell(rows[i], col)));
        }
    }
    for &oc in &others {
        for i in 0..2 {
            clauses.push(eq(hop(sel[i].clone(), a.header(oc)), a.cell(rows[i], oc)));
        }
    }
    Ok(conjoin(clauses))
}

fn build_majority(a: &Answers) -> Result<Node, BuildError> {
    let scope = a.scope()?;
    let col = a.column("Q2")?;
    let quantifier = match a.choice("Q3")? {
        q @ ("all" | "most") => q,
        _ => return Err(Answers::wrong("Q3", "all or most")),
    };
    let suffix = a.criterion("Q4")?.suffix().ok_or(BuildError::UnbuildableCriterion)?;
    Ok(call(format!("{quantifier}_{suffix}"), vec![scope, a.header(col), literal(a.value("Q5")?)]))
}

fn build_unique(a: &Answers) -> Result<Node, BuildError> {
    let scope = a.scope()?;
    let row = a.row("Q2")?;
    let col = a.column("Q3")?;
    let criterion = a.criterion("Q4")?;
    if criterion == Criterion::All {
        return Err(BuildError::UnbuildableCriterion);
    }
    let rows = a.filter(scope, col, criterion, Some(a.value("Q5")?))?;
    let others = a.columns("Q6")?;
    let mut clauses = vec![call("only", vec![rows.clone()])];
    clauses.extend(a.row_facts(&rows, row, &others)?);
    Ok(conjoin(clauses))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationIssue {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub message: String,
}

impl ValidationIssue {
    fn at(question: &str, message: impl Into<String>) -> Self {
        ValidationIssue { question: Some(question.to_string()), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        ValidationIssue { question: None, message: message.into() }
    }
}

/// Criterion question id paired with the id of the value it filters by.
const CRITERION_VALUES: &[(LogicType, &str, &str)] =
    &[(LogicType::Count, "Q3", "Q4"), (LogicType::Majority, "Q4", "Q5"), (LogicType::Unique, "Q4", "Q5")];

/// Checks answers against the question set and the table, then executes
/// the derived program. An empty result means the record is consistent.
pub fn validate_answers(rec: &AnswerRecord, table: &Table, cfg: &ExecConfig) -> Vec<ValidationIssue> {
    let mut issues: Vec<ValidationIssue> = Vec::new();
    let questions = all_questions(rec.logic_type);
    for q in &questions {
        if !applies(rec, q.depends_on.as_ref()) {
            continue;
        }
        match rec.answers.get(&q.id) {
            None => issues.push(ValidationIssue::at(&q.id, format!("unanswered: {}", q.id))),
            Some(ans) => {
                let kind_ok =
                    ans.kind() == q.kind || (q.kind == AnswerKind::Columns && ans.kind() == AnswerKind::Value);
                if !kind_ok {
                    issues.push(ValidationIssue::at(&q.id, format!("expected a {:?} answer", q.kind).to_lowercase()));
                } else if let Answer::Choice(c) = ans {
                    if !q.choices.iter().any(|x| x == c) {
                        issues
                            .push(ValidationIssue::at(&q.id, format!("`{c}` is not one of {}", q.choices.join(", "))));
                    }
                }
            }
        }
    }
    for id in rec.answers.keys() {
        if !questions.iter().any(|q| &q.id == id) {
            issues.push(ValidationIssue::at(id, format!("no question {id} for {}", rec.logic_type)));
        }
    }

    let mut pairs: Vec<(&str, &str)> =
        CRITERION_VALUES.iter().filter(|(t, ..)| *t == rec.logic_type).map(|&(_, c, v)| (c, v)).collect();
    pairs.push(("Q1.criterion", "Q1.value"));
    for (cq, vq) in pairs {
        let (Some(Answer::Choice(c)), Some(Answer::Value(v))) = (rec.answers.get(cq), rec.answers.get(vq)) else {
            continue;
        };
        let Ok(criterion) = c.parse::<Criterion>() else { continue };
        let value = parse_cell(v);
        if criterion.is_ordering() && value.numeric().is_none() && value.kind != CellKind::Date {
            issues.push(ValidationIssue::at(vq, format!("value `{v}` is not comparable under `{c}`")));
        }
    }
    if !issues.is_empty() {
        return issues;
    }

    match build_from_answers(rec, table) {
        Err(e) => issues.push(match &e {
            BuildError::WrongAnswerType { question, .. } => ValidationIssue::at(question, e.to_string()),
            _ => ValidationIssue::general(e.to_string()),
        }),
        Ok(ast) => match evaluate(&ast, table, cfg) {
            Ok(Value::Bool(true)) => {}
            Ok(_) => issues.push(ValidationIssue::general(format!("execution mismatch: `{ast}` evaluates to false"))),
            Err(e) => issues.push(ValidationIssue::general(format!("execution error: {e}"))),
        },
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::opec_2012;

    fn count_record(result: &str) -> AnswerRecord {
        AnswerRecord::new(LogicType::Count)
            .with("Q1", Answer::Choice("all".into()))
            .with("Q2", Answer::Column("region".into()))
            .with("Q3", Answer::Choice("equal".into()))
            .with("Q4", Answer::Value("africa".into()))
            .with("Q5", Answer::Value(result.into()))
    }

    #[test]
    fn count_builds_prototype() {
        let ast = build_from_answers(&count_record("4"), &opec_2012()).unwrap();
        assert_eq!(ast.to_logic_str(), "eq { count { filter_eq { all_rows ; region ; africa } } ; 4 }");
    }

    #[test]
    fn superlative_builds_prototype() {
        let rec = AnswerRecord::new(LogicType::Superlative)
            .with("Q1", Answer::Choice("all".into()))
            .with("Q2", Answer::Column("joined".into()))
            .with("Q3", Answer::Choice("max".into()))
            .with("Q4", Answer::Row(1))
            .with("Q5", Answer::Columns(vec![]))
            .with("Q6", Answer::Bool(true));
        let t = opec_2012();
        let ast = build_from_answers(&rec, &t).unwrap();
        assert_eq!(
            ast.to_logic_str(),
            "and { eq { hop { argmax { all_rows ; joined } ; country } ; angola } ; \
             eq { max { all_rows ; joined } ; 2007 } }"
        );
        assert!(validate_answers(&rec, &t, &ExecConfig::default()).is_empty());
    }

    #[test]
    fn subset_scope_uses_follow_ups() {
        let rec = count_record("3")
            .with("Q1", Answer::Choice("subset".into()))
            .with("Q1.column", Answer::Column("joined".into()))
            .with("Q1.criterion", Answer::Choice("greater".into()))
            .with("Q1.value", Answer::Value("1965".into()));
        let t = opec_2012();
        let ast = build_from_answers(&rec, &t).unwrap();
        assert_eq!(
            ast.to_logic_str(),
            "eq { count { filter_eq { filter_greater { all_rows ; joined ; 1965 } ; region ; africa } } ; 3 }"
        );
        assert!(validate_answers(&rec, &t, &ExecConfig::default()).is_empty());
    }

    #[test]
    fn other_criterion_is_unbuildable() {
        let rec = count_record("4").with("Q3", Answer::Choice("other".into()));
        assert!(matches!(build_from_answers(&rec, &opec_2012()), Err(BuildError::UnbuildableCriterion)));
    }

    #[test]
    fn count_all_needs_no_value() {
        let mut rec = count_record("7").with("Q3", Answer::Choice("all".into()));
        rec.answers.remove("Q4");
        let ast = build_from_answers(&rec, &opec_2012()).unwrap();
        assert_eq!(ast.to_logic_str(), "eq { count { filter_all { all_rows ; region } } ; 7 }");
    }

    #[test]
    fn validation_reports_mismatch_and_gaps() {
        let t = opec_2012();
        let cfg = ExecConfig::default();
        let issues = validate_answers(&count_record("5"), &t, &cfg);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].message.starts_with("execution mismatch"), "{issues:?}");
        assert!(validate_answers(&count_record("4"), &t, &cfg).is_empty());

        let mut rec = count_record("4");
        rec.answers.remove("Q1");
        let issues = validate_answers(&rec, &t, &cfg);
        assert_eq!(issues[0].message, "unanswered: Q1");
        assert!(matches!(build_from_answers(&rec, &t), Err(BuildError::IncompleteAnswers(m)) if m == "unanswered: Q1"));
    }

    #[test]
    fn validation_flags_incomparable_values() {
        let rec = count_record("1").with("Q3", Answer::Choice("greater".into()));
        let issues = validate_answers(&rec, &opec_2012(), &ExecConfig::default());
        assert_eq!(issues[0].question.as_deref(), Some("Q4"));
    }

    #[test]
    fn bad_references() {
        let t = opec_2012();
        let rec = count_record("4").with("Q2", Answer::Column("capital".into()));
        assert!(matches!(build_from_answers(&rec, &t), Err(BuildError::ColumnNotFound(_))));
        let rec = AnswerRecord::new(LogicType::Comparative)
            .with("Q1", Answer::Column("joined".into()))
            .with("Q2", Answer::Row(0))
            .with("Q3", Answer::Row(70))
            .with("Q4", Answer::Choice("greater".into()))
            .with("Q5", Answer::Bool(false))
            .with("Q6", Answer::Columns(vec![]));
        assert!(matches!(build_from_answers(&rec, &t), Err(BuildError::RowNotFound(70))));
    }

    #[test]
    fn comparative_diff_and_mentions() {
        let t = opec_2012();
        let rec = AnswerRecord::new(LogicType::Comparative)
            .with("Q1", Answer::Column("joined".into()))
            .with("Q2", Answer::Row(1))
            .with("Q3", Answer::Row(0))
            .with("Q4", Answer::Choice("diff".into()))
            .with("Q5", Answer::Bool(false))
            .with("Q6", Answer::Columns(vec!["region".into()]));
        let ast = build_from_answers(&rec, &t).unwrap();
        assert!(ast.to_logic_str().starts_with(
            "and { eq { diff { hop { filter_eq { all_rows ; country ; angola } ; joined } ; \
             hop { filter_eq { all_rows ; country ; algeria } ; joined } } ; 38 }"
        ));
        assert!(validate_answers(&rec, &t, &ExecConfig::default()).is_empty());
    }

    #[test]
    fn unique_and_ordinal_and_majority_hold_on_fixture() {
        let t = opec_2012();
        let cfg = ExecConfig::default();
        let unique = AnswerRecord::new(LogicType::Unique)
            .with("Q1", Answer::Choice("all".into()))
            .with("Q2", Answer::Row(1))
            .with("Q3", Answer::Column("joined".into()))
            .with("Q4", Answer::Choice("greater".into()))
            .with("Q5", Answer::Value("2000".into()))
            .with("Q6", Answer::Value("n/a".into()));
        assert_eq!(
            build_from_answers(&unique, &t).unwrap().to_logic_str(),
            "and { only { filter_greater { all_rows ; joined ; 2000 } } ; \
             eq { hop { filter_greater { all_rows ; joined ; 2000 } ; country } ; angola } }"
        );
        assert!(validate_answers(&unique, &t, &cfg).is_empty());

        let ordinal = AnswerRecord::new(LogicType::Ordinal)
            .with("Q1", Answer::Choice("all".into()))
            .with("Q2", Answer::Column("population".into()))
            .with("Q3", Answer::Choice("max_to_min".into()))
            .with("Q4", Answer::Value("2nd".into()))
            .with("Q5", Answer::Row(0))
            .with("Q6", Answer::Columns(vec!["region".into()]))
            .with("Q7", Answer::Bool(true));
        assert!(validate_answers(&ordinal, &t, &cfg).is_empty(), "{:?}", validate_answers(&ordinal, &t, &cfg));

        let majority = AnswerRecord::new(LogicType::Majority)
            .with("Q1", Answer::Choice("all".into()))
            .with("Q2", Answer::Column("region".into()))
            .with("Q3", Answer::Choice("most".into()))
            .with("Q4", Answer::Choice("fuzzy_match".into()))
            .with("Q5", Answer::Value("africa".into()));
        assert_eq!(
            build_from_answers(&majority, &t).unwrap().to_logic_str(),
            "most_str_eq { all_rows ; region ; africa }"
        );
        assert!(validate_answers(&majority, &t, &cfg).is_empty());
    }
}
