use std::collections::HashMap;

use super::Resources;
use crate::ast::{Ast, FuncNode, Node};
use crate::error::RealizeError;
use crate::logic_types::classify::{conjuncts, func, is_row_comparison};
use crate::logic_types::{classify, LogicType};
use crate::semantics::{AggKind, CompareKind, Extreme, Function};
use crate::table::{parse_cell, Table};

fn text(f: &FuncNode, i: usize) -> Option<&str> {
    f.children.get(i).and_then(Node::as_text)
}

fn child(f: &FuncNode, i: usize) -> Option<&FuncNode> {
    f.children.get(i).and_then(Node::as_func)
}

fn fail(msg: impl Into<String>) -> RealizeError {
    RealizeError::SlotExtractionFailure(msg.into())
}

/// First node in pre-order satisfying the predicate.
fn find<'a>(f: &'a FuncNode, pred: &impl Fn(&FuncNode) -> bool) -> Option<&'a FuncNode> {
    if pred(f) {
        return Some(f);
    }
    f.children.iter().filter_map(Node::as_func).find_map(|c| find(c, pred))
}

/// `eq`-like clause split into its function side and text side.
fn fact(c: &FuncNode) -> Option<(&FuncNode, &str)> {
    if !matches!(func(c), Some(Function::Compare(CompareKind::Eq | CompareKind::RoundEq))) {
        return None;
    }
    match c.children.as_slice() {
        [Node::Func(f), Node::Text(t)] | [Node::Text(t), Node::Func(f)] => Some((f, t.text.as_str())),
        _ => None,
    }
}

fn ordinal_word(n: &str) -> Option<String> {
    let k = parse_cell(n).first_number?;
    if k.fract() != 0.0 || k < 1.0 {
        return Some(n.to_string());
    }
    let k = k as u64;
    let suffix = match (k % 10, k % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    Some(format!("{k}{suffix}"))
}

struct Extractor<'a> {
    res: &'a Resources,
    table: &'a Table,
    slots: HashMap<String, String>,
}

impl Extractor<'_> {
    fn set(&mut self, key: &str, value: impl Into<String>) {
        self.slots.insert(key.to_string(), value.into());
    }

    fn word(&self, key: &str) -> String {
        self.res.word(key).map_or_else(|| key.replace('_', " "), str::to_string)
    }

    /// Criterion words for a `filter_*`, `all_*` or `most_*` name.
    fn criterion(&self, name: &str) -> String {
        let suffix = ["filter_", "all_", "most_"].iter().find_map(|p| name.strip_prefix(p)).unwrap_or(name);
        self.word(suffix)
    }

    fn is_subject_column(&self, name: &str) -> bool {
        self.table.find_column(name) == Some(0)
    }

    /// Scope phrase for a view argument; nothing for the whole table.
    fn scope(&mut self, view: Option<&Node>) {
        let mut parts = Vec::new();
        let mut cur = view;
        while let Some(Node::Func(f)) = cur {
            match func(f) {
                Some(Function::Filter(_)) => {
                    if let (Some(col), Some(val)) = (text(f, 1), text(f, 2)) {
                        parts.push(format!("{col} are {} {val}", self.criterion(&f.name)));
                    }
                }
                Some(Function::FilterAll) => {}
                _ => break,
            }
            cur = f.children.first();
        }
        if !parts.is_empty() {
            parts.reverse();
            self.set("scope", parts.join(" and "));
        }
    }

    /// Column, criterion and value of a row filter, and its scope.
    fn filter_slots(&mut self, f: &FuncNode) -> Result<(), RealizeError> {
        match func(f) {
            Some(Function::Filter(_)) => {
                self.set("column", text(f, 1).ok_or_else(|| fail("filter column"))?);
                self.set("criterion", self.criterion(&f.name));
                self.set("value", text(f, 2).ok_or_else(|| fail("filter value"))?);
            }
            Some(Function::FilterAll) => self.set("column", text(f, 1).ok_or_else(|| fail("filter column"))?),
            _ => return Err(fail(format!("expected a row filter, found `{}`", f.name))),
        }
        self.scope(f.children.first());
        Ok(())
    }

    fn count(&mut self, ast: &Ast) -> Result<(), RealizeError> {
        let (counted, result) = conjuncts(&ast.root)
            .into_iter()
            .filter_map(fact)
            .find(|(f, _)| func(f) == Some(Function::Count))
            .ok_or_else(|| fail("no counted comparison"))?;
        self.set("result", result);
        match counted.children.first() {
            Some(Node::Func(rows)) => self.filter_slots(rows),
            _ => Ok(()),
        }
    }

    fn aggregation(&mut self, ast: &Ast) -> Result<(), RealizeError> {
        let (agg, result) = conjuncts(&ast.root)
            .into_iter()
            .filter_map(fact)
            .find(|(f, _)| matches!(func(f), Some(Function::Aggregate(AggKind::Avg | AggKind::Sum))))
            .ok_or_else(|| fail("no aggregate comparison"))?;
        self.set("agg", self.word(&agg.name));
        self.set("column", text(agg, 1).ok_or_else(|| fail("aggregate column"))?);
        self.set("result", result);
        self.scope(agg.children.first());
        Ok(())
    }

    fn majority(&mut self, ast: &Ast) -> Result<(), RealizeError> {
        let m = conjuncts(&ast.root)
            .into_iter()
            .find(|c| matches!(func(c), Some(Function::All(_) | Function::Most(_))))
            .ok_or_else(|| fail("no quantifier"))?;
        let quantifier = if matches!(func(m), Some(Function::All(_))) { "all" } else { "most" };
        self.set("quantifier", quantifier);
        self.set("column", text(m, 1).ok_or_else(|| fail("quantifier column"))?);
        self.set("criterion", self.criterion(&m.name));
        self.set("value", text(m, 2).ok_or_else(|| fail("quantifier value"))?);
        self.scope(m.children.first());
        Ok(())
    }

    fn unique(&mut self, ast: &Ast) -> Result<(), RealizeError> {
        let clauses = conjuncts(&ast.root);
        let only = clauses.iter().find(|c| func(c) == Some(Function::Only)).ok_or_else(|| fail("no `only`"))?;
        let rows = child(only, 0).ok_or_else(|| fail("`only` of the whole table"))?;
        self.filter_slots(rows)?;
        let mut others = Vec::new();
        for (target, val) in clauses.iter().filter_map(|c| fact(c)) {
            if func(target) != Some(Function::Hop) || child(target, 0) != Some(rows) {
                continue;
            }
            let Some(col) = text(target, 1) else { continue };
            if self.is_subject_column(col) && !self.slots.contains_key("subject") {
                self.set("subject", val);
            } else {
                others.push(format!("{col} {val}"));
            }
        }
        if !others.is_empty() {
            self.set("others", others.join(" ; "));
        }
        Ok(())
    }

    /// Superlative and ordinal share one shape: a ranked row plus facts.
    fn ranked(&mut self, ast: &Ast, ordinal: bool) -> Result<(), RealizeError> {
        let is_ranked_row = |f: &FuncNode| {
            matches!(
                (func(f), ordinal),
                (Some(Function::ArgExtreme(_)), false) | (Some(Function::NthArgExtreme(_)), true)
            )
        };
        let is_ranked_value = |f: &FuncNode| {
            matches!(
                (func(f), ordinal),
                (Some(Function::Aggregate(AggKind::Max | AggKind::Min)), false) | (Some(Function::NthValue(_)), true)
            )
        };
        let anchor = find(&ast.root, &|f| is_ranked_row(f) || is_ranked_value(f)).ok_or_else(|| fail("no ranking"))?;
        let extreme = match func(anchor) {
            Some(Function::ArgExtreme(e) | Function::NthArgExtreme(e) | Function::NthValue(e)) => e,
            Some(Function::Aggregate(AggKind::Min)) => Extreme::Min,
            _ => Extreme::Max,
        };
        self.set("extreme", self.word(if extreme == Extreme::Max { "max" } else { "min" }));
        let column = text(anchor, 1).ok_or_else(|| fail("ranked column"))?.to_string();
        self.set("column", column.clone());
        if ordinal {
            let n = text(anchor, 2).and_then(ordinal_word).ok_or_else(|| fail("ordinal position"))?;
            self.set("nth", n);
        }
        self.scope(anchor.children.first());

        let mut others = Vec::new();
        for (target, val) in conjuncts(&ast.root).into_iter().filter_map(fact) {
            if is_ranked_value(target) {
                self.set("value", val);
                continue;
            }
            if func(target) != Some(Function::Hop) || !child(target, 0).is_some_and(is_ranked_row) {
                continue;
            }
            let Some(col) = text(target, 1) else { continue };
            if self.is_subject_column(col) && !self.slots.contains_key("subject") {
                self.set("subject", val);
            } else if col == column {
                self.set("value", val);
            } else {
                others.push(format!("{col} {val}"));
            }
        }
        if !others.is_empty() {
            self.set("others", others.join(" ; "));
        }
        Ok(())
    }

    fn comparative(&mut self, ast: &Ast) -> Result<(), RealizeError> {
        let clauses = conjuncts(&ast.root);
        let core = clauses.iter().find_map(|c| find(c, &is_row_comparison)).ok_or_else(|| fail("no row comparison"))?;
        let (a, b) = (child(core, 0).unwrap(), child(core, 1).unwrap());
        let is_filter = |f: &FuncNode| matches!(func(f), Some(Function::Filter(_) | Function::FilterAll));
        let sel_a = find(a, &is_filter).ok_or_else(|| fail("first row selection"))?;
        let sel_b = find(b, &is_filter).ok_or_else(|| fail("second row selection"))?;
        let subject = |sel: &FuncNode| text(sel, 2).map(str::to_string).ok_or_else(|| fail("row selection value"));
        self.set("subject1", subject(sel_a)?);
        self.set("subject2", subject(sel_b)?);
        let hop_a = find(a, &|f| func(f) == Some(Function::Hop)).ok_or_else(|| fail("compared column"))?;
        let column = text(hop_a, 1).ok_or_else(|| fail("compared column"))?.to_string();
        self.set("column", column.clone());

        match func(core) {
            Some(Function::Diff) => {
                let diff_fact = clauses.iter().filter_map(|c| fact(c)).find(|(f, _)| *f == core);
                if let Some((_, v)) = diff_fact {
                    let negative = v.trim_start().starts_with('-');
                    self.set("diff_value", v.trim_start().trim_start_matches('-').trim());
                    self.set("diff_relation", self.word(if negative { "diff_less" } else { "diff_more" }));
                }
            }
            Some(Function::Compare(k)) => match k {
                CompareKind::Greater => self.set("relation", self.word("greater_relation")),
                CompareKind::Less => self.set("relation", self.word("less_relation")),
                CompareKind::NotEq => self.set("same_relation", self.word("not_eq_relation")),
                CompareKind::Eq | CompareKind::RoundEq => self.set("same_relation", self.word("eq_relation")),
            },
            _ => unreachable!("row comparisons are compare or diff nodes"),
        }

        let (mut others_a, mut others_b) = (Vec::new(), Vec::new());
        for (target, val) in clauses.iter().filter_map(|c| fact(c)) {
            if func(target) != Some(Function::Hop) {
                continue;
            }
            let Some(col) = text(target, 1) else { continue };
            if col == column {
                continue;
            }
            match child(target, 0) {
                Some(s) if s == sel_a => others_a.push(format!("{col} {val}")),
                Some(s) if s == sel_b => others_b.push(format!("{col} {val}")),
                _ => {}
            }
        }
        if !others_a.is_empty() {
            self.set("others1", others_a.join(" ; "));
        }
        if !others_b.is_empty() {
            self.set("others2", others_b.join(" ; "));
        }
        Ok(())
    }
}

/// The slot fills a template would receive, keyed by slot name.
pub fn template_slots(
    ast: &Ast,
    table: &Table,
    res: &Resources,
) -> Result<(LogicType, HashMap<String, String>), RealizeError> {
    let lt = classify(ast)?;
    let mut ex = Extractor { res, table, slots: HashMap::new() };
    ex.set("caption", table.caption.clone());
    match lt {
        LogicType::Count => ex.count(ast)?,
        LogicType::Aggregation => ex.aggregation(ast)?,
        LogicType::Majority => ex.majority(ast)?,
        LogicType::Unique => ex.unique(ast)?,
        LogicType::Superlative => ex.ranked(ast, false)?,
        LogicType::Ordinal => ex.ranked(ast, true)?,
        LogicType::Comparative => ex.comparative(ast)?,
    }
    Ok((lt, ex.slots))
}

/// Renders the first template variant whose required slots are filled.
pub fn realize_template_with(ast: &Ast, table: &Table, res: &Resources) -> Result<String, RealizeError> {
    let (lt, slots) = template_slots(ast, table, res)?;
    res.templates(lt)
        .iter()
        .find_map(|p| p.render(&slots))
        .map(|s| s.to_lowercase())
        .ok_or_else(|| fail(format!("no {lt} template fits slots {:?}", sorted_keys(&slots))))
}

pub fn realize_template(ast: &Ast, table: &Table) -> Result<String, RealizeError> {
    realize_template_with(ast, table, Resources::builtin())
}

fn sorted_keys(slots: &HashMap<String, String>) -> Vec<&str> {
    let mut keys: Vec<_> = slots.keys().map(String::as_str).collect();
    keys.sort_unstable();
    keys
}
