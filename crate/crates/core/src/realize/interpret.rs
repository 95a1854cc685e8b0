use std::collections::HashMap;

use super::Resources;
use crate::ast::{Ast, FuncNode, Node};
use crate::semantics::{Function, SemType, ALL_ROWS};

/// Argument slot names per function family, in argument order.
fn arg_names(f: Option<Function>, arity: usize) -> Vec<&'static str> {
    match f {
        Some(Function::Count | Function::Only) => vec!["view"],
        Some(Function::Hop) => vec!["target", "column"],
        Some(Function::And | Function::Compare(_) | Function::Diff) => vec!["a", "b"],
        Some(Function::Aggregate(_) | Function::ArgExtreme(_) | Function::FilterAll) => vec!["view", "column"],
        Some(Function::NthValue(_) | Function::NthArgExtreme(_)) => vec!["view", "column", "n"],
        Some(Function::Filter(_) | Function::All(_) | Function::Most(_)) => vec!["view", "column", "value"],
        None => ["a", "b", "c", "d", "e", "f"].into_iter().cycle().take(arity).collect(),
    }
}

const ORDINALS: [&str; 6] = ["first", "second", "third", "fourth", "fifth", "sixth"];

fn referent(ty: Option<SemType>, position: Option<usize>) -> String {
    if let Some(i) = position {
        return match ORDINALS.get(i) {
            Some(w) => format!("the {w} result"),
            None => format!("result {}", i + 1),
        };
    }
    match ty {
        Some(SemType::View) => "these rows".into(),
        Some(SemType::Row) => "this row".into(),
        _ => "the result".into(),
    }
}

fn clause(res: &Resources, f: &FuncNode, out: &mut Vec<String>) {
    for c in f.children.iter().filter_map(Node::as_func) {
        clause(res, c, out);
    }
    let function = Function::from_name(&f.name);
    let names = arg_names(function, f.children.len());
    let func_children = f.children.iter().filter(|c| c.as_func().is_some()).count();
    let mut slots: HashMap<String, String> = HashMap::new();
    let mut nth_func = 0;
    let mut rendered_args = Vec::new();
    for (i, c) in f.children.iter().enumerate() {
        let name = names.get(i).copied().unwrap_or("extra");
        let value = match c {
            Node::Text(t) if t.text == ALL_ROWS && name == "view" => {
                slots.insert("subview".into(), String::new());
                "all rows".to_string()
            }
            Node::Text(t) => {
                if name == "view" {
                    slots.insert("subview".into(), t.text.clone());
                }
                t.text.clone()
            }
            Node::Func(g) => {
                let ty = Function::from_name(&g.name).map(|g| g.signature().1);
                let r = referent(ty, (func_children > 1).then_some(nth_func));
                nth_func += 1;
                if name == "view" {
                    slots.insert("subview".into(), r.clone());
                }
                r
            }
        };
        rendered_args.push(value.clone());
        slots.insert(name.to_string(), value);
    }
    let phrase = res.phrase(&f.name).or_else(|| function.and_then(|g| res.phrase(&g.name())));
    let text = phrase
        .and_then(|p| p.render(&slots))
        .unwrap_or_else(|| format!("apply {} to {}", f.name, rendered_args.join(" and ")));
    out.push(text);
}

/// One clause per function node, bottom-up (post-order).
pub fn interpret_clauses(ast: &Ast, res: &Resources) -> Vec<String> {
    let mut out = Vec::new();
    clause(res, &ast.root, &mut out);
    out
}

pub fn interpret_with(ast: &Ast, res: &Resources) -> String {
    let mut s = interpret_clauses(ast, res).join(" . ");
    s.push_str(" .");
    s
}

/// Natural-language reading of a program for checking it against the
/// statement it was derived from. Every text leaf except `all_rows`
/// appears verbatim.
pub fn interpret(ast: &Ast) -> String {
    interpret_with(ast, Resources::builtin())
}
