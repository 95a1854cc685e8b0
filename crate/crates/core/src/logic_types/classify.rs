use super::LogicType;
use crate::ast::{Ast, FuncNode, Node};
use crate::error::ClassifyError;
use crate::semantics::{AggKind, Function};

pub(crate) fn func(f: &FuncNode) -> Option<Function> {
    Function::from_name(&f.name)
}

fn child_funcs(f: &FuncNode) -> impl Iterator<Item = Function> + '_ {
    f.children.iter().filter_map(Node::as_func).filter_map(func)
}

/// The root, or the clauses of a root conjunction.
pub(crate) fn conjuncts(f: &FuncNode) -> Vec<&FuncNode> {
    if func(f) == Some(Function::And) {
        f.children.iter().filter_map(Node::as_func).flat_map(conjuncts).collect()
    } else {
        vec![f]
    }
}

pub(crate) fn any_node(f: &FuncNode, pred: &impl Fn(&FuncNode) -> bool) -> bool {
    pred(f) || f.children.iter().filter_map(Node::as_func).any(|c| any_node(c, pred))
}

/// `hop` applied to a filtered view, i.e. a row picked by a condition.
fn is_row_selection(f: &FuncNode) -> bool {
    func(f) == Some(Function::Hop)
        && f.children
            .first()
            .and_then(Node::as_func)
            .and_then(func)
            .is_some_and(|g| matches!(g, Function::Filter(_) | Function::FilterAll))
}

/// A comparison or difference between two different selected rows.
pub(crate) fn is_row_comparison(f: &FuncNode) -> bool {
    if !matches!(func(f), Some(Function::Compare(_) | Function::Diff)) {
        return false;
    }
    match f.children.as_slice() {
        [Node::Func(a), Node::Func(b)] => a != b && any_node(a, &is_row_selection) && any_node(b, &is_row_selection),
        _ => false,
    }
}

/// Assigns the logic type whose prototype the program instantiates. Tests
/// run in a fixed priority order; the first match wins.
pub fn classify(ast: &Ast) -> Result<LogicType, ClassifyError> {
    let clauses = conjuncts(&ast.root);
    let compares_child = |want: &dyn Fn(Function) -> bool| {
        clauses.iter().any(|c| matches!(func(c), Some(Function::Compare(_))) && child_funcs(c).any(want))
    };
    if compares_child(&|f| f == Function::Count) {
        return Ok(LogicType::Count);
    }
    if compares_child(&|f| matches!(f, Function::Aggregate(AggKind::Avg | AggKind::Sum))) {
        return Ok(LogicType::Aggregation);
    }
    if clauses.iter().any(|c| matches!(func(c), Some(Function::All(_) | Function::Most(_)))) {
        return Ok(LogicType::Majority);
    }
    if clauses.iter().any(|c| func(c) == Some(Function::Only)) {
        return Ok(LogicType::Unique);
    }
    let root = &ast.root;
    if any_node(root, &|f| matches!(func(f), Some(Function::NthValue(_) | Function::NthArgExtreme(_)))) {
        return Ok(LogicType::Ordinal);
    }
    if any_node(root, &is_row_comparison) {
        return Ok(LogicType::Comparative);
    }
    if any_node(root, &|f| {
        matches!(func(f), Some(Function::ArgExtreme(_) | Function::Aggregate(AggKind::Max | AggKind::Min)))
    }) {
        return Ok(LogicType::Superlative);
    }
    Err(ClassifyError::Unclassifiable)
}
