//! Typed signatures, static checking and evaluation of the function set.

mod check;
mod config;
mod eval;
mod functions;

pub use check::{typecheck, typecheck_expr, TypedAst, TypedNode, ALL_ROWS};
pub use config::{ExecConfig, HopViewPolicy};
pub use eval::{
    eval_aggregate, eval_all_quantifier, eval_arg_extreme, eval_compare, eval_count, eval_diff, eval_filter, eval_hop,
    eval_most_quantifier, eval_nth_arg_extreme, eval_nth_value, eval_only, evaluate, evaluate_typed, satisfies,
    EvalLog, EvalNote, RowOrView, RowRef, TraceStep, Value,
};
pub use functions::{AggKind, ArgType, CompareKind, Extreme, Function, Predicate, SemType};
