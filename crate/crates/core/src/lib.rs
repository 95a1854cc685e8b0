//! Logical forms over semi-structured tables.
//!
//! A logical form is a small tree program (`eq { count { filter_eq {
//! all_rows ; region ; africa } } ; 4 }`) that states one fact about a
//! table and evaluates to true or false. This crate parses, type checks and
//! executes such programs, classifies them into seven logic types, derives
//! them from typed annotation answers, realizes them as text, and provides
//! dataset-scale validation, statistics and generation metrics.

pub mod ast;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod logic_types;
pub mod metrics;
pub mod realize;
pub mod semantics;
pub mod table;

pub use ast::{linearize, node_stats, parse_logic_str, print_logic_str, Ast, FuncNode, Node, NodeStats, TextNode};
pub use dataset::{
    check_splits, compute_stats, export_model_input, load_dataset, validate_dataset, Dataset, Example, FieldMap, Split,
};
pub use error::{
    BuildError, ClassifyError, ErrorCode, EvalError, MetricError, RealizeError, SyntaxError, TableError, TypeError,
};
pub use logic_types::{
    build_from_answers, classify, question_set, validate_answers, Answer, AnswerRecord, Criterion, LogicType,
};
pub use metrics::{bleu4, rouge, RougeVariant};
pub use realize::{interpret, realize_template, Resources};
pub use semantics::{evaluate, typecheck, ExecConfig, SemType, TypedAst, Value};
pub use table::{all_rows, compare_cells, parse_cell, Cell, CellKind, CellValue, ComparisonOutcome, Date, Table, View};
