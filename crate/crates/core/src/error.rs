use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("ragged rows: row {row} has {found} cells, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("table has no data rows")]
    EmptyTable,
    #[error("table has no columns")]
    NoColumns,
    #[error("column {index} has a blank name")]
    BlankColumnName { index: usize },
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    UnbalancedBraces,
    EmptyArgument,
    DanglingSeparator,
    MissingFunctionName,
    MultiWordFunctionName,
    NotAFunction,
    TrailingInput,
}

/// Parse failure at a byte offset into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub kind: SyntaxErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown function `{name}` at {path}")]
    UnknownFunction { name: String, path: String },
    #[error("`{name}` at {path} takes {expected} arguments, got {found}")]
    ArityMismatch { name: String, path: String, expected: usize, found: usize },
    #[error("type mismatch at {path}: expected {expected}, found {found}")]
    TypeMismatch { path: String, expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("column `{0}` not found")]
    ColumnNotFound(String),
    #[error("empty view in `{0}`")]
    EmptyViewError(String),
    #[error("`{func}` expected a single-row view, got {rows} rows")]
    NonSingletonView { func: String, rows: usize },
    #[error("ordinal {n} out of range 1..={len} in `{func}`")]
    OrdinalOutOfRange { func: String, n: String, len: usize },
    #[error("incomparable operands `{left}` and `{right}` in `{func}`")]
    IncomparableOperands { func: String, left: String, right: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("incomplete answers: {0}")]
    IncompleteAnswers(String),
    #[error("criterion `other` cannot be turned into a program")]
    UnbuildableCriterion,
    #[error("column `{0}` not found")]
    ColumnNotFound(String),
    #[error("row {0} not in table")]
    RowNotFound(usize),
    #[error("answer to {question} has the wrong type: expected {expected}")]
    WrongAnswerType { question: String, expected: String },
    #[error("derived program failed to evaluate: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("program matches no logic-type prototype")]
    Unclassifiable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error(transparent)]
    Unclassifiable(#[from] ClassifyError),
    #[error("cannot extract template slots: {0}")]
    SlotExtractionFailure(String),
    #[error("resource file line {line}: {message}")]
    Resource { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("candidate and reference counts differ ({candidates} vs {references})")]
    LengthMismatch { candidates: usize, references: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

/// Stable machine-readable code for an error, shared by the CLI and the
/// HTTP service.
pub trait ErrorCode {
    fn code(&self) -> &'static str;
}

impl ErrorCode for TableError {
    fn code(&self) -> &'static str {
        match self {
            TableError::RaggedRows { .. } => "RaggedRows",
            TableError::EmptyTable => "EmptyTable",
            TableError::NoColumns | TableError::BlankColumnName { .. } | TableError::Malformed(_) => "MalformedTable",
            TableError::Io(_) => "Io",
        }
    }
}

impl ErrorCode for SyntaxError {
    fn code(&self) -> &'static str {
        "SyntaxError"
    }
}

impl ErrorCode for TypeError {
    fn code(&self) -> &'static str {
        match self {
            TypeError::UnknownFunction { .. } => "UnknownFunction",
            TypeError::ArityMismatch { .. } => "ArityMismatch",
            TypeError::TypeMismatch { .. } => "TypeMismatch",
        }
    }
}

impl ErrorCode for EvalError {
    fn code(&self) -> &'static str {
        match self {
            EvalError::Type(e) => e.code(),
            EvalError::ColumnNotFound(_) => "ColumnNotFound",
            EvalError::EmptyViewError(_) => "EmptyViewError",
            EvalError::NonSingletonView { .. } => "NonSingletonView",
            EvalError::OrdinalOutOfRange { .. } => "OrdinalOutOfRange",
            EvalError::IncomparableOperands { .. } => "IncomparableOperands",
        }
    }
}

impl ErrorCode for BuildError {
    fn code(&self) -> &'static str {
        match self {
            BuildError::IncompleteAnswers(_) => "IncompleteAnswers",
            BuildError::UnbuildableCriterion => "UnbuildableCriterion",
            BuildError::ColumnNotFound(_) => "ColumnNotFound",
            BuildError::RowNotFound(_) => "RowNotFound",
            BuildError::WrongAnswerType { .. } => "WrongAnswerType",
            BuildError::Eval(e) => e.code(),
        }
    }
}

impl ErrorCode for ClassifyError {
    fn code(&self) -> &'static str {
        "Unclassifiable"
    }
}

impl ErrorCode for RealizeError {
    fn code(&self) -> &'static str {
        match self {
            RealizeError::Unclassifiable(_) => "Unclassifiable",
            RealizeError::SlotExtractionFailure(_) => "SlotExtractionFailure",
            RealizeError::Resource { .. } => "ResourceError",
        }
    }
}

impl ErrorCode for MetricError {
    fn code(&self) -> &'static str {
        match self {
            MetricError::EmptyCorpus => "EmptyCorpus",
            MetricError::LengthMismatch { .. } => "LengthMismatch",
        }
    }
}
