use std::fmt;

use thiserror::Error;

/// Machine-readable class of a netlist failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Lexical,
    UnknownElementKind,
    MalformedParameters,
    DuplicateName,
    UnknownDirective,
    NonSeriesTopology,
    NonPositiveCapacitance,
    MissingTran,
    DuplicateTran,
    InvalidTran,
    MultipleInductive,
    MissingInductive,
    SourceCount,
    MissingGround,
    InvalidValue,
    UnknownSignal,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Lexical => "lexical",
            ErrorCode::UnknownElementKind => "unknown-element-kind",
            ErrorCode::MalformedParameters => "malformed-parameters",
            ErrorCode::DuplicateName => "duplicate-name",
            ErrorCode::UnknownDirective => "unknown-directive",
            ErrorCode::NonSeriesTopology => "non-series-topology",
            ErrorCode::NonPositiveCapacitance => "nonpositive-capacitance",
            ErrorCode::MissingTran => "missing-tran",
            ErrorCode::DuplicateTran => "duplicate-tran",
            ErrorCode::InvalidTran => "invalid-tran",
            ErrorCode::MultipleInductive => "multiple-inductive",
            ErrorCode::MissingInductive => "missing-inductive",
            ErrorCode::SourceCount => "source-count",
            ErrorCode::MissingGround => "missing-ground",
            ErrorCode::InvalidValue => "invalid-value",
            ErrorCode::UnknownSignal => "unknown-signal",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 1-based line and column of a netlist construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {}, column {}: {message} [{code}]", .position.line, .position.column)]
pub struct NetlistError {
    pub code: ErrorCode,
    pub position: Position,
    pub message: String,
}

impl NetlistError {
    pub(crate) fn new(code: ErrorCode, position: Position, message: impl Into<String>) -> Self {
        Self {
            code,
            position,
            message: message.into(),
        }
    }

    pub fn line(&self) -> usize {
        self.position.line
    }

    pub fn column(&self) -> usize {
        self.position.column
    }
}
