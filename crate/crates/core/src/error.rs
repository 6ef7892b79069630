//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while building or validating the domain model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("loop continuation probability must satisfy 0 <= q < 1, got {0}")]
    LoopProbabilityOutOfRange(f64),
    #[error("selection probabilities must be in [0, 1] and sum to 1, got sum {0}")]
    SelectionProbabilitiesInvalid(f64),
    #[error("structure node must have at least one child")]
    EmptyStructure,
    #[error("unknown compute node `{0}`")]
    UnknownNode(String),
    #[error("unknown device `{0}`")]
    UnknownDevice(String),
    #[error("unknown VNF type `{0}`")]
    UnknownVnfType(String),
    #[error("link endpoints must differ, got `{0}` twice")]
    SelfLink(String),
    #[error("duplicate link between `{0}` and `{1}`")]
    DuplicateLink(String, String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Errors raised while evaluating a placement.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("leaf {leaf} of request `{request}` has no assignment")]
    UnassignedLeaf { request: String, leaf: usize },
    #[error("no link between `{from}` and `{to}` required by request `{request}`")]
    NoRoute {
        request: String,
        from: String,
        to: String,
    },
    #[error("placement references unknown {kind} `{id}`")]
    UnknownReference { kind: &'static str, id: String },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}

/// Errors raised by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("assignment space has {space} combinations, above the cap of {cap}")]
    SpaceTooLarge { space: u128, cap: u128 },
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
}

/// Errors raised while building, evaluating or exchanging linear models.
#[derive(Debug, Error)]
pub enum MilpError {
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("vector has {got} entries but the model has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("LP text error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}

/// Errors raised while reading or writing scenario files.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("request `{request}`: tree grammar error at byte {offset}: {message}")]
    Tree {
        request: String,
        offset: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("model error: {0}")]
    Model(#[from] ModelError),
}
