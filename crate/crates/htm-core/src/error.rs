use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum HtmError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("input length {got} does not match configured input size {want}")]
    InputLength { got: usize, want: usize },

    #[error("receptive field error: {0}")]
    Field(String),

    #[error("dataset error: {0}")]
    Data(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("experiment error: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HtmError>;
