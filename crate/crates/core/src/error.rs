use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node `{node}` is not allowed")]
    SelfLoop { line: usize, node: String },

    #[error("node index {index} out of bounds for graph with {len} nodes")]
    NodeIndex { index: usize, len: usize },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("label frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("total conflict between sources supporting {labels:?}{}", node.as_ref().map(|n| format!(" at node `{n}`")).unwrap_or_default())]
    TotalConflict {
        labels: Vec<String>,
        node: Option<String>,
    },

    #[error("masses sum to {sum}, which deviates from 1 by more than the tolerance")]
    Unnormalized { sum: f64 },

    #[error(
        "cannot derive gamma automatically: no two adjacent nodes share a neighbor; pass an explicit gamma"
    )]
    DegenerateGraph,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("input mismatch: {0}")]
    InputMismatch(String),

    #[error("nodes missing from community file: {}", .0.join(", "))]
    Coverage(Vec<String>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// True for errors caused by the algorithm or data shape rather than
    /// malformed input or configuration.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::TotalConflict { .. } | Error::DegenerateGraph | Error::UndefinedMetric(_)
        )
    }
}
