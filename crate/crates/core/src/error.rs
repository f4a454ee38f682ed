use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("polynomial parse error at column {column} in `{input}`: {message}")]
    PolyParse { input: String, column: usize, message: String },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("point {point:?} lies outside the domain box")]
    Domain { point: Vec<f64> },

    #[error("unsupported in numeric mode: {0}")]
    UnsupportedMode(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("restriction violation: {0}")]
    Restriction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("flow failed at t = {time}: {message}")]
    Flow { message: String, time: f64, last_state: Vec<f64> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("chart construction failed: {0}")]
    Chart(String),

    #[error("spec error at line {line}, column {column}: {message}")]
    SpecSyntax { line: usize, column: usize, message: String },

    #[error("spec error: {0}")]
    SpecSemantic(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
