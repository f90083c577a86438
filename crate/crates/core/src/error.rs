use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sobol dimension {requested} exceeds the supported maximum of {max}")]
    UnsupportedDimension { requested: usize, max: usize },

    #[error("sample is empty")]
    EmptySample,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("inverse CDF did not converge for u = {u} (df = {df})")]
    NonConvergence { u: f64, df: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid subset order {order} for {k} inputs")]
    InvalidOrder { order: usize, k: usize },

    #[error("division by zero denominator in the Liu function")]
    DegenerateDivision,

    #[error("input {index} = {value} is outside the domain [0, 1]")]
    Domain { index: usize, value: f64 },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sample contains NaN")]
    InvalidData,

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("design is missing the mix for columns {0:?}")]
    DesignIncomplete(Vec<usize>),

    #[error("design has no mirror matrix outputs")]
    MissingMirror,

    #[error("output variance is zero")]
    DegenerateOutput,

    #[error("sample has zero spread")]
    DegenerateSample,

    #[error("overlap of {left} and {right}: {source}")]
    Pair {
        left: String,
        right: String,
        #[source]
        source: Box<Error>,
    },

    #[error("overlap integral {0} is outside [-0.02, 1.02]")]
    OverlapOutOfRange(f64),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Self {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad arguments rather than by the numbers.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Shape(_)
            | Error::InvalidOrder { .. }
            | Error::InvalidDistribution(_)
            | Error::UnsupportedDimension { .. } => true,
            Error::Row { source, .. } | Error::Pair { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}
