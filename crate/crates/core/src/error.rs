use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("histogram space has {count} elements, above the enumeration cap of {cap}")]
    CapExceeded { count: String, cap: u64 },

    #[error("dimension mismatch: expected {expected} labels, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("label index {index} out of range 1..={k}")]
    LabelOutOfRange { index: usize, k: usize },

    #[error("histogram total {found} does not match the required total {expected}")]
    TotalMismatch { expected: u64, found: u64 },

    #[error("sample has zero probability under the model; f_H^m would need to be revised in the light of the sample")]
    ZeroProbabilitySample,

    #[error("sample of size {n} is not smaller than the population size {m}")]
    SampleTooLarge { n: u64, m: u64 },

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("invalid label merge: {0}")]
    InvalidMerge(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn cap(count: impl ToString, cap: u64) -> Self {
        Error::CapExceeded {
            count: count.to_string(),
            cap,
        }
    }
}
