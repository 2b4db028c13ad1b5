use thiserror::Error;

/// Errors raised by the library. Every variant carries a stable machine tag
/// (see [`Error::tag`]) that the command-line front end reports verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("not a model: {0}")]
    NotAModel(String),
    #[error("wild prime: {0}")]
    WildPrime(String),
    #[error("search too large: {0}")]
    SearchTooLarge(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("unsupported ramification: {0}")]
    UnsupportedRamification(String),
    #[error("prime is not regular: {0}")]
    NotRegular(String),
    #[error("valuation mismatch: {0}")]
    ValuationMismatch(String),
    #[error("inadmissible permutation: {0}")]
    BadPermutation(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("not a root: {0}")]
    BadRoot(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DEGENERATE_INPUT",
            Error::NotAModel(_) => "NOT_A_MODEL",
            Error::WildPrime(_) => "WILD_PRIME",
            Error::SearchTooLarge(_) => "SEARCH_TOO_LARGE",
            Error::InternalInconsistency(_) => "INTERNAL_INCONSISTENCY",
            Error::SingularPoint(_) => "SINGULAR_POINT",
            Error::UnsupportedRamification(_) => "UNSUPPORTED_RAMIFICATION",
            Error::NotRegular(_) => "NOT_REGULAR",
            Error::ValuationMismatch(_) => "VALUATION_MISMATCH",
            Error::BadPermutation(_) => "BAD_PERMUTATION",
            Error::NotApplicable(_) => "NOT_APPLICABLE",
            Error::BadRoot(_) => "BAD_ROOT",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
