use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("record {0:?} has no sequence data")]
    EmptyRecord(String),
    #[error("sequence data before the first FASTA header (line {0})")]
    DataBeforeHeader(usize),
    #[error("expected a single record, found {0}; records are never concatenated")]
    MultipleRecords(usize),
    #[error("symbol {symbol:?} at offset {offset} is not in the alphabet")]
    UnknownSymbol { symbol: char, offset: usize },
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet has {0} symbols, at most 254 are supported")]
    AlphabetTooLarge(usize),
    #[error("invalid alphabet symbol {0:?}")]
    InvalidSymbol(char),
    #[error("context (i={position}, j={length}) out of range for a sequence of length {len}")]
    ContextOutOfRange { position: usize, length: usize, len: usize },
    #[error("window length {window} must be in [1, {len})")]
    WindowOutOfRange { window: usize, len: usize },
    #[error("L_max={l_max} must be in [1, {len})")]
    LmaxOutOfRange { l_max: usize, len: usize },
    #[error("sequence of length {0} is too long to index")]
    SequenceTooLong(usize),
    #[error("query string is empty")]
    EmptyPattern,
    #[error("query of length {len} exceeds the index depth L_max={l_max}")]
    DepthExceeded { len: usize, l_max: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("feature set is empty")]
    EmptyFeatureSet,
    #[error("features must have length >= 1 and use alphabet codes")]
    InvalidFeature,
    #[error("average is undefined: no position matched")]
    UndefinedAverage,
    #[error("reference and candidate bases do not derive from the same training data")]
    MismatchedBases,
    #[error("accept set is empty")]
    EmptyAcceptSet,
    #[error("window start {0} is out of range")]
    BadWindowStart(usize),
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSynthSpec(&'static str),
    #[error("corrupt index: {0}")]
    CorruptIndex(&'static str),
    #[error("invalid tree: {0}")]
    InvalidTree(&'static str),
    #[error("cannot parse {0:?} as an exact decimal or fraction")]
    InvalidNumber(String),
}
