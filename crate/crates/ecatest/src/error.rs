use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("configuration length {n} is below the minimum of 3")]
    InvalidConfiguration { n: usize },
    #[error("radius {r} does not fit a ring of size {n}")]
    InvalidRadius { r: usize, n: usize },
    #[error("shape mismatch: {left_m}x{left_n} vs {right_m}x{right_n}")]
    ShapeMismatch {
        left_m: usize,
        left_n: usize,
        right_m: usize,
        right_n: usize,
    },
    #[error("environment needs at least one row")]
    EmptyEnvironment,
    #[error("row {t} out of range (m = {m})")]
    RowOutOfRange { t: usize, m: usize },
    #[error("lazy environment cannot rewind from row {current} to row {requested}")]
    Rewind { current: usize, requested: usize },
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("malformed environment file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("unknown rule name {0:?}")]
    UnknownRule(String),
    #[error("no tester metadata registered for {0}")]
    NoMetadata(String),
    #[error("pattern has length {got}, expected {expected}")]
    PatternLength { got: usize, expected: usize },
    #[error("pattern {0} is not in the non-final set")]
    NotNonFinal(String),
    #[error("constructor precondition violated: {0}")]
    Precondition(String),
    #[error("invalid rule metadata: {0}")]
    InvalidMeta(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("query at time {t} follows a query at time {floor}")]
    TimeConformityViolation { t: usize, floor: usize },
    #[error("query ({t}, {i}) outside the {m}x{n} environment")]
    OutOfRange { t: usize, i: usize, m: usize, n: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TesterError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("pair ({t}, {i}) is not in the sampled range")]
    Domain { t: usize, i: usize },
    #[error("uncertain pairs are never checked")]
    UncertainPair,
    #[error("rule {0} has no tester of this kind")]
    Unsupported(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruteError {
    #[error("n = {n} exceeds the enumeration budget of {max}")]
    Budget { n: usize, max: usize },
    #[error("unknown far-instance strategy {0:?}")]
    Strategy(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("could not certify a far instance for {0}")]
    Uncertified(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Tester(#[from] TesterError),
    #[error(transparent)]
    Brute(#[from] BruteError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Core(#[from] CoreError),
}
