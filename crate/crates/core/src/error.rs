use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid label scale: {0}")]
    InvalidScale(String),

    #[error("label {label} is outside the scale {scale}")]
    LabelOutOfScale { label: i64, scale: String },

    #[error("duplicate annotation for item `{item}` by annotator `{annotator}`")]
    DuplicateCell { item: String, annotator: String },

    #[error("duplicate annotator `{0}` in roster")]
    DuplicateAnnotator(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("roster is empty")]
    EmptyRoster,

    #[error("annotation matrix is empty")]
    EmptyMatrix,

    #[error("no annotations from the selected annotators on item `{0}`")]
    EmptyDistribution(String),

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("unknown annotator `{0}`")]
    UnknownAnnotator(String),

    #[error("worker `{worker}` did not annotate unit `{unit}`")]
    MissingCell { worker: String, unit: String },

    #[error("roster does not match matrix: {0}")]
    RosterMismatch(String),

    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
