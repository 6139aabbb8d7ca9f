use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{context}: missing required column `{column}`")]
    MissingColumn { context: String, column: String },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("feature {index}: {message}")]
    InvalidGeometry { index: usize, message: String },

    #[error("input field is constant; autocorrelation is undefined")]
    ConstantField,

    #[error("need at least {required} non-island regions, found {found}")]
    InsufficientRegions { required: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dataset `{dataset}` has no value for district {adm_id}")]
    MissingValue { dataset: String, adm_id: i64 },

    #[error("ambiguous district name {0}")]
    AmbiguousDistrict(String),

    #[error("buffer latitude {lat} too close to a pole (cos(lat) <= 0.01)")]
    PolarDegenerate { lat: f64 },

    #[error("feature schema mismatch: expected [{expected}], got [{found}]")]
    SchemaMismatch { expected: String, found: String },

    #[error("unsupported model format: {0}")]
    ModelFormat(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("stage `{stage}` needs {artifact} from stage `{requires}`, which has not run")]
    UnmetDependency {
        stage: &'static str,
        requires: &'static str,
        artifact: String,
    },

    #[error("output directory is locked by another run ({0})")]
    Locked(PathBuf),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
