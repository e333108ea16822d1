use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("unsupported cubature degree {degree}, supported degrees are {supported:?}")]
    UnsupportedDegree { degree: u32, supported: &'static [u32] },

    #[error("grid has no cell with positive probability")]
    EmptyGrid,

    #[error("episode is not active, call reset first")]
    EpisodeNotActive,

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("probability mass inside the bounds is zero")]
    ZeroMass,

    #[error("policy failure: {0}")]
    Policy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
