use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] metaprism_core::Error),
    #[error("scenario parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl SimError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            SimError::Config(_) | SimError::Parse(_) => "config",
            SimError::Model(metaprism_core::Error::Capacity { .. }) => "capacity",
            SimError::Model(_) => "model",
            SimError::Io(_) => "io",
            SimError::Csv(_) => "output",
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(SimError::Config(msg.into()))
}
