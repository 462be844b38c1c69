use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] longperm::Error),
}

pub type SimResult<T> = std::result::Result<T, SimError>;
