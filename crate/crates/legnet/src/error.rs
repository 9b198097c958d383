use thiserror::Error;

use crate::{bounds::BoundsError, chain::ChainError, net::NetError, r3::R3Error, s3::GeometryError};
use crate::sections::SectionError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    R3(#[from] R3Error),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
