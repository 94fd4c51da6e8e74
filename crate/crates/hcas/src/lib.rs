//! File formats, dataset evaluation and the `hcas` command line on top of
//! [`hcas_core`].
//!
//! Exit codes of the binary are a stable contract: 0 on success, 1 on
//! runtime failures (I/O, codec, dataset), 2 on usage errors (bad flags,
//! inconsistent settings, model/setting scale mismatch, empty batch file).

pub mod cli;
pub mod eval;
pub mod io;
pub mod pipeline;
pub mod sidecar;
pub mod weights;

pub use hcas_core;

use hcas_core::{AcquisitionError, AnalysisError, ImageError, JpegError, RestorationError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Weights(#[from] weights::WeightsError),
    #[error(transparent)]
    Sidecar(#[from] sidecar::SidecarError),
    #[error(transparent)]
    Acquisition(#[from] AcquisitionError),
    #[error(transparent)]
    Jpeg(#[from] JpegError),
    #[error(transparent)]
    Restoration(#[from] RestorationError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::Restoration(RestorationError::ScaleMismatch { .. }) => 2,
            _ => 1,
        }
    }
}
