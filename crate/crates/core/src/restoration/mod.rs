//! Receiver-side upscaling: the bicubic baseline and the residual network
//! that refines it.

mod bicubic;
mod conv;
mod model;
mod tensor;

pub use bicubic::{bicubic_kernel, bicubic_upscale, bicubic_upscale_real, BICUBIC_A};
pub use conv::{conv2d, relu_inplace, resblock_forward, ConvLayer};
pub use model::{drcas_forward, params_for, DrcasModel, FORWARD_HALO};
pub use tensor::Tensor;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RestorationError {
    #[error("scale factors must be at least 1, got {0}x{1}")]
    InvalidScale(u32, u32),
    #[error("channel mismatch: layer expects {expected} input channels, tensor has {actual}")]
    ChannelMismatch { expected: usize, actual: usize },
    #[error("model restores {model_x}x{model_y} but the configuration needs {want_x}x{want_y}")]
    ScaleMismatch { model_x: u32, model_y: u32, want_x: u32, want_y: u32 },
    #[error("inconsistent layer: {0}")]
    Layer(String),
    #[error("tensor dimensions must be at least 1 and match the data length")]
    TensorShape,
    #[error("restoration input must be 8-bit, got {0}-bit")]
    NotEightBit(u8),
}
