//! Baseline sequential JPEG (ITU-T T.81) with IJG-style quality control.
//!
//! The encoder always writes 4:4:4 JFIF with the Annex K Huffman tables, so
//! every loss it introduces comes from quantization. The decoder also reads
//! subsampled (4:2:0, 4:2:2) and non-interleaved baseline streams produced
//! by other encoders, and upsamples chroma with the same triangle filter
//! libjpeg uses.

mod color;
mod dct;
mod decoder;
mod encoder;
pub mod entropy;
mod islow;
mod tables;
mod upsample;

use alloc::string::String;
use alloc::vec::Vec;

pub use color::{rgb_to_ycbcr, rgb_to_ycbcr_pixel, ycbcr_to_rgb, ycbcr_to_rgb_pixel};
pub use dct::{dequantize, fdct8x8, idct8x8, quantize};
pub use decoder::jpeg_decode;
pub use encoder::jpeg_encode;
pub use tables::{inverse_zigzag, quality_to_tables, zigzag, HuffmanSpec, QuantTable, TableClass, ZIGZAG_TO_NATURAL};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JpegError {
    #[error("quality {0} outside [1, 100]")]
    Quality(u8),
    #[error("encoder input must be 8-bit with 1 or 3 channels, got {channels} channels at {bit_depth} bits")]
    UnsupportedInput { channels: u8, bit_depth: u8 },
    #[error("image of {width}x{height} exceeds the 65535 pixel JPEG limit")]
    TooLarge { width: u32, height: u32 },
    #[error("quantization table entry {0} outside [1, 255]")]
    QuantEntry(u16),
    #[error("invalid Huffman table: {0}")]
    HuffmanTable(&'static str),
    #[error("malformed stream: {0}")]
    Malformed(String),
    #[error("invalid Huffman code in entropy-coded segment")]
    InvalidHuffmanCode,
    #[error("truncated stream")]
    Truncated,
    #[error("unsupported JPEG feature: {0}")]
    Unsupported(String),
}

/// A complete JFIF byte stream, from SOI through EOI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct JpegStream(Vec<u8>);

impl JpegStream {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u8>> for JpegStream {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

impl AsRef<[u8]> for JpegStream {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

pub(crate) mod marker {
    pub const SOI: u8 = 0xD8;
    pub const EOI: u8 = 0xD9;
    pub const SOF0: u8 = 0xC0;
    pub const SOF1: u8 = 0xC1;
    pub const DHT: u8 = 0xC4;
    pub const DQT: u8 = 0xDB;
    pub const DRI: u8 = 0xDD;
    pub const SOS: u8 = 0xDA;
    pub const APP0: u8 = 0xE0;
    pub const RST0: u8 = 0xD0;
    pub const RST7: u8 = 0xD7;
}
