//! Compressed image acquisition kernels.
//!
//! This crate models an acquisition chain in which a sensor bins pixels,
//! drops low-order bits, and hands the result to a baseline JPEG encoder.
//! The receiving side decodes, restores brightness, and upscales either
//! with a bicubic filter or with a small residual CNN that learns the
//! correction on top of the bicubic image.
//!
//! Everything here is `no_std` and only needs `alloc`. File formats, the
//! weight container, dataset evaluation, and the command line live in the
//! `hcas` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod acquisition;
pub mod analysis;
pub mod image;
pub mod jpeg;
pub mod restoration;

mod math;

pub use acquisition::{
    acquire, bin_average, restore_brightness, truncate_bits, AcquisitionConfig, AcquisitionError, BinMode,
};
pub use analysis::{
    raw_compression, size_percent, switching_activity, AnalysisError, AnalysisReport, RawCompression, SwitchingCounts,
};
pub use image::{psnr, sample_patches, Image, ImageError, PatchSpec};
pub use jpeg::{jpeg_decode, jpeg_encode, JpegError, JpegStream};
pub use math::round_half_away;
pub use restoration::{bicubic_upscale, drcas_forward, DrcasModel, RestorationError};
