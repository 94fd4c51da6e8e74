//! Planar integer rasters, PSNR, and patch sampling.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: u32, height: u32 },
    #[error("unsupported channel count {0}, expected 1 or 3")]
    Channels(u8),
    #[error("bit depth {0} outside [1, 8]")]
    BitDepth(u8),
    #[error("sample buffer holds {actual} values, expected {expected}")]
    SampleCount { expected: usize, actual: usize },
    #[error("sample {value} at index {index} does not fit in {bit_depth} bits")]
    SampleRange { index: usize, value: u8, bit_depth: u8 },
    #[error("shape mismatch: {a_width}x{a_height}x{a_channels} vs {b_width}x{b_height}x{b_channels}")]
    ShapeMismatch { a_width: u32, a_height: u32, a_channels: u8, b_width: u32, b_height: u32, b_channels: u8 },
    #[error("operation requires 8-bit samples, got {0}-bit")]
    NotEightBit(u8),
    #[error("patch size {size} does not fit in a {width}x{height} image")]
    PatchTooLarge { size: u32, width: u32, height: u32 },
    #[error("invalid patch spec: size and count must be at least 1")]
    InvalidPatchSpec,
}

/// A planar raster of unsigned samples.
///
/// Samples are stored channel-major: the whole first plane, then the
/// second, each plane row-major. Every sample is below `2^bit_depth`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: u32,
    height: u32,
    channels: u8,
    bit_depth: u8,
    samples: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: u8, bit_depth: u8, samples: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::Channels(channels));
        }
        if !(1..=8).contains(&bit_depth) {
            return Err(ImageError::BitDepth(bit_depth));
        }
        let expected = width as usize * height as usize * channels as usize;
        if samples.len() != expected {
            return Err(ImageError::SampleCount { expected, actual: samples.len() });
        }
        if bit_depth < 8 {
            let limit = 1u16 << bit_depth;
            if let Some((index, &value)) = samples.iter().enumerate().find(|(_, &s)| u16::from(s) >= limit) {
                return Err(ImageError::SampleRange { index, value, bit_depth });
            }
        }
        Ok(Self { width, height, channels, bit_depth, samples })
    }

    /// A constant image with every sample set to `value`.
    pub fn filled(width: u32, height: u32, channels: u8, bit_depth: u8, value: u8) -> Result<Self, ImageError> {
        let n = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, bit_depth, vec![value; n])
    }

    /// Builds an image from interleaved samples (`RGBRGB...` or gray).
    pub fn from_interleaved(
        width: u32,
        height: u32,
        channels: u8,
        bit_depth: u8,
        interleaved: &[u8],
    ) -> Result<Self, ImageError> {
        let c = channels as usize;
        let plane = width as usize * height as usize;
        if c == 0 || interleaved.len() != plane * c {
            // Let `new` report the precise problem.
            return Self::new(width, height, channels, bit_depth, interleaved.to_vec());
        }
        let mut samples = vec![0u8; interleaved.len()];
        for (i, px) in interleaved.chunks_exact(c).enumerate() {
            for (ch, &v) in px.iter().enumerate() {
                samples[ch * plane + i] = v;
            }
        }
        Self::new(width, height, channels, bit_depth, samples)
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let c = self.channels as usize;
        let plane = self.plane_len();
        let mut out = vec![0u8; self.samples.len()];
        for ch in 0..c {
            for (i, &v) in self.plane(ch).iter().enumerate() {
                out[i * c + ch] = v;
            }
        }
        debug_assert_eq!(out.len(), plane * c);
        out
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> u8 {
        self.channels
    }

    #[inline]
    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn plane(&self, channel: usize) -> &[u8] {
        let n = self.plane_len();
        &self.samples[channel * n..(channel + 1) * n]
    }

    #[inline]
    pub fn get(&self, channel: usize, x: u32, y: u32) -> u8 {
        self.samples[channel * self.plane_len() + y as usize * self.width as usize + x as usize]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Relabels the samples with a different bit depth without touching them.
    pub fn with_bit_depth(self, bit_depth: u8) -> Result<Self, ImageError> {
        Self::new(self.width, self.height, self.channels, bit_depth, self.samples)
    }

    /// Copies out the `w`x`h` window whose top-left corner is (`x`, `y`).
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<Self, ImageError> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(ImageError::PatchTooLarge { size: w.max(h), width: self.width, height: self.height });
        }
        let mut samples = Vec::with_capacity(w as usize * h as usize * self.channels as usize);
        for ch in 0..self.channels as usize {
            let plane = self.plane(ch);
            for row in y..y + h {
                let start = row as usize * self.width as usize + x as usize;
                samples.extend_from_slice(&plane[start..start + w as usize]);
            }
        }
        Self::new(w, h, self.channels, self.bit_depth, samples)
    }

    /// Center-crops to the largest size divisible by (`fx`, `fy`).
    pub fn crop_to_multiple(&self, fx: u32, fy: u32) -> Result<Self, ImageError> {
        let w = self.width - self.width % fx.max(1);
        let h = self.height - self.height % fy.max(1);
        if w == self.width && h == self.height {
            return Ok(self.clone());
        }
        if w == 0 || h == 0 {
            return Err(ImageError::EmptyImage { width: w, height: h });
        }
        self.crop((self.width - w) / 2, (self.height - h) / 2, w, h)
    }
}

fn check_shape(a: &Image, b: &Image) -> Result<(), ImageError> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(ImageError::ShapeMismatch {
            a_width: a.width,
            a_height: a.height,
            a_channels: a.channels,
            b_width: b.width,
            b_height: b.height,
            b_channels: b.channels,
        })
    }
}

/// Sum of squared sample differences over every channel.
pub fn squared_error(a: &Image, b: &Image) -> Result<u64, ImageError> {
    check_shape(a, b)?;
    Ok(a.samples
        .iter()
        .zip(&b.samples)
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum())
}

/// Mean squared error pooled over all channels and pixels.
pub fn mse(a: &Image, b: &Image) -> Result<f64, ImageError> {
    let sse = squared_error(a, b)?;
    Ok(sse as f64 / a.samples.len() as f64)
}

/// Peak signal-to-noise ratio in dB against a peak of 255.
///
/// The MSE is pooled over every channel (RGB-pooled, not luma-only).
/// Identical images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64, ImageError> {
    check_shape(a, b)?;
    for img in [a, b] {
        if img.bit_depth != 8 {
            return Err(ImageError::NotEightBit(img.bit_depth));
        }
    }
    let err = mse(a, b)?;
    Ok(psnr_from_mse(err))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * libm::log10(255.0 * 255.0 / mse)
    }
}

/// Where and how many square patches to cut from an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchSpec {
    pub size: u32,
    pub count: u32,
    pub seed: u64,
    /// Top-left coordinates are multiples of these (binning factors).
    pub align_x: u32,
    pub align_y: u32,
}

impl PatchSpec {
    pub fn new(size: u32, count: u32, seed: u64) -> Self {
        Self { size, count, seed, align_x: 1, align_y: 1 }
    }

    pub fn aligned(mut self, align_x: u32, align_y: u32) -> Self {
        self.align_x = align_x.max(1);
        self.align_y = align_y.max(1);
        self
    }
}

/// Draws `spec.count` top-left corners uniformly over every legal placement.
///
/// The result depends only on the image dimensions and `spec`.
pub fn sample_patches(width: u32, height: u32, spec: &PatchSpec) -> Result<Vec<(u32, u32)>, ImageError> {
    if spec.size == 0 || spec.count == 0 {
        return Err(ImageError::InvalidPatchSpec);
    }
    if spec.size > width || spec.size > height {
        return Err(ImageError::PatchTooLarge { size: spec.size, width, height });
    }
    let ax = spec.align_x.max(1);
    let ay = spec.align_y.max(1);
    let slots_x = (width - spec.size) / ax;
    let slots_y = (height - spec.size) / ay;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.count)
        .map(|_| {
            let x = rng.random_range(0..=slots_x) * ax;
            let y = rng.random_range(0..=slots_y) * ay;
            (x, y)
        })
        .collect())
}
