//! Sensor-side stages: averaging binning and bit truncation, plus the
//! receiver-side brightness restoration that undoes the truncation scale.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::image::{Image, ImageError};
use crate::jpeg::{self, JpegError, JpegStream};
use crate::math::round_half_away;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AcquisitionError {
    #[error("{width}x{height} image is not divisible into {bin_w}x{bin_h} bins")]
    NotDivisible { width: u32, height: u32, bin_w: u32, bin_h: u32 },
    #[error("bin factors must be at least 1, got {0}x{1}")]
    ZeroBin(u32, u32),
    #[error("truncation of {0} bits is outside [0, 3]")]
    TruncateRange(u8),
    #[error("JPEG quality {0} is outside [70, 100]")]
    QualityRange(u8),
    #[error("unsupported binning mode `{0}`, expected 1x1, 2x1, 2x2 or 4x4")]
    BinMode(alloc::string::String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Jpeg(#[from] JpegError),
}

/// Binning patterns supported by the sensor model.
///
/// `2x1` merges two horizontally adjacent pixels: width halves, height is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinMode {
    None,
    Bin2x1,
    Bin2x2,
    Bin4x4,
}

impl BinMode {
    /// The three modes the restoration networks are trained for.
    pub const BINNED: [BinMode; 3] = [BinMode::Bin2x1, BinMode::Bin2x2, BinMode::Bin4x4];

    /// (horizontal, vertical) factors.
    pub fn factors(self) -> (u32, u32) {
        match self {
            BinMode::None => (1, 1),
            BinMode::Bin2x1 => (2, 1),
            BinMode::Bin2x2 => (2, 2),
            BinMode::Bin4x4 => (4, 4),
        }
    }

    pub fn pixels(self) -> u32 {
        let (w, h) = self.factors();
        w * h
    }

    pub fn from_factors(w: u32, h: u32) -> Option<Self> {
        match (w, h) {
            (1, 1) => Some(BinMode::None),
            (2, 1) => Some(BinMode::Bin2x1),
            (2, 2) => Some(BinMode::Bin2x2),
            (4, 4) => Some(BinMode::Bin4x4),
            _ => None,
        }
    }
}

impl fmt::Display for BinMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (w, h) = self.factors();
        write!(f, "{w}x{h}")
    }
}

impl FromStr for BinMode {
    type Err = AcquisitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AcquisitionError::BinMode(s.into());
        let (w, h) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let w: u32 = w.parse().map_err(|_| bad())?;
        let h: u32 = h.parse().map_err(|_| bad())?;
        BinMode::from_factors(w, h).ok_or_else(bad)
    }
}

/// One acquisition setting: binning mode, truncated bits `N`, JPEG quality `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AcquisitionConfig {
    bin: BinMode,
    truncate: u8,
    quality: u8,
}

impl AcquisitionConfig {
    pub const QUALITIES: [u8; 4] = [100, 90, 80, 70];

    pub fn new(bin: BinMode, truncate: u8, quality: u8) -> Result<Self, AcquisitionError> {
        check_truncate(truncate)?;
        if !(70..=100).contains(&quality) {
            return Err(AcquisitionError::QualityRange(quality));
        }
        Ok(Self { bin, truncate, quality })
    }

    #[inline]
    pub fn bin(&self) -> BinMode {
        self.bin
    }

    #[inline]
    pub fn truncate(&self) -> u8 {
        self.truncate
    }

    #[inline]
    pub fn quality(&self) -> u8 {
        self.quality
    }

    /// Bits per sample leaving the sensor, `8 - N`.
    #[inline]
    pub fn bitwidth(&self) -> u8 {
        8 - self.truncate
    }

    /// The 48 settings evaluated for the restoration networks, ordered by
    /// quality (descending), bit width (descending), then binning mode.
    pub fn grid() -> Vec<AcquisitionConfig> {
        let mut out = Vec::with_capacity(48);
        for q in Self::QUALITIES {
            for n in 0..=3 {
                for bin in BinMode::BINNED {
                    out.push(Self { bin, truncate: n, quality: q });
                }
            }
        }
        out
    }
}

impl fmt::Display for AcquisitionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bin={} N={} Q={}", self.bin, self.truncate, self.quality)
    }
}

fn check_truncate(n: u8) -> Result<(), AcquisitionError> {
    if n > 3 {
        Err(AcquisitionError::TruncateRange(n))
    } else {
        Ok(())
    }
}

/// Averages each `bin_w`x`bin_h` block per channel, rounding half away from zero.
pub fn bin_average(img: &Image, bin_w: u32, bin_h: u32) -> Result<Image, AcquisitionError> {
    if bin_w == 0 || bin_h == 0 {
        return Err(AcquisitionError::ZeroBin(bin_w, bin_h));
    }
    let (w, h) = (img.width(), img.height());
    if w % bin_w != 0 || h % bin_h != 0 {
        return Err(AcquisitionError::NotDivisible { width: w, height: h, bin_w, bin_h });
    }
    if bin_w == 1 && bin_h == 1 {
        return Ok(img.clone());
    }
    let (ow, oh) = (w / bin_w, h / bin_h);
    let count = bin_w * bin_h;
    let mut out = Vec::with_capacity(ow as usize * oh as usize * img.channels() as usize);
    for ch in 0..img.channels() as usize {
        let plane = img.plane(ch);
        for by in 0..oh {
            for bx in 0..ow {
                let mut sum = 0u32;
                for dy in 0..bin_h {
                    let row = (by * bin_h + dy) as usize * w as usize;
                    for dx in 0..bin_w {
                        sum += u32::from(plane[row + (bx * bin_w + dx) as usize]);
                    }
                }
                // Non-negative mean: half-away-from-zero is (2*sum + count) / (2*count).
                out.push(((2 * sum + count) / (2 * count)) as u8);
            }
        }
    }
    Ok(Image::new(ow, oh, img.channels(), img.bit_depth(), out)?)
}

/// Drops `n` low bits by scaled rounding: `min(round(p / 2^n), 2^(8-n) - 1)`.
///
/// The output carries bit depth `8 - n`. The clamp is needed because
/// rounding 255 / 8 gives 32, which does not fit in 5 bits.
pub fn truncate_bits(img: &Image, n: u8) -> Result<Image, AcquisitionError> {
    check_truncate(n)?;
    if img.bit_depth() != 8 {
        return Err(ImageError::NotEightBit(img.bit_depth()).into());
    }
    let max = (1u32 << (8 - n)) - 1;
    let scale = 1.0 / f64::from(1u32 << n);
    let samples =
        img.samples().iter().map(|&p| (round_half_away(f64::from(p) * scale) as u32).min(max) as u8).collect();
    Ok(Image::new(img.width(), img.height(), img.channels(), 8 - n, samples)?)
}

/// Multiplies decoded samples by `2^n`, saturating at 255.
pub fn restore_brightness(img: &Image, n: u8) -> Result<Image, AcquisitionError> {
    check_truncate(n)?;
    let samples = img.samples().iter().map(|&p| (u32::from(p) << n).min(255) as u8).collect();
    Ok(Image::new(img.width(), img.height(), img.channels(), 8, samples)?)
}

/// Sensor output before JPEG: cropped to the binning grid, binned, truncated.
///
/// The result has bit depth `8 - N`.
pub fn sense(img: &Image, cfg: &AcquisitionConfig) -> Result<Image, AcquisitionError> {
    let (bw, bh) = cfg.bin.factors();
    let cropped = img.crop_to_multiple(bw, bh)?;
    let binned = bin_average(&cropped, bw, bh)?;
    truncate_bits(&binned, cfg.truncate)
}

/// Stages 1 to 3: bin, truncate, and JPEG-encode at `cfg.quality()`.
///
/// Images whose size is not a multiple of the bin factors are center-cropped
/// first. The truncated samples sit in the low bits of 8-bit storage when
/// they reach the encoder.
pub fn acquire(img: &Image, cfg: &AcquisitionConfig) -> Result<JpegStream, AcquisitionError> {
    let sensed = sense(img, cfg)?.with_bit_depth(8)?;
    Ok(jpeg::jpeg_encode(&sensed, cfg.quality)?)
}
