//! Data-rate and bus-activity metrics.

use crate::acquisition::AcquisitionConfig;
use crate::image::Image;
use crate::jpeg::JpegStream;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("binned pixel count must be at least 1, got {0}")]
    BinnedPixels(u32),
    #[error("bit width {0} outside [1, 8]")]
    BitWidth(u8),
    #[error("image has fewer than two words per channel, no transitions to count")]
    TooFewWords,
    #[error("lossless baseline size is zero")]
    ZeroBaseline,
}

/// Raw data reduction as an exact fraction `(8n - b) / (8n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawCompression {
    pub numerator: u32,
    pub denominator: u32,
}

impl RawCompression {
    pub fn as_f64(self) -> f64 {
        f64::from(self.numerator) / f64::from(self.denominator)
    }

    /// Percentage in hundredths, truncated toward zero (78.125 % -> 7812).
    pub fn percent_hundredths(self) -> u32 {
        (u64::from(self.numerator) * 10_000 / u64::from(self.denominator)) as u32
    }
}

/// Fraction of sensor bits removed when `n` pixels become one `b`-bit word.
pub fn raw_compression(n: u32, b: u8) -> Result<RawCompression, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::BinnedPixels(n));
    }
    if !(1..=8).contains(&b) {
        return Err(AnalysisError::BitWidth(b));
    }
    Ok(RawCompression { numerator: 8 * n - u32::from(b), denominator: 8 * n })
}

/// Per-bit transition counts over a column-major bus readout.
///
/// Each channel is an independent word sequence; counts from several
/// channels and images can be pooled with [`SwitchingCounts::add_image`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SwitchingCounts {
    /// 0 -> 1 transitions per bit, LSB first.
    pub rises: [u64; 8],
    /// Transitions in either direction per bit, LSB first.
    pub toggles: [u64; 8],
    /// Consecutive word pairs seen (words - 1 per channel).
    pub cycles: u64,
}

impl SwitchingCounts {
    pub fn add_image(&mut self, img: &Image) {
        let (w, h) = (img.width() as usize, img.height() as usize);
        for c in 0..img.channels() as usize {
            let plane = img.plane(c);
            let mut prev: Option<u8> = None;
            for x in 0..w {
                for y in 0..h {
                    let cur = plane[y * w + x];
                    if let Some(p) = prev {
                        let rise = !p & cur;
                        let toggle = p ^ cur;
                        for k in 0..8 {
                            self.rises[k] += u64::from((rise >> k) & 1);
                            self.toggles[k] += u64::from((toggle >> k) & 1);
                        }
                        self.cycles += 1;
                    }
                    prev = Some(cur);
                }
            }
        }
    }

    pub fn merge(&mut self, other: &SwitchingCounts) {
        for k in 0..8 {
            self.rises[k] += other.rises[k];
            self.toggles[k] += other.toggles[k];
        }
        self.cycles += other.cycles;
    }

    /// Rising transitions per cycle, LSB first; each entry is in [0, 0.5].
    pub fn alpha(&self) -> Result<[f64; 8], AnalysisError> {
        self.ratio(&self.rises)
    }

    /// Transitions of either polarity per cycle, LSB first.
    pub fn toggle_rate(&self) -> Result<[f64; 8], AnalysisError> {
        self.ratio(&self.toggles)
    }

    fn ratio(&self, counts: &[u64; 8]) -> Result<[f64; 8], AnalysisError> {
        if self.cycles == 0 {
            return Err(AnalysisError::TooFewWords);
        }
        let d = self.cycles as f64;
        Ok(core::array::from_fn(|k| counts[k] as f64 / d))
    }
}

/// Switching activity α per bit (LSB first) of one image read column by column.
pub fn switching_activity(img: &Image) -> Result<[f64; 8], AnalysisError> {
    let mut counts = SwitchingCounts::default();
    counts.add_image(img);
    counts.alpha()
}

/// Stream size relative to the lossless baseline size.
pub fn size_percent(stream: &JpegStream, baseline_bytes: u64) -> Result<f64, AnalysisError> {
    if baseline_bytes == 0 {
        return Err(AnalysisError::ZeroBaseline);
    }
    Ok(stream.len() as f64 / baseline_bytes as f64)
}

/// One row of an evaluation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub config: AcquisitionConfig,
    pub images: usize,
    /// `None` when only the bicubic restorer was run.
    pub psnr_drcas: Option<f64>,
    pub psnr_bicubic: f64,
    pub raw_compression: f64,
    pub size_percent: f64,
    pub alpha: [f64; 8],
}
