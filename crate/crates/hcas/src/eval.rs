//! Dataset evaluation: PSNR, stream size, raw compression and bus activity
//! for one or more acquisition settings.

use std::io::Write;
use std::path::{Path, PathBuf};

use hcas_core::acquisition::sense;
use hcas_core::analysis::{AnalysisReport, SwitchingCounts};
use hcas_core::{
    acquire, bicubic_upscale, drcas_forward, jpeg_decode, psnr, raw_compression, restore_brightness, AcquisitionConfig,
    DrcasModel, Image,
};
use rayon::prelude::*;

use crate::io::{encode_png_best, list_images, load_image, IoError};
use crate::Error;

/// Which word stream the switching activity is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum AlphaSource {
    /// The uncompressed 8-bit input images.
    #[default]
    Original,
    /// The binned, truncated sensor output for each setting.
    Sensed,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
    /// Evaluate only the first `n` images in name order.
    pub limit: Option<usize>,
    pub alpha_source: AlphaSource,
}

/// One setting to evaluate, optionally with a trained model.
#[derive(Debug, Clone, Copy)]
pub struct EvalJob<'a> {
    pub config: AcquisitionConfig,
    pub model: Option<&'a DrcasModel>,
}

#[derive(Debug, Clone)]
struct ImageResult {
    psnr_bicubic: f64,
    psnr_drcas: Option<f64>,
    size_ratio: f64,
    counts: SwitchingCounts,
}

/// Checks that a model restores exactly the factor its setting bins by.
pub fn check_model_scale(model: &DrcasModel, cfg: &AcquisitionConfig) -> Result<(), Error> {
    let (bx, by) = cfg.bin().factors();
    if (model.scale_x, model.scale_y) != (bx, by) {
        return Err(Error::Usage(format!(
            "model restores {}x{} but the acquisition setting bins {}",
            model.scale_x,
            model.scale_y,
            cfg.bin()
        )));
    }
    Ok(())
}

/// Sorted dataset image paths, truncated to `limit`.
pub fn dataset_images(dir: &Path, limit: Option<usize>) -> Result<Vec<PathBuf>, Error> {
    if !dir.is_dir() {
        return Err(Error::Runtime(format!("dataset directory {} does not exist", dir.display())));
    }
    let mut files = list_images(dir)?;
    if let Some(n) = limit {
        files.truncate(n);
    }
    if files.is_empty() {
        return Err(Error::Runtime(format!("no .png/.ppm/.pgm images in {}", dir.display())));
    }
    Ok(files)
}

/// Decoded, brightness-restored receiver input for `original` under `cfg`,
/// together with the compressed stream length.
pub fn degrade(original: &Image, cfg: &AcquisitionConfig) -> Result<(Image, usize), Error> {
    let stream = acquire(original, cfg)?;
    let decoded = jpeg_decode(&stream)?;
    Ok((restore_brightness(&decoded, cfg.truncate())?, stream.len()))
}

fn evaluate_image(
    original: &Image,
    baseline_bytes: usize,
    job: &EvalJob<'_>,
    alpha: AlphaSource,
) -> Result<ImageResult, Error> {
    let cfg = &job.config;
    let (bx, by) = cfg.bin().factors();
    let reference = original.crop_to_multiple(bx, by)?;
    let (lr, stream_len) = degrade(original, cfg)?;
    let psnr_bicubic = psnr(&reference, &bicubic_upscale(&lr, bx, by)?)?;
    let psnr_drcas = match job.model {
        Some(m) => Some(psnr(&reference, &drcas_forward(&lr, m, bx, by)?)?),
        None => None,
    };
    let mut counts = SwitchingCounts::default();
    match alpha {
        AlphaSource::Original => counts.add_image(original),
        AlphaSource::Sensed => counts.add_image(&sense(original, cfg)?),
    }
    Ok(ImageResult { psnr_bicubic, psnr_drcas, size_ratio: stream_len as f64 / baseline_bytes as f64, counts })
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Runtime(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Evaluates several settings over the images in `dataset`.
///
/// Each image is loaded once and run through every job. Per-image PSNR and
/// size ratios are averaged in file-name order, so the result does not
/// depend on the worker count.
pub fn eval_configs(dataset: &Path, jobs: &[EvalJob<'_>], opts: &EvalOptions) -> Result<Vec<AnalysisReport>, Error> {
    for job in jobs {
        if let Some(m) = job.model {
            check_model_scale(m, &job.config)?;
        }
    }
    let files = dataset_images(dataset, opts.limit)?;
    let per_image: Vec<Result<Vec<ImageResult>, Error>> = with_pool(opts.workers, || {
        files
            .par_iter()
            .map(|path| {
                let original = load_image(path).map_err(|e| with_path(e, path))?;
                let baseline = encode_png_best(&original)?.len();
                jobs.iter().map(|job| evaluate_image(&original, baseline, job, opts.alpha_source)).collect()
            })
            .collect()
    })?;
    let per_image: Vec<Vec<ImageResult>> = per_image.into_iter().collect::<Result<_, _>>()?;
    jobs.iter()
        .enumerate()
        .map(|(j, job)| {
            let rows = per_image.iter().map(|r| &r[j]);
            let mut counts = SwitchingCounts::default();
            rows.clone().for_each(|r| counts.merge(&r.counts));
            let cfg = job.config;
            Ok(AnalysisReport {
                config: cfg,
                images: per_image.len(),
                psnr_drcas: job.model.map(|_| mean(rows.clone().map(|r| r.psnr_drcas.unwrap_or(f64::NAN)))),
                psnr_bicubic: mean(rows.clone().map(|r| r.psnr_bicubic)),
                raw_compression: raw_compression(cfg.bin().pixels(), cfg.bitwidth())?.as_f64(),
                size_percent: mean(rows.map(|r| r.size_ratio)),
                alpha: counts.alpha()?,
            })
        })
        .collect()
}

/// Single-setting convenience wrapper around [`eval_configs`].
pub fn eval_config(
    dataset: &Path,
    config: AcquisitionConfig,
    model: Option<&DrcasModel>,
    opts: &EvalOptions,
) -> Result<AnalysisReport, Error> {
    let mut v = eval_configs(dataset, &[EvalJob { config, model }], opts)?;
    Ok(v.remove(0))
}

/// Pooled transition counts over the dataset images.
///
/// With `sensed = Some(cfg)` the counts come from the binned, truncated
/// sensor output instead of the originals.
pub fn switching_dataset(
    dataset: &Path,
    sensed: Option<AcquisitionConfig>,
    opts: &EvalOptions,
) -> Result<(usize, SwitchingCounts), Error> {
    let files = dataset_images(dataset, opts.limit)?;
    let per_image: Vec<Result<SwitchingCounts, Error>> = with_pool(opts.workers, || {
        files
            .par_iter()
            .map(|path| {
                let img = load_image(path).map_err(|e| with_path(e, path))?;
                let img = match sensed {
                    Some(cfg) => sense(&img, &cfg)?,
                    None => img,
                };
                let mut c = SwitchingCounts::default();
                c.add_image(&img);
                Ok(c)
            })
            .collect()
    })?;
    let mut total = SwitchingCounts::default();
    for c in per_image {
        total.merge(&c?);
    }
    Ok((files.len(), total))
}

fn with_path(e: IoError, path: &Path) -> Error {
    match e {
        IoError::Io { .. } => Error::Io(e),
        e => Error::Runtime(format!("{}: {e}", path.display())),
    }
}

/// Conventions written as `#` comment lines above every report.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("rounding", "half away from zero (binning, truncation, quantization, final outputs)"),
    ("truncation_overflow", "clamp to 2^(8-N)-1"),
    ("binning", "block average per RGB channel; 2x1 merges horizontal pairs; center crop to bin multiple"),
    ("jpeg", "baseline 4:4:4, IJG quality scaling, Annex K Huffman tables, f64 DCT"),
    ("bicubic", "Keys a=-0.5, output center (i+0.5)/s-0.5, clamped edge taps, round and clamp"),
    ("psnr", "8-bit RGB, MSE pooled over channels, mean of per-image values"),
    ("size_percent", "stream bytes / PNG (max compression) bytes of the uncropped original, mean of per-image ratios"),
    ("raw_compression", "(8n-b)/(8n), exact"),
    ("alpha", "0->1 transitions per cycle, column-major readout per channel, cycles = words-1 per channel, pooled"),
];

pub const CSV_COLUMNS: &str = "bin,N,Q,restorer,images,psnr_drcas,psnr_bicubic,raw_compression,size_percent,\
alpha0,alpha1,alpha2,alpha3,alpha4,alpha5,alpha6,alpha7";

pub fn write_header(out: &mut impl Write, extra: &[(&str, String)]) -> std::io::Result<()> {
    for (k, v) in CONVENTIONS {
        writeln!(out, "# {k}: {v}")?;
    }
    for (k, v) in extra {
        writeln!(out, "# {k}: {v}")?;
    }
    writeln!(out, "{CSV_COLUMNS}")
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn write_report_row(out: &mut impl Write, r: &AnalysisReport) -> std::io::Result<()> {
    let cfg = &r.config;
    let restorer = if r.psnr_drcas.is_some() { "drcas" } else { "bicubic" };
    write!(
        out,
        "{},{},{},{},{},{},{},{},{:.6}",
        cfg.bin(),
        cfg.truncate(),
        cfg.quality(),
        restorer,
        r.images,
        r.psnr_drcas.map(fmt_db).unwrap_or_default(),
        fmt_db(r.psnr_bicubic),
        r.raw_compression,
        r.size_percent
    )?;
    for a in r.alpha {
        write!(out, ",{a:.6}")?;
    }
    writeln!(out)
}
