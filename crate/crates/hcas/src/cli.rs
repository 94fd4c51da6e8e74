use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcas_core::analysis::SwitchingCounts;
use hcas_core::{
    acquire, bicubic_upscale, drcas_forward, jpeg_decode, psnr, raw_compression, restore_brightness, AcquisitionConfig,
    BinMode, DrcasModel, JpegStream,
};

use crate::eval::{self, AlphaSource, EvalJob, EvalOptions};
use crate::io::{load_image, save_image};
use crate::pipeline::{entry_name, grid_pipeline, parse_pipeline};
use crate::sidecar::{read_sidecar, sidecar_path, write_sidecar};
use crate::weights::load_weights;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "hcas", version, about = "Compressed image acquisition simulator and restoration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bin, truncate and JPEG-encode an image; writes OUTPUT and OUTPUT.meta.
    Acquire(AcquireArgs),
    /// Decode a stream, restore brightness and upscale it.
    Restore(RestoreArgs),
    /// Print the PSNR between two images.
    Eval(EvalArgs),
    /// Produce evaluation tables as CSV.
    Analyze(AnalyzeArgs),
    /// Evaluate every setting listed in a batch configuration file.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct AcquireArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(BinMode))]
    pub bin: BinMode,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
    pub truncate: u8,
    #[arg(long, value_parser = clap::value_parser!(u8).range(70..=100))]
    pub quality: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bicubic,
    Drcas,
}

#[derive(Debug, Args)]
pub struct RestoreArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Bicubic)]
    pub method: Method,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Overrides the binning mode from the sidecar file.
    #[arg(long, value_parser = clap::value_parser!(BinMode))]
    pub bin: Option<BinMode>,
    /// Overrides the truncated bit count from the sidecar file.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
    pub truncate: Option<u8>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Switching,
    Rawcomp,
    Size,
    Table1,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use only the first N images in file-name order.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = AlphaSource::Original)]
    pub alpha_source: AlphaSource,
    /// Restrict to one binning mode.
    #[arg(long, value_parser = clap::value_parser!(BinMode))]
    pub bin: Option<BinMode>,
    /// Restrict to one truncation setting.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
    pub truncate: Option<u8>,
    /// Restrict to one quality setting.
    #[arg(long, value_parser = clap::value_parser!(u8).range(70..=100))]
    pub quality: Option<u8>,
    /// Network weights applied to every selected setting with a matching scale.
    #[arg(long, conflicts_with = "weights_dir")]
    pub weights: Option<PathBuf>,
    /// Directory of `<bin>_n<N>_q<Q>.drcs` files; settings without a file use bicubic only.
    #[arg(long)]
    pub weights_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, required_unless_present = "emit_grid")]
    pub config: Option<PathBuf>,
    /// Overrides `out` from the configuration file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a configuration covering all 48 settings and exit.
    #[arg(long)]
    pub emit_grid: bool,
    /// Dataset directory written into the emitted grid.
    #[arg(long, requires = "emit_grid")]
    pub dataset: Option<String>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Acquire(a) => cmd_acquire(&a),
        Command::Restore(a) => cmd_restore(&a),
        Command::Eval(a) => cmd_eval(&a).map(|s| println!("{s}")),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|source| crate::io::IoError::Io { path: path.to_path_buf(), source }.into())
}

pub fn cmd_acquire(a: &AcquireArgs) -> Result<(), Error> {
    let cfg = AcquisitionConfig::new(a.bin, a.truncate, a.quality).map_err(|e| Error::Usage(e.to_string()))?;
    let img = load_image(&a.input)?;
    let stream = acquire(&img, &cfg)?;
    write_file(&a.output, stream.as_bytes())?;
    write_sidecar(&a.output, &cfg)?;
    Ok(())
}

/// The receiver chain: decode, shift back to 8 bits, upscale.
pub fn restore_stream(
    stream: &JpegStream,
    bin: BinMode,
    truncate: u8,
    model: Option<&DrcasModel>,
) -> Result<hcas_core::Image, Error> {
    let decoded = jpeg_decode(stream)?;
    let lr = restore_brightness(&decoded, truncate)?;
    let (sx, sy) = bin.factors();
    Ok(match model {
        Some(m) => drcas_forward(&lr, m, sx, sy)?,
        None => bicubic_upscale(&lr, sx, sy)?,
    })
}

pub fn cmd_restore(a: &RestoreArgs) -> Result<(), Error> {
    let model = match (a.method, &a.weights) {
        (Method::Drcas, None) => return Err(Error::Usage("--method drcas requires --weights".into())),
        (Method::Drcas, Some(w)) => Some(load_weights(w)?),
        (Method::Bicubic, Some(_)) => return Err(Error::Usage("--weights is only used with --method drcas".into())),
        (Method::Bicubic, None) => None,
    };
    let (bin, truncate) = match (a.bin, a.truncate) {
        (Some(b), Some(t)) => (b, t),
        (b, t) => {
            let meta = sidecar_path(&a.input);
            if !meta.exists() {
                return Err(Error::Usage(format!(
                    "{} not found; pass --bin and --truncate to describe the stream",
                    meta.display()
                )));
            }
            let cfg = read_sidecar(&a.input)?;
            (b.unwrap_or(cfg.bin()), t.unwrap_or(cfg.truncate()))
        }
    };
    if let Some(m) = &model {
        let (bx, by) = bin.factors();
        if (m.scale_x, m.scale_y) != (bx, by) {
            return Err(Error::Usage(format!(
                "scale mismatch: model restores {}x{} but the stream was binned {bin}",
                m.scale_x, m.scale_y
            )));
        }
    }
    let bytes = fs::read(&a.input).map_err(|source| crate::io::IoError::Io { path: a.input.clone(), source })?;
    let out = restore_stream(&JpegStream::from_bytes(bytes), bin, truncate, model.as_ref())?;
    save_image(&out, &a.output)?;
    Ok(())
}

/// PSNR as printed by `hcas eval`: two decimals, or `inf`.
pub fn cmd_eval(a: &EvalArgs) -> Result<String, Error> {
    let r = load_image(&a.reference)?;
    let t = load_image(&a.test)?;
    let db = psnr(&r, &t)?;
    Ok(if db.is_infinite() { "inf".into() } else { format!("{db:.2}") })
}

fn selected_configs(a: &AnalyzeArgs) -> Vec<AcquisitionConfig> {
    AcquisitionConfig::grid()
        .into_iter()
        .filter(|c| a.bin.is_none_or(|b| c.bin() == b))
        .filter(|c| a.truncate.is_none_or(|n| c.truncate() == n))
        .filter(|c| a.quality.is_none_or(|q| c.quality() == q))
        .collect()
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(
            fs::File::create(p).map_err(|source| crate::io::IoError::Io { path: p.clone(), source })?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn csv_io(e: std::io::Error) -> Error {
    Error::Runtime(format!("writing report: {e}"))
}

/// Table of `(8n-b)/(8n)` for every binned mode and bit width.
pub fn rawcomp_rows() -> Result<Vec<String>, Error> {
    let mut rows = Vec::new();
    for bin in BinMode::BINNED {
        for n in 0..=3u8 {
            let rc = raw_compression(bin.pixels(), 8 - n)?;
            rows.push(format!("{bin},{n},,,0,,,{}{}", rc.as_f64(), ",".repeat(9)));
        }
    }
    Ok(rows)
}

fn fmt_rates(v: &[f64; 8]) -> String {
    v.iter().map(|a| format!("{a:.6}")).collect::<Vec<_>>().join(",")
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), Error> {
    let mode_name = a.mode.to_possible_value().expect("no skipped variants").get_name().to_string();
    if a.mode == Mode::Rawcomp {
        let rows = rawcomp_rows()?;
        let mut out = open_out(&a.out)?;
        eval::write_header(&mut out, &[("mode", mode_name)]).map_err(csv_io)?;
        for r in rows {
            writeln!(out, "{r}").map_err(csv_io)?;
        }
        return out.flush().map_err(csv_io);
    }
    let dataset = a.dataset.as_deref().ok_or_else(|| Error::Usage(format!("--mode {mode_name} needs --dataset")))?;
    let opts = EvalOptions { workers: a.workers, limit: a.limit, alpha_source: a.alpha_source };
    if a.mode == Mode::Switching {
        let sensed = match a.alpha_source {
            AlphaSource::Original => None,
            AlphaSource::Sensed => {
                let (Some(bin), Some(n)) = (a.bin, a.truncate) else {
                    return Err(Error::Usage("--alpha-source sensed needs --bin and --truncate".into()));
                };
                Some(
                    AcquisitionConfig::new(bin, n, a.quality.unwrap_or(100))
                        .map_err(|e| Error::Usage(e.to_string()))?,
                )
            }
        };
        let (images, counts): (usize, SwitchingCounts) = eval::switching_dataset(dataset, sensed, &opts)?;
        let alpha = counts.alpha()?;
        let toggles = counts.toggle_rate()?;
        let (bin, n) = sensed.map(|c| (c.bin(), c.truncate())).unwrap_or((BinMode::None, 0));
        let mut out = open_out(&a.out)?;
        eval::write_header(
            &mut out,
            &[
                ("mode", mode_name),
                ("alpha_source", format!("{:?}", a.alpha_source).to_lowercase()),
                ("cycles", counts.cycles.to_string()),
                ("toggle_rate", fmt_rates(&toggles)),
            ],
        )
        .map_err(csv_io)?;
        writeln!(out, "{bin},{n},,,{images},,,,,{}", fmt_rates(&alpha)).map_err(csv_io)?;
        return out.flush().map_err(csv_io);
    }

    let configs = selected_configs(a);
    let shared = a.weights.as_ref().map(load_weights).transpose()?;
    let mut models: Vec<Option<DrcasModel>> = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let model = if let Some(m) = &shared { (m.scale_x, m.scale_y) == cfg.bin().factors() } else { false };
        models.push(match (&a.weights_dir, model) {
            (_, true) => shared.clone(),
            (Some(dir), _) => {
                let p = dir.join(format!("{}.drcs", entry_name(cfg)));
                if p.exists() {
                    let m = load_weights(&p)?;
                    eval::check_model_scale(&m, cfg)?;
                    Some(m)
                } else {
                    None
                }
            }
            _ => None,
        });
    }
    if shared.is_some() && models.iter().all(Option::is_none) {
        return Err(Error::Usage("--weights scale does not match any selected binning mode".into()));
    }
    let jobs: Vec<EvalJob<'_>> =
        configs.iter().zip(&models).map(|(c, m)| EvalJob { config: *c, model: m.as_ref() }).collect();
    let reports = eval::eval_configs(dataset, &jobs, &opts)?;
    let mut out = open_out(&a.out)?;
    eval::write_header(&mut out, &[("mode", mode_name), ("dataset", dataset.display().to_string())]).map_err(csv_io)?;
    for r in &reports {
        eval::write_report_row(&mut out, r).map_err(csv_io)?;
    }
    out.flush().map_err(csv_io)
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<(), Error> {
    if a.emit_grid {
        print!("{}", grid_pipeline(a.dataset.as_deref()));
        return Ok(());
    }
    let path = a.config.as_ref().expect("clap enforces --config");
    let text = fs::read_to_string(path).map_err(|source| crate::io::IoError::Io { path: path.clone(), source })?;
    let cfg = parse_pipeline(&text)?;
    let dataset = cfg.dataset.clone().ok_or_else(|| Error::Usage("configuration sets no `dataset`".into()))?;
    let models =
        cfg.entries.iter().map(|e| e.weights.as_ref().map(load_weights).transpose()).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<EvalJob<'_>> =
        cfg.entries.iter().zip(&models).map(|(e, m)| EvalJob { config: e.config, model: m.as_ref() }).collect();
    let opts = EvalOptions { workers: cfg.workers, limit: cfg.limit, alpha_source: cfg.alpha_source };
    let reports = eval::eval_configs(&dataset, &jobs, &opts)?;
    let out_path = a.out.clone().or(cfg.out.clone());
    let mut out = open_out(&out_path)?;
    eval::write_header(&mut out, &[("mode", "pipeline".into()), ("dataset", dataset.display().to_string())])
        .map_err(csv_io)?;
    for r in &reports {
        eval::write_report_row(&mut out, r).map_err(csv_io)?;
    }
    out.flush().map_err(csv_io)
}
