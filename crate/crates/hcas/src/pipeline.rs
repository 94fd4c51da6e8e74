//! Batch configuration files.
//!
//! ```text
//! dataset = /data/div2k_valid
//! out = report.csv
//! workers = 8
//!
//! [2x2_n1_q90]
//! bin = 2x2
//! truncate = 1
//! quality = 90
//! weights = models/2x2_n1_q90.drcs
//! ```
//!
//! Keys before the first section are global. Each section is one
//! acquisition setting; `weights` is optional and selects the network
//! restorer in addition to bicubic. Rows are reported in file order.

use std::path::PathBuf;

use hcas_core::{AcquisitionConfig, BinMode};

use crate::eval::AlphaSource;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineEntry {
    pub name: String,
    pub config: AcquisitionConfig,
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub limit: Option<usize>,
    pub alpha_source: AlphaSource,
    pub entries: Vec<PipelineEntry>,
}

#[derive(Default)]
struct Section {
    name: String,
    line: usize,
    bin: Option<BinMode>,
    truncate: Option<u8>,
    quality: Option<u8>,
    weights: Option<PathBuf>,
}

impl Section {
    fn finish(self) -> Result<PipelineEntry, Error> {
        let missing = |k: &str| Error::Usage(format!("section [{}] (line {}) is missing `{k}`", self.name, self.line));
        let bin = self.bin.ok_or_else(|| missing("bin"))?;
        let truncate = self.truncate.ok_or_else(|| missing("truncate"))?;
        let quality = self.quality.ok_or_else(|| missing("quality"))?;
        let config = AcquisitionConfig::new(bin, truncate, quality)
            .map_err(|e| Error::Usage(format!("section [{}]: {e}", self.name)))?;
        Ok(PipelineEntry { name: self.name, config, weights: self.weights })
    }
}

pub fn parse_pipeline(text: &str) -> Result<PipelineConfig, Error> {
    let mut cfg = PipelineConfig::default();
    let mut current: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Usage(format!("line {lineno}: {msg}"));
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if let Some(done) = current.take() {
                cfg.entries.push(done.finish()?);
            }
            let name = name.trim();
            if cfg.entries.iter().any(|e| e.name == name) {
                return Err(bad(format!("duplicate section [{name}]")));
            }
            current = Some(Section { name: name.to_string(), line: lineno, ..Section::default() });
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        let int = |v: &str| v.parse::<usize>().map_err(|e| bad(format!("{k}: {e}")));
        match (&mut current, k) {
            (None, "dataset") => cfg.dataset = Some(v.into()),
            (None, "out") => cfg.out = Some(v.into()),
            (None, "workers") => cfg.workers = Some(int(v)?),
            (None, "limit") => cfg.limit = Some(int(v)?),
            (None, "alpha_source") => {
                cfg.alpha_source = <AlphaSource as clap::ValueEnum>::from_str(v, true)
                    .map_err(|_| bad(format!("alpha_source must be original or sensed, got `{v}`")))?
            }
            (Some(s), "bin") => s.bin = Some(v.parse().map_err(|e| bad(format!("{e}")))?),
            (Some(s), "truncate") => s.truncate = Some(v.parse().map_err(|e| bad(format!("truncate: {e}")))?),
            (Some(s), "quality") => s.quality = Some(v.parse().map_err(|e| bad(format!("quality: {e}")))?),
            (Some(s), "weights") => s.weights = Some(v.into()),
            (Some(_), "restorer") if v == "bicubic" => {}
            _ => return Err(bad(format!("unknown key `{k}` here"))),
        }
    }
    if let Some(done) = current.take() {
        cfg.entries.push(done.finish()?);
    }
    if cfg.entries.is_empty() {
        return Err(Error::Usage("pipeline configuration defines no [sections]".into()));
    }
    Ok(cfg)
}

/// Section name used for a setting, e.g. `2x2_n1_q90`.
pub fn entry_name(cfg: &AcquisitionConfig) -> String {
    format!("{}_n{}_q{}", cfg.bin(), cfg.truncate(), cfg.quality())
}

/// A configuration file listing all 48 binned settings.
pub fn grid_pipeline(dataset: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(d) = dataset {
        s.push_str(&format!("dataset = {d}\n"));
    }
    for cfg in AcquisitionConfig::grid() {
        s.push_str(&format!(
            "\n[{}]\nbin = {}\ntruncate = {}\nquality = {}\n",
            entry_name(&cfg),
            cfg.bin(),
            cfg.truncate(),
            cfg.quality()
        ));
    }
    s
}
