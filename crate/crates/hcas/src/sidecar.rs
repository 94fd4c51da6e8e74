//! `<stream>.meta` files describing how a JPEG stream was acquired.
//!
//! Plain text, one `key=value` per line: `bin=2x2`, `truncate=2`, `quality=90`.

use std::fs;
use std::path::{Path, PathBuf};

use hcas_core::{AcquisitionConfig, BinMode};

#[derive(Debug, thiserror::Error)]
pub enum SidecarError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("invalid acquisition setting: {0}")]
    Config(#[from] hcas_core::AcquisitionError),
}

/// `out.jpg` -> `out.jpg.meta`.
pub fn sidecar_path(stream: &Path) -> PathBuf {
    let mut s = stream.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn format_sidecar(cfg: &AcquisitionConfig) -> String {
    format!("bin={}\ntruncate={}\nquality={}\n", cfg.bin(), cfg.truncate(), cfg.quality())
}

pub fn parse_sidecar(text: &str) -> Result<AcquisitionConfig, SidecarError> {
    let (mut bin, mut truncate, mut quality) = (None, None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |reason: String| SidecarError::Parse { line: i + 1, reason };
        let (k, v) = line.split_once('=').ok_or_else(|| parse_err(format!("expected key=value, got `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "bin" => bin = Some(v.parse::<BinMode>().map_err(|e| parse_err(e.to_string()))?),
            "truncate" => truncate = Some(v.parse::<u8>().map_err(|e| parse_err(format!("truncate: {e}")))?),
            "quality" => quality = Some(v.parse::<u8>().map_err(|e| parse_err(format!("quality: {e}")))?),
            // Unknown keys are ignored so the file can carry extra annotations.
            _ => {}
        }
    }
    Ok(AcquisitionConfig::new(
        bin.ok_or(SidecarError::Missing("bin"))?,
        truncate.ok_or(SidecarError::Missing("truncate"))?,
        quality.ok_or(SidecarError::Missing("quality"))?,
    )?)
}

pub fn write_sidecar(stream: &Path, cfg: &AcquisitionConfig) -> Result<PathBuf, SidecarError> {
    let path = sidecar_path(stream);
    fs::write(&path, format_sidecar(cfg)).map_err(|source| SidecarError::Io { path: path.clone(), source })?;
    Ok(path)
}

pub fn read_sidecar(stream: &Path) -> Result<AcquisitionConfig, SidecarError> {
    let path = sidecar_path(stream);
    let text = fs::read_to_string(&path).map_err(|source| SidecarError::Io { path, source })?;
    parse_sidecar(&text)
}
