//! DRCS weight container.
//!
//! Little-endian layout: magic `DRCS`, then `u32` version, scale_x, scale_y,
//! C, R. Layers follow in order head, block1.conv1, block1.conv2, ...,
//! blockR.conv2, tail. Each layer is `u32` out, in, kh, kw, then
//! `out*in*kh*kw` `f32` weights (out-major, then in, kh, kw) and `out` `f32`
//! biases.

use std::fs;
use std::path::{Path, PathBuf};

use hcas_core::restoration::ConvLayer;
use hcas_core::DrcasModel;

pub const MAGIC: [u8; 4] = *b"DRCS";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum WeightsError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad magic {0:?}, expected \"DRCS\"")]
    BadMagic([u8; 4]),
    #[error("unsupported DRCS version {0}, expected {VERSION}")]
    Version(u32),
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("non-finite value in layer {layer} at offset {offset}")]
    NonFinite { layer: usize, offset: usize },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], WeightsError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            WeightsError::Structure(format!(
                "file ends at byte {} while reading {what} ({} more bytes needed)",
                self.bytes.len(),
                n
            ))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, WeightsError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn f32s(&mut self, n: usize, what: &str) -> Result<Vec<f32>, WeightsError> {
        let len = n.checked_mul(4).ok_or_else(|| WeightsError::Structure(format!("{what} length overflows")))?;
        Ok(self.take(len, what)?.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }
}

fn read_layer(cur: &mut Cursor<'_>, index: usize, in_ch: usize, out_ch: usize) -> Result<ConvLayer, WeightsError> {
    let what = format!("layer {index}");
    let out = cur.u32(&what)? as usize;
    let inp = cur.u32(&what)? as usize;
    let kh = cur.u32(&what)? as usize;
    let kw = cur.u32(&what)? as usize;
    if out != out_ch || inp != in_ch {
        return Err(WeightsError::Structure(format!(
            "layer {index} declares {inp}->{out} channels, topology needs {in_ch}->{out_ch}"
        )));
    }
    if kh.is_multiple_of(2) || kw.is_multiple_of(2) {
        return Err(WeightsError::Structure(format!("layer {index} kernel {kh}x{kw} is not odd-sized")));
    }
    let count = out
        .checked_mul(inp)
        .and_then(|v| v.checked_mul(kh))
        .and_then(|v| v.checked_mul(kw))
        .ok_or_else(|| WeightsError::Structure(format!("layer {index} size overflows")))?;
    let weights = cur.f32s(count, &format!("layer {index} weights"))?;
    let bias = cur.f32s(out, &format!("layer {index} biases"))?;
    if let Some(offset) = weights.iter().chain(&bias).position(|v| !v.is_finite()) {
        return Err(WeightsError::NonFinite { layer: index, offset });
    }
    Ok(ConvLayer { out_channels: out, in_channels: inp, kernel_h: kh, kernel_w: kw, weights, bias })
}

/// Parses a DRCS byte buffer.
pub fn decode_weights(bytes: &[u8]) -> Result<DrcasModel, WeightsError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(WeightsError::BadMagic(magic));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(WeightsError::Version(version));
    }
    let scale_x = cur.u32("scale_x")?;
    let scale_y = cur.u32("scale_y")?;
    let c = cur.u32("C")? as usize;
    let r = cur.u32("R")? as usize;
    if scale_x == 0 || scale_y == 0 || c == 0 {
        return Err(WeightsError::Structure(format!("header scale {scale_x}x{scale_y}, C={c}")));
    }
    let head = read_layer(&mut cur, 0, 3, c)?;
    let mut blocks = Vec::with_capacity(r.min(1024));
    for b in 0..r {
        let c1 = read_layer(&mut cur, 1 + 2 * b, c, c)?;
        let c2 = read_layer(&mut cur, 2 + 2 * b, c, c)?;
        blocks.push((c1, c2));
    }
    let tail = read_layer(&mut cur, 1 + 2 * r, c, 3)?;
    if cur.pos != bytes.len() {
        return Err(WeightsError::Structure(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    Ok(DrcasModel { scale_x, scale_y, channels: c, head, blocks, tail })
}

/// Serializes a model; the model's own layer shapes are written as-is.
pub fn encode_weights(model: &DrcasModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 4 * model.param_count() + 16 * (2 * model.blocks.len() + 2));
    out.extend_from_slice(&MAGIC);
    for v in [VERSION, model.scale_x, model.scale_y, model.channels as u32, model.blocks.len() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for layer in model.layers() {
        for v in [layer.out_channels, layer.in_channels, layer.kernel_h, layer.kernel_w] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for v in layer.weights.iter().chain(&layer.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<DrcasModel, WeightsError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| WeightsError::Io { path: path.to_path_buf(), source })?;
    decode_weights(&bytes)
}

pub fn save_weights(model: &DrcasModel, path: impl AsRef<Path>) -> Result<(), WeightsError> {
    let path = path.as_ref();
    fs::write(path, encode_weights(model)).map_err(|source| WeightsError::Io { path: path.to_path_buf(), source })
}
