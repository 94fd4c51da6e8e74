//! Lossless raster files: 8-bit PNG, binary PPM (P6) and PGM (P5).

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use hcas_core::{Image, ImageError};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: unsupported image format (expected .png, .ppm or .pgm)")]
    UnsupportedFormat(PathBuf),
    #[error("bit depth {0} is not supported, only 8-bit samples")]
    BitDepth(u32),
    #[error("unexpected end of file")]
    UnexpectedEof,
    #[error("malformed {kind} header: {reason}")]
    Header { kind: &'static str, reason: String },
    #[error("png: {0}")]
    Png(String),
    #[error("cannot store a {0}-channel image as PGM")]
    GrayOnly(u8),
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Ppm,
    Pgm,
}

fn format_of(path: &Path) -> Result<Format, IoError> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(Format::Png),
        Some("ppm") => Ok(Format::Ppm),
        Some("pgm") => Ok(Format::Pgm),
        _ => Err(IoError::UnsupportedFormat(path.to_path_buf())),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Reads a PNG, P6 or P5 file into an 8-bit image.
///
/// The format is taken from the file contents, not the extension. PNG alpha
/// is dropped and palettes are expanded.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, IoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_image(&bytes).map_err(|e| match e {
        IoError::UnsupportedFormat(_) => IoError::UnsupportedFormat(path.to_path_buf()),
        e => e,
    })
}

/// Decodes an in-memory PNG/PPM/PGM file.
pub fn decode_image(bytes: &[u8]) -> Result<Image, IoError> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_pnm(bytes, 3)
    } else if bytes.starts_with(b"P5") {
        decode_pnm(bytes, 1)
    } else {
        Err(IoError::UnsupportedFormat(PathBuf::new()))
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image, IoError> {
    let png_err = |e: png::DecodingError| match e {
        png::DecodingError::IoError(ref io) if io.kind() == std::io::ErrorKind::UnexpectedEof => IoError::UnexpectedEof,
        e => IoError::Png(e.to_string()),
    };
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let depth = reader.info().bit_depth;
    if depth == png::BitDepth::Sixteen {
        return Err(IoError::BitDepth(16));
    }
    let size = reader.output_buffer_size().ok_or_else(|| IoError::Png("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    let (w, h) = (frame.width, frame.height);
    let stride = frame.line_size;
    let (src_ch, keep) = match frame.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => return Err(IoError::Png("palette was not expanded".into())),
    };
    let mut interleaved = Vec::with_capacity(w as usize * h as usize * keep);
    for row in buf.chunks(stride).take(h as usize) {
        for px in row[..w as usize * src_ch].chunks_exact(src_ch) {
            interleaved.extend_from_slice(&px[..keep]);
        }
    }
    Ok(Image::from_interleaved(w, h, keep as u8, 8, &interleaved)?)
}

/// Splits off one whitespace-delimited header token, skipping `#` comments.
fn pnm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], IoError> {
    loop {
        match bytes.get(*pos) {
            None => return Err(IoError::UnexpectedEof),
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn decode_pnm(bytes: &[u8], channels: u8) -> Result<Image, IoError> {
    let kind = if channels == 3 { "PPM" } else { "PGM" };
    let mut pos = 2;
    let mut number = |what: &str| -> Result<u32, IoError> {
        let tok = pnm_token(bytes, &mut pos)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| IoError::Header { kind, reason: format!("bad {what} `{}`", String::from_utf8_lossy(tok)) })
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval > 255 {
        return Err(IoError::BitDepth(16));
    }
    if maxval != 255 {
        return Err(IoError::Header { kind, reason: format!("maxval {maxval}, only 255 is supported") });
    }
    // Exactly one whitespace byte separates the header from the raster.
    if bytes.get(pos).is_none() {
        return Err(IoError::UnexpectedEof);
    }
    pos += 1;
    let need = width as usize * height as usize * channels as usize;
    let payload = bytes.get(pos..pos + need).ok_or(IoError::UnexpectedEof)?;
    Ok(Image::from_interleaved(width, height, channels, 8, payload)?)
}

/// Encodes an image as PNG (grayscale or RGB, 8 bits per sample).
pub fn encode_png(img: &Image) -> Result<Vec<u8>, IoError> {
    encode_png_with(img, png::Compression::Balanced)
}

/// PNG at the highest compression setting, used as the lossless size baseline.
pub fn encode_png_best(img: &Image) -> Result<Vec<u8>, IoError> {
    encode_png_with(img, png::Compression::High)
}

fn encode_png_with(img: &Image, compression: png::Compression) -> Result<Vec<u8>, IoError> {
    let mut out = Vec::new();
    let mut enc = png::Encoder::new(&mut out, img.width(), img.height());
    enc.set_color(if img.channels() == 1 { png::ColorType::Grayscale } else { png::ColorType::Rgb });
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(compression);
    let png_err = |e: png::EncodingError| IoError::Png(e.to_string());
    let mut writer = enc.write_header().map_err(png_err)?;
    writer.write_image_data(&img.to_interleaved()).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(out)
}

fn encode_pnm(img: &Image, channels: u8) -> Result<Vec<u8>, IoError> {
    let magic = if channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    match (img.channels(), channels) {
        (c, t) if c == t => out.extend_from_slice(&img.to_interleaved()),
        (1, 3) => out.extend(img.samples().iter().flat_map(|&v| [v, v, v])),
        (c, _) => return Err(IoError::GrayOnly(c)),
    }
    Ok(out)
}

/// Writes `img` in the format named by the extension.
///
/// Samples are stored verbatim as 8-bit values. A gray image written as
/// `.ppm` is replicated into three equal channels; an RGB image cannot be
/// written as `.pgm`.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let bytes = match format_of(path)? {
        Format::Png => encode_png(img)?,
        Format::Ppm => encode_pnm(img, 3)?,
        Format::Pgm => encode_pnm(img, 1)?,
    };
    fs::write(path, bytes).map_err(io_err(path))
}

/// Image files (`.png`, `.ppm`, `.pgm`) in `dir`, sorted by file name.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, IoError> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && format_of(&path).is_ok() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
