use alloc::vec::Vec;

use super::color::rgb_to_ycbcr;
use super::dct::{fdct8x8, quantize};
use super::entropy::{encode_block, BitWriter, HuffmanEncoder, MAX_AC, MAX_DC_DIFF};
use super::marker;
use super::tables::{quality_to_tables, zigzag, HuffmanSpec, QuantTable};
use super::{JpegError, JpegStream};
use crate::image::Image;

/// Encodes an 8-bit gray or RGB image as a baseline 4:4:4 JFIF stream.
///
/// Partial blocks at the right and bottom edges are padded by replicating
/// the last column and row. Huffman tables are the fixed Annex K ones.
pub fn jpeg_encode(img: &Image, quality: u8) -> Result<JpegStream, JpegError> {
    if img.bit_depth() != 8 || !(img.channels() == 1 || img.channels() == 3) {
        return Err(JpegError::UnsupportedInput { channels: img.channels(), bit_depth: img.bit_depth() });
    }
    if img.width() > 0xFFFF || img.height() > 0xFFFF {
        return Err(JpegError::TooLarge { width: img.width(), height: img.height() });
    }
    let (luma_q, chroma_q) = quality_to_tables(quality)?;
    let color = img.channels() == 3;
    let planes = if color { rgb_to_ycbcr(img).expect("input validated as 8-bit RGB") } else { img.clone() };

    let mut out = Vec::with_capacity(1024 + img.samples().len() / 4);
    out.extend_from_slice(&[0xFF, marker::SOI]);
    write_app0(&mut out);
    write_dqt(&mut out, 0, &luma_q);
    if color {
        write_dqt(&mut out, 1, &chroma_q);
    }
    write_sof0(&mut out, img.width() as u16, img.height() as u16, color);
    let luma_dc = HuffmanSpec::luma_dc();
    let luma_ac = HuffmanSpec::luma_ac();
    let chroma_dc = HuffmanSpec::chroma_dc();
    let chroma_ac = HuffmanSpec::chroma_ac();
    write_dht(&mut out, 0, 0, &luma_dc);
    write_dht(&mut out, 1, 0, &luma_ac);
    if color {
        write_dht(&mut out, 0, 1, &chroma_dc);
        write_dht(&mut out, 1, 1, &chroma_ac);
    }
    write_sos(&mut out, color);

    let luma_enc = (HuffmanEncoder::new(&luma_dc)?, HuffmanEncoder::new(&luma_ac)?);
    let chroma_enc = (HuffmanEncoder::new(&chroma_dc)?, HuffmanEncoder::new(&chroma_ac)?);

    let (w, h) = (img.width() as usize, img.height() as usize);
    let blocks_x = w.div_ceil(8);
    let blocks_y = h.div_ceil(8);
    let ncomp = planes.channels() as usize;
    let mut preds = [0i32; 3];
    let mut writer = BitWriter::with_buffer(out);
    let mut block = [0.0f64; 64];
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            for (c, pred) in preds.iter_mut().enumerate().take(ncomp) {
                let plane = planes.plane(c);
                for y in 0..8 {
                    let sy = (by * 8 + y).min(h - 1);
                    let row = &plane[sy * w..sy * w + w];
                    for x in 0..8 {
                        let sx = (bx * 8 + x).min(w - 1);
                        block[y * 8 + x] = f64::from(row[sx]) - 128.0;
                    }
                }
                let (qt, enc) = if c == 0 { (&luma_q, &luma_enc) } else { (&chroma_q, &chroma_enc) };
                let mut levels = zigzag(&quantize(&fdct8x8(&block), qt));
                clamp_levels(&mut levels, *pred);
                encode_block(&mut writer, &levels, pred, &enc.0, &enc.1);
            }
        }
    }
    let mut out = writer.finish();
    out.extend_from_slice(&[0xFF, marker::EOI]);
    Ok(JpegStream::from_bytes(out))
}

// Baseline limits; only reachable through rounding at the extremes.
fn clamp_levels(levels: &mut [i32; 64], pred: i32) {
    levels[0] = levels[0].clamp(pred - MAX_DC_DIFF, pred + MAX_DC_DIFF);
    for v in &mut levels[1..] {
        *v = (*v).clamp(-MAX_AC, MAX_AC);
    }
}

fn segment(out: &mut Vec<u8>, code: u8, payload_len: usize) {
    out.extend_from_slice(&[0xFF, code]);
    out.extend_from_slice(&((payload_len + 2) as u16).to_be_bytes());
}

fn write_app0(out: &mut Vec<u8>) {
    segment(out, marker::APP0, 14);
    out.extend_from_slice(b"JFIF\0");
    // version 1.01, no units, 1:1 density, no thumbnail
    out.extend_from_slice(&[1, 1, 0, 0, 1, 0, 1, 0, 0]);
}

fn write_dqt(out: &mut Vec<u8>, id: u8, table: &QuantTable) {
    segment(out, marker::DQT, 65);
    out.push(id);
    out.extend(table.zigzag().iter().map(|&q| q as u8));
}

fn write_sof0(out: &mut Vec<u8>, width: u16, height: u16, color: bool) {
    let n = if color { 3 } else { 1 };
    segment(out, marker::SOF0, 6 + 3 * n);
    out.push(8);
    out.extend_from_slice(&height.to_be_bytes());
    out.extend_from_slice(&width.to_be_bytes());
    out.push(n as u8);
    for c in 0..n as u8 {
        // id, 1x1 sampling, quant table
        out.extend_from_slice(&[c + 1, 0x11, u8::from(c > 0)]);
    }
}

fn write_dht(out: &mut Vec<u8>, class: u8, id: u8, spec: &HuffmanSpec) {
    segment(out, marker::DHT, 17 + spec.values.len());
    out.push((class << 4) | id);
    out.extend_from_slice(&spec.bits);
    out.extend_from_slice(&spec.values);
}

fn write_sos(out: &mut Vec<u8>, color: bool) {
    let n = if color { 3 } else { 1 };
    segment(out, marker::SOS, 4 + 2 * n);
    out.push(n as u8);
    for c in 0..n as u8 {
        let t = u8::from(c > 0);
        out.extend_from_slice(&[c + 1, (t << 4) | t]);
    }
    // spectral selection 0..63, no successive approximation
    out.extend_from_slice(&[0, 63, 0]);
}
