use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::entropy::{decode_block, BitReader, HuffmanDecoder};
use super::islow::{idct_islow, ycc_to_rgb};
use super::marker;
use super::tables::{inverse_zigzag, HuffmanSpec, QuantTable, TableClass};
use super::upsample::{upsample, Plane};
use super::{JpegError, JpegStream};
use crate::image::Image;

#[derive(Debug, Clone)]
struct Component {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
    // Padded plane covering whole MCUs.
    blocks_w: usize,
    blocks_h: usize,
    pixels: Vec<u8>,
    decoded: bool,
}

#[derive(Debug)]
struct Frame {
    width: usize,
    height: usize,
    hmax: usize,
    vmax: usize,
    mcus_x: usize,
    mcus_y: usize,
    components: Vec<Component>,
}

struct Parser<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn u8(&mut self) -> Result<u8, JpegError> {
        let b = *self.data.get(self.pos).ok_or(JpegError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, JpegError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    /// Returns the payload of the segment whose length field starts here.
    fn segment(&mut self) -> Result<&'a [u8], JpegError> {
        let len = self.u16()? as usize;
        if len < 2 {
            return Err(JpegError::Malformed(format!("segment length {len} below 2")));
        }
        let end = self.pos + len - 2;
        if end > self.data.len() {
            return Err(JpegError::Truncated);
        }
        let payload = &self.data[self.pos..end];
        self.pos = end;
        Ok(payload)
    }

    fn next_marker(&mut self) -> Result<u8, JpegError> {
        let b = self.u8()?;
        if b != 0xFF {
            return Err(JpegError::Malformed(format!("expected marker at offset {}, found 0x{b:02X}", self.pos - 1)));
        }
        let mut m = self.u8()?;
        while m == 0xFF {
            m = self.u8()?;
        }
        Ok(m)
    }
}

fn malformed(msg: &str) -> JpegError {
    JpegError::Malformed(msg.to_string())
}

/// Decodes a baseline sequential Huffman JPEG to an 8-bit gray or RGB image.
pub fn jpeg_decode(stream: &JpegStream) -> Result<Image, JpegError> {
    decode_bytes(stream.as_bytes())
}

pub(crate) fn decode_bytes(data: &[u8]) -> Result<Image, JpegError> {
    let mut p = Parser { data, pos: 0 };
    if data.len() < 2 {
        return Err(JpegError::Truncated);
    }
    if p.u8()? != 0xFF || p.u8()? != marker::SOI {
        return Err(malformed("missing SOI marker"));
    }
    let mut qtables: [Option<QuantTable>; 4] = Default::default();
    let mut dc_tables: [Option<HuffmanDecoder>; 4] = Default::default();
    let mut ac_tables: [Option<HuffmanDecoder>; 4] = Default::default();
    let mut restart_interval = 0usize;
    let mut frame: Option<Frame> = None;

    loop {
        let m = p.next_marker()?;
        match m {
            marker::EOI => break,
            marker::SOF0 | marker::SOF1 => {
                if frame.is_some() {
                    return Err(malformed("more than one frame header"));
                }
                frame = Some(parse_sof(p.segment()?)?);
            }
            0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                return Err(JpegError::Unsupported(format!(
                    "SOF{} (only baseline and extended sequential Huffman are supported)",
                    m - 0xC0
                )));
            }
            marker::DHT => parse_dht(p.segment()?, &mut dc_tables, &mut ac_tables)?,
            marker::DQT => parse_dqt(p.segment()?, &mut qtables)?,
            marker::DRI => {
                let seg = p.segment()?;
                if seg.len() != 2 {
                    return Err(malformed("DRI segment must be 2 bytes"));
                }
                restart_interval = u16::from_be_bytes([seg[0], seg[1]]) as usize;
            }
            marker::SOS => {
                let f = frame.as_mut().ok_or_else(|| malformed("scan before frame header"))?;
                let seg = p.segment()?;
                let consumed = decode_scan(f, seg, &data[p.pos..], &qtables, &dc_tables, &ac_tables, restart_interval)?;
                p.pos += consumed;
            }
            marker::SOI => return Err(malformed("unexpected SOI")),
            marker::RST0..=marker::RST7 => return Err(malformed("restart marker outside scan")),
            // APPn, COM, DNL and anything else with a length field.
            _ => {
                p.segment()?;
            }
        }
    }

    let f = frame.ok_or_else(|| malformed("no frame header before EOI"))?;
    if f.components.iter().any(|c| !c.decoded) {
        return Err(malformed("component missing from all scans"));
    }
    assemble(&f)
}

fn parse_sof(seg: &[u8]) -> Result<Frame, JpegError> {
    if seg.len() < 6 {
        return Err(JpegError::Truncated);
    }
    if seg[0] != 8 {
        return Err(JpegError::Unsupported(format!("{}-bit sample precision", seg[0])));
    }
    let height = u16::from_be_bytes([seg[1], seg[2]]) as usize;
    let width = u16::from_be_bytes([seg[3], seg[4]]) as usize;
    let n = seg[5] as usize;
    if height == 0 {
        return Err(JpegError::Unsupported("DNL-defined height".into()));
    }
    if width == 0 {
        return Err(malformed("zero frame width"));
    }
    if n != 1 && n != 3 {
        return Err(JpegError::Unsupported(format!("{n} components")));
    }
    if seg.len() != 6 + 3 * n {
        return Err(malformed("SOF length does not match component count"));
    }
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let c = &seg[6 + 3 * i..9 + 3 * i];
        let (h, v) = ((c[1] >> 4) as usize, (c[1] & 0x0F) as usize);
        if !(1..=4).contains(&h) || !(1..=4).contains(&v) {
            return Err(malformed("sampling factor outside [1, 4]"));
        }
        if c[2] > 3 {
            return Err(malformed("quantization table id above 3"));
        }
        comps.push(Component {
            id: c[0],
            h,
            v,
            tq: c[2] as usize,
            blocks_w: 0,
            blocks_h: 0,
            pixels: Vec::new(),
            decoded: false,
        });
    }
    let hmax = comps.iter().map(|c| c.h).max().unwrap_or(1);
    let vmax = comps.iter().map(|c| c.v).max().unwrap_or(1);
    let mcus_x = width.div_ceil(8 * hmax);
    let mcus_y = height.div_ceil(8 * vmax);
    for c in &mut comps {
        c.blocks_w = mcus_x * c.h;
        c.blocks_h = mcus_y * c.v;
        c.pixels = vec![0u8; c.blocks_w * c.blocks_h * 64];
    }
    Ok(Frame { width, height, hmax, vmax, mcus_x, mcus_y, components: comps })
}

fn parse_dqt(mut seg: &[u8], tables: &mut [Option<QuantTable>; 4]) -> Result<(), JpegError> {
    while !seg.is_empty() {
        let pq = seg[0] >> 4;
        let tq = (seg[0] & 0x0F) as usize;
        if tq > 3 {
            return Err(malformed("quantization table id above 3"));
        }
        let size = if pq == 0 { 64 } else { 128 };
        if seg.len() < 1 + size {
            return Err(JpegError::Truncated);
        }
        let body = &seg[1..1 + size];
        let zz: [u16; 64] = core::array::from_fn(|i| {
            if pq == 0 {
                u16::from(body[i])
            } else {
                u16::from_be_bytes([body[2 * i], body[2 * i + 1]])
            }
        });
        let class = if tq == 0 { TableClass::Luma } else { TableClass::Chroma };
        tables[tq] = Some(QuantTable::from_zigzag(zz, class)?);
        seg = &seg[1 + size..];
    }
    Ok(())
}

fn parse_dht(
    mut seg: &[u8],
    dc: &mut [Option<HuffmanDecoder>; 4],
    ac: &mut [Option<HuffmanDecoder>; 4],
) -> Result<(), JpegError> {
    while !seg.is_empty() {
        if seg.len() < 17 {
            return Err(JpegError::Truncated);
        }
        let class = seg[0] >> 4;
        let id = (seg[0] & 0x0F) as usize;
        if class > 1 || id > 3 {
            return Err(malformed("bad Huffman table class or id"));
        }
        let bits: [u8; 16] = seg[1..17].try_into().expect("16 bytes");
        let count: usize = bits.iter().map(|&b| b as usize).sum();
        if seg.len() < 17 + count {
            return Err(JpegError::Truncated);
        }
        let spec = HuffmanSpec::new(bits, seg[17..17 + count].to_vec())?;
        let dec = HuffmanDecoder::new(&spec)?;
        if class == 0 {
            dc[id] = Some(dec);
        } else {
            ac[id] = Some(dec);
        }
        seg = &seg[17 + count..];
    }
    Ok(())
}

/// Decodes one scan; returns the number of entropy-coded bytes consumed.
fn decode_scan(
    frame: &mut Frame,
    header: &[u8],
    data: &[u8],
    qtables: &[Option<QuantTable>; 4],
    dc_tables: &[Option<HuffmanDecoder>; 4],
    ac_tables: &[Option<HuffmanDecoder>; 4],
    restart_interval: usize,
) -> Result<usize, JpegError> {
    let ns = *header.first().ok_or(JpegError::Truncated)? as usize;
    if ns == 0 || ns > 4 || header.len() != 4 + 2 * ns {
        return Err(malformed("bad scan header length"));
    }
    let (ss, se, ahal) = (header[1 + 2 * ns], header[2 + 2 * ns], header[3 + 2 * ns]);
    if ss != 0 || se != 63 || ahal != 0 {
        return Err(JpegError::Unsupported("spectral selection or successive approximation".into()));
    }
    struct ScanComp<'t> {
        index: usize,
        dc: &'t HuffmanDecoder,
        ac: &'t HuffmanDecoder,
        qt: QuantTable,
    }
    let mut scomps = Vec::with_capacity(ns);
    for i in 0..ns {
        let id = header[1 + 2 * i];
        let tables = header[2 + 2 * i];
        let index = frame
            .components
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| malformed("scan references unknown component"))?;
        let (td, ta) = ((tables >> 4) as usize, (tables & 0x0F) as usize);
        let dc = dc_tables.get(td).and_then(Option::as_ref).ok_or_else(|| malformed("missing DC table"))?;
        let ac = ac_tables.get(ta).and_then(Option::as_ref).ok_or_else(|| malformed("missing AC table"))?;
        let qt = qtables[frame.components[index].tq].clone().ok_or_else(|| malformed("missing quantization table"))?;
        scomps.push(ScanComp { index, dc, ac, qt });
    }

    let qt_natural: Vec<[u16; 64]> = scomps.iter().map(|sc| sc.qt.natural()).collect();
    let mut reader = BitReader::new(data);
    let mut preds = vec![0i32; ns];
    let mut next_rst = 0u8;

    // (component slot, block x, block y) sequence for each MCU.
    let (mcus_x, mcus_y) = if ns == 1 {
        let c = &frame.components[scomps[0].index];
        let cw = (frame.width * c.h).div_ceil(frame.hmax);
        let ch = (frame.height * c.v).div_ceil(frame.vmax);
        (cw.div_ceil(8), ch.div_ceil(8))
    } else {
        (frame.mcus_x, frame.mcus_y)
    };
    let total = mcus_x * mcus_y;
    for mcu in 0..total {
        if restart_interval > 0 && mcu > 0 && mcu % restart_interval == 0 {
            reader.restart(marker::RST0 + next_rst)?;
            next_rst = (next_rst + 1) % 8;
            preds.iter_mut().for_each(|p| *p = 0);
        }
        let (mx, my) = (mcu % mcus_x, mcu / mcus_x);
        for (slot, sc) in scomps.iter().enumerate() {
            let comp = &mut frame.components[sc.index];
            let (bh, bv) = if ns == 1 { (1, 1) } else { (comp.h, comp.v) };
            for v in 0..bv {
                for h in 0..bh {
                    let zz = decode_block(&mut reader, &mut preds[slot], sc.dc, sc.ac)?;
                    let bx = mx * bh + h;
                    let by = my * bv + v;
                    let spatial = idct_islow(&inverse_zigzag(&zz), &qt_natural[slot]);
                    let stride = comp.blocks_w * 8;
                    for y in 0..8 {
                        let row = (by * 8 + y) * stride + bx * 8;
                        comp.pixels[row..row + 8].copy_from_slice(&spatial[y * 8..y * 8 + 8]);
                    }
                }
            }
        }
    }
    for sc in &scomps {
        frame.components[sc.index].decoded = true;
    }
    scan_end(&reader, data)
}

/// Finds where the entropy segment ends: the next marker that is not RSTn.
fn scan_end(reader: &BitReader<'_>, data: &[u8]) -> Result<usize, JpegError> {
    let mut pos = reader.position();
    loop {
        if pos + 1 >= data.len() {
            return Err(JpegError::Truncated);
        }
        if data[pos] == 0xFF {
            match data[pos + 1] {
                0x00 | 0xFF | marker::RST0..=marker::RST7 => pos += 1,
                _ => return Ok(pos),
            }
        } else {
            pos += 1;
        }
    }
}

fn assemble(f: &Frame) -> Result<Image, JpegError> {
    let (w, h) = (f.width, f.height);
    let planes: Vec<Vec<u8>> = f
        .components
        .iter()
        .map(|c| {
            let plane = Plane {
                data: &c.pixels,
                stride: c.blocks_w * 8,
                width: (w * c.h).div_ceil(f.hmax),
                height: (h * c.v).div_ceil(f.vmax),
            };
            let (fx, fy) = (f.hmax / c.h, f.vmax / c.v);
            if !f.hmax.is_multiple_of(c.h) || !f.vmax.is_multiple_of(c.v) {
                return Err(JpegError::Unsupported("non-integral sampling ratio".into()));
            }
            Ok(upsample(&plane, fx, fy, w, h))
        })
        .collect::<Result<_, _>>()?;

    let n = w * h;
    let samples = if planes.len() == 1 {
        planes.into_iter().next().expect("one plane")
    } else {
        let mut out = vec![0u8; 3 * n];
        for i in 0..n {
            let (r, g, b) = ycc_to_rgb(planes[0][i], planes[1][i], planes[2][i]);
            out[i] = r;
            out[n + i] = g;
            out[2 * n + i] = b;
        }
        out
    };
    let channels = if f.components.len() == 1 { 1 } else { 3 };
    Image::new(w as u32, h as u32, channels, 8, samples).map_err(|e| JpegError::Malformed(format!("{e}")))
}
