//! Huffman coding of quantized 8x8 blocks and the bit-level I/O around it.

use alloc::vec::Vec;

use super::tables::HuffmanSpec;
use super::JpegError;

/// Largest magnitude a baseline AC coefficient may take (category 10).
pub const MAX_AC: i32 = 1023;
/// Largest DC difference magnitude (category 11).
pub const MAX_DC_DIFF: i32 = 2047;

/// Accumulates bits MSB-first and byte-stuffs every emitted 0xFF.
#[derive(Debug, Default)]
pub struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    nbits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_buffer(out: Vec<u8>) -> Self {
        Self { out, acc: 0, nbits: 0 }
    }

    #[inline]
    pub fn write(&mut self, bits: u32, len: u32) {
        debug_assert!(len <= 16);
        if len == 0 {
            return;
        }
        self.acc = (self.acc << len) | (bits & ((1 << len) - 1));
        self.nbits += len;
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
            self.nbits -= 8;
        }
        self.acc &= (1 << self.nbits) - 1;
    }

    /// Pads the last partial byte with 1-bits and returns the buffer.
    pub fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits;
            self.write((1 << pad) - 1, pad);
        }
        self.out
    }
}

/// Reads entropy-coded bits, removing stuffed zero bytes.
///
/// When a marker is reached the reader supplies zero bits, as libjpeg does;
/// running off the end of the buffer is reported as [`JpegError::Truncated`].
#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    nbits: u32,
    marker: Option<u8>,
    eof: bool,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, acc: 0, nbits: 0, marker: None, eof: false }
    }

    /// Byte offset of the first byte not yet consumed into the bit buffer.
    pub fn position(&self) -> usize {
        self.pos
    }

    /// Marker code hit while reading, if any. The reader stops in front of it.
    pub fn marker(&self) -> Option<u8> {
        self.marker
    }

    fn fill(&mut self) {
        while self.nbits <= 56 {
            if self.marker.is_some() {
                self.acc <<= 8;
                self.nbits += 8;
                continue;
            }
            if self.pos >= self.data.len() {
                self.eof = true;
                return;
            }
            let b = self.data[self.pos];
            if b == 0xFF {
                let Some(&next) = self.data.get(self.pos + 1) else {
                    self.eof = true;
                    return;
                };
                match next {
                    0x00 => self.pos += 2,
                    // Fill bytes before a marker.
                    0xFF => {
                        self.pos += 1;
                        continue;
                    }
                    m => {
                        self.marker = Some(m);
                        continue;
                    }
                }
            } else {
                self.pos += 1;
            }
            self.acc = (self.acc << 8) | u64::from(b);
            self.nbits += 8;
        }
    }

    #[inline]
    pub fn read_bits(&mut self, n: u32) -> Result<u32, JpegError> {
        if n == 0 {
            return Ok(0);
        }
        if self.nbits < n {
            self.fill();
            if self.nbits < n {
                return Err(JpegError::Truncated);
            }
        }
        self.nbits -= n;
        Ok(((self.acc >> self.nbits) & ((1u64 << n) - 1)) as u32)
    }

    #[inline]
    fn peek_byte(&mut self) -> Option<u32> {
        if self.nbits < 8 {
            self.fill();
            if self.nbits < 8 {
                return None;
            }
        }
        Some(((self.acc >> (self.nbits - 8)) & 0xFF) as u32)
    }

    /// Drops buffered bits and consumes an expected RSTn marker.
    pub fn restart(&mut self, expected: u8) -> Result<(), JpegError> {
        self.acc = 0;
        self.nbits = 0;
        if self.marker.is_none() {
            // Skip any leftover padding up to the next marker.
            while self.pos + 1 < self.data.len()
                && !(self.data[self.pos] == 0xFF && !matches!(self.data[self.pos + 1], 0x00 | 0xFF))
            {
                self.pos += 1;
            }
            if self.pos + 1 >= self.data.len() {
                return Err(JpegError::Truncated);
            }
            self.marker = Some(self.data[self.pos + 1]);
        }
        match self.marker {
            Some(m) if m == expected => {
                self.pos += 2;
                self.marker = None;
                self.eof = false;
                Ok(())
            }
            Some(m) => {
                Err(JpegError::Malformed(alloc::format!("expected RST{} marker, found 0xFF{m:02X}", expected - 0xD0)))
            }
            None => Err(JpegError::Truncated),
        }
    }
}

/// Per-symbol code table for encoding.
#[derive(Debug, Clone)]
pub struct HuffmanEncoder {
    code: [u16; 256],
    len: [u8; 256],
}

impl HuffmanEncoder {
    pub fn new(spec: &HuffmanSpec) -> Result<Self, JpegError> {
        let mut code = [0u16; 256];
        let mut len = [0u8; 256];
        for (&sym, (c, l)) in spec.values.iter().zip(spec.canonical_codes()?) {
            code[sym as usize] = c;
            len[sym as usize] = l;
        }
        Ok(Self { code, len })
    }

    #[inline]
    fn emit(&self, w: &mut BitWriter, symbol: u8) {
        let l = self.len[symbol as usize];
        debug_assert!(l > 0, "symbol {symbol:#x} missing from table");
        w.write(u32::from(self.code[symbol as usize]), u32::from(l));
    }
}

/// Canonical decoding tables (T.81 F.2.2.3) plus an 8-bit lookahead.
#[derive(Debug, Clone)]
pub struct HuffmanDecoder {
    maxcode: [i32; 18],
    valoffset: [i32; 18],
    values: Vec<u8>,
    // (length, symbol) for codes of at most 8 bits, indexed by the next 8 bits.
    lookup: [(u8, u8); 256],
}

impl HuffmanDecoder {
    pub fn new(spec: &HuffmanSpec) -> Result<Self, JpegError> {
        let codes = spec.canonical_codes()?;
        let mut maxcode = [-1i32; 18];
        let mut valoffset = [0i32; 18];
        let mut lookup = [(0u8, 0u8); 256];
        let mut k = 0usize;
        for l in 1..=16usize {
            let count = spec.bits[l - 1] as usize;
            if count > 0 {
                let first = codes[k].0 as i32;
                valoffset[l] = k as i32 - first;
                maxcode[l] = codes[k + count - 1].0 as i32;
                if l <= 8 {
                    for (i, &(code, _)) in codes[k..k + count].iter().enumerate() {
                        let shift = 8 - l;
                        let base = (code as usize) << shift;
                        for fill in 0..(1usize << shift) {
                            lookup[base + fill] = (l as u8, spec.values[k + i]);
                        }
                    }
                }
            }
            k += count;
        }
        maxcode[17] = i32::MAX;
        Ok(Self { maxcode, valoffset, values: spec.values.clone(), lookup })
    }

    #[inline]
    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<u8, JpegError> {
        if let Some(peek) = r.peek_byte() {
            let (len, sym) = self.lookup[peek as usize];
            if len > 0 {
                r.nbits -= u32::from(len);
                return Ok(sym);
            }
        }
        let mut code = 0i32;
        for l in 1..=16usize {
            code = (code << 1) | r.read_bits(1)? as i32;
            if code <= self.maxcode[l] {
                let idx = (code + self.valoffset[l]) as usize;
                return self.values.get(idx).copied().ok_or(JpegError::InvalidHuffmanCode);
            }
        }
        Err(JpegError::InvalidHuffmanCode)
    }
}

/// Magnitude category: number of bits needed for `|v|`.
#[inline]
pub fn category(v: i32) -> u32 {
    32 - v.unsigned_abs().leading_zeros()
}

#[inline]
fn extend(bits: u32, s: u32) -> i32 {
    if s == 0 {
        0
    } else if bits < 1 << (s - 1) {
        bits as i32 - (1 << s) + 1
    } else {
        bits as i32
    }
}

/// Encodes one block given in zigzag order. `prev_dc` carries the DC predictor.
pub fn encode_block(w: &mut BitWriter, zz: &[i32; 64], prev_dc: &mut i32, dc: &HuffmanEncoder, ac: &HuffmanEncoder) {
    let diff = zz[0] - *prev_dc;
    *prev_dc = zz[0];
    let s = category(diff);
    dc.emit(w, s as u8);
    write_magnitude(w, diff, s);

    let mut run = 0u32;
    for &v in &zz[1..] {
        if v == 0 {
            run += 1;
            continue;
        }
        while run >= 16 {
            ac.emit(w, 0xF0);
            run -= 16;
        }
        let s = category(v);
        ac.emit(w, ((run << 4) | s) as u8);
        write_magnitude(w, v, s);
        run = 0;
    }
    if run > 0 {
        ac.emit(w, 0x00);
    }
}

#[inline]
fn write_magnitude(w: &mut BitWriter, v: i32, s: u32) {
    if s > 0 {
        let bits = if v < 0 { (v - 1) as u32 } else { v as u32 };
        w.write(bits, s);
    }
}

/// Decodes one block into zigzag order, updating the DC predictor.
pub fn decode_block(
    r: &mut BitReader<'_>,
    prev_dc: &mut i32,
    dc: &HuffmanDecoder,
    ac: &HuffmanDecoder,
) -> Result<[i32; 64], JpegError> {
    let mut zz = [0i32; 64];
    let s = u32::from(dc.decode(r)?);
    if s > 11 {
        return Err(JpegError::Malformed(alloc::format!("DC category {s} exceeds 11")));
    }
    let diff = extend(r.read_bits(s)?, s);
    *prev_dc += diff;
    zz[0] = *prev_dc;

    let mut k = 1usize;
    while k < 64 {
        let rs = split_rs(ac.decode(r)?);
        match rs {
            (15, 0) => k += 16,
            (_, 0) => break,
            (run, s) => {
                k += run as usize;
                if k > 63 {
                    return Err(JpegError::Malformed("AC run past end of block".into()));
                }
                zz[k] = extend(r.read_bits(s)?, s);
                k += 1;
            }
        }
    }
    Ok(zz)
}

#[inline]
fn split_rs(rs: u8) -> (u32, u32) {
    (u32::from(rs >> 4), u32::from(rs & 0x0F))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn tables() -> (HuffmanEncoder, HuffmanEncoder, HuffmanDecoder, HuffmanDecoder) {
        (
            HuffmanEncoder::new(&HuffmanSpec::luma_dc()).unwrap(),
            HuffmanEncoder::new(&HuffmanSpec::luma_ac()).unwrap(),
            HuffmanDecoder::new(&HuffmanSpec::luma_dc()).unwrap(),
            HuffmanDecoder::new(&HuffmanSpec::luma_ac()).unwrap(),
        )
    }

    #[test]
    fn categories() {
        assert_eq!(category(0), 0);
        assert_eq!(category(1), 1);
        assert_eq!(category(-1), 1);
        assert_eq!(category(-3), 2);
        assert_eq!(category(1023), 10);
        assert_eq!(category(-2047), 11);
    }

    #[test]
    fn extend_matches_table() {
        // category 2 codes 00,01 -> -3,-2; 10,11 -> 2,3
        assert_eq!(extend(0, 2), -3);
        assert_eq!(extend(1, 2), -2);
        assert_eq!(extend(2, 2), 2);
        assert_eq!(extend(3, 2), 3);
    }

    #[test]
    fn writer_stuffs_ff() {
        let mut w = BitWriter::new();
        w.write(0xFF, 8);
        w.write(0x1, 1);
        let out = w.finish();
        assert_eq!(out, vec![0xFF, 0x00, 0xFF, 0x00]);
    }

    #[test]
    fn reader_unstuffs_and_stops_at_marker() {
        let data = [0xFF, 0x00, 0xAB, 0xFF, 0xD9];
        let mut r = BitReader::new(&data);
        assert_eq!(r.read_bits(8).unwrap(), 0xFF);
        assert_eq!(r.read_bits(8).unwrap(), 0xAB);
        // past the marker: zero fill
        assert_eq!(r.read_bits(8).unwrap(), 0);
        assert_eq!(r.marker(), Some(0xD9));
    }

    #[test]
    fn reader_reports_truncation() {
        let data = [0x12];
        let mut r = BitReader::new(&data);
        assert_eq!(r.read_bits(8).unwrap(), 0x12);
        assert_eq!(r.read_bits(1), Err(JpegError::Truncated));
    }

    #[test]
    fn all_ones_is_not_a_code() {
        let (_, _, dcd, _) = tables();
        let data = [0xFF, 0x00, 0xFF, 0x00, 0xFF, 0x00];
        let mut r = BitReader::new(&data);
        assert_eq!(dcd.decode(&mut r), Err(JpegError::InvalidHuffmanCode));
    }

    fn block_strategy() -> impl Strategy<Value = [i32; 64]> {
        (-1024i32..=1016, proptest::collection::vec(prop_oneof![4 => Just(0i32), 1 => -MAX_AC..=MAX_AC], 63)).prop_map(
            |(dc, ac)| {
                let mut b = [0i32; 64];
                b[0] = dc;
                b[1..].copy_from_slice(&ac);
                b
            },
        )
    }

    proptest! {
        #[test]
        fn block_roundtrip(blocks in proptest::collection::vec(block_strategy(), 1..12)) {
            let (dce, ace, dcd, acd) = tables();
            let mut w = BitWriter::new();
            let mut pred = 0;
            for b in &blocks {
                encode_block(&mut w, b, &mut pred, &dce, &ace);
            }
            let mut data = w.finish();
            // stuffing invariant: every 0xFF in the segment is followed by 0x00
            for pair in data.windows(2) {
                if pair[0] == 0xFF {
                    prop_assert_eq!(pair[1], 0x00);
                }
            }
            data.extend_from_slice(&[0xFF, 0xD9]);
            let mut r = BitReader::new(&data);
            let mut pred = 0;
            for b in &blocks {
                let got = decode_block(&mut r, &mut pred, &dcd, &acd).unwrap();
                prop_assert_eq!(&got, b);
            }
        }
    }
}
