use alloc::vec::Vec;

use super::JpegError;

/// `ZIGZAG_TO_NATURAL[k]` is the row-major index of the k-th coefficient in scan order.
pub const ZIGZAG_TO_NATURAL: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21,
    28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54,
    47, 55, 62, 63,
];

/// Reorders a natural (row-major) block into zigzag scan order.
pub fn zigzag<T: Copy>(natural: &[T; 64]) -> [T; 64] {
    core::array::from_fn(|k| natural[ZIGZAG_TO_NATURAL[k]])
}

pub fn inverse_zigzag<T: Copy + Default>(scan: &[T; 64]) -> [T; 64] {
    let mut out = [T::default(); 64];
    for (k, &v) in scan.iter().enumerate() {
        out[ZIGZAG_TO_NATURAL[k]] = v;
    }
    out
}

// T.81 Annex K.1, natural order.
const BASE_LUMA: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

const BASE_CHROMA: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableClass {
    Luma,
    Chroma,
}

/// 64 quantizer steps in zigzag order, each in [1, 255].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantTable {
    zigzag: [u16; 64],
    class: TableClass,
}

impl QuantTable {
    pub fn from_zigzag(zigzag: [u16; 64], class: TableClass) -> Result<Self, JpegError> {
        if let Some(&bad) = zigzag.iter().find(|&&q| !(1..=255).contains(&q)) {
            return Err(JpegError::QuantEntry(bad));
        }
        Ok(Self { zigzag, class })
    }

    pub fn from_natural(natural: [u16; 64], class: TableClass) -> Result<Self, JpegError> {
        Self::from_zigzag(zigzag(&natural), class)
    }

    pub fn zigzag(&self) -> &[u16; 64] {
        &self.zigzag
    }

    pub fn natural(&self) -> [u16; 64] {
        inverse_zigzag(&self.zigzag)
    }

    pub fn class(&self) -> TableClass {
        self.class
    }

    /// The unscaled T.81 Annex K table for `class`.
    pub fn annex_k(class: TableClass) -> Self {
        let base = match class {
            TableClass::Luma => BASE_LUMA,
            TableClass::Chroma => BASE_CHROMA,
        };
        Self { zigzag: zigzag(&base), class }
    }
}

/// IJG quality scaling of the Annex K tables.
///
/// `scale = 5000 / Q` below 50 and `200 - 2Q` otherwise; each entry becomes
/// `clamp((base * scale + 50) / 100, 1, 255)` with integer division.
pub fn quality_to_tables(quality: u8) -> Result<(QuantTable, QuantTable), JpegError> {
    if !(1..=100).contains(&quality) {
        return Err(JpegError::Quality(quality));
    }
    let q = u32::from(quality);
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let scaled = |base: &[u16; 64]| -> [u16; 64] {
        core::array::from_fn(|i| ((u32::from(base[i]) * scale + 50) / 100).clamp(1, 255) as u16)
    };
    Ok((
        QuantTable::from_natural(scaled(&BASE_LUMA), TableClass::Luma)?,
        QuantTable::from_natural(scaled(&BASE_CHROMA), TableClass::Chroma)?,
    ))
}

/// A Huffman table in DHT form: code counts per length and symbols in code order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanSpec {
    pub bits: [u8; 16],
    pub values: Vec<u8>,
}

impl HuffmanSpec {
    pub fn new(bits: [u8; 16], values: Vec<u8>) -> Result<Self, JpegError> {
        let spec = Self { bits, values };
        spec.canonical_codes()?;
        Ok(spec)
    }

    /// Canonical (code, length) for each entry of `values`, in order.
    ///
    /// Fails if the counts do not match the symbol list or the lengths
    /// over-subscribe the code space (which would break prefix-freeness).
    pub fn canonical_codes(&self) -> Result<Vec<(u16, u8)>, JpegError> {
        let total: usize = self.bits.iter().map(|&b| b as usize).sum();
        if total != self.values.len() {
            return Err(JpegError::HuffmanTable("code counts do not match symbol count"));
        }
        if total > 256 {
            return Err(JpegError::HuffmanTable("more than 256 symbols"));
        }
        let mut out = Vec::with_capacity(total);
        let mut code: u32 = 0;
        for (i, &count) in self.bits.iter().enumerate() {
            let len = i as u32 + 1;
            for _ in 0..count {
                if code >= 1 << len {
                    return Err(JpegError::HuffmanTable("code lengths over-subscribed"));
                }
                out.push((code as u16, len as u8));
                code += 1;
            }
            code <<= 1;
        }
        Ok(out)
    }

    pub fn luma_dc() -> Self {
        Self { bits: LUMA_DC_BITS, values: LUMA_DC_VALUES.to_vec() }
    }

    pub fn luma_ac() -> Self {
        Self { bits: LUMA_AC_BITS, values: LUMA_AC_VALUES.to_vec() }
    }

    pub fn chroma_dc() -> Self {
        Self { bits: CHROMA_DC_BITS, values: CHROMA_DC_VALUES.to_vec() }
    }

    pub fn chroma_ac() -> Self {
        Self { bits: CHROMA_AC_BITS, values: CHROMA_AC_VALUES.to_vec() }
    }
}

// T.81 Annex K.3 typical Huffman tables.
const LUMA_DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
const LUMA_DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
const CHROMA_DC_BITS: [u8; 16] = [0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
const CHROMA_DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

const LUMA_AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
const LUMA_AC_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14,
    0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09,
    0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a,
    0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65,
    0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88,
    0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9,
    0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca,
    0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea,
    0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];

const CHROMA_AC_BITS: [u8; 16] = [0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77];
const CHROMA_AC_VALUES: [u8; 162] = [
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32,
    0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16,
    0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38, 0x39,
    0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86,
    0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
    0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8,
    0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9,
    0xea, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa,
];
