//! Integer inverse DCT and color conversion with the same fixed-point
//! arithmetic as the IJG/libjpeg-turbo "islow" decoder, so decoded samples
//! agree with mainstream decoders exactly rather than to within rounding.

const CONST_BITS: i64 = 13;
const PASS1_BITS: i64 = 2;

const FIX_0_298631336: i64 = 2446;
const FIX_0_390180644: i64 = 3196;
const FIX_0_541196100: i64 = 4433;
const FIX_0_765366865: i64 = 6270;
const FIX_0_899976223: i64 = 7373;
const FIX_1_175875602: i64 = 9633;
const FIX_1_501321110: i64 = 12299;
const FIX_1_847759065: i64 = 15137;
const FIX_1_961570560: i64 = 16069;
const FIX_2_053119869: i64 = 16819;
const FIX_2_562915447: i64 = 20995;
const FIX_3_072711026: i64 = 25172;

#[inline]
fn descale(x: i64, n: i64) -> i64 {
    (x + (1 << (n - 1))) >> n
}

/// Post-IDCT range limiting: clamps `v + 128` to [0, 255] for |v| < 512 and
/// wraps modulo 1024 beyond that, like the reference table lookup.
#[inline]
fn range_limit(v: i64) -> u8 {
    match v & 1023 {
        m @ 0..=127 => (m + 128) as u8,
        128..=511 => 255,
        512..=895 => 0,
        m => (m - 896) as u8,
    }
}

/// One 1-D 8-point pass: returns the eight outputs before descaling.
#[inline]
fn butterfly(d: [i64; 8], dc_shifted: [i64; 2]) -> [i64; 8] {
    // Even part.
    let (z2, z3) = (d[2], d[6]);
    let z1 = (z2 + z3) * FIX_0_541196100;
    let tmp2 = z1 - z3 * FIX_1_847759065;
    let tmp3 = z1 + z2 * FIX_0_765366865;
    let [tmp0, tmp1] = dc_shifted;
    let tmp10 = tmp0 + tmp3;
    let tmp13 = tmp0 - tmp3;
    let tmp11 = tmp1 + tmp2;
    let tmp12 = tmp1 - tmp2;

    // Odd part.
    let (mut t0, mut t1, mut t2, mut t3) = (d[7], d[5], d[3], d[1]);
    let mut z1 = t0 + t3;
    let mut z2 = t1 + t2;
    let mut z3 = t0 + t2;
    let mut z4 = t1 + t3;
    let z5 = (z3 + z4) * FIX_1_175875602;
    t0 *= FIX_0_298631336;
    t1 *= FIX_2_053119869;
    t2 *= FIX_3_072711026;
    t3 *= FIX_1_501321110;
    z1 *= -FIX_0_899976223;
    z2 *= -FIX_2_562915447;
    z3 *= -FIX_1_961570560;
    z4 *= -FIX_0_390180644;
    z3 += z5;
    z4 += z5;
    t0 += z1 + z3;
    t1 += z2 + z4;
    t2 += z2 + z3;
    t3 += z1 + z4;

    [tmp10 + t3, tmp11 + t2, tmp12 + t1, tmp13 + t0, tmp13 - t0, tmp12 - t1, tmp11 - t2, tmp10 - t3]
}

/// Dequantizes and inverse-transforms one block (natural order in and out)
/// into level-shifted, range-limited 8-bit samples.
pub(crate) fn idct_islow(coeffs: &[i32; 64], qt: &[u16; 64]) -> [u8; 64] {
    let mut ws = [0i32; 64];
    for col in 0..8 {
        let d: [i64; 8] = core::array::from_fn(|r| i64::from(coeffs[r * 8 + col]) * i64::from(qt[r * 8 + col]));
        if d[1..].iter().all(|&v| v == 0) {
            let dc = (d[0] << PASS1_BITS) as i32;
            for r in 0..8 {
                ws[r * 8 + col] = dc;
            }
            continue;
        }
        let out = butterfly(d, [(d[0] + d[4]) << CONST_BITS, (d[0] - d[4]) << CONST_BITS]);
        for r in 0..8 {
            ws[r * 8 + col] = descale(out[r], CONST_BITS - PASS1_BITS) as i32;
        }
    }
    let mut px = [0u8; 64];
    for row in 0..8 {
        let d: [i64; 8] = core::array::from_fn(|c| i64::from(ws[row * 8 + c]));
        let dst = &mut px[row * 8..row * 8 + 8];
        if d[1..].iter().all(|&v| v == 0) {
            dst.fill(range_limit(descale(d[0], PASS1_BITS + 3)));
            continue;
        }
        let out = butterfly(d, [(d[0] + d[4]) << CONST_BITS, (d[0] - d[4]) << CONST_BITS]);
        for (o, v) in dst.iter_mut().zip(out) {
            *o = range_limit(descale(v, CONST_BITS + PASS1_BITS + 3));
        }
    }
    px
}

const SCALEBITS: i32 = 16;
const ONE_HALF: i32 = 1 << (SCALEBITS - 1);

const fn fix(x: f64) -> i32 {
    (x * (1i64 << SCALEBITS) as f64 + 0.5) as i32
}

/// YCbCr to RGB with 16-bit fixed-point coefficients.
#[inline]
pub(crate) fn ycc_to_rgb(y: u8, cb: u8, cr: u8) -> (u8, u8, u8) {
    let y = i32::from(y);
    let cb = i32::from(cb) - 128;
    let cr = i32::from(cr) - 128;
    let r = y + ((fix(1.402) * cr + ONE_HALF) >> SCALEBITS);
    let g = y + ((-fix(0.344_14) * cb - fix(0.714_14) * cr + ONE_HALF) >> SCALEBITS);
    let b = y + ((fix(1.772) * cb + ONE_HALF) >> SCALEBITS);
    let c = |v: i32| v.clamp(0, 255) as u8;
    (c(r), c(g), c(b))
}
