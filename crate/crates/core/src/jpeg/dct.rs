use super::tables::QuantTable;
use crate::math::round_half_away;

// BASIS[k][n] = C(k)/2 * cos((2n+1) k pi / 16), C(0) = 1/sqrt(2), else 1.
// The matrix is orthonormal, so the 2-D transform preserves energy and a
// constant block v maps to DC = 8v.
const BASIS: [[f64; 8]; 8] = [
    [
        0.35355339059327373,
        0.35355339059327373,
        0.35355339059327373,
        0.35355339059327373,
        0.35355339059327373,
        0.35355339059327373,
        0.35355339059327373,
        0.35355339059327373,
    ],
    [
        0.4903926402016152,
        0.4157348061512726,
        0.27778511650980114,
        0.09754516100806417,
        -0.0975451610080641,
        -0.277785116509801,
        -0.4157348061512727,
        -0.4903926402016152,
    ],
    [
        0.46193976625564337,
        0.19134171618254492,
        -0.19134171618254486,
        -0.46193976625564337,
        -0.4619397662556434,
        -0.19134171618254517,
        0.191341716182545,
        0.46193976625564326,
    ],
    [
        0.4157348061512726,
        -0.0975451610080641,
        -0.4903926402016152,
        -0.2777851165098011,
        0.2777851165098009,
        0.4903926402016152,
        0.09754516100806439,
        -0.41573480615127256,
    ],
    [
        0.3535533905932738,
        -0.35355339059327373,
        -0.35355339059327384,
        0.3535533905932737,
        0.35355339059327384,
        -0.35355339059327334,
        -0.35355339059327356,
        0.3535533905932733,
    ],
    [
        0.27778511650980114,
        -0.4903926402016152,
        0.09754516100806415,
        0.41573480615127273,
        -0.41573480615127256,
        -0.09754516100806401,
        0.4903926402016153,
        -0.27778511650980076,
    ],
    [
        0.19134171618254492,
        -0.4619397662556434,
        0.46193976625564326,
        -0.19134171618254495,
        -0.19134171618254528,
        0.46193976625564337,
        -0.4619397662556432,
        0.19134171618254478,
    ],
    [
        0.09754516100806417,
        -0.2777851165098011,
        0.41573480615127273,
        -0.4903926402016153,
        0.4903926402016152,
        -0.4157348061512725,
        0.27778511650980076,
        -0.09754516100806429,
    ],
];

/// Forward 8x8 DCT-II with T.81 scaling.
///
/// Input is the level-shifted block (`pixel - 128`) in row-major order;
/// output coefficient `[v * 8 + u]` has vertical frequency `v` and
/// horizontal frequency `u`.
pub fn fdct8x8(block: &[f64; 64]) -> [f64; 64] {
    // Rows first: tmp[y][u] = sum_x BASIS[u][x] * f[y][x]
    let mut tmp = [0.0f64; 64];
    for y in 0..8 {
        let row = &block[y * 8..y * 8 + 8];
        for u in 0..8 {
            let b = &BASIS[u];
            tmp[y * 8 + u] = (0..8).map(|x| b[x] * row[x]).sum();
        }
    }
    let mut out = [0.0f64; 64];
    for v in 0..8 {
        let b = &BASIS[v];
        for u in 0..8 {
            out[v * 8 + u] = (0..8).map(|y| b[y] * tmp[y * 8 + u]).sum();
        }
    }
    out
}

/// Inverse of [`fdct8x8`].
pub fn idct8x8(coeffs: &[f64; 64]) -> [f64; 64] {
    // tmp[v][x] = sum_u BASIS[u][x] * F[v][u]
    let mut tmp = [0.0f64; 64];
    for v in 0..8 {
        let row = &coeffs[v * 8..v * 8 + 8];
        for x in 0..8 {
            tmp[v * 8 + x] = (0..8).map(|u| BASIS[u][x] * row[u]).sum();
        }
    }
    let mut out = [0.0f64; 64];
    for y in 0..8 {
        for x in 0..8 {
            out[y * 8 + x] = (0..8).map(|v| BASIS[v][y] * tmp[v * 8 + x]).sum();
        }
    }
    out
}

/// `round_half_away(c / q)` per coefficient, both in natural order.
pub fn quantize(coeffs: &[f64; 64], table: &QuantTable) -> [i32; 64] {
    let q = table.natural();
    core::array::from_fn(|i| round_half_away(coeffs[i] / f64::from(q[i])) as i32)
}

pub fn dequantize(levels: &[i32; 64], table: &QuantTable) -> [f64; 64] {
    let q = table.natural();
    core::array::from_fn(|i| f64::from(levels[i]) * f64::from(q[i]))
}
