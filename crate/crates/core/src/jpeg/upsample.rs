//! Chroma upsampling that reproduces libjpeg's "fancy" triangle filters.
//!
//! Inputs are the decoded component planes at their subsampled size
//! (`in_w` x `in_h`, stored with row stride `stride`). Edge rows are
//! replicated the way libjpeg supplies context rows.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) struct Plane<'a> {
    pub data: &'a [u8],
    pub stride: usize,
    pub width: usize,
    pub height: usize,
}

impl Plane<'_> {
    #[inline]
    fn at(&self, x: usize, y: usize) -> i32 {
        i32::from(self.data[y * self.stride + x])
    }

    #[inline]
    fn row(&self, y: isize) -> usize {
        y.clamp(0, self.height as isize - 1) as usize
    }
}

/// Upsamples `src` by (`fx`, `fy`) and crops to `out_w` x `out_h`.
pub(crate) fn upsample(src: &Plane<'_>, fx: usize, fy: usize, out_w: usize, out_h: usize) -> Vec<u8> {
    let full = match (fx, fy) {
        (1, 1) => copy(src),
        (2, 1) if src.width >= 2 => h2v1(src),
        (2, 2) if src.width >= 2 => h2v2(src),
        (1, 2) => h1v2(src),
        _ => replicate(src, fx, fy),
    };
    let full_w = src.width * fx;
    let mut out = vec![0u8; out_w * out_h];
    for y in 0..out_h {
        let sy = y.min(src.height * fy - 1);
        for x in 0..out_w {
            let sx = x.min(full_w - 1);
            out[y * out_w + x] = full[sy * full_w + sx];
        }
    }
    out
}

fn copy(src: &Plane<'_>) -> Vec<u8> {
    let mut out = Vec::with_capacity(src.width * src.height);
    for y in 0..src.height {
        out.extend_from_slice(&src.data[y * src.stride..y * src.stride + src.width]);
    }
    out
}

fn replicate(src: &Plane<'_>, fx: usize, fy: usize) -> Vec<u8> {
    let ow = src.width * fx;
    let mut out = vec![0u8; ow * src.height * fy];
    for y in 0..src.height * fy {
        for x in 0..ow {
            out[y * ow + x] = src.data[(y / fy) * src.stride + x / fx];
        }
    }
    out
}

fn h2v1(src: &Plane<'_>) -> Vec<u8> {
    let w = src.width;
    let ow = 2 * w;
    let mut out = vec![0u8; ow * src.height];
    for y in 0..src.height {
        let o = &mut out[y * ow..(y + 1) * ow];
        let p = |x: usize| src.at(x, y);
        o[0] = p(0) as u8;
        o[1] = ((p(0) * 3 + p(1) + 2) >> 2) as u8;
        for x in 1..w - 1 {
            let v = p(x) * 3;
            o[2 * x] = ((v + p(x - 1) + 1) >> 2) as u8;
            o[2 * x + 1] = ((v + p(x + 1) + 2) >> 2) as u8;
        }
        o[2 * w - 2] = ((p(w - 1) * 3 + p(w - 2) + 1) >> 2) as u8;
        o[2 * w - 1] = p(w - 1) as u8;
    }
    out
}

fn h1v2(src: &Plane<'_>) -> Vec<u8> {
    let w = src.width;
    let mut out = vec![0u8; w * src.height * 2];
    for y in 0..src.height {
        for v in 0..2 {
            let near = src.row(y as isize + if v == 0 { -1 } else { 1 });
            let bias = if v == 0 { 1 } else { 2 };
            let o = &mut out[(2 * y + v) * w..(2 * y + v + 1) * w];
            for (x, d) in o.iter_mut().enumerate() {
                *d = ((src.at(x, y) * 3 + src.at(x, near) + bias) >> 2) as u8;
            }
        }
    }
    out
}

fn h2v2(src: &Plane<'_>) -> Vec<u8> {
    let w = src.width;
    let ow = 2 * w;
    let mut out = vec![0u8; ow * src.height * 2];
    for y in 0..src.height {
        for v in 0..2 {
            let near = src.row(y as isize + if v == 0 { -1 } else { 1 });
            let colsum = |x: usize| src.at(x, y) * 3 + src.at(x, near);
            let o = &mut out[(2 * y + v) * ow..(2 * y + v + 1) * ow];
            let mut this = colsum(0);
            let mut next = colsum(1);
            o[0] = ((this * 4 + 8) >> 4) as u8;
            o[1] = ((this * 3 + next + 7) >> 4) as u8;
            let mut last = this;
            this = next;
            for x in 1..w - 1 {
                next = colsum(x + 1);
                o[2 * x] = ((this * 3 + last + 8) >> 4) as u8;
                o[2 * x + 1] = ((this * 3 + next + 7) >> 4) as u8;
                last = this;
                this = next;
            }
            o[2 * w - 2] = ((this * 3 + last + 8) >> 4) as u8;
            o[2 * w - 1] = ((this * 4 + 7) >> 4) as u8;
        }
    }
    out
}
