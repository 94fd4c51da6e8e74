use alloc::vec;

use crate::image::{Image, ImageError};
use crate::math::clamp_u8;

/// JFIF full-range BT.601 forward transform for one pixel.
#[inline]
pub fn rgb_to_ycbcr_pixel(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = -0.168_735_892 * r - 0.331_264_108 * g + 0.5 * b + 128.0;
    let cr = 0.5 * r - 0.418_687_589 * g - 0.081_312_411 * b + 128.0;
    (clamp_u8(y), clamp_u8(cb), clamp_u8(cr))
}

#[inline]
pub fn ycbcr_to_rgb_pixel(y: u8, cb: u8, cr: u8) -> (u8, u8, u8) {
    let y = f64::from(y);
    let cb = f64::from(cb) - 128.0;
    let cr = f64::from(cr) - 128.0;
    let r = y + 1.402 * cr;
    let g = y - 0.344_136_286 * cb - 0.714_136_286 * cr;
    let b = y + 1.772 * cb;
    (clamp_u8(r), clamp_u8(g), clamp_u8(b))
}

fn map_pixels(img: &Image, f: fn(u8, u8, u8) -> (u8, u8, u8)) -> Result<Image, ImageError> {
    if img.channels() != 3 {
        return Err(ImageError::Channels(img.channels()));
    }
    if img.bit_depth() != 8 {
        return Err(ImageError::NotEightBit(img.bit_depth()));
    }
    let n = img.plane_len();
    let (p0, p1, p2) = (img.plane(0), img.plane(1), img.plane(2));
    let mut out = vec![0u8; 3 * n];
    for i in 0..n {
        let (a, b, c) = f(p0[i], p1[i], p2[i]);
        out[i] = a;
        out[n + i] = b;
        out[2 * n + i] = c;
    }
    Image::new(img.width(), img.height(), 3, 8, out)
}

/// Converts an 8-bit RGB image to Y, Cb, Cr planes with rounding and clamping.
pub fn rgb_to_ycbcr(img: &Image) -> Result<Image, ImageError> {
    map_pixels(img, rgb_to_ycbcr_pixel)
}

pub fn ycbcr_to_rgb(img: &Image) -> Result<Image, ImageError> {
    map_pixels(img, ycbcr_to_rgb_pixel)
}
