use alloc::vec;
use alloc::vec::Vec;

use super::RestorationError;
use crate::image::Image;
use crate::math::clamp_u8;

/// Catmull-Rom parameter of the cubic convolution kernel.
pub const BICUBIC_A: f64 = -0.5;

/// Keys cubic convolution kernel with `a = -0.5`; support is (-2, 2).
pub fn bicubic_kernel(x: f64) -> f64 {
    let a = BICUBIC_A;
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Source indices and weights for every output coordinate along one axis.
///
/// Output sample `i` sits at `(i + 0.5) / scale - 0.5` in input coordinates;
/// taps outside the input are clamped to the border.
fn taps(in_len: usize, scale: usize) -> Vec<([usize; 4], [f64; 4])> {
    (0..in_len * scale)
        .map(|i| {
            let center = (i as f64 + 0.5) / scale as f64 - 0.5;
            let base = libm::floor(center);
            let t = center - base;
            let base = base as isize;
            let idx = core::array::from_fn(|k| (base - 1 + k as isize).clamp(0, in_len as isize - 1) as usize);
            let w = [bicubic_kernel(t + 1.0), bicubic_kernel(t), bicubic_kernel(1.0 - t), bicubic_kernel(2.0 - t)];
            (idx, w)
        })
        .collect()
}

/// Separable bicubic upscaling in real arithmetic, one `Vec<f64>` per channel.
pub fn bicubic_upscale_real(img: &Image, sx: u32, sy: u32) -> Result<Vec<Vec<f64>>, RestorationError> {
    if sx == 0 || sy == 0 {
        return Err(RestorationError::InvalidScale(sx, sy));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (ow, oh) = (w * sx as usize, h * sy as usize);
    let htaps = taps(w, sx as usize);
    let vtaps = taps(h, sy as usize);
    let mut planes = Vec::with_capacity(img.channels() as usize);
    for c in 0..img.channels() as usize {
        let src = img.plane(c);
        // Horizontal pass: h rows of ow reals.
        let mut tmp = vec![0.0f64; h * ow];
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            let out = &mut tmp[y * ow..(y + 1) * ow];
            for (o, (idx, wt)) in out.iter_mut().zip(&htaps) {
                *o = (0..4).map(|k| wt[k] * f64::from(row[idx[k]])).sum();
            }
        }
        let mut plane = vec![0.0f64; oh * ow];
        for (y, (idx, wt)) in vtaps.iter().enumerate() {
            let out = &mut plane[y * ow..(y + 1) * ow];
            for k in 0..4 {
                let row = &tmp[idx[k] * ow..(idx[k] + 1) * ow];
                for (o, &v) in out.iter_mut().zip(row) {
                    *o += wt[k] * v;
                }
            }
        }
        planes.push(plane);
    }
    Ok(planes)
}

/// Bicubic upscaling by integer factors with a final round-and-clamp to 8 bits.
pub fn bicubic_upscale(img: &Image, sx: u32, sy: u32) -> Result<Image, RestorationError> {
    let planes = bicubic_upscale_real(img, sx, sy)?;
    let samples = planes.iter().flat_map(|p| p.iter().map(|&v| clamp_u8(v))).collect();
    Image::new(img.width() * sx, img.height() * sy, img.channels(), 8, samples)
        .map_err(|_| RestorationError::TensorShape)
}
