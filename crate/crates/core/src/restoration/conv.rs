use alloc::format;
use alloc::vec::Vec;

use super::{RestorationError, Tensor};

/// A stride-1 convolution with zero "same" padding.
///
/// Weights are laid out `[out][in][kh][kw]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub out_channels: usize,
    pub in_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvLayer {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel_h: kernel,
            kernel_w: kernel,
            weights: alloc::vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: alloc::vec![0.0; out_channels],
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn validate(&self) -> Result<(), RestorationError> {
        let expected = self.out_channels * self.in_channels * self.kernel_h * self.kernel_w;
        if self.out_channels == 0 || self.in_channels == 0 {
            return Err(RestorationError::Layer("zero channels".into()));
        }
        if self.kernel_h.is_multiple_of(2) || self.kernel_w.is_multiple_of(2) {
            return Err(RestorationError::Layer(format!(
                "kernel {}x{} is not odd-sized",
                self.kernel_h, self.kernel_w
            )));
        }
        if self.weights.len() != expected {
            return Err(RestorationError::Layer(format!(
                "{} weights for a {}x{}x{}x{} kernel",
                self.weights.len(),
                self.out_channels,
                self.in_channels,
                self.kernel_h,
                self.kernel_w
            )));
        }
        if self.bias.len() != self.out_channels {
            return Err(RestorationError::Layer(format!(
                "{} biases for {} outputs",
                self.bias.len(),
                self.out_channels
            )));
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> f32 {
        self.weights[((o * self.in_channels + i) * self.kernel_h + ky) * self.kernel_w + kx]
    }
}

/// Cross-correlation (no kernel flip), stride 1, zero padding of half the kernel.
pub fn conv2d(x: &Tensor, layer: &ConvLayer) -> Result<Tensor, RestorationError> {
    layer.validate()?;
    if x.channels() != layer.in_channels {
        return Err(RestorationError::ChannelMismatch { expected: layer.in_channels, actual: x.channels() });
    }
    let (h, w) = (x.height(), x.width());
    let (ph, pw) = (layer.kernel_h / 2, layer.kernel_w / 2);
    let mut out = Tensor::zeros(layer.out_channels, h, w);
    for o in 0..layer.out_channels {
        let dst = out.plane_mut(o);
        dst.fill(layer.bias[o]);
        for i in 0..layer.in_channels {
            let src = x.plane(i);
            for ky in 0..layer.kernel_h {
                // Output rows whose input row y + ky - ph is inside the image.
                let y0 = ph.saturating_sub(ky);
                let y1 = (h + ph).saturating_sub(ky).min(h);
                for kx in 0..layer.kernel_w {
                    let wv = layer.weight(o, i, ky, kx);
                    if wv == 0.0 {
                        continue;
                    }
                    let x0 = pw.saturating_sub(kx);
                    let x1 = (w + pw).saturating_sub(kx).min(w);
                    if x0 >= x1 {
                        continue;
                    }
                    for y in y0..y1 {
                        let sy = y + ky - ph;
                        let srow = &src[sy * w + x0 + kx - pw..sy * w + x1 + kx - pw];
                        let drow = &mut dst[y * w + x0..y * w + x1];
                        for (d, &s) in drow.iter_mut().zip(srow) {
                            *d += wv * s;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn relu_inplace(t: &mut Tensor) {
    for v in t.data_mut() {
        *v = v.max(0.0);
    }
}

/// `relu(conv2(relu(conv1(x))) + x)`.
pub fn resblock_forward(x: &Tensor, conv1: &ConvLayer, conv2: &ConvLayer) -> Result<Tensor, RestorationError> {
    if conv2.out_channels != x.channels() {
        return Err(RestorationError::ChannelMismatch { expected: x.channels(), actual: conv2.out_channels });
    }
    let mut mid = conv2d(x, conv1)?;
    relu_inplace(&mut mid);
    let mut out = conv2d(&mid, conv2)?;
    for (o, &s) in out.data_mut().iter_mut().zip(x.data()) {
        *o = (*o + s).max(0.0);
    }
    Ok(out)
}
