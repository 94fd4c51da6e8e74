use alloc::vec::Vec;

use super::bicubic::bicubic_upscale;
use super::conv::{conv2d, resblock_forward, ConvLayer};
use super::{RestorationError, Tensor};
use crate::image::Image;
use crate::math::clamp_u8;

/// Extra context rows/columns per side for a 6-block, 3x3 network (14 convolutions).
pub const FORWARD_HALO: usize = 14;

const TILE: usize = 128;

/// Trainable parameters of a network with `c` features and `r` residual blocks.
pub fn params_for(c: usize, r: usize) -> usize {
    (3 * c * 9 + c) + r * 2 * (c * c * 9 + c) + (c * 3 * 9 + 3)
}

/// Residual restoration network that runs on the bicubic-upsampled image.
///
/// `head` maps RGB to `channels` features, each block is
/// conv-ReLU-conv plus skip followed by ReLU, and `tail` maps back to RGB.
/// The output is a residual added to the bicubic image.
#[derive(Debug, Clone, PartialEq)]
pub struct DrcasModel {
    pub scale_x: u32,
    pub scale_y: u32,
    pub channels: usize,
    pub head: ConvLayer,
    pub blocks: Vec<(ConvLayer, ConvLayer)>,
    pub tail: ConvLayer,
}

impl DrcasModel {
    pub const DEFAULT_CHANNELS: usize = 64;
    pub const DEFAULT_BLOCKS: usize = 6;

    /// All-zero network: its residual is zero, so it reproduces bicubic.
    pub fn zeros(scale_x: u32, scale_y: u32, channels: usize, blocks: usize) -> Self {
        Self {
            scale_x,
            scale_y,
            channels,
            head: ConvLayer::zeros(channels, 3, 3),
            blocks: (0..blocks)
                .map(|_| (ConvLayer::zeros(channels, channels, 3), ConvLayer::zeros(channels, channels, 3)))
                .collect(),
            tail: ConvLayer::zeros(3, channels, 3),
        }
    }

    /// The default topology (64 features, 6 blocks) with zero weights.
    pub fn default_for_scale(scale_x: u32, scale_y: u32) -> Self {
        Self::zeros(scale_x, scale_y, Self::DEFAULT_CHANNELS, Self::DEFAULT_BLOCKS)
    }

    pub fn layers(&self) -> impl Iterator<Item = &ConvLayer> {
        core::iter::once(&self.head)
            .chain(self.blocks.iter().flat_map(|(a, b)| [a, b]))
            .chain(core::iter::once(&self.tail))
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut ConvLayer> {
        core::iter::once(&mut self.head)
            .chain(self.blocks.iter_mut().flat_map(|(a, b)| [a, b]))
            .chain(core::iter::once(&mut self.tail))
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(ConvLayer::param_count).sum()
    }

    /// Context needed around a tile so its interior matches a full-image pass.
    pub fn receptive_radius(&self) -> usize {
        self.layers().map(|l| l.kernel_h.max(l.kernel_w) / 2).sum()
    }

    pub fn validate(&self) -> Result<(), RestorationError> {
        if self.scale_x == 0 || self.scale_y == 0 {
            return Err(RestorationError::InvalidScale(self.scale_x, self.scale_y));
        }
        for layer in self.layers() {
            layer.validate()?;
        }
        let c = self.channels;
        let chain_ok = self.head.in_channels == 3
            && self.head.out_channels == c
            && self
                .blocks
                .iter()
                .all(|(a, b)| a.in_channels == c && a.out_channels == c && b.in_channels == c && b.out_channels == c)
            && self.tail.in_channels == c
            && self.tail.out_channels == 3;
        if !chain_ok {
            return Err(RestorationError::Layer(alloc::format!("layer channels do not chain 3 -> {c} -> ... -> 3")));
        }
        Ok(())
    }

    /// Network output (the residual) for an input tensor in [0, 1].
    pub fn residual(&self, x: &Tensor) -> Result<Tensor, RestorationError> {
        let mut f = conv2d(x, &self.head)?;
        for (c1, c2) in &self.blocks {
            f = resblock_forward(&f, c1, c2)?;
        }
        conv2d(&f, &self.tail)
    }
}

fn image_to_tensor(img: &Image) -> Tensor {
    let data = img.samples().iter().map(|&v| f32::from(v) / 255.0).collect();
    Tensor::from_vec(img.channels() as usize, img.height() as usize, img.width() as usize, data)
        .expect("image dimensions are non-zero")
}

/// Restores `lr` by bicubic upscaling plus the learned residual.
///
/// `(sx, sy)` is the restoration factor the caller needs; it must equal the
/// model's scale. The network runs tile by tile with enough overlap that the
/// result is identical to a single full-image pass.
pub fn drcas_forward(lr: &Image, model: &DrcasModel, sx: u32, sy: u32) -> Result<Image, RestorationError> {
    if (model.scale_x, model.scale_y) != (sx, sy) {
        return Err(RestorationError::ScaleMismatch {
            model_x: model.scale_x,
            model_y: model.scale_y,
            want_x: sx,
            want_y: sy,
        });
    }
    if lr.bit_depth() != 8 {
        return Err(RestorationError::NotEightBit(lr.bit_depth()));
    }
    if lr.channels() != 3 {
        return Err(RestorationError::ChannelMismatch { expected: 3, actual: lr.channels() as usize });
    }
    model.validate()?;
    let upscaled = bicubic_upscale(lr, sx, sy)?;
    let x = image_to_tensor(&upscaled);
    let (h, w) = (x.height(), x.width());
    let halo = model.receptive_radius();
    let mut residual = Tensor::zeros(3, h, w);
    for ty in (0..h).step_by(TILE) {
        for tx in (0..w).step_by(TILE) {
            let (th, tw) = (TILE.min(h - ty), TILE.min(w - tx));
            let y0 = ty.saturating_sub(halo);
            let x0 = tx.saturating_sub(halo);
            let y1 = (ty + th + halo).min(h);
            let x1 = (tx + tw + halo).min(w);
            let r = model.residual(&x.window(y0, x0, y1 - y0, x1 - x0))?;
            let rw = x1 - x0;
            for c in 0..3 {
                let src = r.plane(c);
                let dst = residual.plane_mut(c);
                for yy in 0..th {
                    let s = (ty - y0 + yy) * rw + (tx - x0);
                    let d = (ty + yy) * w + tx;
                    dst[d..d + tw].copy_from_slice(&src[s..s + tw]);
                }
            }
        }
    }
    let samples =
        x.data().iter().zip(residual.data()).map(|(&b, &r)| clamp_u8(255.0 * (f64::from(b) + f64::from(r)))).collect();
    Image::new(upscaled.width(), upscaled.height(), 3, 8, samples).map_err(|_| RestorationError::TensorShape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn randomize(model: &mut DrcasModel, rng: &mut StdRng, scale: f32) {
        for l in model.layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = rng.random_range(-scale..scale));
            l.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.01..0.01));
        }
    }

    fn random_rgb(rng: &mut StdRng, w: u32, h: u32) -> Image {
        let s = (0..w * h * 3).map(|_| rng.random::<u8>()).collect();
        Image::new(w, h, 3, 8, s).unwrap()
    }

    #[test]
    fn default_parameter_count() {
        assert_eq!(params_for(64, 6), 446_659);
        assert_eq!(DrcasModel::default_for_scale(2, 2).param_count(), 446_659);
        assert_eq!(DrcasModel::default_for_scale(2, 2).receptive_radius(), FORWARD_HALO);
    }

    #[test]
    fn zero_model_reproduces_bicubic() {
        let mut rng = StdRng::seed_from_u64(9);
        let lr = random_rgb(&mut rng, 7, 5);
        for (sx, sy) in [(2, 1), (2, 2), (4, 4)] {
            let m = DrcasModel::zeros(sx, sy, 4, 1);
            assert_eq!(drcas_forward(&lr, &m, sx, sy).unwrap(), bicubic_upscale(&lr, sx, sy).unwrap());
        }
    }

    #[test]
    fn scale_mismatch_reported() {
        let lr = Image::filled(4, 4, 3, 8, 9).unwrap();
        let m = DrcasModel::zeros(2, 2, 4, 1);
        assert!(matches!(
            drcas_forward(&lr, &m, 4, 4),
            Err(RestorationError::ScaleMismatch { model_x: 2, want_x: 4, .. })
        ));
    }

    #[test]
    fn tiled_pass_equals_full_pass() {
        let mut rng = StdRng::seed_from_u64(10);
        let mut m = DrcasModel::zeros(2, 2, 4, 2);
        randomize(&mut m, &mut rng, 0.2);
        // 150x140 upscaled crosses tile boundaries in both axes.
        let lr = random_rgb(&mut rng, 75, 70);
        let tiled = drcas_forward(&lr, &m, 2, 2).unwrap();
        let up = bicubic_upscale(&lr, 2, 2).unwrap();
        let x = image_to_tensor(&up);
        let r = m.residual(&x).unwrap();
        let full: Vec<u8> =
            x.data().iter().zip(r.data()).map(|(&b, &r)| clamp_u8(255.0 * (f64::from(b) + f64::from(r)))).collect();
        assert_eq!(tiled.samples(), &full[..]);
    }

    #[test]
    fn broken_chain_rejected() {
        let mut m = DrcasModel::zeros(2, 2, 4, 1);
        m.tail = ConvLayer::zeros(3, 5, 3);
        assert!(matches!(m.validate(), Err(RestorationError::Layer(_))));
    }
}
