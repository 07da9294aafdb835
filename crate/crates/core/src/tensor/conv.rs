use rand::Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Weights and geometry of a square 2-D convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvSpec {
    /// `(out_ch, in_ch, k, k)`
    pub kernel: Tensor,
    /// `(out_ch)`
    pub bias: Tensor,
    pub padding: usize,
    pub stride: usize,
}

impl ConvSpec {
    pub fn new(kernel: Tensor, bias: Tensor, padding: usize, stride: usize) -> Result<Self> {
        let spec = Self {
            kernel,
            bias,
            padding,
            stride,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform init in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for weights and bias.
    /// Padding is `k / 2` so stride-1 convolutions keep the spatial size.
    pub fn seeded<R: Rng + ?Sized>(out_ch: usize, in_ch: usize, k: usize, rng: &mut R) -> Self {
        let bound = 1.0 / ((in_ch * k * k) as f32).sqrt();
        Self {
            kernel: Tensor::random_uniform(&[out_ch, in_ch, k, k], -bound, bound, rng),
            bias: Tensor::random_uniform(&[out_ch], -bound, bound, rng),
            padding: k / 2,
            stride: 1,
        }
    }

    /// 1×1 convolution copying input channels straight through.
    pub fn identity(channels: usize) -> Self {
        let mut kernel = Tensor::zeros(&[channels, channels, 1, 1]);
        for c in 0..channels {
            let o = kernel.offset(&[c, c, 0, 0]);
            kernel.data_mut()[o] = 1.0;
        }
        Self {
            kernel,
            bias: Tensor::zeros(&[channels]),
            padding: 0,
            stride: 1,
        }
    }

    pub fn out_channels(&self) -> usize {
        self.kernel.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernel.shape()[1]
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel.shape()[2]
    }

    pub fn validate(&self) -> Result<()> {
        let ks = self.kernel.shape();
        if ks.len() != 4 || ks[2] != ks[3] {
            return Err(Error::input(format!("conv kernel must be (O, I, k, k), got {ks:?}")));
        }
        if ks[2] % 2 == 0 {
            return Err(Error::input(format!("conv kernel size must be odd, got {}", ks[2])));
        }
        if self.bias.shape() != [ks[0]] {
            return Err(Error::input(format!(
                "conv bias shape {:?} does not match {} output channels",
                self.bias.shape(),
                ks[0]
            )));
        }
        if self.stride == 0 {
            return Err(Error::input("conv stride must be positive"));
        }
        Ok(())
    }

    /// Output spatial size for an `h × w` input, if positive.
    pub fn output_size(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let k = self.kernel_size();
        let ph = h + 2 * self.padding;
        let pw = w + 2 * self.padding;
        if ph < k || pw < k {
            return None;
        }
        Some(((ph - k) / self.stride + 1, (pw - k) / self.stride + 1))
    }
}

/// Cross-correlation of a `(C_in, H, W)` tensor with zero padding.
pub fn conv2d(x: &Tensor, spec: &ConvSpec) -> Result<Tensor> {
    spec.validate()?;
    let &[c_in, h, w] = x.shape() else {
        return Err(Error::input(format!("conv2d expects (C, H, W), got {:?}", x.shape())));
    };
    if c_in != spec.in_channels() {
        return Err(Error::input(format!(
            "conv2d: input has {c_in} channels, kernel expects {}",
            spec.in_channels()
        )));
    }
    let (oh, ow) = spec
        .output_size(h, w)
        .ok_or_else(|| Error::input(format!("conv2d: {h}x{w} input too small for kernel")))?;
    let k = spec.kernel_size();
    let c_out = spec.out_channels();
    let pad = spec.padding as isize;
    let stride = spec.stride;
    let src = x.data();
    let kern = spec.kernel.data();

    let mut out = vec![0.0f32; c_out * oh * ow];
    for (oc, plane) in out.chunks_mut(oh * ow).enumerate() {
        plane.fill(spec.bias.data()[oc]);
        for ic in 0..c_in {
            let input = &src[ic * h * w..(ic + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let wgt = kern[((oc * c_in + ic) * k + ky) * k + kx];
                    if wgt == 0.0 {
                        continue;
                    }
                    for oy in 0..oh {
                        let iy = (oy * stride + ky) as isize - pad;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = &input[iy as usize * w..(iy as usize + 1) * w];
                        let out_row = &mut plane[oy * ow..(oy + 1) * ow];
                        for (ox, o) in out_row.iter_mut().enumerate() {
                            let ix = (ox * stride + kx) as isize - pad;
                            if ix >= 0 && ix < w as isize {
                                *o += wgt * row[ix as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![c_out, oh, ow], out)
}
