//! Single-image event synthesis.
//!
//! Luminance gradients moved along a velocity field give the brightness
//! change `ΔL = -(∇L · v) Δt`; every full multiple of the contrast threshold
//! `C` in `|ΔL|` is one event of polarity `sign(ΔL)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{generate_flow, FlowConfig, FlowField};
use crate::imaging::{luminance_with, Image, LumaMode};
use crate::tensor::Tensor;

/// Horizontal and vertical Sobel responses of a luminance image.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f32>,
    pub gy: Vec<f32>,
}

/// A dense per-pixel scalar map, e.g. the brightness change `ΔL`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventGenConfig {
    /// Contrast threshold `C` on the `[0, 1]` intensity scale.
    pub threshold_c: f32,
    pub dt: f32,
    /// Maximum events per pixel and polarity.
    pub count_cap: u16,
    pub flow: FlowConfig,
    #[serde(default)]
    pub luma: LumaMode,
}

impl EventGenConfig {
    pub const DEFAULT_THRESHOLD: f32 = 0.1;

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_c > 0.0) || !self.threshold_c.is_finite() {
            return Err(Error::config(format!(
                "contrast threshold must be positive, got {}",
                self.threshold_c
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.count_cap == 0 {
            return Err(Error::config("count cap must be at least 1"));
        }
        self.flow.validate()
    }
}

impl Default for EventGenConfig {
    fn default() -> Self {
        Self {
            threshold_c: Self::DEFAULT_THRESHOLD,
            dt: 1.0,
            count_cap: 1,
            flow: FlowConfig::default(),
            luma: LumaMode::Rec601,
        }
    }
}

/// Per-pixel ON/OFF event counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventFrame {
    width: usize,
    height: usize,
    on: Vec<u16>,
    off: Vec<u16>,
}

impl EventFrame {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            on: vec![0; width * height],
            off: vec![0; width * height],
        }
    }

    /// Rejects frames where a pixel carries both polarities.
    pub fn new(width: usize, height: usize, on: Vec<u16>, off: Vec<u16>) -> Result<Self> {
        let n = width * height;
        if on.len() != n || off.len() != n {
            return Err(Error::input(format!(
                "event planes must have {n} entries, got {} and {}",
                on.len(),
                off.len()
            )));
        }
        if let Some(i) = on.iter().zip(&off).position(|(&a, &b)| a > 0 && b > 0) {
            return Err(Error::input(format!(
                "pixel ({}, {}) has both ON and OFF events",
                i % width.max(1),
                i / width.max(1)
            )));
        }
        Ok(Self { width, height, on, off })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn on(&self) -> &[u16] {
        &self.on
    }

    pub fn off(&self) -> &[u16] {
        &self.off
    }

    pub fn total_on(&self) -> u64 {
        self.on.iter().map(|&v| v as u64).sum()
    }

    pub fn total_off(&self) -> u64 {
        self.off.iter().map(|&v| v as u64).sum()
    }

    pub fn total_events(&self) -> u64 {
        self.total_on() + self.total_off()
    }

    pub fn is_empty(&self) -> bool {
        self.on.iter().chain(&self.off).all(|&v| v == 0)
    }

    pub fn max_count(&self) -> u16 {
        self.on.iter().chain(&self.off).copied().max().unwrap_or(0)
    }

    /// Same frame with the ON and OFF planes exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            on: self.off.clone(),
            off: self.on.clone(),
        }
    }
}

/// Binary `(C, T, H, W)` spike volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTensor(Tensor);

impl SpikeTensor {
    pub fn new(t: Tensor) -> Result<Self> {
        if t.rank() != 4 {
            return Err(Error::input(format!("spike tensors are (C, T, H, W), got {:?}", t.shape())));
        }
        if t.shape()[1] == 0 {
            return Err(Error::input("spike tensor needs at least one time step"));
        }
        if let Some(v) = t.data().iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::input(format!("spike value {v} is not binary")));
        }
        Ok(Self(t))
    }

    pub fn zeros(c: usize, t: usize, h: usize, w: usize) -> Self {
        Self(Tensor::zeros(&[c, t, h, w]))
    }

    pub fn as_tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn shape(&self) -> [usize; 4] {
        let s = self.0.shape();
        [s[0], s[1], s[2], s[3]]
    }

    pub fn channels(&self) -> usize {
        self.shape()[0]
    }

    pub fn time_steps(&self) -> usize {
        self.shape()[1]
    }

    /// `(C, H, W)` slice at time step `t`.
    pub fn step(&self, t: usize) -> Tensor {
        let [c, steps, h, w] = self.shape();
        assert!(t < steps, "time step {t} out of range");
        let plane = h * w;
        let mut data = Vec::with_capacity(c * plane);
        for ch in 0..c {
            let start = (ch * steps + t) * plane;
            data.extend_from_slice(&self.0.data()[start..start + plane]);
        }
        Tensor::new(vec![c, h, w], data).expect("slice shape")
    }

    /// First `t` time steps.
    pub fn truncated(&self, t: usize) -> Result<Self> {
        let [c, steps, h, w] = self.shape();
        if t == 0 || t > steps {
            return Err(Error::input(format!("cannot truncate {steps} steps to {t}")));
        }
        let plane = h * w;
        let mut data = Vec::with_capacity(c * t * plane);
        for ch in 0..c {
            let start = ch * steps * plane;
            data.extend_from_slice(&self.0.data()[start..start + t * plane]);
        }
        Ok(Self(Tensor::new(vec![c, t, h, w], data)?))
    }

    pub fn count_ones(&self) -> usize {
        self.0.data().iter().filter(|&&v| v == 1.0).count()
    }
}

/// 3×3 Sobel with replicate padding. `gx` uses `[[-1,0,1],[-2,0,2],[-1,0,1]]`,
/// `gy` its transpose.
pub fn sobel(lum: &Image) -> Result<GradientField> {
    if lum.channels() != 1 {
        return Err(Error::input(format!(
            "sobel needs a single-channel image, got {} channels",
            lum.channels()
        )));
    }
    let (w, h) = (lum.width(), lum.height());
    let src = lum.data();
    let mut gx = vec![0.0f32; w * h];
    let mut gy = vec![0.0f32; w * h];
    gx.par_chunks_mut(w)
        .zip(gy.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row_gx, row_gy))| {
            let up = &src[y.saturating_sub(1) * w..][..w];
            let mid = &src[y * w..][..w];
            let down = &src[(y + 1).min(h - 1) * w..][..w];
            for x in 0..w {
                let (l, r) = (x.saturating_sub(1), (x + 1).min(w - 1));
                let (a, b, c) = (up[l], up[x], up[r]);
                let (d, f) = (mid[l], mid[r]);
                let (g, hh, i) = (down[l], down[x], down[r]);
                // Opposite taps are differenced first so flat regions give exactly 0.
                let sx = (c - a) + 2.0 * (f - d) + (i - g);
                let sy = (g - a) + 2.0 * (hh - b) + (i - c);
                row_gx[x] = sx;
                row_gy[x] = sy;
            }
        });
    Ok(GradientField {
        width: w,
        height: h,
        gx,
        gy,
    })
}

/// `ΔL = -(gx·vx + gy·vy)·dt` per pixel.
pub fn delta_l(grad: &GradientField, flow: &FlowField, dt: f32) -> Result<ScalarField> {
    if grad.width != flow.width() || grad.height != flow.height() {
        return Err(Error::input(format!(
            "gradient is {}x{} but flow is {}x{}",
            grad.width,
            grad.height,
            flow.width(),
            flow.height()
        )));
    }
    let data = grad
        .gx
        .par_iter()
        .zip(&grad.gy)
        .zip(flow.vx())
        .zip(flow.vy())
        .map(|(((&gx, &gy), &vx), &vy)| -(gx * vx + gy * vy) * dt)
        .collect();
    Ok(ScalarField {
        width: grad.width,
        height: grad.height,
        data,
    })
}

/// Event count for one brightness change: `min(floor(|ΔL| / C), cap)`.
#[inline]
pub fn event_count(dl: f32, threshold_c: f32, cap: u16) -> u16 {
    let n = (dl.abs() / threshold_c).floor();
    if n >= cap as f32 {
        cap
    } else {
        // NaN casts to 0.
        n as u16
    }
}

pub fn threshold_events(dl: &ScalarField, cfg: &EventGenConfig) -> Result<EventFrame> {
    cfg.validate()?;
    let (c, cap) = (cfg.threshold_c, cfg.count_cap);
    let (on, off): (Vec<u16>, Vec<u16>) = dl
        .data
        .par_iter()
        .map(|&v| {
            let n = event_count(v, c, cap);
            if v > 0.0 {
                (n, 0)
            } else {
                (0, n)
            }
        })
        .unzip();
    Ok(EventFrame {
        width: dl.width,
        height: dl.height,
        on,
        off,
    })
}

/// Full chain: luminance, Sobel, flow generation, brightness change, threshold.
pub fn synthesize_events(img: &Image, cfg: &EventGenConfig) -> Result<EventFrame> {
    cfg.validate()?;
    let flow = generate_flow(img.width(), img.height(), &cfg.flow)?;
    synthesize_with_flow(img, &flow, cfg)
}

/// As [`synthesize_events`] but with a caller-supplied velocity field.
pub fn synthesize_with_flow(img: &Image, flow: &FlowField, cfg: &EventGenConfig) -> Result<EventFrame> {
    cfg.validate()?;
    let lum = luminance_with(img, cfg.luma);
    let grad = sobel(&lum)?;
    let dl = delta_l(&grad, flow, cfg.dt)?;
    threshold_events(&dl, cfg)
}

/// Binarises each polarity plane and repeats it `t_steps` times:
/// output shape `(2, T, H, W)`, channel 0 = ON, channel 1 = OFF.
pub fn constant_code(ef: &EventFrame, t_steps: usize) -> Result<SpikeTensor> {
    if t_steps == 0 {
        return Err(Error::config("constant coding needs at least one time step"));
    }
    let plane = ef.width * ef.height;
    let mut data = Vec::with_capacity(2 * t_steps * plane);
    for counts in [&ef.on, &ef.off] {
        let bin: Vec<f32> = counts.iter().map(|&n| if n > 0 { 1.0 } else { 0.0 }).collect();
        for _ in 0..t_steps {
            data.extend_from_slice(&bin);
        }
    }
    SpikeTensor::new(Tensor::new(vec![2, t_steps, ef.height, ef.width], data)?)
}
