//! Image container and the colour-space operations used ahead of event
//! synthesis: HSV conversion, exposure scaling, luminance and resizing.

mod color;
mod io;

pub use color::{apply_exposure, hsv_to_rgb, rgb_to_hsv, ExposureConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major, channel-interleaved raster with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::input(format!("image dimensions {width}x{height} must be positive")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::input(format!("images have 1 or 3 channels, got {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::input(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::input(format!("image sample {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an image from a per-pixel closure returning `channels` samples.
    /// Samples are clamped into `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn constant(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Replicates a gray image into three channels; RGB images are cloned.
    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Self::from_parts_unchecked(self.width, self.height, 3, data)
    }

    /// Interleaved 8-bit samples, `round(v * 255)`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            bytes.iter().map(|&b| b as f32 / 255.0).collect(),
        )
    }
}

#[inline]
pub(crate) fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Which scalar intensity drives event synthesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LumaMode {
    /// `0.299 R + 0.587 G + 0.114 B`
    #[default]
    Rec601,
    /// HSV value channel, `max(R, G, B)`.
    HsvValue,
}

pub fn luminance(img: &Image) -> Image {
    luminance_with(img, LumaMode::Rec601)
}

pub fn luminance_with(img: &Image, mode: LumaMode) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| match mode {
            LumaMode::Rec601 => 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2],
            LumaMode::HsvValue => p[0].max(p[1]).max(p[2]),
        })
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    Image::from_parts_unchecked(img.width, img.height, 1, data)
}

/// Bilinear resize using half-pixel centres and edge clamping.
pub fn resize(img: &Image, width: usize, height: usize) -> Result<Image> {
    if width == 0 || height == 0 {
        return Err(Error::input(format!("resize target {width}x{height} must be positive")));
    }
    if width == img.width && height == img.height {
        return Ok(img.clone());
    }
    let axis = |out: usize, src: usize| -> Vec<(usize, usize, f32)> {
        let scale = src as f64 / out as f64;
        (0..out)
            .map(|i| {
                let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(src - 1);
                (i0, i1, (s - i0 as f64) as f32)
            })
            .collect()
    };
    let xs = axis(width, img.width);
    let ys = axis(height, img.height);
    let ch = img.channels;
    let mut data = Vec::with_capacity(width * height * ch);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..ch {
                let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
                let bot = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
                data.push((top * (1.0 - fy) + bot * fy).clamp(0.0, 1.0));
            }
        }
    }
    Ok(Image::from_parts_unchecked(width, height, ch, data))
}
