use serde::{Deserialize, Serialize};

use super::Image;
use crate::error::{Error, Result};

/// Multiplier on the HSV value channel. `alpha < 1` darkens, `alpha > 1` brightens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureConfig {
    pub alpha: f32,
}

impl ExposureConfig {
    pub fn new(alpha: f32) -> Result<Self> {
        let cfg = Self { alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::config(format!(
                "exposure factor alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Hexcone RGB to HSV; hue scaled to `[0, 1)` and fixed to 0 on the gray axis.
#[inline]
pub(crate) fn rgb_px_to_hsv(r: f32, g: f32, b: f32) -> [f32; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta <= 0.0 {
        0.0
    } else if max == r {
        let h = (g - b) / delta;
        if h < 0.0 {
            h + 6.0
        } else {
            h
        }
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let h = h / 6.0;
    [if h >= 1.0 { 0.0 } else { h }, s, max]
}

#[inline]
pub(crate) fn hsv_px_to_rgb(h: f32, s: f32, v: f32) -> [f32; 3] {
    if s <= 0.0 {
        return [v, v, v];
    }
    let h6 = (h * 6.0).rem_euclid(6.0);
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let rgb = match sector as u8 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    };
    rgb.map(|c| c.clamp(0.0, 1.0))
}

fn require_rgb(img: &Image, what: &str) -> Result<()> {
    if img.channels() != 3 {
        return Err(Error::input(format!(
            "{what} needs a 3-channel image, got {} channel(s)",
            img.channels()
        )));
    }
    Ok(())
}

fn map_pixels(img: &Image, f: impl Fn(&[f32]) -> [f32; 3]) -> Image {
    let data = img.data().chunks_exact(3).flat_map(f).collect();
    Image::from_parts_unchecked(img.width(), img.height(), 3, data)
}

pub fn rgb_to_hsv(img: &Image) -> Result<Image> {
    require_rgb(img, "rgb_to_hsv")?;
    Ok(map_pixels(img, |p| rgb_px_to_hsv(p[0], p[1], p[2])))
}

pub fn hsv_to_rgb(img: &Image) -> Result<Image> {
    require_rgb(img, "hsv_to_rgb")?;
    Ok(map_pixels(img, |p| hsv_px_to_rgb(p[0], p[1], p[2])))
}

/// Scales V by `alpha` in HSV space, clamps it to `[0, 1]` and converts back.
pub fn apply_exposure(img: &Image, cfg: &ExposureConfig) -> Result<Image> {
    cfg.validate()?;
    require_rgb(img, "apply_exposure")?;
    let alpha = cfg.alpha;
    Ok(map_pixels(img, |p| {
        let [h, s, v] = rgb_px_to_hsv(p[0], p[1], p[2]);
        hsv_px_to_rgb(h, s, (v * alpha).clamp(0.0, 1.0))
    }))
}
