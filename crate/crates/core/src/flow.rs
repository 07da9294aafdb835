//! Per-pixel unit velocity fields `v = (cos θ, sin θ)`.
//!
//! Random fields draw θ uniformly from `[-π, π]`. Each image row owns its own
//! ChaCha8 stream (selected by row index), so the angle at `(x, y)` depends on
//! `(seed, x, y)` only and rows can be generated in any order or in parallel.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{hsv_to_rgb, Image};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMode {
    /// Independent uniform angle per pixel.
    #[default]
    Random,
    /// One global angle for the whole image.
    Fixed,
}

impl FlowMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowMode::Random => "random",
            FlowMode::Fixed => "fixed",
        }
    }
}

impl FromStr for FlowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(FlowMode::Random),
            "fixed" => Ok(FlowMode::Fixed),
            other => Err(Error::config(format!("unknown flow mode {other:?} (random|fixed)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub mode: FlowMode,
    /// Direction in radians, used by [`FlowMode::Fixed`].
    pub theta: f64,
    pub seed: u64,
}

impl FlowConfig {
    pub const DEFAULT_THETA: f64 = PI / 4.0;

    pub fn random(seed: u64) -> Self {
        Self {
            mode: FlowMode::Random,
            theta: Self::DEFAULT_THETA,
            seed,
        }
    }

    pub fn fixed(theta: f64) -> Self {
        Self {
            mode: FlowMode::Fixed,
            theta,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == FlowMode::Fixed && !(-PI..=PI).contains(&self.theta) {
            return Err(Error::config(format!(
                "fixed flow angle {} outside [-pi, pi]",
                self.theta
            )));
        }
        Ok(())
    }
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self::random(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    vx: Vec<f32>,
    vy: Vec<f32>,
}

impl FlowField {
    pub const NORM_TOLERANCE: f32 = 1e-5;

    /// Accepts caller-built fields; every vector must have unit length.
    pub fn new(width: usize, height: usize, vx: Vec<f32>, vy: Vec<f32>) -> Result<Self> {
        let n = width * height;
        if vx.len() != n || vy.len() != n {
            return Err(Error::input(format!(
                "flow components must have {n} entries, got {} and {}",
                vx.len(),
                vy.len()
            )));
        }
        if let Some((x, y)) = vx
            .iter()
            .zip(&vy)
            .find(|(x, y)| !((*x * *x + *y * *y) - 1.0).abs().le(&1e-4))
        {
            return Err(Error::input(format!("flow vector ({x}, {y}) is not unit length")));
        }
        Ok(Self { width, height, vx, vy })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vx(&self) -> &[f32] {
        &self.vx
    }

    pub fn vy(&self) -> &[f32] {
        &self.vy
    }

    /// The field with every vector reversed.
    pub fn negated(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            vx: self.vx.iter().map(|v| -v).collect(),
            vy: self.vy.iter().map(|v| -v).collect(),
        }
    }

    /// Debug rendering: direction mapped to hue, full saturation and value.
    pub fn to_hsv_image(&self) -> Image {
        let mut hsv = Vec::with_capacity(self.vx.len() * 3);
        for (&x, &y) in self.vx.iter().zip(&self.vy) {
            let theta = (y as f64).atan2(x as f64);
            hsv.extend_from_slice(&[((theta + PI) / (2.0 * PI)) as f32 % 1.0, 1.0, 1.0]);
        }
        let img = Image::from_parts_unchecked(self.width, self.height, 3, hsv);
        hsv_to_rgb(&img).expect("three-channel image")
    }
}

#[inline]
fn unit(theta: f64) -> (f32, f32) {
    (theta.cos() as f32, theta.sin() as f32)
}

pub fn generate_flow(width: usize, height: usize, cfg: &FlowConfig) -> Result<FlowField> {
    if width == 0 || height == 0 {
        return Err(Error::input(format!("flow dimensions {width}x{height} must be positive")));
    }
    cfg.validate()?;
    let n = width * height;
    let (mut vx, mut vy) = (vec![0.0f32; n], vec![0.0f32; n]);
    match cfg.mode {
        FlowMode::Fixed => {
            let (cx, cy) = unit(cfg.theta);
            vx.fill(cx);
            vy.fill(cy);
        }
        FlowMode::Random => {
            vx.par_chunks_mut(width)
                .zip(vy.par_chunks_mut(width))
                .enumerate()
                .for_each(|(y, (row_x, row_y))| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(y as u64);
                    for (ox, oy) in row_x.iter_mut().zip(row_y.iter_mut()) {
                        let (cx, cy) = unit(rng.random_range(-PI..=PI));
                        *ox = cx;
                        *oy = cy;
                    }
                });
        }
    }
    Ok(FlowField { width, height, vx, vy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn fixed_directions() {
        let f = generate_flow(4, 3, &FlowConfig::fixed(0.0)).unwrap();
        assert!(f.vx().iter().all(|&v| v == 1.0));
        assert!(f.vy().iter().all(|&v| v == 0.0));
        let f = generate_flow(4, 3, &FlowConfig::fixed(FRAC_PI_2)).unwrap();
        assert!(f.vx().iter().all(|v| v.abs() < 1e-7));
        assert!(f.vy().iter().all(|&v| (v - 1.0).abs() < 1e-7));
    }

    #[test]
    fn fixed_angle_out_of_range_rejected() {
        assert!(generate_flow(2, 2, &FlowConfig::fixed(4.0)).is_err());
        assert!(generate_flow(0, 2, &FlowConfig::fixed(0.0)).is_err());
    }

    #[test]
    fn random_field_statistics() {
        let f = generate_flow(64, 64, &FlowConfig::random(42)).unwrap();
        let n = (64 * 64) as f32;
        let mx: f32 = f.vx().iter().sum::<f32>() / n;
        let my: f32 = f.vy().iter().sum::<f32>() / n;
        assert!(mx.abs() < 0.05, "mean vx {mx}");
        assert!(my.abs() < 0.05, "mean vy {my}");
        for (x, y) in f.vx().iter().zip(f.vy()) {
            assert!((x * x + y * y - 1.0).abs() < FlowField::NORM_TOLERANCE);
        }
    }

    #[test]
    fn deterministic_and_position_keyed() {
        let cfg = FlowConfig::random(9);
        let a = generate_flow(33, 17, &cfg).unwrap();
        assert_eq!(a, generate_flow(33, 17, &cfg).unwrap());
        // A wider, taller field agrees on the overlapping pixels.
        let b = generate_flow(50, 20, &cfg).unwrap();
        for y in 0..17 {
            for x in 0..33 {
                assert_eq!(a.vx()[y * 33 + x], b.vx()[y * 50 + x]);
                assert_eq!(a.vy()[y * 33 + x], b.vy()[y * 50 + x]);
            }
        }
        assert_ne!(a, generate_flow(33, 17, &FlowConfig::random(10)).unwrap());
    }

    #[test]
    fn identical_across_thread_counts() {
        let cfg = FlowConfig::random(1234);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate_flow(97, 61, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(8));
    }

    #[test]
    fn hsv_dump_has_flow_dimensions() {
        let f = generate_flow(5, 4, &FlowConfig::random(1)).unwrap();
        let img = f.to_hsv_image();
        assert_eq!((img.width(), img.height(), img.channels()), (5, 4, 3));
    }

    #[test]
    fn constructor_rejects_non_unit_vectors() {
        assert!(FlowField::new(1, 1, vec![0.5], vec![0.5]).is_err());
        assert!(FlowField::new(1, 1, vec![0.6], vec![0.8]).is_ok());
    }
}
