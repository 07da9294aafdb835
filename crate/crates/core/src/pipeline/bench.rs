//! In-memory throughput measurement of exposure plus event synthesis.

use std::f32::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{per_image_seed, process_image, DEFAULT_SIZE};
use crate::error::{Error, Result};
use crate::eventgen::EventGenConfig;
use crate::imaging::Image;

/// Images per second expected from 8 workers on an 8-core desktop.
pub const TARGET_IMAGES_PER_SEC: f64 = 100.0;
/// Below this the benchmark is a hard failure.
pub const FLOOR_IMAGES_PER_SEC: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub images: usize,
    pub size: usize,
    pub workers: usize,
    pub alpha: f32,
    pub seed: u64,
    pub event_cfg: EventGenConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            images: 64,
            size: DEFAULT_SIZE,
            workers: 8,
            alpha: 1.0,
            seed: 0,
            event_cfg: EventGenConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// Between the hard floor and the target.
    Warn,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub seconds: f64,
    pub images_per_sec: f64,
    pub total_events: u64,
    pub available_cores: usize,
    pub verdict: Verdict,
}

pub fn verdict_for(images_per_sec: f64) -> Verdict {
    if images_per_sec >= TARGET_IMAGES_PER_SEC {
        Verdict::Pass
    } else if images_per_sec >= FLOOR_IMAGES_PER_SEC {
        Verdict::Warn
    } else {
        Verdict::Fail
    }
}

/// Smooth gradients with blocky structure and pixel noise, so that the
/// thresholding stage sees a realistic mix of quiet and busy pixels.
pub fn synthetic_image(size: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fx, fy): (f32, f32) = (rng.random_range(1.0..6.0), rng.random_range(1.0..6.0));
    let block = rng.random_range(8..48usize);
    let noise: Vec<f32> = (0..size * size * 3).map(|_| rng.random_range(-0.05..0.05)).collect();
    Image::from_fn(size, size, 3, |x, y, c| {
        let u = x as f32 / size as f32;
        let v = y as f32 / size as f32;
        let wave = 0.5 + 0.25 * (fx * u * TAU + c as f32).sin() * (fy * v * TAU).cos();
        let checker = if (x / block + y / block) % 2 == 0 { 0.2 } else { 0.0 };
        wave + checker + noise[(y * size + x) * 3 + c]
    })
    .expect("valid synthetic image")
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.images == 0 || cfg.size == 0 || cfg.workers == 0 {
        return Err(Error::config("benchmark needs images, size and workers >= 1"));
    }
    let inputs: Vec<Image> = (0..cfg.images)
        .map(|i| synthetic_image(cfg.size, cfg.seed.wrapping_add(i as u64)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {} workers: {e}", cfg.workers)))?;

    let start = Instant::now();
    let total_events = pool.install(|| {
        inputs
            .par_iter()
            .enumerate()
            .map(|(i, img)| {
                let seed = per_image_seed(cfg.seed, &format!("bench/{i}"));
                process_image(img, cfg.alpha, &cfg.event_cfg, seed).map(|(_, ef)| ef.total_events())
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })?;
    let seconds = start.elapsed().as_secs_f64();
    let images_per_sec = cfg.images as f64 / seconds.max(1e-9);
    Ok(BenchReport {
        config: *cfg,
        seconds,
        images_per_sec,
        total_events,
        available_cores: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        verdict: verdict_for(images_per_sec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_thresholds() {
        assert_eq!(verdict_for(150.0), Verdict::Pass);
        assert_eq!(verdict_for(100.0), Verdict::Pass);
        assert_eq!(verdict_for(60.0), Verdict::Warn);
        assert_eq!(verdict_for(24.9), Verdict::Fail);
    }

    #[test]
    fn tiny_bench_runs() {
        let report = run_bench(&BenchConfig {
            images: 2,
            size: 32,
            workers: 2,
            ..Default::default()
        })
        .unwrap();
        assert!(report.images_per_sec > 0.0);
        assert!(report.total_events > 0);
    }
}
