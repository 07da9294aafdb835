//! Dataset generation: discover images, expose them at one or more factors,
//! synthesize the paired event frames and record everything in a manifest.
//!
//! Every random choice is keyed by [`per_image_seed`], so outputs do not
//! depend on worker count, processing order, or which other images are in
//! the job.

pub mod bench;
mod discover;
mod manifest;

pub use discover::{discover, is_image_path, Layout};
pub use manifest::{read_manifest, write_manifest, EntryStatus, ManifestEntry, MANIFEST_FILE};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eventgen::{synthesize_events, EventFrame, EventGenConfig};
use crate::flow::FlowMode;
use crate::formats::encode_evtf;
use crate::imaging::{apply_exposure, resize, ExposureConfig, Image};

/// Side length used when no explicit output size is requested.
pub const DEFAULT_SIZE: usize = 320;

/// One requested exposure condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlphaSpec {
    Fixed { alpha: f32 },
    /// Uniform draw from `[lo, hi)` per image.
    Range { lo: f32, hi: f32 },
}

impl AlphaSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f32| v > 0.0 && v.is_finite();
        match *self {
            AlphaSpec::Fixed { alpha } if !positive(alpha) => {
                Err(Error::config(format!("alpha {alpha} must be positive")))
            }
            AlphaSpec::Range { lo, hi } if !positive(lo) || !positive(hi) || lo >= hi => {
                Err(Error::config(format!("alpha range {lo}..{hi} needs 0 < lo < hi")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Fixed { alpha } => write!(f, "{alpha}"),
            AlphaSpec::Range { lo, hi } => write!(f, "{lo}..{hi}"),
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;

    /// `"0.2"` or `"0.2..5"`.
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f32>()
                .map_err(|_| Error::config(format!("cannot parse alpha {t:?}")))
        };
        let spec = match s.split_once("..") {
            Some((lo, hi)) => AlphaSpec::Range {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            None => AlphaSpec::Fixed { alpha: num(s)? },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a comma-separated alpha list such as `0.2,5.0,0.2..5`.
pub fn parse_alpha_list(s: &str) -> Result<Vec<AlphaSpec>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetJob {
    pub input_root: PathBuf,
    pub layout: Layout,
    pub alphas: Vec<AlphaSpec>,
    pub event_cfg: EventGenConfig,
    pub global_seed: u64,
    pub output_root: PathBuf,
    pub workers: usize,
    /// `(width, height)` every image is resized to before exposure; `None` keeps the source size.
    pub resize: Option<(usize, usize)>,
}

impl DatasetJob {
    pub fn new(input_root: impl Into<PathBuf>, output_root: impl Into<PathBuf>) -> Self {
        Self {
            input_root: input_root.into(),
            layout: Layout::Flat,
            alphas: vec![AlphaSpec::Fixed { alpha: 1.0 }],
            event_cfg: EventGenConfig::default(),
            global_seed: 0,
            output_root: output_root.into(),
            workers: 1,
            resize: Some((DEFAULT_SIZE, DEFAULT_SIZE)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::config("at least one alpha is required"));
        }
        for (i, a) in self.alphas.iter().enumerate() {
            a.validate()?;
            if self.alphas[..i].contains(a) {
                return Err(Error::config(format!("alpha {a} listed twice")));
            }
        }
        if self.workers == 0 {
            return Err(Error::config("workers must be at least 1"));
        }
        if let Some((w, h)) = self.resize {
            if w == 0 || h == 0 {
                return Err(Error::config(format!("resize target {w}x{h} must be positive")));
            }
        }
        self.event_cfg.validate()
    }
}

/// Stable 64-bit seed for one image, keyed by the global seed and the image's
/// path relative to the input root.
pub fn per_image_seed(global_seed: u64, rel_path: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"evsynth/image-seed\0");
    h.update(global_seed.to_le_bytes());
    h.update(rel_path.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Exposure factor for the `index`-th alpha spec of an image.
pub fn resolve_alpha(spec: &AlphaSpec, image_seed: u64, index: usize) -> f32 {
    match *spec {
        AlphaSpec::Fixed { alpha } => alpha,
        AlphaSpec::Range { lo, hi } => {
            let mut rng = ChaCha8Rng::seed_from_u64(image_seed);
            rng.set_stream(index as u64);
            rng.random_range(lo..hi)
        }
    }
}

/// 64-bit content hash (truncated SHA-256) as 16 hex digits.
pub fn content_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Result of [`run_job`].
#[derive(Debug, Clone, PartialEq)]
pub struct JobReport {
    pub entries: Vec<ManifestEntry>,
    pub manifest_path: PathBuf,
}

impl JobReport {
    pub fn failed(&self) -> usize {
        self.entries.iter().filter(|e| e.status == EntryStatus::Failed).count()
    }
}

fn rel_string(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Output path `<dir>/<stem>_a<alpha>.<ext>` relative to the output root.
fn output_path(rel: &Path, alpha: f32, ext: &str) -> PathBuf {
    let stem = rel.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let name = format!("{stem}_a{alpha}.{ext}");
    match rel.parent() {
        Some(p) => p.join(name),
        None => PathBuf::from(name),
    }
}

/// Exposure plus event synthesis for one already-loaded image.
pub fn process_image(img: &Image, alpha: f32, cfg: &EventGenConfig, seed: u64) -> Result<(Image, EventFrame)> {
    let exposed = apply_exposure(&img.to_rgb(), &ExposureConfig::new(alpha)?)?;
    let mut cfg = *cfg;
    cfg.flow.seed = seed;
    let events = synthesize_events(&exposed, &cfg)?;
    Ok((exposed, events))
}

struct Task {
    rel: PathBuf,
    src: String,
    seed: u64,
}

fn run_image(job: &DatasetJob, task: &Task) -> Vec<ManifestEntry> {
    let cfg = &job.event_cfg;
    let base = |alpha: f32| ManifestEntry {
        src: task.src.clone(),
        alpha,
        seed: task.seed,
        threshold_c: cfg.threshold_c,
        dt: cfg.dt,
        count_cap: cfg.count_cap,
        flow_mode: cfg.flow.mode.as_str().to_string(),
        theta: (cfg.flow.mode == FlowMode::Fixed).then_some(cfg.flow.theta),
        out_exposed: None,
        out_event: None,
        checksum: None,
        events_on: 0,
        events_off: 0,
        status: EntryStatus::Ok,
        error: None,
    };
    let alphas: Vec<f32> = job
        .alphas
        .iter()
        .enumerate()
        .map(|(i, spec)| resolve_alpha(spec, task.seed, i))
        .collect();

    let loaded = Image::load(job.input_root.join(&task.rel)).and_then(|img| match job.resize {
        Some((w, h)) => resize(&img, w, h),
        None => Ok(img),
    });
    let img = match loaded {
        Ok(img) => img,
        Err(e) => {
            return alphas
                .into_iter()
                .map(|a| ManifestEntry {
                    status: EntryStatus::Failed,
                    error: Some(e.to_string()),
                    ..base(a)
                })
                .collect()
        }
    };

    alphas
        .into_iter()
        .map(|alpha| {
            let attempt = || -> Result<ManifestEntry> {
                let (exposed, events) = process_image(&img, alpha, cfg, task.seed)?;
                let png_rel = output_path(&task.rel, alpha, "png");
                let evtf_rel = output_path(&task.rel, alpha, "evtf");
                let evtf = encode_evtf(&events);
                if let Some(dir) = job.output_root.join(&png_rel).parent() {
                    std::fs::create_dir_all(dir)?;
                }
                exposed.save_png(job.output_root.join(&png_rel))?;
                std::fs::write(job.output_root.join(&evtf_rel), &evtf)?;
                Ok(ManifestEntry {
                    out_exposed: Some(rel_string(&png_rel)),
                    out_event: Some(rel_string(&evtf_rel)),
                    checksum: Some(content_hash(&evtf)),
                    events_on: events.total_on(),
                    events_off: events.total_off(),
                    ..base(alpha)
                })
            };
            attempt().unwrap_or_else(|e| ManifestEntry {
                status: EntryStatus::Failed,
                error: Some(e.to_string()),
                ..base(alpha)
            })
        })
        .collect()
}

/// Runs a dataset job end to end and writes `manifest.jsonl` into the output root.
///
/// Unreadable images become failed entries. Failing to create the output root
/// or to write the manifest aborts the job.
pub fn run_job(job: &DatasetJob) -> Result<JobReport> {
    job.validate()?;
    let images = discover(&job.input_root, job.layout)?;
    std::fs::create_dir_all(&job.output_root)?;

    let tasks: Vec<Task> = images
        .into_iter()
        .map(|rel| {
            let src = rel_string(&rel);
            let seed = per_image_seed(job.global_seed, &src);
            Task { rel, src, seed }
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {} workers: {e}", job.workers)))?;
    let mut entries: Vec<ManifestEntry> =
        pool.install(|| tasks.par_iter().flat_map_iter(|t| run_image(job, t)).collect());
    // Already ordered by (src, alpha index); sort anyway so the manifest is
    // order-normalised regardless of how tasks were scheduled.
    entries.sort_by(|a, b| a.src.cmp(&b.src));

    let manifest_path = job.output_root.join(MANIFEST_FILE);
    write_manifest(&manifest_path, &entries)?;
    log::info!(
        "dataset job wrote {} entries ({} failed) to {}",
        entries.len(),
        entries.iter().filter(|e| e.status == EntryStatus::Failed).count(),
        manifest_path.display()
    );
    Ok(JobReport {
        entries,
        manifest_path,
    })
}
