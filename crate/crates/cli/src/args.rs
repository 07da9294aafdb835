use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "evsynth", version, about = "Synthesize exposure-shifted images and paired event frames")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file whose keys mirror long flags; flags on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Scale the HSV value channel of an image
    Expose(ExposeArgs),
    /// Synthesize one event frame from a still image
    Events(EventsArgs),
    /// Process a whole image directory into exposed images, event frames and a manifest
    Dataset(DatasetArgs),
    /// Run LIF neurons over a constant-coded event frame
    SnnDemo(SnnDemoArgs),
    /// Run the fusion invariant suite on seeded random inputs
    FusionCheck(FusionCheckArgs),
    /// Measure exposure plus event synthesis throughput
    Bench(BenchArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ExposeArgs {
    /// Input image (PNG or JPEG)
    pub input: PathBuf,
    /// Output PNG
    pub output: PathBuf,
    /// Exposure factor applied to V; <1 darkens, >1 brightens
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowArg {
    Random,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LumaArg {
    Rec601,
    HsvValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Evtf,
    Csv,
    Png,
}

impl Emit {
    pub fn extension(self) -> &'static str {
        match self {
            Emit::Evtf => "evtf",
            Emit::Csv => "csv",
            Emit::Png => "png",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Contrast threshold C on the [0,1] intensity scale
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub threshold: f32,
    /// Flow sampling: one random direction per pixel, or one global direction
    #[arg(long, value_enum, default_value_t = FlowArg::Random)]
    pub flow: FlowArg,
    /// Global flow angle in radians, used with --flow fixed
    #[arg(long, default_value_t = FRAC_PI_4, allow_negative_numbers = true)]
    pub theta: f64,
    /// Maximum events per pixel and polarity
    #[arg(long, default_value_t = 1)]
    pub cap: u16,
    /// Time step scaling the brightness change
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub dt: f32,
    /// Intensity used for gradients
    #[arg(long, value_enum, default_value_t = LumaArg::Rec601)]
    pub luma: LumaArg,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct EventsArgs {
    /// Input image (PNG or JPEG)
    pub input: PathBuf,
    /// Output path; its extension is replaced per emitted format
    pub output: PathBuf,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Output formats, comma separated
    #[arg(long, value_enum, value_delimiter = ',', default_value = "evtf")]
    pub emit: Vec<Emit>,
    /// Also write the sampled flow field as an HSV-coded PNG
    #[arg(long, value_name = "PNG")]
    pub dump_flow: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutArg {
    Voc,
    Coco,
    Flat,
}

#[derive(Debug, Args, Serialize)]
pub struct DatasetArgs {
    /// Dataset root
    #[arg(long)]
    pub input: PathBuf,
    /// Output root
    #[arg(long)]
    pub output: PathBuf,
    /// Directory layout of the input root
    #[arg(long, value_enum, default_value_t = LayoutArg::Flat)]
    pub layout: LayoutArg,
    /// Exposure factors, comma separated; `lo..hi` draws one factor per image
    #[arg(long, default_value = "1.0", allow_hyphen_values = true)]
    pub alphas: String,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Worker threads
    #[arg(long, env = "EVCAM_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Square side every image is resized to; 0 keeps the source size
    #[arg(long, default_value_t = 320)]
    pub size: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SnnDemoArgs {
    /// EVTF event frame
    pub input: PathBuf,
    /// Time steps of the constant coding
    #[arg(long = "t", default_value_t = 4)]
    pub time_steps: usize,
    /// Membrane time constant
    #[arg(long, default_value_t = 2.0)]
    pub tau: f32,
    /// Firing threshold
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub threshold: f32,
    /// Potential after a spike
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub reset: f32,
    /// Use the growing leak factor e^(1/tau) instead of e^(-1/tau)
    #[arg(long)]
    pub paper_literal: bool,
    /// Write the statistics here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Write a spike raster PNG, one panel per time step
    #[arg(long, value_name = "PNG")]
    pub raster: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FusionCheckArgs {
    /// Feature channels
    #[arg(long = "c", default_value_t = 8)]
    pub channels: usize,
    /// Spike time steps
    #[arg(long = "t", default_value_t = 4)]
    pub time_steps: usize,
    /// Feature map height and width
    #[arg(long, default_value_t = 16)]
    pub hw: usize,
    /// Random trials
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Probability of a 1 in the random spike input
    #[arg(long, default_value_t = 0.3)]
    pub spike_rate: f64,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Synthetic images per run
    #[arg(long, default_value_t = 64)]
    pub images: usize,
    /// Image side length
    #[arg(long, default_value_t = 320)]
    pub size: usize,
    /// Worker threads
    #[arg(long, env = "EVCAM_WORKERS", default_value_t = 8)]
    pub workers: usize,
    /// Exposure factor
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f32,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exit 1 when throughput is below target, not only below the floor
    #[arg(long)]
    pub strict: bool,
}
