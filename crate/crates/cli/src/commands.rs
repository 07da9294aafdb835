use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use evsynth::eventgen::{constant_code, synthesize_with_flow, EventGenConfig};
use evsynth::flow::{generate_flow, FlowConfig};
use evsynth::formats::{read_evtf, render_events, render_spike_raster, write_event_csv, write_evtf};
use evsynth::fusion::check::{run_invariant_suite, FusionCheckConfig};
use evsynth::imaging::{apply_exposure, ExposureConfig, Image, LumaMode};
use evsynth::pipeline::bench::{run_bench, BenchConfig, Verdict};
use evsynth::pipeline::{parse_alpha_list, run_job, DatasetJob, Layout};
use evsynth::snn::{lif_run_traced, LeakMode, LifParams};
use evsynth::Error;

use crate::args::*;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FATAL: u8 = 1;
pub const EXIT_PARTIAL: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Fatal(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Fatal(_) => EXIT_FATAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Fatal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Fatal(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Fatal(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn bad_flag(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for --{flag}: {msg}"))
}

fn log_config<T: Serialize>(what: &str, value: &T) {
    match serde_json::to_string(value) {
        Ok(s) => info!("{what}: {s}"),
        Err(e) => warn!("cannot serialize {what}: {e}"),
    }
}

fn write_json<T: Serialize>(value: &T, dest: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Fatal(e.to_string()))?;
    match dest {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

pub fn run(cmd: &Command) -> Outcome {
    log_config("arguments", cmd);
    match cmd {
        Command::Expose(a) => expose(a),
        Command::Events(a) => events(a),
        Command::Dataset(a) => dataset(a),
        Command::SnnDemo(a) => snn_demo(a),
        Command::FusionCheck(a) => fusion_check(a),
        Command::Bench(a) => bench(a),
    }
}

fn expose(a: &ExposeArgs) -> Outcome {
    let cfg = ExposureConfig::new(a.alpha).map_err(|e| bad_flag("alpha", e))?;
    let img = Image::load(&a.input)?;
    apply_exposure(&img.to_rgb(), &cfg)?.save_png(&a.output)?;
    info!("wrote {}", a.output.display());
    Ok(EXIT_OK)
}

fn event_config(s: &SynthArgs) -> Result<EventGenConfig, Failure> {
    if !(s.threshold > 0.0 && s.threshold.is_finite()) {
        return Err(bad_flag("threshold", format!("{} is not a positive number", s.threshold)));
    }
    if !(s.dt > 0.0 && s.dt.is_finite()) {
        return Err(bad_flag("dt", format!("{} is not a positive number", s.dt)));
    }
    if s.cap == 0 {
        return Err(bad_flag("cap", "must be at least 1"));
    }
    let flow = match s.flow {
        FlowArg::Random => FlowConfig::random(s.seed),
        FlowArg::Fixed => {
            if !(-PI..=PI).contains(&s.theta) {
                return Err(bad_flag("theta", format!("{} is outside [-pi, pi]", s.theta)));
            }
            FlowConfig { seed: s.seed, ..FlowConfig::fixed(s.theta) }
        }
    };
    let cfg = EventGenConfig {
        threshold_c: s.threshold,
        dt: s.dt,
        count_cap: s.cap,
        flow,
        luma: match s.luma {
            LumaArg::Rec601 => LumaMode::Rec601,
            LumaArg::HsvValue => LumaMode::HsvValue,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn events(a: &EventsArgs) -> Outcome {
    let cfg = event_config(&a.synth)?;
    log_config("event config", &cfg);
    let img = Image::load(&a.input)?;
    let flow = generate_flow(img.width(), img.height(), &cfg.flow)?;
    let frame = synthesize_with_flow(&img, &flow, &cfg)?;
    info!(
        "{}x{}: {} ON, {} OFF events",
        frame.width(),
        frame.height(),
        frame.total_on(),
        frame.total_off()
    );

    let mut emitted = Vec::new();
    for &fmt in &a.emit {
        if emitted.contains(&fmt) {
            continue;
        }
        emitted.push(fmt);
        let path = a.output.with_extension(fmt.extension());
        match fmt {
            Emit::Evtf => write_evtf(&path, &frame)?,
            Emit::Csv => {
                let mut w = BufWriter::new(File::create(&path)?);
                write_event_csv(&frame, &mut w)?;
                w.flush()?;
            }
            Emit::Png => render_events(&frame).save_png(&path)?,
        }
        info!("wrote {}", path.display());
    }
    if let Some(p) = &a.dump_flow {
        flow.to_hsv_image().save_png(p)?;
        info!("wrote {}", p.display());
    }
    Ok(EXIT_OK)
}

fn dataset(a: &DatasetArgs) -> Outcome {
    let alphas = parse_alpha_list(&a.alphas).map_err(|e| bad_flag("alphas", e))?;
    if a.workers == 0 {
        return Err(bad_flag("workers", "must be at least 1"));
    }
    let job = DatasetJob {
        layout: match a.layout {
            LayoutArg::Voc => Layout::Voc,
            LayoutArg::Coco => Layout::Coco,
            LayoutArg::Flat => Layout::Flat,
        },
        alphas,
        event_cfg: event_config(&a.synth)?,
        global_seed: a.synth.seed,
        workers: a.workers,
        resize: (a.size > 0).then_some((a.size, a.size)),
        ..DatasetJob::new(&a.input, &a.output)
    };
    job.validate().map_err(|e| bad_flag("alphas", e))?;
    log_config("job", &job);

    let report = run_job(&job)?;
    let failed = report.failed();
    for e in report.entries.iter().filter(|e| e.error.is_some()) {
        warn!("{} (alpha {}): {}", e.src, e.alpha, e.error.as_deref().unwrap_or_default());
    }
    info!(
        "{} entries, {failed} failed, manifest {}",
        report.entries.len(),
        report.manifest_path.display()
    );
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

#[derive(Serialize)]
struct StepStats {
    t: usize,
    on: usize,
    off: usize,
    total: usize,
    rate: f64,
}

fn snn_demo(a: &SnnDemoArgs) -> Outcome {
    if a.time_steps == 0 {
        return Err(bad_flag("t", "must be at least 1"));
    }
    let params = LifParams {
        tau: a.tau,
        v_threshold: a.threshold,
        v_reset: a.reset,
        leak: if a.paper_literal { LeakMode::PaperLiteral } else { LeakMode::Decay },
    };
    params.validate()?;
    log_config("lif params", &params);

    let frame = read_evtf(&a.input)?;
    let input = constant_code(&frame, a.time_steps)?;
    let trace = lif_run_traced(&input, &params)?;
    let plane = frame.width() * frame.height();
    let steps: Vec<StepStats> = (0..a.time_steps)
        .map(|t| {
            let s = trace.spikes.step(t);
            let on = s.data()[..plane].iter().filter(|&&v| v == 1.0).count();
            let off = s.data()[plane..].iter().filter(|&&v| v == 1.0).count();
            StepStats {
                t,
                on,
                off,
                total: on + off,
                rate: (on + off) as f64 / (2 * plane).max(1) as f64,
            }
        })
        .collect();
    let report = json!({
        "input": a.input,
        "width": frame.width(),
        "height": frame.height(),
        "input_events_on": frame.total_on(),
        "input_events_off": frame.total_off(),
        "input_spikes_per_step": input.step(0).data().iter().filter(|&&v| v == 1.0).count(),
        "time_steps": a.time_steps,
        "params": params,
        "leak_factor": params.leak_factor(),
        "steps": steps,
        "total_spikes": trace.spikes.count_ones(),
    });
    write_json(&report, a.json.as_deref())?;
    if let Some(p) = &a.raster {
        render_spike_raster(&trace.spikes).save_png(p)?;
        info!("wrote {}", p.display());
    }
    Ok(EXIT_OK)
}

fn fusion_check(a: &FusionCheckArgs) -> Outcome {
    let cfg = FusionCheckConfig {
        channels: a.channels,
        time_steps: a.time_steps,
        height: a.hw,
        width: a.hw,
        trials: a.trials,
        seed: a.seed,
        spike_rate: a.spike_rate,
    };
    log_config("fusion check", &cfg);
    let report = run_invariant_suite(&cfg)?;
    write_json(&report, a.json.as_deref())?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        warn!("{} failed: worst {} vs tolerance {}", c.name, c.worst, c.tolerance);
    }
    Ok(if report.all_passed { EXIT_OK } else { EXIT_FATAL })
}

fn bench(a: &BenchArgs) -> Outcome {
    if a.workers == 0 {
        return Err(bad_flag("workers", "must be at least 1"));
    }
    let cfg = BenchConfig {
        images: a.images,
        size: a.size,
        workers: a.workers,
        alpha: a.alpha,
        seed: a.seed,
        ..Default::default()
    };
    log_config("bench", &cfg);
    let report = run_bench(&cfg)?;
    write_json(&report, None)?;
    match report.verdict {
        Verdict::Pass => Ok(EXIT_OK),
        Verdict::Warn => {
            warn!("{:.1} images/s is below the target", report.images_per_sec);
            Ok(if a.strict { EXIT_FATAL } else { EXIT_OK })
        }
        Verdict::Fail => Err(Failure::Fatal(format!(
            "{:.1} images/s is below the hard floor",
            report.images_per_sec
        ))),
    }
}
