//! WebAssembly entry points for the browser demo in `www/`.
//!
//! Images cross the boundary as tightly packed RGBA bytes, the layout of
//! `ImageData.data`. The alpha channel is passed through untouched.

use evsynth::eventgen::{synthesize_events, EventGenConfig, EventFrame};
use evsynth::flow::FlowConfig;
use evsynth::formats::render_events;
use evsynth::imaging::{apply_exposure, ExposureConfig, Image};
use evsynth::snn::{LeakMode, LifParams, LifState};
use wasm_bindgen::prelude::*;

fn rgba_to_image(rgba: &[u8], width: usize, height: usize) -> Result<(Image, Vec<u8>), String> {
    if width == 0 || height == 0 || rgba.len() != width * height * 4 {
        return Err(format!("expected {}x{} RGBA bytes, got {}", width, height, rgba.len()));
    }
    let mut rgb = Vec::with_capacity(width * height * 3);
    let mut alpha = Vec::with_capacity(width * height);
    for px in rgba.chunks_exact(4) {
        rgb.extend_from_slice(&px[..3]);
        alpha.push(px[3]);
    }
    let img = Image::from_u8(width, height, 3, &rgb).map_err(|e| e.to_string())?;
    Ok((img, alpha))
}

fn image_to_rgba(img: &Image, alpha: Option<&[u8]>) -> Vec<u8> {
    let rgb = img.to_rgb().to_u8();
    let mut out = Vec::with_capacity(rgb.len() / 3 * 4);
    for (i, px) in rgb.chunks_exact(3).enumerate() {
        out.extend_from_slice(px);
        out.push(alpha.map_or(255, |a| a[i]));
    }
    out
}

pub fn expose_impl(rgba: &[u8], width: usize, height: usize, alpha: f32) -> Result<Vec<u8>, String> {
    let cfg = ExposureConfig::new(alpha).map_err(|e| e.to_string())?;
    let (img, a) = rgba_to_image(rgba, width, height)?;
    let out = apply_exposure(&img, &cfg).map_err(|e| e.to_string())?;
    Ok(image_to_rgba(&out, Some(&a)))
}

pub fn events_impl(
    rgba: &[u8],
    width: usize,
    height: usize,
    cfg: &EventGenConfig,
) -> Result<EventFrame, String> {
    let (img, _) = rgba_to_image(rgba, width, height)?;
    synthesize_events(&img, cfg).map_err(|e| e.to_string())
}

/// Exposure-adjusted copy of an RGBA image.
#[wasm_bindgen]
pub fn expose(rgba: &[u8], width: usize, height: usize, alpha: f32) -> Result<Vec<u8>, JsValue> {
    expose_impl(rgba, width, height, alpha).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub struct EventView {
    width: usize,
    height: usize,
    on: u64,
    off: u64,
    rgba: Vec<u8>,
}

#[wasm_bindgen]
impl EventView {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    #[wasm_bindgen(getter)]
    pub fn on(&self) -> f64 {
        self.on as f64
    }

    #[wasm_bindgen(getter)]
    pub fn off(&self) -> f64 {
        self.off as f64
    }

    /// ON events red, OFF events blue, on white.
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }
}

/// Event frame for an RGBA image. `flow` is `"random"` or `"fixed"`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn events(
    rgba: &[u8],
    width: usize,
    height: usize,
    threshold: f32,
    flow: &str,
    theta: f64,
    seed: u64,
    cap: u16,
) -> Result<EventView, JsValue> {
    let flow = match flow {
        "random" => FlowConfig::random(seed),
        "fixed" => FlowConfig::fixed(theta),
        other => return Err(JsValue::from_str(&format!("unknown flow mode {other:?}"))),
    };
    let cfg = EventGenConfig {
        threshold_c: threshold,
        count_cap: cap,
        flow,
        ..Default::default()
    };
    let frame = events_impl(rgba, width, height, &cfg).map_err(|e| JsValue::from_str(&e))?;
    Ok(EventView {
        width,
        height,
        on: frame.total_on(),
        off: frame.total_off(),
        rgba: image_to_rgba(&render_events(&frame), None),
    })
}

/// Membrane potential and spikes of one neuron under constant input current.
pub fn lif_curve_impl(input: f32, p: &LifParams, steps: usize) -> Result<(Vec<f32>, Vec<f32>), String> {
    let mut state = LifState::zeros(1);
    let mut v = Vec::with_capacity(steps);
    let mut s = Vec::with_capacity(steps);
    for _ in 0..steps {
        let spike = state.step(&[input], p).map_err(|e| e.to_string())?;
        s.push(spike[0]);
        v.push(state.v[0]);
    }
    Ok((v, s))
}

/// Interleaved `[v0, s0, v1, s1, ...]` for `steps` updates.
#[wasm_bindgen]
pub fn lif_curve(
    input: f32,
    tau: f32,
    threshold: f32,
    reset: f32,
    steps: usize,
    paper_literal: bool,
) -> Result<Vec<f32>, JsValue> {
    let p = LifParams {
        tau,
        v_threshold: threshold,
        v_reset: reset,
        leak: if paper_literal { LeakMode::PaperLiteral } else { LeakMode::Decay },
    };
    let (v, s) = lif_curve_impl(input, &p, steps).map_err(|e| JsValue::from_str(&e))?;
    Ok(v.into_iter().zip(s).flat_map(|(a, b)| [a, b]).collect())
}
