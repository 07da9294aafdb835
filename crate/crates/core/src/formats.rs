//! On-disk representations of event frames.
//!
//! EVTF layout, all integers little-endian:
//!
//! ```text
//! magic    b"EVTF"
//! version  u8   (= 1)
//! dtype    u8   (0 = u8 counts, 1 = u16 counts)
//! channels u16  (= 2: ON, OFF)
//! height   u32
//! width    u32
//! counts   channel-major, row-major
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::eventgen::{EventFrame, SpikeTensor};
use crate::imaging::Image;

pub const EVTF_MAGIC: &[u8; 4] = b"EVTF";
pub const EVTF_VERSION: u8 = 1;
pub const EVTF_HEADER_LEN: usize = 16;

const DTYPE_U8: u8 = 0;
const DTYPE_U16: u8 = 1;

/// Serialises a frame, using 8-bit counts whenever every count fits.
pub fn encode_evtf(frame: &EventFrame) -> Vec<u8> {
    let narrow = frame.max_count() <= u8::MAX as u16;
    let n = frame.width() * frame.height();
    let mut buf = Vec::with_capacity(EVTF_HEADER_LEN + 2 * n * if narrow { 1 } else { 2 });
    buf.extend_from_slice(EVTF_MAGIC);
    buf.push(EVTF_VERSION);
    buf.push(if narrow { DTYPE_U8 } else { DTYPE_U16 });
    buf.extend_from_slice(&2u16.to_le_bytes());
    buf.extend_from_slice(&(frame.height() as u32).to_le_bytes());
    buf.extend_from_slice(&(frame.width() as u32).to_le_bytes());
    for plane in [frame.on(), frame.off()] {
        if narrow {
            buf.extend(plane.iter().map(|&v| v as u8));
        } else {
            buf.extend(plane.iter().flat_map(|v| v.to_le_bytes()));
        }
    }
    buf
}

pub fn decode_evtf(bytes: &[u8]) -> Result<EventFrame> {
    let err = |msg: String| Error::format("EVTF", msg);
    if bytes.len() < EVTF_HEADER_LEN {
        return Err(err(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != EVTF_MAGIC {
        return Err(err("bad magic".into()));
    }
    if bytes[4] != EVTF_VERSION {
        return Err(err(format!("unsupported version {}", bytes[4])));
    }
    let dtype = bytes[5];
    let channels = u16::from_le_bytes([bytes[6], bytes[7]]);
    if channels != 2 {
        return Err(err(format!("expected 2 channels, found {channels}")));
    }
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| err("dimensions overflow".into()))?;
    let payload = &bytes[EVTF_HEADER_LEN..];
    let item = match dtype {
        DTYPE_U8 => 1,
        DTYPE_U16 => 2,
        other => return Err(err(format!("unknown dtype {other}"))),
    };
    if payload.len() != 2 * n * item {
        return Err(err(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            2 * n * item
        )));
    }
    let counts: Vec<u16> = if item == 1 {
        payload.iter().map(|&b| b as u16).collect()
    } else {
        payload
            .chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .collect()
    };
    let (on, off) = counts.split_at(n);
    EventFrame::new(width, height, on.to_vec(), off.to_vec())
}

pub fn write_evtf(path: impl AsRef<Path>, frame: &EventFrame) -> Result<()> {
    std::fs::write(path, encode_evtf(frame))?;
    Ok(())
}

pub fn read_evtf(path: impl AsRef<Path>) -> Result<EventFrame> {
    decode_evtf(&std::fs::read(path)?)
}

/// One CSV row per event (`x,y,polarity`, polarity `1` or `-1`), counts expanded.
pub fn write_event_csv<W: Write>(frame: &EventFrame, mut out: W) -> Result<()> {
    writeln!(out, "x,y,polarity")?;
    let w = frame.width();
    for (i, (&on, &off)) in frame.on().iter().zip(frame.off()).enumerate() {
        let (x, y) = (i % w, i / w);
        for _ in 0..on {
            writeln!(out, "{x},{y},1")?;
        }
        for _ in 0..off {
            writeln!(out, "{x},{y},-1")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses the CSV written by [`write_event_csv`].
pub fn read_event_csv<R: BufRead>(input: R) -> Result<Vec<(u32, u32, i8)>> {
    let err = |msg: String| Error::format("event CSV", msg);
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == "x,y,polarity" => {}
        other => return Err(err(format!("bad header {other:?}"))),
    }
    let mut events = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = || parts.next().ok_or_else(|| err(format!("line {}: too few fields", n + 2)));
        let x = next()?.parse().map_err(|e| err(format!("line {}: {e}", n + 2)))?;
        let y = next()?.parse().map_err(|e| err(format!("line {}: {e}", n + 2)))?;
        let p: i8 = next()?.trim_start_matches('+').parse().map_err(|e| err(format!("line {}: {e}", n + 2)))?;
        if p != 1 && p != -1 {
            return Err(err(format!("line {}: polarity {p}", n + 2)));
        }
        events.push((x, y, p));
    }
    Ok(events)
}

const ON_RGB: [f32; 3] = [1.0, 0.0, 0.0];
const OFF_RGB: [f32; 3] = [0.0, 0.0, 1.0];
const BACKGROUND: [f32; 3] = [1.0, 1.0, 1.0];

/// ON pixels red, OFF pixels blue, everything else white.
pub fn render_events(frame: &EventFrame) -> Image {
    let data = frame
        .on()
        .iter()
        .zip(frame.off())
        .flat_map(|(&on, &off)| match (on > 0, off > 0) {
            (true, _) => ON_RGB,
            (_, true) => OFF_RGB,
            _ => BACKGROUND,
        })
        .collect();
    Image::from_parts_unchecked(frame.width(), frame.height(), 3, data)
}

/// Time steps side by side, one-pixel gray gutter between panels. Channel 0 is
/// drawn red, channel 1 blue.
pub fn render_spike_raster(spikes: &SpikeTensor) -> Image {
    let [c, steps, h, w] = spikes.shape();
    let gutter = 1;
    let width = steps * w + (steps - 1) * gutter;
    let mut data = vec![0.5f32; width * h * 3];
    let src = spikes.as_tensor().data();
    for t in 0..steps {
        for y in 0..h {
            for x in 0..w {
                let at = |ch: usize| ch < c && src[((ch * steps + t) * h + y) * w + x] == 1.0;
                let rgb = if at(0) {
                    ON_RGB
                } else if at(1) {
                    OFF_RGB
                } else {
                    BACKGROUND
                };
                let px = t * (w + gutter) + x;
                data[(y * width + px) * 3..][..3].copy_from_slice(&rgb);
            }
        }
    }
    Image::from_parts_unchecked(width, h, 3, data)
}
