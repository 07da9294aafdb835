//! Forward-pass reference for RGB/event feature fusion.
//!
//! * ETA: max and mean over time of a spiking feature volume, then
//!   `sigmoid(BN(conv1x1([max, avg])))`.
//! * CMA: softmax spatial attention pools each channel to a descriptor, a
//!   1×1 bottleneck turns the descriptor into a sigmoid channel gate.
//! * SCF: each modality is gated by the other's aligned features,
//!   `fusion_r = σ(F_ec)·F_r + F_r` and `fusion_e = σ(F_rc)·F_e + F_e`.
//! * SMF: 1×1 branch convs, elementwise max and mean of the two branches,
//!   concatenated and refined by a 3×3 conv.

pub mod check;
mod weights;

pub use weights::{CmaWeights, FusionWeights, Sharing};

use crate::error::{Error, Result};
use crate::eventgen::SpikeTensor;
use crate::tensor::{batchnorm_infer, conv2d, ReduceMode, Tensor};

#[derive(Debug, Clone)]
pub struct EtaTrace {
    /// `(C, H, W)` maximum over time.
    pub f_max: Tensor,
    /// `(C, H, W)` mean over time.
    pub f_avg: Tensor,
    pub out: Tensor,
}

pub fn eta(f_e: &SpikeTensor, w: &FusionWeights) -> Result<Tensor> {
    eta_traced(f_e, w).map(|t| t.out)
}

pub fn eta_traced(f_e: &SpikeTensor, w: &FusionWeights) -> Result<EtaTrace> {
    if f_e.channels() != w.channels() {
        return Err(Error::input(format!(
            "event features have {} channels, weights expect {}",
            f_e.channels(),
            w.channels()
        )));
    }
    let x = f_e.as_tensor();
    let f_max = x.reduce(1, ReduceMode::Max)?;
    let f_avg = x.reduce(1, ReduceMode::Avg)?;
    let cat = Tensor::concat(&[&f_max, &f_avg], 0)?;
    let out = batchnorm_infer(&conv2d(&cat, &w.eta_conv)?, &w.eta_bn)?.sigmoid();
    Ok(EtaTrace { f_max, f_avg, out })
}

#[derive(Debug, Clone)]
pub struct CmaTrace {
    /// `(H·W)` softmax spatial attention.
    pub attention: Vec<f32>,
    /// `(C)` attention-weighted spatial pooling of the input.
    pub pooled: Vec<f32>,
    /// `(C)` sigmoid channel gate.
    pub gate: Vec<f32>,
    /// `(C, H, W)` gated features.
    pub out: Tensor,
}

pub fn cma(f: &Tensor, w: &CmaWeights) -> Result<Tensor> {
    cma_traced(f, w).map(|t| t.out)
}

pub fn cma_traced(f: &Tensor, w: &CmaWeights) -> Result<CmaTrace> {
    let &[c, h, wd] = f.shape() else {
        return Err(Error::input(format!("CMA expects (C, H, W), got {:?}", f.shape())));
    };
    if c != w.channels() {
        return Err(Error::input(format!("CMA weights for {} channels, input has {c}", w.channels())));
    }
    let hw = h * wd;
    let logits = conv2d(f, &w.spatial)?.reshape(&[hw])?;
    let attention = logits.softmax_over(0)?.into_data();

    // (1, C, HW) × (1, HW, 1) -> (1, C, 1)
    let pooled: Vec<f32> = f
        .data()
        .chunks_exact(hw)
        .map(|plane| plane.iter().zip(&attention).map(|(x, a)| x * a).sum())
        .collect();

    let descriptor = Tensor::new(vec![c, 1, 1], pooled.clone())?;
    let squeezed = conv2d(&descriptor, &w.squeeze)?;
    let gate = conv2d(&squeezed, &w.excite)?.sigmoid().into_data();
    let out = f.mul_channels(&gate)?;
    Ok(CmaTrace {
        attention,
        pooled,
        gate,
        out,
    })
}

/// `σ(F_ec)·F_r + F_r`
pub fn basic_fusion(f_ec: &Tensor, f_r: &Tensor) -> Result<Tensor> {
    f_ec.sigmoid().mul(f_r)?.add(f_r)
}

#[derive(Debug, Clone)]
pub struct ScfTrace {
    pub event_cma: CmaTrace,
    pub rgb_cma: CmaTrace,
    /// `σ(F_ec)·F_r + F_r`
    pub fusion_rgb: Tensor,
    /// `σ(F_rc)·F_e + F_e`
    pub fusion_event: Tensor,
    /// Sum of the two gated halves.
    pub fusion_sum: Tensor,
    pub branch_rgb: Tensor,
    pub branch_event: Tensor,
    pub f_max: Tensor,
    pub f_avg: Tensor,
    pub out: Tensor,
}

/// Symmetric fusion of RGB features `f_r` and (temporally refined) event
/// features `f_e`, both `(C, H, W)`.
pub fn scf(f_r: &Tensor, f_e: &Tensor, w: &FusionWeights) -> Result<Tensor> {
    scf_traced(f_r, f_e, w).map(|t| t.out)
}

pub fn scf_traced(f_r: &Tensor, f_e: &Tensor, w: &FusionWeights) -> Result<ScfTrace> {
    if f_r.shape() != f_e.shape() {
        return Err(Error::input(format!(
            "RGB features {:?} and event features {:?} differ in shape",
            f_r.shape(),
            f_e.shape()
        )));
    }
    let event_cma = cma_traced(f_e, w.cma_event())?;
    let rgb_cma = cma_traced(f_r, w.cma_rgb())?;
    let fusion_rgb = basic_fusion(&event_cma.out, f_r)?;
    let fusion_event = basic_fusion(&rgb_cma.out, f_e)?;
    let fusion_sum = fusion_rgb.add(&fusion_event)?;
    let branch_rgb = conv2d(&fusion_rgb, w.branch_rgb())?;
    let branch_event = conv2d(&fusion_event, w.branch_event())?;
    let f_max = branch_rgb.maximum(&branch_event)?;
    let f_avg = branch_rgb.mean_with(&branch_event)?;
    let out = conv2d(&Tensor::concat(&[&f_max, &f_avg], 0)?, &w.out_conv)?;
    Ok(ScfTrace {
        event_cma,
        rgb_cma,
        fusion_rgb,
        fusion_event,
        fusion_sum,
        branch_rgb,
        branch_event,
        f_max,
        f_avg,
        out,
    })
}

/// ETA on the spiking event features followed by [`scf`].
pub fn sref(f_r: &Tensor, f_e: &SpikeTensor, w: &FusionWeights) -> Result<Tensor> {
    scf(f_r, &eta(f_e, w)?, w)
}
