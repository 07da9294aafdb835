//! Discrete-time leaky integrate-and-fire neurons.
//!
//! ```text
//! U[n] = λ V[n-1] + I[n]
//! S[n] = 1 if U[n] >= threshold else 0
//! V[n] = U[n] (1 - S[n]) + V_reset S[n]
//! ```
//!
//! `λ = exp(-1/τ)` by default. [`LeakMode::PaperLiteral`] selects
//! `exp(+1/τ)`, which amplifies the membrane potential instead of leaking it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventgen::SpikeTensor;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakMode {
    /// `λ = exp(-1/τ)`
    #[default]
    Decay,
    /// `λ = exp(+1/τ)`
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    pub tau: f32,
    pub v_threshold: f32,
    pub v_reset: f32,
    #[serde(default)]
    pub leak: LeakMode,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            tau: 2.0,
            v_threshold: 1.0,
            v_reset: 0.0,
            leak: LeakMode::Decay,
        }
    }
}

impl LifParams {
    /// Time steps used when driving the network with constant-coded frames.
    pub const DEFAULT_TIME_STEPS: usize = 4;

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.v_reset < self.v_threshold) {
            return Err(Error::config(format!(
                "reset potential {} must be below threshold {}",
                self.v_reset, self.v_threshold
            )));
        }
        Ok(())
    }

    pub fn leak_factor(&self) -> f32 {
        match self.leak {
            LeakMode::Decay => (-1.0 / self.tau).exp(),
            LeakMode::PaperLiteral => (1.0 / self.tau).exp(),
        }
    }
}

/// Post-reset membrane potential of every neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    pub v: Vec<f32>,
}

impl LifState {
    pub fn zeros(neurons: usize) -> Self {
        Self { v: vec![0.0; neurons] }
    }

    /// Advances one step in place and returns the binary spike field.
    pub fn step(&mut self, input: &[f32], p: &LifParams) -> Result<Vec<f32>> {
        p.validate()?;
        if input.len() != self.v.len() {
            return Err(Error::input(format!(
                "input has {} neurons, state has {}",
                input.len(),
                self.v.len()
            )));
        }
        let lambda = p.leak_factor();
        Ok(self
            .v
            .iter_mut()
            .zip(input)
            .map(|(v, &i)| {
                let u = lambda * *v + i;
                if u >= p.v_threshold {
                    *v = p.v_reset;
                    1.0
                } else {
                    *v = u;
                    0.0
                }
            })
            .collect())
    }
}

pub fn lif_step(state: &LifState, input: &[f32], p: &LifParams) -> Result<(LifState, Vec<f32>)> {
    let mut next = state.clone();
    let spikes = next.step(input, p)?;
    Ok((next, spikes))
}

/// Output spikes plus the post-step membrane potential of every step.
#[derive(Debug, Clone)]
pub struct LifTrace {
    pub spikes: SpikeTensor,
    /// One `(C, H, W)` tensor per time step.
    pub potentials: Vec<Tensor>,
}

/// Runs every neuron of a `(C, T, H, W)` input over the time axis from rest.
pub fn lif_run(spikes_in: &SpikeTensor, p: &LifParams) -> Result<SpikeTensor> {
    lif_run_traced(spikes_in, p).map(|t| t.spikes)
}

pub fn lif_run_traced(spikes_in: &SpikeTensor, p: &LifParams) -> Result<LifTrace> {
    p.validate()?;
    let [c, steps, h, w] = spikes_in.shape();
    let plane = h * w;
    let mut state = LifState::zeros(c * plane);
    let mut out = vec![0.0f32; c * steps * plane];
    let mut potentials = Vec::with_capacity(steps);
    for t in 0..steps {
        let input = spikes_in.step(t);
        let fired = state.step(input.data(), p)?;
        for ch in 0..c {
            let dst = (ch * steps + t) * plane;
            out[dst..dst + plane].copy_from_slice(&fired[ch * plane..(ch + 1) * plane]);
        }
        potentials.push(Tensor::new(vec![c, h, w], state.v.clone())?);
    }
    Ok(LifTrace {
        spikes: SpikeTensor::new(Tensor::new(vec![c, steps, h, w], out)?)?,
        potentials,
    })
}
