use super::Tensor;
use crate::error::{Error, Result};

/// Inference-mode batch normalisation parameters, one entry per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormSpec {
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
    pub running_mean: Vec<f32>,
    pub running_var: Vec<f32>,
    pub epsilon: f32,
}

impl BatchNormSpec {
    pub const DEFAULT_EPSILON: f32 = 1e-5;

    /// Freshly initialised statistics: `gamma = 1, beta = 0, mean = 0, var = 1`.
    pub fn identity(channels: usize) -> Self {
        Self {
            gamma: vec![1.0; channels],
            beta: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.gamma.len();
        if self.beta.len() != c || self.running_mean.len() != c || self.running_var.len() != c {
            return Err(Error::input("batch-norm parameter arrays differ in length"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::input(format!("batch-norm epsilon {} is negative", self.epsilon)));
        }
        if let Some(v) = self
            .running_var
            .iter()
            .find(|&&v| !(v >= 0.0) || v + self.epsilon <= 0.0)
        {
            return Err(Error::input(format!("batch-norm variance {v} is not usable")));
        }
        Ok(())
    }
}

/// `y = gamma * (x - mean) / sqrt(var + eps) + beta` per channel of a `(C, ...)` tensor.
pub fn batchnorm_infer(x: &Tensor, spec: &BatchNormSpec) -> Result<Tensor> {
    spec.validate()?;
    if x.rank() == 0 || x.shape()[0] != spec.channels() {
        return Err(Error::input(format!(
            "batch-norm over {} channels applied to shape {:?}",
            spec.channels(),
            x.shape()
        )));
    }
    let plane = x.len() / spec.channels().max(1);
    let mut out = x.clone();
    for (c, chunk) in out.data_mut().chunks_mut(plane.max(1)).enumerate() {
        let (g, b, m) = (spec.gamma[c], spec.beta[c], spec.running_mean[c]);
        let denom = (spec.running_var[c] + spec.epsilon).sqrt();
        for v in chunk {
            *v = g * (*v - m) / denom + b;
        }
    }
    Ok(out)
}
