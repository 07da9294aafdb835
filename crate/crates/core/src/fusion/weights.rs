use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::weights::NamedTensors;
use crate::tensor::{BatchNormSpec, ConvSpec, Tensor};

/// Cross-modality alignment parameters for one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaWeights {
    /// 1×1, C -> 1: spatial attention logits.
    pub spatial: ConvSpec,
    /// 1×1, C -> max(C/4, 1).
    pub squeeze: ConvSpec,
    /// 1×1, max(C/4, 1) -> C.
    pub excite: ConvSpec,
}

impl CmaWeights {
    pub fn seeded(c: usize, rng: &mut ChaCha8Rng) -> Self {
        let r = bottleneck(c);
        Self {
            spatial: ConvSpec::seeded(1, c, 1, rng),
            squeeze: ConvSpec::seeded(r, c, 1, rng),
            excite: ConvSpec::seeded(c, r, 1, rng),
        }
    }

    pub fn channels(&self) -> usize {
        self.spatial.in_channels()
    }
}

pub fn bottleneck(c: usize) -> usize {
    (c / 4).max(1)
}

/// Which parameter groups the RGB and event paths share.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sharing {
    pub cma: bool,
    pub branch: bool,
}

impl Default for Sharing {
    fn default() -> Self {
        Self {
            cma: true,
            branch: true,
        }
    }
}

/// Every convolution and batch-norm used by ETA, CMA and SCF/SMF.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    /// 1×1, 2C -> C.
    pub eta_conv: ConvSpec,
    pub eta_bn: BatchNormSpec,
    pub cma_event: CmaWeights,
    /// `None` when the RGB path reuses `cma_event`.
    pub cma_rgb: Option<CmaWeights>,
    /// 1×1, C -> C, applied to the RGB half of the fusion.
    pub branch_rgb: ConvSpec,
    /// `None` when the event half reuses `branch_rgb`.
    pub branch_event: Option<ConvSpec>,
    /// 3×3, 2C -> C, padding 1.
    pub out_conv: ConvSpec,
}

impl FusionWeights {
    pub fn seeded(c: usize, seed: u64, sharing: Sharing) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta_conv = ConvSpec::seeded(c, 2 * c, 1, &mut rng);
        let cma_event = CmaWeights::seeded(c, &mut rng);
        let cma_rgb = (!sharing.cma).then(|| CmaWeights::seeded(c, &mut rng));
        let branch_rgb = ConvSpec::seeded(c, c, 1, &mut rng);
        let branch_event = (!sharing.branch).then(|| ConvSpec::seeded(c, c, 1, &mut rng));
        let out_conv = ConvSpec::seeded(c, 2 * c, 3, &mut rng);
        Self {
            eta_conv,
            eta_bn: BatchNormSpec::identity(c),
            cma_event,
            cma_rgb,
            branch_rgb,
            branch_event,
            out_conv,
        }
    }

    pub fn channels(&self) -> usize {
        self.eta_bn.channels()
    }

    pub fn shared_cma(&self) -> bool {
        self.cma_rgb.is_none()
    }

    pub fn shared_branch(&self) -> bool {
        self.branch_event.is_none()
    }

    pub fn cma_event(&self) -> &CmaWeights {
        &self.cma_event
    }

    pub fn cma_rgb(&self) -> &CmaWeights {
        self.cma_rgb.as_ref().unwrap_or(&self.cma_event)
    }

    pub fn branch_rgb(&self) -> &ConvSpec {
        &self.branch_rgb
    }

    pub fn branch_event(&self) -> &ConvSpec {
        self.branch_event.as_ref().unwrap_or(&self.branch_rgb)
    }

    /// Checks every site against the channel count implied by `eta_bn`.
    pub fn validate(&self) -> Result<()> {
        let c = self.channels();
        let r = bottleneck(c);
        let expect = |name: &str, spec: &ConvSpec, o: usize, i: usize, k: usize| -> Result<()> {
            spec.validate()?;
            if (spec.out_channels(), spec.in_channels(), spec.kernel_size()) != (o, i, k) {
                return Err(Error::input(format!(
                    "{name}: expected {o}x{i}x{k}x{k} kernel, got {:?}",
                    spec.kernel.shape()
                )));
            }
            Ok(())
        };
        self.eta_bn.validate()?;
        expect("eta.conv", &self.eta_conv, c, 2 * c, 1)?;
        for (tag, cw) in [("event", Some(&self.cma_event)), ("rgb", self.cma_rgb.as_ref())] {
            if let Some(cw) = cw {
                expect(&format!("cma.{tag}.spatial"), &cw.spatial, 1, c, 1)?;
                expect(&format!("cma.{tag}.squeeze"), &cw.squeeze, r, c, 1)?;
                expect(&format!("cma.{tag}.excite"), &cw.excite, c, r, 1)?;
            }
        }
        expect("branch.rgb", &self.branch_rgb, c, c, 1)?;
        if let Some(b) = &self.branch_event {
            expect("branch.event", b, c, c, 1)?;
        }
        expect("out", &self.out_conv, c, 2 * c, 3)
    }

    /// Flattens to named tensors for the WGTS weights file.
    pub fn to_named(&self) -> NamedTensors {
        let mut out = Vec::new();
        let mut conv = |name: &str, spec: &ConvSpec| {
            out.push((format!("{name}.weight"), spec.kernel.clone()));
            out.push((format!("{name}.bias"), spec.bias.clone()));
        };
        conv("eta.conv", &self.eta_conv);
        for (tag, cw) in [("event", Some(&self.cma_event)), ("rgb", self.cma_rgb.as_ref())] {
            if let Some(cw) = cw {
                conv(&format!("cma.{tag}.spatial"), &cw.spatial);
                conv(&format!("cma.{tag}.squeeze"), &cw.squeeze);
                conv(&format!("cma.{tag}.excite"), &cw.excite);
            }
        }
        conv("branch.rgb", &self.branch_rgb);
        if let Some(b) = &self.branch_event {
            conv("branch.event", b);
        }
        conv("out", &self.out_conv);
        let bn = &self.eta_bn;
        let vec1 = |v: &[f32]| Tensor::new(vec![v.len()], v.to_vec()).expect("1-d");
        out.push(("eta.bn.gamma".into(), vec1(&bn.gamma)));
        out.push(("eta.bn.beta".into(), vec1(&bn.beta)));
        out.push(("eta.bn.mean".into(), vec1(&bn.running_mean)));
        out.push(("eta.bn.var".into(), vec1(&bn.running_var)));
        out.push(("eta.bn.eps".into(), Tensor::new(vec![], vec![bn.epsilon]).expect("scalar")));
        out
    }

    /// Inverse of [`to_named`](Self::to_named). Missing `cma.rgb.*` or
    /// `branch.event.*` entries mean the corresponding weights are shared.
    pub fn from_named(tensors: NamedTensors) -> Result<Self> {
        let mut map: BTreeMap<String, Tensor> = tensors.into_iter().collect();
        let mut take = |name: &str| -> Result<Tensor> {
            map.remove(name)
                .ok_or_else(|| Error::input(format!("weights file lacks tensor {name:?}")))
        };
        let conv = |name: &str, take: &mut dyn FnMut(&str) -> Result<Tensor>| -> Result<ConvSpec> {
            let kernel = take(&format!("{name}.weight"))?;
            let bias = take(&format!("{name}.bias"))?;
            let k = kernel.shape().get(2).copied().unwrap_or(1);
            ConvSpec::new(kernel, bias, k / 2, 1)
        };
        let eta_conv = conv("eta.conv", &mut take)?;
        let cma_event = CmaWeights {
            spatial: conv("cma.event.spatial", &mut take)?,
            squeeze: conv("cma.event.squeeze", &mut take)?,
            excite: conv("cma.event.excite", &mut take)?,
        };
        let cma_rgb = match conv("cma.rgb.spatial", &mut take) {
            Ok(spatial) => Some(CmaWeights {
                spatial,
                squeeze: conv("cma.rgb.squeeze", &mut take)?,
                excite: conv("cma.rgb.excite", &mut take)?,
            }),
            Err(_) => None,
        };
        let branch_rgb = conv("branch.rgb", &mut take)?;
        let branch_event = conv("branch.event", &mut take).ok();
        let out_conv = conv("out", &mut take)?;
        let eps = take("eta.bn.eps")?;
        let eta_bn = BatchNormSpec {
            gamma: take("eta.bn.gamma")?.into_data(),
            beta: take("eta.bn.beta")?.into_data(),
            running_mean: take("eta.bn.mean")?.into_data(),
            running_var: take("eta.bn.var")?.into_data(),
            epsilon: *eps.data().first().ok_or_else(|| Error::input("empty eta.bn.eps"))?,
        };
        let w = Self {
            eta_conv,
            eta_bn,
            cma_event,
            cma_rgb,
            branch_rgb,
            branch_event,
            out_conv,
        };
        w.validate()?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::weights::{read_weights, write_weights};

    #[test]
    fn seeded_weights_have_consistent_shapes() {
        for c in [1, 4, 8, 9] {
            for sharing in [Sharing::default(), Sharing { cma: false, branch: false }] {
                FusionWeights::seeded(c, 3, sharing).validate().unwrap();
            }
        }
    }

    #[test]
    fn weights_file_round_trip() {
        for sharing in [Sharing::default(), Sharing { cma: false, branch: true }] {
            let w = FusionWeights::seeded(8, 77, sharing);
            let mut buf = Vec::new();
            write_weights(&mut buf, &w.to_named()).unwrap();
            let back = FusionWeights::from_named(read_weights(buf.as_slice()).unwrap()).unwrap();
            assert_eq!(back, w);
        }
    }

    #[test]
    fn missing_or_misshapen_tensor_rejected() {
        let w = FusionWeights::seeded(4, 1, Sharing::default());
        let mut named = w.to_named();
        named.retain(|(n, _)| n != "out.bias");
        assert!(FusionWeights::from_named(named).is_err());

        let mut named = w.to_named();
        for (n, t) in named.iter_mut() {
            if n == "branch.rgb.weight" {
                *t = Tensor::zeros(&[4, 3, 1, 1]);
            }
        }
        assert!(FusionWeights::from_named(named).is_err());
    }
}
