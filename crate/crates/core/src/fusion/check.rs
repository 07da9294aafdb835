//! Seeded invariant suite over the fusion forward pass, shared by the
//! `fusion-check` command and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{basic_fusion, eta_traced, scf_traced, FusionWeights, Sharing};
use crate::error::Result;
use crate::eventgen::SpikeTensor;
use crate::tensor::Tensor;

pub const SYMMETRY_TOLERANCE: f32 = 1e-5;
pub const SOFTMAX_TOLERANCE: f32 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionCheckConfig {
    pub channels: usize,
    pub time_steps: usize,
    pub height: usize,
    pub width: usize,
    pub trials: usize,
    pub seed: u64,
    /// Probability of a 1 in the random spike input.
    pub spike_rate: f64,
}

impl Default for FusionCheckConfig {
    fn default() -> Self {
        Self {
            channels: 8,
            time_steps: 4,
            height: 16,
            width: 16,
            trials: 20,
            seed: 0,
            spike_rate: 0.3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionReport {
    pub config: FusionCheckConfig,
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
}

struct Tally {
    name: &'static str,
    worst: f64,
    tolerance: f64,
    ok: bool,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            worst: 0.0,
            tolerance,
            ok: true,
        }
    }

    fn observe(&mut self, value: f64, ok: bool) {
        self.worst = self.worst.max(value);
        self.ok &= ok;
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            passed: self.ok,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

fn max_abs_diff(a: &Tensor, b: &Tensor) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() as f64)
        .fold(0.0, f64::max)
}

/// `1 - min(v, 1 - v)` over all gate values (below 1 iff every value is inside).
fn gate_violation(values: &[f32]) -> (f64, bool) {
    let inside = values.iter().all(|&v| v > 0.0 && v < 1.0);
    let closest = values
        .iter()
        .map(|&v| (1.0 - v.min(1.0 - v)) as f64)
        .fold(0.0, f64::max);
    (closest, inside)
}

pub fn run_invariant_suite(cfg: &FusionCheckConfig) -> Result<FusionReport> {
    let FusionCheckConfig {
        channels: c,
        time_steps: t,
        height: h,
        width: w,
        ..
    } = *cfg;
    let weights = FusionWeights::seeded(c, cfg.seed, Sharing::default());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);

    let mut symmetry = Tally::new("scf swap symmetry (max |scf(a,b) - scf(b,a)|)", SYMMETRY_TOLERANCE as f64);
    let mut softmax = Tally::new("softmax attention sums to 1 (max |sum - 1|)", SOFTMAX_TOLERANCE as f64);
    let mut gates = Tally::new("attention gates inside (0,1) (1 - smallest margin to a bound)", 1.0);
    let mut witness = Tally::new("basic fusion with zero RGB is zero while scf is not (max |basic|)", 0.0);
    let mut shapes = Tally::new("shape contract (violations)", 0.0);
    let mut finite = Tally::new("all outputs finite (non-finite count)", 0.0);

    for _ in 0..cfg.trials {
        let spikes: Vec<f32> = (0..c * t * h * w)
            .map(|_| if rng.random_bool(cfg.spike_rate) { 1.0 } else { 0.0 })
            .collect();
        let spikes = SpikeTensor::new(Tensor::new(vec![c, t, h, w], spikes)?)?;
        let f_r = Tensor::random_uniform(&[c, h, w], -1.0, 1.0, &mut rng);

        let eta = eta_traced(&spikes, &weights)?;
        let f_e = &eta.out;
        let ab = scf_traced(&f_r, f_e, &weights)?;
        let ba = scf_traced(f_e, &f_r, &weights)?;

        let d = max_abs_diff(&ab.out, &ba.out);
        symmetry.observe(d, d <= SYMMETRY_TOLERANCE as f64);

        for att in [&ab.event_cma.attention, &ab.rgb_cma.attention] {
            let err = (att.iter().map(|&v| v as f64).sum::<f64>() - 1.0).abs();
            softmax.observe(err, err <= SOFTMAX_TOLERANCE as f64 && att.iter().all(|&v| v > 0.0));
        }

        let sig_ec = ab.event_cma.out.sigmoid();
        let sig_rc = ab.rgb_cma.out.sigmoid();
        for vals in [
            eta.out.data(),
            &ab.event_cma.gate,
            &ab.rgb_cma.gate,
            sig_ec.data(),
            sig_rc.data(),
        ] {
            let (v, ok) = gate_violation(vals);
            gates.observe(v, ok);
        }

        let zero = Tensor::zeros(&[c, h, w]);
        let basic = basic_fusion(&ab.event_cma.out, &zero)?;
        let basic_mag = basic.data().iter().map(|v| v.abs() as f64).fold(0.0, f64::max);
        let scf_zero_rgb = scf_traced(&zero, f_e, &weights)?;
        let scf_mag = scf_zero_rgb.fusion_sum.data().iter().map(|v| v.abs() as f64).fold(0.0, f64::max);
        witness.observe(basic_mag, basic_mag == 0.0 && scf_mag > 0.0);

        let chw = [c, h, w];
        let expected: [(&Tensor, &[usize]); 9] = [
            (&eta.f_max, &chw),
            (&eta.f_avg, &chw),
            (&eta.out, &chw),
            (&ab.fusion_rgb, &chw),
            (&ab.fusion_event, &chw),
            (&ab.branch_rgb, &chw),
            (&ab.f_max, &chw),
            (&ab.f_avg, &chw),
            (&ab.out, &chw),
        ];
        let bad = expected.iter().filter(|(t, s)| t.shape() != *s).count()
            + usize::from(ab.event_cma.attention.len() != h * w)
            + usize::from(ab.event_cma.gate.len() != c);
        shapes.observe(bad as f64, bad == 0);

        let non_finite = [&ab.out, &ba.out, &eta.out, &scf_zero_rgb.out]
            .iter()
            .map(|t| t.data().iter().filter(|v| !v.is_finite()).count())
            .sum::<usize>();
        finite.observe(non_finite as f64, non_finite == 0);
    }

    let checks: Vec<CheckOutcome> = [symmetry, softmax, gates, witness, shapes, finite]
        .into_iter()
        .map(Tally::finish)
        .collect();
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(FusionReport {
        config: *cfg,
        checks,
        all_passed,
    })
}
