//! Deterministic synthetic telemetry with a hidden ground-truth delay process.
//!
//! Two hidden regimes are available:
//!
//! - [`HiddenModel::RationalExp`]: data the rational-exponential family can
//!   represent exactly, used for recovery checks.
//! - [`HiddenModel::SaturatingQueue`]: an M/M/1-style `base + k / (μ − ℓ)`
//!   congestion curve driven by utilization, which every fitted family can
//!   only approximate.
//!
//! `Arrival_rate_Cl` is an affine function of standardized frame size plus
//! independent Gaussian noise, mixed so the population correlation equals
//! the configured target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Provenance, SampleSet, ScalingSpec, TelemetrySample};
use crate::error::SimError;
use crate::models::{RationalExpParams, DENOMINATOR_FLOOR};

/// Delays are floored here after noise is added.
pub const MIN_DELAY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn validate(&self, name: &str) -> Result<(), SimError> {
        if self.min.is_finite() && self.max.is_finite() && self.min >= 0.0 && self.max > self.min {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!(
                "{name} range [{}, {}] must be finite, non-negative and non-degenerate",
                self.min, self.max
            )))
        }
    }

    fn mean(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    fn std(&self) -> f64 {
        (self.max - self.min) / 12f64.sqrt()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.random_range(self.min..self.max)
    }
}

/// Congestion curve `base + (k0 + k_frame·x1 + k_arrival·x3) / (capacity − x2)`
/// over rescaled inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturatingQueue {
    pub base: f64,
    pub capacity: f64,
    pub k0: f64,
    pub k_frame: f64,
    pub k_arrival: f64,
}

impl Default for SaturatingQueue {
    fn default() -> Self {
        Self {
            base: 0.004,
            capacity: 160.0,
            k0: 0.2,
            k_frame: 4.0,
            k_arrival: 0.4,
        }
    }
}

impl SaturatingQueue {
    pub fn delay(&self, x: &[f64; 3]) -> Result<f64, SimError> {
        let k = self.k0 + self.k_frame * x[0] + self.k_arrival * x[2];
        saturating_delay(x[1], self.capacity, self.base, k)
    }
}

/// Mean-sojourn style congestion delay `base + scale / (capacity − load)`.
pub fn saturating_delay(load: f64, capacity: f64, base: f64, scale: f64) -> Result<f64, SimError> {
    if !(load < capacity) {
        return Err(SimError::Saturated { load, capacity });
    }
    Ok(base + scale / (capacity - load))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HiddenModel {
    RationalExp {
        a: [f64; 3],
        b: [f64; 3],
        c: f64,
        d: f64,
    },
    SaturatingQueue(SaturatingQueue),
}

impl HiddenModel {
    /// A well-conditioned rational-exponential process over the default ranges.
    pub fn default_rational_exp() -> Self {
        HiddenModel::RationalExp {
            a: [0.08, 0.0008, 0.01],
            b: [0.2, -0.004, 0.05],
            c: 0.1,
            d: 0.15,
        }
    }

    pub fn rational_exp(p: RationalExpParams) -> Self {
        HiddenModel::RationalExp {
            a: p.a,
            b: p.b,
            c: p.c,
            d: p.d,
        }
    }

    pub fn rational_exp_params(&self) -> Option<RationalExpParams> {
        match *self {
            HiddenModel::RationalExp { a, b, c, d } => Some(RationalExpParams { a, b, c, d }),
            HiddenModel::SaturatingQueue(_) => None,
        }
    }

    pub fn delay(&self, x: &[f64; 3]) -> Result<f64, SimError> {
        match self {
            HiddenModel::RationalExp { .. } => Ok(self.rational_exp_params().unwrap().predict(x)?),
            HiddenModel::SaturatingQueue(q) => q.delay(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    /// Bytes.
    pub frame_size: Range,
    /// Packets per second.
    pub arrival_rate_all: Range,
    pub utilization: Range,
    pub client_rate_mean: f64,
    pub client_rate_std: f64,
    /// Target correlation between frame size and client arrival rate.
    pub correlation: f64,
    /// Noise standard deviation as a fraction of the mean noiseless delay.
    pub noise_sigma: f64,
    pub hidden: HiddenModel,
    /// Maps raw features to hidden-model inputs.
    pub scaling: ScalingSpec,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            seed: 0,
            frame_size: Range::new(50_000.0, 1_000_000.0),
            arrival_rate_all: Range::new(500.0, 5000.0),
            utilization: Range::new(5.0, 150.0),
            client_rate_mean: 1000.0,
            client_rate_std: 200.0,
            correlation: 0.98,
            noise_sigma: 0.01,
            hidden: HiddenModel::SaturatingQueue(SaturatingQueue::default()),
            scaling: ScalingSpec::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn rational_exp(n: usize, seed: u64, noise_sigma: f64) -> Self {
        Self {
            n,
            seed,
            noise_sigma,
            hidden: HiddenModel::default_rational_exp(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 {
            return Err(SimError::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SimError::InvalidConfig("noise sigma must be non-negative".into()));
        }
        if !(self.correlation.abs() <= 1.0) {
            return Err(SimError::InvalidConfig("correlation must lie in [-1, 1]".into()));
        }
        if !(self.client_rate_mean >= 0.0 && self.client_rate_std >= 0.0) {
            return Err(SimError::InvalidConfig(
                "client rate mean and std must be non-negative".into(),
            ));
        }
        self.frame_size.validate("frame_size")?;
        self.arrival_rate_all.validate("arrival_rate_all")?;
        self.utilization.validate("utilization")?;
        let box_ = self.input_box()?;
        match self.hidden {
            HiddenModel::RationalExp { .. } => {
                let p = self.hidden.rational_exp_params().unwrap();
                // The denominator is affine, so its minimum over the box is at a corner.
                let min = corners(&box_)
                    .iter()
                    .map(|x| p.denominator(x))
                    .fold(f64::INFINITY, f64::min);
                if !(min > DENOMINATOR_FLOOR) {
                    return Err(SimError::SingularHidden { denominator: min });
                }
            }
            HiddenModel::SaturatingQueue(q) => {
                if !(box_[1].max < q.capacity) {
                    return Err(SimError::Saturated {
                        load: box_[1].max,
                        capacity: q.capacity,
                    });
                }
            }
        }
        Ok(())
    }

    /// Feature box in rescaled model coordinates `(x1, x2, x3)`.
    fn input_box(&self) -> Result<[Range; 3], SimError> {
        let div = |f| {
            self.scaling
                .divisor(f)
                .map_err(|e| SimError::InvalidConfig(e.to_string()))
        };
        use crate::dataset::Feature::*;
        let (d1, d2, d3) = (div(ClientFrameSize)?, div(Utilization)?, div(ArrivalRateAll)?);
        Ok([
            Range::new(self.frame_size.min / d1, self.frame_size.max / d1),
            Range::new(self.utilization.min / d2, self.utilization.max / d2),
            Range::new(self.arrival_rate_all.min / d3, self.arrival_rate_all.max / d3),
        ])
    }
}

fn corners(b: &[Range; 3]) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(8);
    for &x1 in &[b[0].min, b[0].max] {
        for &x2 in &[b[1].min, b[1].max] {
            for &x3 in &[b[2].min, b[2].max] {
                out.push([x1, x2, x3]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub hidden: HiddenModel,
    /// Noiseless delay per row, seconds.
    pub noiseless: Vec<f64>,
    /// Absolute noise standard deviation actually applied, seconds.
    pub noise_std: f64,
    pub seed: u64,
}

/// Generates `config.n` samples. Output is a pure function of the config.
pub fn generate(config: &GeneratorConfig) -> Result<(SampleSet, GroundTruth), SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rho = config.correlation;
    let mix = (1.0 - rho * rho).max(0.0).sqrt();
    let (f_mean, f_std) = (config.frame_size.mean(), config.frame_size.std());

    let mut samples = Vec::with_capacity(config.n);
    let mut noiseless = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let frame = config.frame_size.sample(&mut rng);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let all = config.arrival_rate_all.sample(&mut rng);
        let util = config.utilization.sample(&mut rng);
        let z = (frame - f_mean) / f_std;
        let cl = (config.client_rate_mean + config.client_rate_std * (rho * z + mix * eps)).max(0.0);
        let sample = TelemetrySample {
            client_frame_size: frame,
            arrival_rate_cl: cl,
            arrival_rate_all: all,
            utilization: util,
            delay: 0.0,
        };
        let x = config
            .scaling
            .model_inputs(&sample)
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        noiseless.push(config.hidden.delay(&x)?);
        samples.push(sample);
    }

    let mean = noiseless.iter().sum::<f64>() / config.n as f64;
    let noise_std = config.noise_sigma * mean;
    for (s, clean) in samples.iter_mut().zip(&noiseless) {
        let noise = if noise_std > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            noise_std * z
        } else {
            0.0
        };
        s.delay = (clean + noise).max(MIN_DELAY);
    }

    Ok((
        SampleSet::new(samples, Provenance::Generator { seed: config.seed }),
        GroundTruth {
            hidden: config.hidden,
            noiseless,
            noise_std,
            seed: config.seed,
        },
    ))
}
