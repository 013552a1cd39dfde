//! Mini-batch gradient descent for the single-hidden-layer baseline.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::FitError;
use crate::models::MlpParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub step_size: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 16,
            epochs: 500,
            batch: 32,
            step_size: 1e-2,
        }
    }
}

/// Seeded initialization: hidden weights uniform in `±1/√3`, output weights
/// uniform in `±1/√H`, zero biases.
pub fn init_mlp(hidden: usize, seed: u64) -> MlpParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_in = 1.0 / 3f64.sqrt();
    let s_out = 1.0 / (hidden as f64).sqrt();
    let mut p = MlpParams::zeros(hidden);
    for w in &mut p.w_hidden {
        for v in w.iter_mut() {
            *v = rng.random_range(-s_in..s_in);
        }
    }
    for v in &mut p.w_out {
        *v = rng.random_range(-s_out..s_out);
    }
    p
}

fn mse(p: &MlpParams, m: &FeatureMatrix) -> f64 {
    let n = m.len() as f64;
    m.rows
        .iter()
        .zip(&m.y)
        .map(|(x, y)| {
            let f = p.forward(x).unwrap_or(f64::INFINITY);
            (f - y) * (f - y)
        })
        .sum::<f64>()
        / n
}

/// Trains with a fixed step size on the batch-mean squared error.
///
/// Rows are reshuffled every epoch from a generator seeded once, so the whole
/// schedule is a function of `seed`.
pub fn fit_mlp(m: &FeatureMatrix, config: &MlpConfig, seed: u64) -> Result<MlpParams, FitError> {
    if config.hidden == 0 || config.batch == 0 {
        return Err(FitError::InvalidOptions(
            "mlp needs at least one hidden unit and a positive batch".into(),
        ));
    }
    if m.len() < config.batch {
        return Err(FitError::TooFewRows {
            rows: m.len(),
            params: config.batch,
        });
    }
    let mut p = init_mlp(config.hidden, seed);
    if config.epochs == 0 {
        return Ok(p);
    }
    let h = config.hidden;
    let initial = mse(&p, m).max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..m.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);

    let mut g_w = vec![[0.0f64; 3]; h];
    let mut g_b = vec![0.0f64; h];
    let mut g_v = vec![0.0f64; h];
    let mut act = vec![0.0f64; h];

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch) {
            g_w.iter_mut().for_each(|g| *g = [0.0; 3]);
            g_b.iter_mut().for_each(|g| *g = 0.0);
            g_v.iter_mut().for_each(|g| *g = 0.0);
            let mut g_out = 0.0;
            for &i in batch {
                let x = &m.rows[i];
                let mut f = p.b_out;
                for k in 0..h {
                    let w = &p.w_hidden[k];
                    act[k] = (w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + p.b_hidden[k]).tanh();
                    f += p.w_out[k] * act[k];
                }
                let delta = 2.0 * (f - m.y[i]);
                g_out += delta;
                for k in 0..h {
                    g_v[k] += delta * act[k];
                    let back = delta * p.w_out[k] * (1.0 - act[k] * act[k]);
                    g_b[k] += back;
                    for j in 0..3 {
                        g_w[k][j] += back * x[j];
                    }
                }
            }
            let scale = config.step_size / batch.len() as f64;
            p.b_out -= scale * g_out;
            for k in 0..h {
                p.w_out[k] -= scale * g_v[k];
                p.b_hidden[k] -= scale * g_b[k];
                for j in 0..3 {
                    p.w_hidden[k][j] -= scale * g_w[k][j];
                }
            }
        }
        let cost = mse(&p, m);
        if !cost.is_finite() || cost > 1e6 * initial {
            return Err(FitError::Diverged { epoch });
        }
    }
    Ok(p)
}
