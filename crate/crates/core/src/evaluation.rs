//! Accuracy metrics, k-fold cross-validation, residual profiling and
//! per-call inference timing.

use std::hint::black_box;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Feature, FeatureMatrix};
use crate::error::EvalError;
use crate::fitter::{self, FitOptions};
use crate::models::{Family, FittedModel};

/// MAE, MSE and R² for one prediction vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
    /// `None` when the targets have zero variance.
    pub r2: Option<f64>,
}

pub fn metrics(y: &[f64], y_hat: &[f64]) -> Result<EvalReport, EvalError> {
    if y.len() != y_hat.len() {
        return Err(EvalError::LengthMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let (mut abs, mut sq, mut tot) = (0.0, 0.0, 0.0);
    for (t, p) in y.iter().zip(y_hat) {
        let e = t - p;
        abs += e.abs();
        sq += e * e;
        tot += (t - mean) * (t - mean);
    }
    Ok(EvalReport {
        n: y.len(),
        mae: abs / n,
        mse: sq / n,
        r2: (tot > 0.0).then(|| 1.0 - sq / tot),
    })
}

/// Shuffled fold assignment; sizes differ by at most one.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || n < k {
        return Err(EvalError::TooFewRows { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Seeded train/test split; `test_fraction` of the rows (at least one) go to test.
pub fn holdout_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::Invalid(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    if n < 2 {
        return Err(EvalError::TooFewRows { n, k: 2 });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let test = order[..n_test].to_vec();
    let train = order[n_test..].to_vec();
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mae: f64,
    pub mse: f64,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub report: Option<EvalReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub family: Family,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    /// Arithmetic mean over successful folds.
    pub mean: MetricSummary,
    /// Sample (n − 1) standard deviation over successful folds.
    pub std: MetricSummary,
    /// False when any fold failed or had an undefined R².
    pub complete: bool,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Fits `family` on k − 1 folds and scores the held-out fold, k times.
///
/// Fold `i` uses fit seed `opts.seed + i`.
pub fn kfold_cv(
    m: &FeatureMatrix,
    family: Family,
    k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<CvReport, EvalError> {
    let folds = kfold_indices(m.len(), k, seed)?;
    let mut results = Vec::with_capacity(k);
    for (i, test_idx) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        let train = m.subset(&train_idx);
        let test = m.subset(test_idx);
        let fold_opts = FitOptions {
            seed: opts.seed.wrapping_add(i as u64),
            ..opts.clone()
        };
        let outcome = fitter::fit(family, &train, &fold_opts)
            .map_err(EvalError::from)
            .and_then(|fit| Ok(fit.params.predict_rows(&test.rows)?))
            .and_then(|pred| metrics(&test.y, &pred));
        let (report, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        results.push(FoldResult {
            fold: i,
            train_rows: train_idx.len(),
            test_rows: test_idx.len(),
            report,
            error,
        });
    }

    let ok: Vec<&EvalReport> = results.iter().filter_map(|f| f.report.as_ref()).collect();
    if ok.is_empty() {
        let first = results.iter().find_map(|f| f.error.clone()).unwrap_or_default();
        return Err(EvalError::Invalid(format!("every fold failed: {first}")));
    }
    let (mae_m, mae_s) = mean_std(&ok.iter().map(|r| r.mae).collect::<Vec<_>>());
    let (mse_m, mse_s) = mean_std(&ok.iter().map(|r| r.mse).collect::<Vec<_>>());
    let r2s: Vec<f64> = ok.iter().filter_map(|r| r.r2).collect();
    let (r2_m, r2_s) = if r2s.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&r2s);
        (Some(m), Some(s))
    };
    let complete = ok.len() == k && r2s.len() == k;
    Ok(CvReport {
        family,
        k,
        seed,
        folds: results,
        mean: MetricSummary {
            mae: mae_m,
            mse: mse_m,
            r2: r2_m,
        },
        std: MetricSummary {
            mae: mae_s,
            mse: mse_s,
            r2: r2_s,
        },
        complete,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation of the residuals in the bin.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    pub feature: Feature,
    pub edges: Vec<f64>,
    pub bins: Vec<ResidualBin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One `(feature value, observed − predicted)` pair per row.
pub fn residual_points(
    model: &FittedModel,
    m: &FeatureMatrix,
    feature: Feature,
) -> Result<Vec<(f64, f64)>, EvalError> {
    let col = m
        .features
        .iter()
        .position(|f| *f == feature)
        .ok_or_else(|| EvalError::Invalid(format!("{feature} is not a matrix column")))?;
    let pred = model.predict_matrix(m)?;
    Ok(m.rows
        .iter()
        .zip(m.y.iter().zip(pred))
        .map(|(x, (y, p))| (x[col], y - p))
        .collect())
}

/// Residual statistics over equal-population bins of `feature`.
pub fn residual_profile(
    model: &FittedModel,
    m: &FeatureMatrix,
    feature: Feature,
    bins: usize,
) -> Result<ResidualProfile, EvalError> {
    let points = residual_points(model, m, feature)?;
    profile_points(&points, feature, bins)
}

/// Quantile-binned residual statistics for precomputed points.
///
/// Edges sit at the `j/bins` quantiles of the feature; repeated quantiles
/// collapse, so heavily tied data may produce fewer bins. The last bin is
/// closed on the right.
pub fn profile_points(points: &[(f64, f64)], feature: Feature, bins: usize) -> Result<ResidualProfile, EvalError> {
    if bins == 0 {
        return Err(EvalError::Invalid("bin count must be positive".into()));
    }
    if points.len() < bins {
        return Err(EvalError::TooFewRows {
            n: points.len(),
            k: bins,
        });
    }
    let mut sorted: Vec<f64> = points.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len();

    let mut note = None;
    let edges = if lo == hi {
        note = Some(format!("{feature} is constant; single bin"));
        vec![lo, hi]
    } else {
        let mut e = vec![lo];
        for j in 1..bins {
            let q = sorted[j * n / bins];
            if q > *e.last().unwrap() && q < hi {
                e.push(q);
            }
        }
        e.push(hi);
        e
    };
    let nbins = edges.len() - 1;
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); nbins];
    for &(v, r) in points {
        // Interior edges at or below v.
        let idx = edges[1..nbins].partition_point(|e| *e <= v);
        groups[idx].push(r);
    }
    let bins = groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let count = g.len();
            let (mean, std) = if count == 0 {
                (0.0, 0.0)
            } else {
                let m = g.iter().sum::<f64>() / count as f64;
                let var = g.iter().map(|r| (r - m).powi(2)).sum::<f64>() / count as f64;
                (m, var.sqrt())
            };
            ResidualBin {
                lower: edges[i],
                upper: edges[i + 1],
                count,
                mean,
                std,
            }
        })
        .collect();
    Ok(ResidualProfile {
        feature,
        edges,
        bins,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub n: usize,
    pub warmup: usize,
    pub avg_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

/// Wall-clock latency of `n` single-sample predictions after `warmup`
/// untimed calls. Rows are cycled when fewer than `n + warmup` exist.
pub fn time_inference(
    model: &FittedModel,
    samples: &FeatureMatrix,
    n: usize,
    warmup: usize,
) -> Result<TimingReport, EvalError> {
    if n == 0 {
        return Err(EvalError::Invalid("need at least one timed sample".into()));
    }
    if samples.is_empty() {
        return Err(EvalError::Empty);
    }
    // Fail up front rather than timing an error path.
    model.predict_matrix(samples)?;
    let rows = &samples.rows;
    for i in 0..warmup {
        let _ = black_box(model.predict(black_box(&rows[i % rows.len()])));
    }
    let mut total = 0.0;
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for i in 0..n {
        let x = &rows[(warmup + i) % rows.len()];
        let start = Instant::now();
        let _ = black_box(model.predict(black_box(x)));
        let ms = start.elapsed().as_secs_f64() * 1e3;
        total += ms;
        min = min.min(ms);
        max = max.max(ms);
    }
    let avg = (total / n as f64).clamp(min, max);
    Ok(TimingReport {
        n,
        warmup,
        avg_ms: avg,
        min_ms: min,
        max_ms: max,
    })
}
