//! Parameter estimation for every model family.
//!
//! - linear and second-order polynomial: closed-form QR least squares
//! - rational, rational-exponential, univariate rational and sigmoid:
//!   multistart Levenberg-Marquardt with analytic Jacobians
//! - MLP: fixed-step mini-batch gradient descent

pub mod linear;
pub mod lm;
pub mod mlp;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use std::time::{SystemTime, UNIX_EPOCH};

use crate::dataset::{Feature, FeatureMatrix, ScalingSpec};
use crate::error::FitError;
use crate::models::{
    Family, FitMetadata, FittedModel, ModelParams, RationalExpParams, RationalParams, SigmoidParams,
    UnivariateRationalParams, DENOMINATOR_FLOOR,
};

pub use linear::{fit_linear, fit_polynomial2, least_squares};
pub use lm::{Convergence, LeastSquaresProblem, LmOutcome, LmSettings};
pub use mlp::{fit_mlp, init_mlp, MlpConfig};

/// Relative size of multistart perturbations.
const PERTURBATION: f64 = 0.1;
/// Perturbation magnitude used for parameters that start at zero.
const PERTURBATION_FLOOR: f64 = 1e-2;
/// Logit targets are clipped to this magnitude when seeding the sigmoid.
const LOGIT_CLIP: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub cost_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    pub seed: u64,
    pub multistarts: usize,
    /// Input column for the univariate rational family.
    pub univariate_input: Feature,
    pub mlp: MlpConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        let lm = LmSettings::default();
        Self {
            max_iterations: lm.max_iterations,
            cost_tolerance: lm.cost_tolerance,
            step_tolerance: lm.step_tolerance,
            initial_damping: lm.initial_damping,
            damping_increase: lm.damping_increase,
            damping_decrease: lm.damping_decrease,
            seed: 0,
            multistarts: 5,
            univariate_input: Feature::Utilization,
            mlp: MlpConfig::default(),
        }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |msg: &str| Err(FitError::InvalidOptions(msg.into()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.cost_tolerance > 0.0 && self.step_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.initial_damping > 0.0) {
            return bad("initial damping must be positive");
        }
        if !(self.damping_increase > 1.0 && self.damping_decrease > 1.0) {
            return bad("damping factors must exceed 1");
        }
        if self.multistarts == 0 {
            return bad("multistarts must be at least 1");
        }
        if self.univariate_input.model_column().is_none() {
            return bad("univariate input must be a model column");
        }
        Ok(())
    }

    pub fn lm_settings(&self) -> LmSettings {
        LmSettings {
            max_iterations: self.max_iterations,
            cost_tolerance: self.cost_tolerance,
            step_tolerance: self.step_tolerance,
            initial_damping: self.initial_damping,
            damping_increase: self.damping_increase,
            damping_decrease: self.damping_decrease,
        }
    }
}

/// Result of one optimizer start. Costs are `None` when the start was infeasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub initial_cost: Option<f64>,
    pub final_cost: Option<f64>,
    pub iterations: usize,
    pub reason: Convergence,
    /// Seeded from the nested rational solution.
    #[serde(default)]
    pub warm_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub params: Vec<f64>,
    /// Sum of squared residuals at the winning start's initial point.
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub reason: Convergence,
    pub best_start: Option<usize>,
    pub starts: Vec<StartOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub params: ModelParams,
    pub report: FitReport,
}

/// Least-squares problem for one nonlinear family on a fixed matrix.
pub struct FamilyProblem<'a> {
    family: Family,
    matrix: &'a FeatureMatrix,
    input_column: usize,
}

impl<'a> FamilyProblem<'a> {
    pub fn new(family: Family, matrix: &'a FeatureMatrix, opts: &FitOptions) -> Result<Self, FitError> {
        if num_params(family, opts).is_none() {
            return Err(FitError::InvalidOptions(format!(
                "{family} is not fitted by nonlinear least squares"
            )));
        }
        let input_column = opts
            .univariate_input
            .model_column()
            .ok_or_else(|| FitError::InvalidOptions("univariate input must be a model column".into()))?;
        Ok(Self {
            family,
            matrix,
            input_column,
        })
    }

    pub fn to_params(&self, p: &[f64]) -> ModelParams {
        match self.family {
            Family::RationalExp => ModelParams::RationalExp(RationalExpParams::from_slice(p)),
            Family::Rational => ModelParams::Rational(RationalParams::from_slice(p)),
            Family::UnivariateRational => {
                ModelParams::UnivariateRational(UnivariateRationalParams {
                    a: [p[0], p[1], p[2], p[3]],
                    input: Feature::MODEL_INPUTS[self.input_column],
                })
            }
            Family::Sigmoid => ModelParams::Sigmoid(SigmoidParams {
                amplitude: p[0],
                weights: [p[1], p[2], p[3]],
                bias: p[4],
            }),
            _ => unreachable!("checked in FamilyProblem::new"),
        }
    }
}

fn num_params(family: Family, _opts: &FitOptions) -> Option<usize> {
    match family {
        Family::RationalExp => Some(RationalExpParams::LEN),
        Family::Rational => Some(RationalParams::LEN),
        Family::UnivariateRational => Some(UnivariateRationalParams::LEN),
        Family::Sigmoid => Some(SigmoidParams::LEN),
        _ => None,
    }
}

impl LeastSquaresProblem for FamilyProblem<'_> {
    fn num_params(&self) -> usize {
        num_params(self.family, &FitOptions::default()).unwrap()
    }

    fn targets(&self) -> &[f64] {
        &self.matrix.y
    }

    fn predict(&self, p: &[f64], out: &mut [f64]) -> bool {
        if self.family == Family::Sigmoid && !(p[0] > 0.0) {
            return false;
        }
        let params = self.to_params(p);
        for (o, x) in out.iter_mut().zip(&self.matrix.rows) {
            match params.predict(x) {
                Ok(v) => *o = v,
                Err(_) => return false,
            }
        }
        true
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) -> bool {
        let n = self.num_params();
        let rows = self.matrix.rows.iter();
        let chunks = out.chunks_exact_mut(n);
        match self.family {
            Family::RationalExp => {
                let q = RationalExpParams::from_slice(p);
                for (row, x) in chunks.zip(rows) {
                    match q.jacobian(x) {
                        Ok(j) => row.copy_from_slice(&j),
                        Err(_) => return false,
                    }
                }
            }
            Family::Rational => {
                let q = RationalParams::from_slice(p);
                for (row, x) in chunks.zip(rows) {
                    match q.jacobian(x) {
                        Ok(j) => row.copy_from_slice(&j),
                        Err(_) => return false,
                    }
                }
            }
            Family::UnivariateRational => {
                let ModelParams::UnivariateRational(q) = self.to_params(p) else {
                    unreachable!()
                };
                for (row, x) in chunks.zip(rows) {
                    match q.jacobian_value(x[self.input_column]) {
                        Ok(j) => row.copy_from_slice(&j),
                        Err(_) => return false,
                    }
                }
            }
            Family::Sigmoid => {
                let ModelParams::Sigmoid(q) = self.to_params(p) else {
                    unreachable!()
                };
                for (row, x) in chunks.zip(rows) {
                    match q.jacobian(x) {
                        Ok(j) => row.copy_from_slice(&j),
                        Err(_) => return false,
                    }
                }
            }
            _ => return false,
        }
        true
    }
}

/// Canonical starting point for a family.
///
/// Rational families start from the slopes of an ordinary linear fit as the
/// numerator with `b = 0`, `c = 0`, `d = 0`; the intercept is left for the
/// denominator terms to absorb. The sigmoid starts from a linear fit of the
/// clipped logit of `y / L` with `L = 1.1·max(y)`. The univariate rational
/// starts from a log-log power-law fit. The MLP uses its seeded init.
pub fn init_guess(family: Family, m: &FeatureMatrix, opts: &FitOptions) -> Result<Vec<f64>, FitError> {
    if m.is_empty() {
        return Err(FitError::TooFewRows { rows: 0, params: 1 });
    }
    match family {
        Family::RationalExp | Family::Rational => {
            let lin = fit_linear(m)?;
            let mut p = vec![0.0; if family == Family::RationalExp { 8 } else { 7 }];
            p[..3].copy_from_slice(&lin.weights);
            Ok(p)
        }
        Family::Sigmoid => {
            let top = m.y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(top > 0.0) {
                return Err(FitError::InvalidData(
                    "sigmoid needs at least one positive target".into(),
                ));
            }
            let amplitude = 1.1 * top;
            let z: Vec<f64> = m
                .y
                .iter()
                .map(|y| {
                    let r = y / amplitude;
                    let logit = (r / (1.0 - r)).ln();
                    if logit.is_nan() {
                        -LOGIT_CLIP
                    } else {
                        logit.clamp(-LOGIT_CLIP, LOGIT_CLIP)
                    }
                })
                .collect();
            let lin = fit_linear(&FeatureMatrix {
                rows: m.rows.clone(),
                y: z,
                features: m.features.clone(),
            })?;
            Ok(vec![
                amplitude,
                lin.weights[0],
                lin.weights[1],
                lin.weights[2],
                lin.intercept,
            ])
        }
        Family::UnivariateRational => {
            let col = opts
                .univariate_input
                .model_column()
                .ok_or_else(|| FitError::InvalidOptions("univariate input must be a model column".into()))?;
            if let Some(bad) = m.rows.iter().find(|r| !(r[col] > 0.0)) {
                return Err(FitError::InvalidData(format!(
                    "univariate rational needs {} > 0, found {}",
                    opts.univariate_input, bad[col]
                )));
            }
            let (design, z): (Vec<[f64; 2]>, Vec<f64>) = m
                .rows
                .iter()
                .zip(&m.y)
                .filter(|(_, y)| **y > 0.0)
                .map(|(r, y)| ([1.0, r[col].ln()], y.ln()))
                .unzip();
            let flat: Vec<f64> = design.into_iter().flatten().collect();
            let w = least_squares(&flat, 2, &z)?;
            Ok(vec![w[0].exp(), w[1], 0.0, 1.0])
        }
        Family::Linear => {
            let p = fit_linear(m)?;
            Ok(vec![p.intercept, p.weights[0], p.weights[1], p.weights[2]])
        }
        Family::Polynomial2 => Ok(fit_polynomial2(m)?.coef.to_vec()),
        Family::Mlp => Ok(init_mlp(opts.mlp.hidden, opts.seed).to_vec()),
    }
}

fn perturb(p: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    p.iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(rng);
            v + PERTURBATION * z * v.abs().max(PERTURBATION_FLOOR)
        })
        .collect()
}

fn finite_cost(c: f64) -> Option<f64> {
    c.is_finite().then_some(c)
}

/// Multistart Levenberg-Marquardt fit of a nonlinear family.
///
/// Start 0 is [`init_guess`]; the remaining `multistarts - 1` are seeded
/// perturbations of it. The rational-exponential fit also starts from the
/// converged rational solution with `d = 0`, so it can never end worse than
/// the rational fit on the same data. The lowest-cost start whose
/// denominators stay above the floor on every training row wins.
pub fn fit_nonlinear(family: Family, m: &FeatureMatrix, opts: &FitOptions) -> Result<Fit, FitError> {
    opts.validate()?;
    let problem = FamilyProblem::new(family, m, opts)?;
    let n = problem.num_params();
    if m.len() <= n {
        return Err(FitError::TooFewRows {
            rows: m.len(),
            params: n,
        });
    }
    let base = init_guess(family, m, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![(base.clone(), false)];
    for _ in 1..opts.multistarts {
        starts.push((perturb(&base, &mut rng), false));
    }
    if family == Family::RationalExp {
        if let Ok(nested) = fit_nonlinear(Family::Rational, m, opts) {
            let mut warm = nested.report.params.clone();
            warm.push(0.0);
            starts.push((warm, true));
        }
    }

    let settings = opts.lm_settings();
    let mut outcomes = Vec::with_capacity(starts.len());
    let mut best: Option<(usize, LmOutcome)> = None;
    for (i, (start, warm)) in starts.iter().enumerate() {
        let out = lm::minimize(&problem, start, &settings);
        outcomes.push(StartOutcome {
            initial_cost: finite_cost(out.initial_cost),
            final_cost: finite_cost(out.final_cost),
            iterations: out.iterations,
            reason: out.reason,
            warm_start: *warm,
        });
        if !out.final_cost.is_finite() || !valid_on_hull(&problem.to_params(&out.params), m) {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| out.final_cost < b.final_cost) {
            best = Some((i, out));
        }
    }

    let Some((index, winner)) = best else {
        return Err(FitError::AllStartsRejected {
            family: family.tag().into(),
        });
    };
    Ok(Fit {
        params: problem.to_params(&winner.params),
        report: FitReport {
            family,
            params: winner.params,
            initial_cost: winner.initial_cost,
            final_cost: winner.final_cost,
            iterations: winner.iterations,
            reason: winner.reason,
            best_start: Some(index),
            starts: outcomes,
        },
    })
}

/// Denominators must stay above the floor on every training row. The
/// rational denominators are affine in `x`, so their minimum over the convex
/// hull of the rows is attained at a row.
fn valid_on_hull(params: &ModelParams, m: &FeatureMatrix) -> bool {
    if let ModelParams::Sigmoid(p) = params {
        if !(p.amplitude > 0.0) {
            return false;
        }
    }
    params
        .min_denominator(&m.rows)
        .is_none_or(|d| d > DENOMINATOR_FLOOR)
}

fn ssr(params: &ModelParams, m: &FeatureMatrix) -> Result<f64, FitError> {
    let pred = params.predict_rows(&m.rows)?;
    Ok(pred.iter().zip(&m.y).map(|(f, y)| (y - f) * (y - f)).sum())
}

/// Fits any family.
pub fn fit(family: Family, m: &FeatureMatrix, opts: &FitOptions) -> Result<Fit, FitError> {
    opts.validate()?;
    match family {
        Family::Linear | Family::Polynomial2 => {
            let params = if family == Family::Linear {
                ModelParams::Linear(fit_linear(m)?)
            } else {
                ModelParams::Polynomial2(fit_polynomial2(m)?)
            };
            let cost = ssr(&params, m)?;
            Ok(Fit {
                report: FitReport {
                    family,
                    params: params.to_vec(),
                    initial_cost: cost,
                    final_cost: cost,
                    iterations: 0,
                    reason: Convergence::ClosedForm,
                    best_start: None,
                    starts: vec![],
                },
                params,
            })
        }
        Family::Mlp => {
            let init = ModelParams::Mlp(init_mlp(opts.mlp.hidden, opts.seed));
            let trained = ModelParams::Mlp(fit_mlp(m, &opts.mlp, opts.seed)?);
            Ok(Fit {
                report: FitReport {
                    family,
                    params: trained.to_vec(),
                    initial_cost: ssr(&init, m)?,
                    final_cost: ssr(&trained, m)?,
                    iterations: opts.mlp.epochs,
                    reason: Convergence::Epochs,
                    best_start: None,
                    starts: vec![],
                },
                params: trained,
            })
        }
        _ => fit_nonlinear(family, m, opts),
    }
}

/// Fits `family` and packages the result with its scaling and provenance.
pub fn fit_model(
    family: Family,
    m: &FeatureMatrix,
    scaling: &ScalingSpec,
    opts: &FitOptions,
    split: Option<String>,
) -> Result<FittedModel, FitError> {
    let fit = fit(family, m, opts)?;
    let created_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(FittedModel {
        params: fit.params,
        scaling: scaling.clone(),
        features: m.features.clone(),
        metadata: FitMetadata {
            created_unix,
            seed: opts.seed,
            training_digest: m.digest(),
            training_rows: m.len(),
            split,
            fit: Some(fit.report),
        },
    })
}
