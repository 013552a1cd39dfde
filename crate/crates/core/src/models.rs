//! Delay model families and the persisted model file.
//!
//! Every family is a pure function of the rescaled inputs `(x1, x2, x3)`.
//! The headline family is the rational-exponential model
//!
//! ```text
//!            a1 x1 + a2 x2 + a3 x3
//! y(x) = ---------------------------- * exp(d x3)
//!        1 + b1 x1 + b2 x2 + b3 x3 + c
//! ```
//!
//! Its coefficients are not identifiable: for any `k > 0`, `a -> k a`,
//! `b -> k b`, `c -> k (1 + c) - 1` leaves every prediction unchanged. Fits
//! are therefore compared through their predictions, never their raw
//! parameters.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Feature, FeatureMatrix, ScalingSpec, TelemetrySample};
use crate::error::ModelError;
use crate::fitter::FitReport;

/// Predictions with a denominator at or below this value are rejected.
pub const DENOMINATOR_FLOOR: f64 = 1e-6;

/// Current model file schema version.
pub const MODEL_FILE_VERSION: u32 = 1;

fn finite(v: f64) -> Result<f64, ModelError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::NonFinite { row: None })
    }
}

fn check_denominator(den: f64) -> Result<(), ModelError> {
    if den > DENOMINATOR_FLOOR {
        Ok(())
    } else {
        Err(ModelError::Singular {
            row: None,
            denominator: den,
        })
    }
}

fn dot3(w: &[f64; 3], x: &[f64; 3]) -> f64 {
    w[0] * x[0] + w[1] * x[1] + w[2] * x[2]
}

/// Coefficients of the rational-exponential model.
///
/// Parameter order: `a1 a2 a3 b1 b2 b3 c d`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RationalExpParams {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: f64,
    pub d: f64,
}

impl RationalExpParams {
    pub const LEN: usize = 8;
    pub const NAMES: [&'static str; 8] = ["a1", "a2", "a3", "b1", "b2", "b3", "c", "d"];

    pub fn from_slice(p: &[f64]) -> Self {
        Self {
            a: [p[0], p[1], p[2]],
            b: [p[3], p[4], p[5]],
            c: p[6],
            d: p[7],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.a[0], self.a[1], self.a[2], self.b[0], self.b[1], self.b[2], self.c, self.d,
        ]
    }

    pub fn numerator(&self, x: &[f64; 3]) -> f64 {
        dot3(&self.a, x)
    }

    pub fn denominator(&self, x: &[f64; 3]) -> f64 {
        1.0 + dot3(&self.b, x) + self.c
    }

    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        let den = self.denominator(x);
        check_denominator(den)?;
        finite(self.numerator(x) / den * (self.d * x[2]).exp())
    }

    /// Partial derivatives of the prediction with respect to each parameter.
    pub fn jacobian(&self, x: &[f64; 3]) -> Result<[f64; 8], ModelError> {
        let den = self.denominator(x);
        check_denominator(den)?;
        let num = self.numerator(x);
        let e = (self.d * x[2]).exp();
        let da = e / den;
        let db = -num * e / (den * den);
        let y = num * da;
        Ok([
            x[0] * da,
            x[1] * da,
            x[2] * da,
            x[0] * db,
            x[1] * db,
            x[2] * db,
            db,
            x[2] * y,
        ])
    }

    /// The equivalent parameterization after multiplying numerator and
    /// denominator by `k`.
    pub fn rescaled(&self, k: f64) -> Self {
        Self {
            a: self.a.map(|v| v * k),
            b: self.b.map(|v| v * k),
            c: k * (1.0 + self.c) - 1.0,
            d: self.d,
        }
    }
}

/// Rational-exponential model with the exponential switched off.
///
/// Parameter order: `a1 a2 a3 b1 b2 b3 c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RationalParams {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: f64,
}

impl RationalParams {
    pub const LEN: usize = 7;
    pub const NAMES: [&'static str; 7] = ["a1", "a2", "a3", "b1", "b2", "b3", "c"];

    pub fn from_slice(p: &[f64]) -> Self {
        Self {
            a: [p[0], p[1], p[2]],
            b: [p[3], p[4], p[5]],
            c: p[6],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.a[0], self.a[1], self.a[2], self.b[0], self.b[1], self.b[2], self.c,
        ]
    }

    pub fn with_rate(&self, d: f64) -> RationalExpParams {
        RationalExpParams {
            a: self.a,
            b: self.b,
            c: self.c,
            d,
        }
    }

    pub fn denominator(&self, x: &[f64; 3]) -> f64 {
        1.0 + dot3(&self.b, x) + self.c
    }

    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        let den = self.denominator(x);
        check_denominator(den)?;
        finite(dot3(&self.a, x) / den)
    }

    pub fn jacobian(&self, x: &[f64; 3]) -> Result<[f64; 7], ModelError> {
        let den = self.denominator(x);
        check_denominator(den)?;
        let num = dot3(&self.a, x);
        let da = 1.0 / den;
        let db = -num / (den * den);
        Ok([
            x[0] * da,
            x[1] * da,
            x[2] * da,
            x[0] * db,
            x[1] * db,
            x[2] * db,
            db,
        ])
    }
}

/// `Y = a1 X^a2 / (1 + a3 X^a4)` over a single input column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateRationalParams {
    pub a: [f64; 4],
    pub input: Feature,
}

impl UnivariateRationalParams {
    pub const LEN: usize = 4;
    pub const NAMES: [&'static str; 4] = ["a1", "a2", "a3", "a4"];

    pub fn column(&self) -> usize {
        self.input
            .model_column()
            .expect("univariate input must be a model column")
    }

    pub fn predict_value(&self, x: f64) -> Result<f64, ModelError> {
        if !(x > 0.0) {
            return Err(ModelError::NonPositiveInput {
                row: None,
                value: x,
            });
        }
        let [a1, a2, a3, a4] = self.a;
        let den = 1.0 + a3 * x.powf(a4);
        check_denominator(den)?;
        finite(a1 * x.powf(a2) / den)
    }

    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        self.predict_value(x[self.column()])
    }

    pub fn jacobian_value(&self, x: f64) -> Result<[f64; 4], ModelError> {
        if !(x > 0.0) {
            return Err(ModelError::NonPositiveInput {
                row: None,
                value: x,
            });
        }
        let [a1, a2, a3, a4] = self.a;
        let ln = x.ln();
        let p = x.powf(a2);
        let q = x.powf(a4);
        let den = 1.0 + a3 * q;
        check_denominator(den)?;
        let f = a1 * p / den;
        Ok([
            p / den,
            f * ln,
            -f * q / den,
            -f * a3 * q * ln / den,
        ])
    }
}

/// Full second-order polynomial.
///
/// Coefficient order: `1, x1, x2, x3, x1², x2², x3², x1·x2, x1·x3, x2·x3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolynomialParams {
    pub coef: [f64; 10],
}

impl PolynomialParams {
    pub const LEN: usize = 10;
    pub const NAMES: [&'static str; 10] = [
        "c0", "x1", "x2", "x3", "x1^2", "x2^2", "x3^2", "x1*x2", "x1*x3", "x2*x3",
    ];

    pub fn basis(x: &[f64; 3]) -> [f64; 10] {
        let [x1, x2, x3] = *x;
        [
            1.0,
            x1,
            x2,
            x3,
            x1 * x1,
            x2 * x2,
            x3 * x3,
            x1 * x2,
            x1 * x3,
            x2 * x3,
        ]
    }

    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        let phi = Self::basis(x);
        finite(self.coef.iter().zip(phi).map(|(c, p)| c * p).sum())
    }
}

/// Ordinary linear model. Parameter order: `w0 w1 w2 w3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearParams {
    pub intercept: f64,
    pub weights: [f64; 3],
}

impl LinearParams {
    pub const LEN: usize = 4;
    pub const NAMES: [&'static str; 4] = ["w0", "w1", "w2", "w3"];

    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        finite(self.intercept + dot3(&self.weights, x))
    }
}

/// Scaled logistic over a linear score: `L / (1 + exp(-(w·x + β)))`.
///
/// Parameter order: `L w1 w2 w3 beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidParams {
    pub amplitude: f64,
    pub weights: [f64; 3],
    pub bias: f64,
}

impl SigmoidParams {
    pub const LEN: usize = 5;
    pub const NAMES: [&'static str; 5] = ["L", "w1", "w2", "w3", "beta"];

    fn logistic(&self, x: &[f64; 3]) -> f64 {
        1.0 / (1.0 + (-(dot3(&self.weights, x) + self.bias)).exp())
    }

    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        finite(self.amplitude * self.logistic(x))
    }

    pub fn jacobian(&self, x: &[f64; 3]) -> Result<[f64; 5], ModelError> {
        let s = self.logistic(x);
        let g = self.amplitude * s * (1.0 - s);
        Ok([s, g * x[0], g * x[1], g * x[2], g])
    }
}

/// Single-hidden-layer tanh network `w_out · tanh(W x + b) + b_out`.
///
/// Flattened order: for each hidden unit `w_i1 w_i2 w_i3 b_i`, then every
/// output weight, then the output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub w_hidden: Vec<[f64; 3]>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl MlpParams {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            w_hidden: vec![[0.0; 3]; hidden],
            b_hidden: vec![0.0; hidden],
            w_out: vec![0.0; hidden],
            b_out: 0.0,
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_hidden.len()
    }

    pub fn len_for(hidden: usize) -> usize {
        5 * hidden + 1
    }

    pub fn forward(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        let mut out = self.b_out;
        for ((w, b), v) in self.w_hidden.iter().zip(&self.b_hidden).zip(&self.w_out) {
            out += v * (dot3(w, x) + b).tanh();
        }
        finite(out)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::len_for(self.hidden()));
        for (w, b) in self.w_hidden.iter().zip(&self.b_hidden) {
            v.extend_from_slice(w);
            v.push(*b);
        }
        v.extend_from_slice(&self.w_out);
        v.push(self.b_out);
        v
    }

    pub fn from_slice(p: &[f64]) -> Result<Self, ModelError> {
        if p.len() < 6 || (p.len() - 1) % 5 != 0 {
            return Err(ModelError::Invalid(format!(
                "mlp parameter vector of length {} does not match 5H+1",
                p.len()
            )));
        }
        let h = (p.len() - 1) / 5;
        let mut m = Self::zeros(h);
        for i in 0..h {
            let s = &p[4 * i..4 * i + 4];
            m.w_hidden[i] = [s[0], s[1], s[2]];
            m.b_hidden[i] = s[3];
        }
        m.w_out.copy_from_slice(&p[4 * h..5 * h]);
        m.b_out = p[5 * h];
        Ok(m)
    }
}

/// Model family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RationalExp,
    Rational,
    UnivariateRational,
    #[serde(rename = "poly2")]
    Polynomial2,
    Linear,
    Sigmoid,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::RationalExp,
        Family::Rational,
        Family::UnivariateRational,
        Family::Polynomial2,
        Family::Linear,
        Family::Sigmoid,
        Family::Mlp,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::RationalExp => "rational-exp",
            Family::Rational => "rational",
            Family::UnivariateRational => "univariate-rational",
            Family::Polynomial2 => "poly2",
            Family::Linear => "linear",
            Family::Sigmoid => "sigmoid",
            Family::Mlp => "mlp",
        }
    }

    /// Display label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Family::RationalExp => "Rational-Exponential",
            Family::Rational => "Rational",
            Family::UnivariateRational => "Univariate Rational",
            Family::Polynomial2 => "Polynomial (2nd Order)",
            Family::Linear => "Linear Regression",
            Family::Sigmoid => "Sigmoid",
            Family::Mlp => "Neural Network (MLP)",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .or(match s.as_str() {
                "rational-exponential" | "ratexp" => Some(Family::RationalExp),
                "polynomial" | "polynomial2" => Some(Family::Polynomial2),
                _ => None,
            })
            .ok_or(ModelError::UnknownFamily(s))
    }
}

/// Parameters of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    RationalExp(RationalExpParams),
    Rational(RationalParams),
    UnivariateRational(UnivariateRationalParams),
    Polynomial2(PolynomialParams),
    Linear(LinearParams),
    Sigmoid(SigmoidParams),
    Mlp(MlpParams),
}

impl ModelParams {
    pub fn family(&self) -> Family {
        match self {
            ModelParams::RationalExp(_) => Family::RationalExp,
            ModelParams::Rational(_) => Family::Rational,
            ModelParams::UnivariateRational(_) => Family::UnivariateRational,
            ModelParams::Polynomial2(_) => Family::Polynomial2,
            ModelParams::Linear(_) => Family::Linear,
            ModelParams::Sigmoid(_) => Family::Sigmoid,
            ModelParams::Mlp(_) => Family::Mlp,
        }
    }

    #[inline]
    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        match self {
            ModelParams::RationalExp(p) => p.predict(x),
            ModelParams::Rational(p) => p.predict(x),
            ModelParams::UnivariateRational(p) => p.predict(x),
            ModelParams::Polynomial2(p) => p.predict(x),
            ModelParams::Linear(p) => p.predict(x),
            ModelParams::Sigmoid(p) => p.predict(x),
            ModelParams::Mlp(p) => p.forward(x),
        }
    }

    /// Predictions for every row; errors carry the offending row index.
    pub fn predict_rows(&self, rows: &[[f64; 3]]) -> Result<Vec<f64>, ModelError> {
        rows.iter()
            .enumerate()
            .map(|(i, x)| self.predict(x).map_err(|e| e.at_row(i)))
            .collect()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            ModelParams::RationalExp(p) => p.to_vec(),
            ModelParams::Rational(p) => p.to_vec(),
            ModelParams::UnivariateRational(p) => p.a.to_vec(),
            ModelParams::Polynomial2(p) => p.coef.to_vec(),
            ModelParams::Linear(p) => vec![p.intercept, p.weights[0], p.weights[1], p.weights[2]],
            ModelParams::Sigmoid(p) => vec![
                p.amplitude,
                p.weights[0],
                p.weights[1],
                p.weights[2],
                p.bias,
            ],
            ModelParams::Mlp(p) => p.to_vec(),
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let fixed: &[&str] = match self {
            ModelParams::RationalExp(_) => &RationalExpParams::NAMES,
            ModelParams::Rational(_) => &RationalParams::NAMES,
            ModelParams::UnivariateRational(_) => &UnivariateRationalParams::NAMES,
            ModelParams::Polynomial2(_) => &PolynomialParams::NAMES,
            ModelParams::Linear(_) => &LinearParams::NAMES,
            ModelParams::Sigmoid(_) => &SigmoidParams::NAMES,
            ModelParams::Mlp(p) => {
                let h = p.hidden();
                let mut names = Vec::with_capacity(MlpParams::len_for(h));
                for i in 1..=h {
                    for n in ["w1", "w2", "w3", "b"] {
                        names.push(format!("h{i}.{n}"));
                    }
                }
                names.extend((1..=h).map(|i| format!("out.w{i}")));
                names.push("out.b".into());
                return names;
            }
        };
        fixed.iter().map(|s| s.to_string()).collect()
    }

    /// Rebuilds parameters from a flat vector in documented order.
    pub fn from_vec(
        family: Family,
        p: &[f64],
        input: Option<Feature>,
    ) -> Result<ModelParams, ModelError> {
        let expect = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(ModelError::ParamCount {
                    family: family.tag().into(),
                    expected: n,
                    got: p.len(),
                })
            }
        };
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Invalid("non-finite parameter".into()));
        }
        Ok(match family {
            Family::RationalExp => {
                expect(RationalExpParams::LEN)?;
                ModelParams::RationalExp(RationalExpParams::from_slice(p))
            }
            Family::Rational => {
                expect(RationalParams::LEN)?;
                ModelParams::Rational(RationalParams::from_slice(p))
            }
            Family::UnivariateRational => {
                expect(UnivariateRationalParams::LEN)?;
                let input = input.unwrap_or(Feature::Utilization);
                if input.model_column().is_none() {
                    return Err(ModelError::Invalid(format!(
                        "{input} is not a model input column"
                    )));
                }
                ModelParams::UnivariateRational(UnivariateRationalParams {
                    a: [p[0], p[1], p[2], p[3]],
                    input,
                })
            }
            Family::Polynomial2 => {
                expect(PolynomialParams::LEN)?;
                let mut coef = [0.0; 10];
                coef.copy_from_slice(p);
                ModelParams::Polynomial2(PolynomialParams { coef })
            }
            Family::Linear => {
                expect(LinearParams::LEN)?;
                ModelParams::Linear(LinearParams {
                    intercept: p[0],
                    weights: [p[1], p[2], p[3]],
                })
            }
            Family::Sigmoid => {
                expect(SigmoidParams::LEN)?;
                if p[0] <= 0.0 {
                    return Err(ModelError::Invalid("sigmoid amplitude must be positive".into()));
                }
                ModelParams::Sigmoid(SigmoidParams {
                    amplitude: p[0],
                    weights: [p[1], p[2], p[3]],
                    bias: p[4],
                })
            }
            Family::Mlp => ModelParams::Mlp(MlpParams::from_slice(p)?),
        })
    }

    /// Smallest rational denominator over the given rows, if the family has one.
    pub fn min_denominator(&self, rows: &[[f64; 3]]) -> Option<f64> {
        let den: Box<dyn Fn(&[f64; 3]) -> f64> = match self {
            ModelParams::RationalExp(p) => Box::new(move |x| p.denominator(x)),
            ModelParams::Rational(p) => Box::new(move |x| p.denominator(x)),
            ModelParams::UnivariateRational(p) => {
                let col = p.column();
                Box::new(move |x| 1.0 + p.a[2] * x[col].powf(p.a[3]))
            }
            _ => return None,
        };
        rows.iter().map(|x| den(x)).reduce(f64::min)
    }
}

/// Fit provenance stored with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub created_unix: u64,
    pub seed: u64,
    pub training_digest: String,
    pub training_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
}

/// A trained model bundled with the scaling used to train it.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub params: ModelParams,
    pub scaling: ScalingSpec,
    pub features: Vec<Feature>,
    pub metadata: FitMetadata,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    family: Family,
    param_names: Vec<String>,
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_feature: Option<Feature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hidden_units: Option<usize>,
    scaling: ScalingSpec,
    features: Vec<Feature>,
    metadata: FitMetadata,
}

impl FittedModel {
    pub fn family(&self) -> Family {
        self.params.family()
    }

    /// Prediction from already-rescaled inputs.
    #[inline]
    pub fn predict(&self, x: &[f64; 3]) -> Result<f64, ModelError> {
        self.params.predict(x)
    }

    /// Prediction from a raw telemetry sample, applying the stored scaling.
    pub fn predict_sample(&self, sample: &TelemetrySample) -> Result<f64, ModelError> {
        let x = self
            .scaling
            .model_inputs(sample)
            .map_err(|e| ModelError::Invalid(e.to_string()))?;
        self.params.predict(&x)
    }

    pub fn predict_matrix(&self, m: &FeatureMatrix) -> Result<Vec<f64>, ModelError> {
        self.params.predict_rows(&m.rows)
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let file = ModelFile {
            version: MODEL_FILE_VERSION,
            family: self.family(),
            param_names: self.params.param_names(),
            params: self.params.to_vec(),
            input_feature: match &self.params {
                ModelParams::UnivariateRational(p) => Some(p.input),
                _ => None,
            },
            hidden_units: match &self.params {
                ModelParams::Mlp(p) => Some(p.hidden()),
                _ => None,
            },
            scaling: self.scaling.clone(),
            features: self.features.clone(),
            metadata: self.metadata.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_FILE_VERSION {
            return Err(ModelError::Version(file.version));
        }
        let params = ModelParams::from_vec(file.family, &file.params, file.input_feature)?;
        if let (ModelParams::Mlp(p), Some(h)) = (&params, file.hidden_units) {
            if p.hidden() != h {
                return Err(ModelError::Invalid(format!(
                    "hidden_units {h} disagrees with parameter count"
                )));
            }
        }
        for f in Feature::MODEL_INPUTS {
            file.scaling
                .divisor(f)
                .map_err(|e| ModelError::Invalid(e.to_string()))?;
        }
        Ok(Self {
            params,
            scaling: file.scaling,
            features: file.features,
            metadata: file.metadata,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rx(a: [f64; 3], b: [f64; 3], c: f64, d: f64) -> RationalExpParams {
        RationalExpParams { a, b, c, d }
    }

    #[test]
    fn rational_exp_closed_form_cases() {
        let p = rx([0.3, -1.2, 4.0], [0.5, 0.1, 0.2], -0.5, 0.7);
        assert_eq!(p.predict(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        let p = rx([1.0; 3], [0.0; 3], 0.0, 0.0);
        assert_eq!(p.predict(&[1.0, 1.0, 1.0]).unwrap(), 3.0);
        let p = rx([0.0, 0.0, 1.0], [0.0; 3], 0.0, 2f64.ln());
        assert!((p.predict(&[0.0, 0.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        let p = rx([2.0, 0.0, 0.0], [1.0, 0.0, 0.0], 0.0, 0.0);
        assert_eq!(p.predict(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn singular_denominator_is_rejected() {
        let p = rx([1.0; 3], [0.0, -1.0, 0.0], 0.0, 0.0);
        let err = p.predict(&[0.0, 1.0, 0.0]).unwrap_err();
        assert!(matches!(err, ModelError::Singular { row: None, .. }));
        let m = ModelParams::RationalExp(p);
        let err = m
            .predict_rows(&[[0.0, 0.2, 0.0], [0.0, 0.5, 0.0], [0.0, 2.0, 0.0]])
            .unwrap_err();
        assert!(matches!(err, ModelError::Singular { row: Some(2), .. }));
    }

    #[test]
    fn jacobian_at_origin_vanishes() {
        let p = rx([0.3, -1.2, 4.0], [0.5, 0.1, 0.2], 0.1, 0.7);
        assert_eq!(p.jacobian(&[0.0; 3]).unwrap(), [0.0; 8]);
    }

    #[test]
    fn jacobian_rate_partial_without_exponential() {
        let p = rx([0.3, 0.2, 0.4], [0.5, 0.1, 0.2], 0.1, 0.0);
        let x = [0.7, 1.3, 2.1];
        let j = p.jacobian(&x).unwrap();
        assert_eq!(j[7], x[2] * p.predict(&x).unwrap());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p: Vec<f64> = (0..8).map(|_| rng.random_range(-0.5..0.5)).collect();
            let x = [
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
            ];
            let params = RationalExpParams::from_slice(&p);
            if params.denominator(&x) < 0.2 {
                continue;
            }
            let j = params.jacobian(&x).unwrap();
            for i in 0..8 {
                let h = 1e-6 * p[i].abs().max(1.0);
                let mut up = p.clone();
                let mut dn = p.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (RationalExpParams::from_slice(&up).predict(&x).unwrap()
                    - RationalExpParams::from_slice(&dn).predict(&x).unwrap())
                    / (2.0 * h);
                let scale = j[i].abs().max(1e-8);
                assert!((fd - j[i]).abs() / scale < 1e-6, "param {i}: {fd} vs {}", j[i]);
            }
        }
    }

    #[test]
    fn rescaling_leaves_predictions_unchanged() {
        let p = rx([0.3, 0.2, 0.4], [0.5, 0.1, 0.2], 0.1, 0.3);
        let x = [0.7, 1.3, 2.1];
        let y = p.predict(&x).unwrap();
        for k in [0.25, 3.0, 17.0] {
            let q = p.rescaled(k);
            assert!(((q.predict(&x).unwrap() - y) / y).abs() < 1e-12);
        }
    }

    #[test]
    fn rational_equals_rational_exp_with_zero_rate() {
        let r = RationalParams {
            a: [0.3, 0.2, 0.4],
            b: [0.5, 0.1, 0.2],
            c: 0.1,
        };
        let e = r.with_rate(0.0);
        assert_eq!(r.predict(&[0.0; 3]).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = [
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
            ];
            assert_eq!(r.predict(&x).unwrap(), e.predict(&x).unwrap());
        }
    }

    #[test]
    fn univariate_rational_cases() {
        let p = |a: [f64; 4]| UnivariateRationalParams {
            a,
            input: Feature::Utilization,
        };
        assert!((p([1.0, 1.0, 0.0, 1.0]).predict_value(5.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((p([1.0, 2.0, 0.0, 1.0]).predict_value(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((p([2.0, 1.0, 1.0, 1.0]).predict_value(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            p([1.0, 1.0, 0.0, 1.0]).predict_value(0.0),
            Err(ModelError::NonPositiveInput { .. })
        ));
        assert!(matches!(
            p([1.0, 1.0, -1.0, 1.0]).predict_value(1.0),
            Err(ModelError::Singular { .. })
        ));
        // Column selection: Utilization is x2.
        assert_eq!(p([1.0, 1.0, 0.0, 1.0]).predict(&[9.0, 4.0, 7.0]).unwrap(), 4.0);
    }

    #[test]
    fn baseline_constant_models() {
        let x = [0.4, 12.0, 3.3];
        let lin = LinearParams {
            intercept: 0.1,
            weights: [0.0; 3],
        };
        assert_eq!(lin.predict(&x).unwrap(), 0.1);
        let sig = SigmoidParams {
            amplitude: 1.0,
            weights: [0.0; 3],
            bias: 0.0,
        };
        assert_eq!(sig.predict(&x).unwrap(), 0.5);
        let mut coef = [0.0; 10];
        coef[0] = 2.5;
        assert_eq!(PolynomialParams { coef }.predict(&x).unwrap(), 2.5);
        let mut mlp = MlpParams::zeros(16);
        mlp.b_out = 0.3;
        assert_eq!(mlp.forward(&x).unwrap(), 0.3);
    }

    #[test]
    fn sigmoid_jacobian_matches_differences() {
        let p = [0.8, 0.3, -0.02, 0.4, -0.1];
        let x = [0.5, 30.0, 2.0];
        let build = |v: &[f64]| SigmoidParams {
            amplitude: v[0],
            weights: [v[1], v[2], v[3]],
            bias: v[4],
        };
        let j = build(&p).jacobian(&x).unwrap();
        for i in 0..5 {
            let h = 1e-6;
            let mut up = p;
            let mut dn = p;
            up[i] += h;
            dn[i] -= h;
            let fd = (build(&up).predict(&x).unwrap() - build(&dn).predict(&x).unwrap()) / (2.0 * h);
            assert!((fd - j[i]).abs() < 1e-7 * j[i].abs().max(1.0));
        }
    }

    #[test]
    fn univariate_jacobian_matches_differences() {
        let base = [0.02, 0.9, 0.01, 1.3];
        let x = 7.5;
        let build = |a: [f64; 4]| UnivariateRationalParams {
            a,
            input: Feature::Utilization,
        };
        let j = build(base).jacobian_value(x).unwrap();
        for i in 0..4 {
            let h = 1e-6 * base[i].abs().max(1.0);
            let mut up = base;
            let mut dn = base;
            up[i] += h;
            dn[i] -= h;
            let fd = (build(up).predict_value(x).unwrap() - build(dn).predict_value(x).unwrap())
                / (2.0 * h);
            assert!((fd - j[i]).abs() < 1e-6 * j[i].abs().max(1e-6), "param {i}");
        }
    }

    #[test]
    fn monotone_in_arrival_rate() {
        let p = rx([0.0, 0.0, 0.5], [0.0; 3], 0.0, 0.3);
        let mut prev = p.predict(&[0.2, 0.3, 0.0]).unwrap();
        for i in 1..100 {
            let y = p.predict(&[0.2, 0.3, i as f64 * 0.05]).unwrap();
            assert!(y > prev);
            prev = y;
        }
    }

    #[test]
    fn family_tags_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.tag().parse::<Family>().unwrap(), f);
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(json, format!("\"{}\"", f.tag()));
        }
        assert!(matches!(
            "lstm".parse::<Family>(),
            Err(ModelError::UnknownFamily(_))
        ));
    }

    #[test]
    fn model_file_roundtrip_and_width_checks() {
        let model = FittedModel {
            params: ModelParams::RationalExp(rx([0.3, 0.2, 0.4], [0.5, 0.1, 0.2], 0.1, 0.3)),
            scaling: ScalingSpec::default(),
            features: Feature::MODEL_INPUTS.to_vec(),
            metadata: FitMetadata {
                created_unix: 0,
                seed: 7,
                training_digest: "abc".into(),
                training_rows: 10,
                split: None,
                fit: None,
            },
        };
        let json = model.to_json().unwrap();
        assert!(json.contains("\"version\": 1"));
        assert!(json.contains("\"family\": \"rational-exp\""));
        let back = FittedModel::from_json(&json).unwrap();
        assert_eq!(back, model);

        let bad = json.replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(FittedModel::from_json(&bad), Err(ModelError::Version(9))));

        assert!(matches!(
            ModelParams::from_vec(Family::Linear, &[1.0, 2.0], None),
            Err(ModelError::ParamCount { expected: 4, got: 2, .. })
        ));
    }

    #[test]
    fn mlp_flatten_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..MlpParams::len_for(4)).map(|_| rng.random()).collect();
        let m = MlpParams::from_slice(&v).unwrap();
        assert_eq!(m.hidden(), 4);
        assert_eq!(m.to_vec(), v);
        assert!(MlpParams::from_slice(&v[..7]).is_err());
    }
}
