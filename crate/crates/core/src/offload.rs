//! Delay composition and delay/reliability-aware offloading node selection.
//!
//! Total delay per candidate:
//!
//! | target  | total delay                     |
//! |---------|---------------------------------|
//! | LOCAL   | `D_proc`                        |
//! | NEAR    | `D_5G + D_proc`                 |
//! | EDGE i  | `D_5G + D_E[i] + D_proc`        |
//!
//! Selection: when `D_5G > δ_max` the task stays LOCAL. Otherwise every
//! candidate (LOCAL included) is scored
//! `S_j = α·T_j/T_max + (1 − α)·(1 − R_j)` and the lowest score wins.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::TelemetrySample;
use crate::error::{ModelError, OffloadError};
use crate::models::FittedModel;
use crate::telemetry::{generate, GeneratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NodeKind {
    Local,
    Near,
    Edge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateNode {
    pub id: String,
    pub kind: NodeKind,
    /// 1-based path index, EDGE nodes only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// Constant processing delay, seconds.
    pub processing_delay: f64,
    /// Reliability score in `[0, 1]`.
    pub reliability: f64,
}

impl CandidateNode {
    pub fn local(id: &str, processing_delay: f64, reliability: f64) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Local,
            index: None,
            processing_delay,
            reliability,
        }
    }

    pub fn near(id: &str, processing_delay: f64, reliability: f64) -> Self {
        Self {
            kind: NodeKind::Near,
            ..Self::local(id, processing_delay, reliability)
        }
    }

    pub fn edge(id: &str, index: usize, processing_delay: f64, reliability: f64) -> Self {
        Self {
            kind: NodeKind::Edge,
            index: Some(index),
            ..Self::local(id, processing_delay, reliability)
        }
    }

    /// Tie-break key: LOCAL < NEAR < EDGE1 < EDGE2 < ...
    fn priority(&self) -> (NodeKind, usize) {
        (self.kind, self.index.unwrap_or(0))
    }

    fn validate(&self) -> Result<(), OffloadError> {
        let invalid = |reason: String| OffloadError::InvalidNode {
            id: self.id.clone(),
            reason,
        };
        if !(0.0..=1.0).contains(&self.reliability) {
            return Err(invalid(format!("reliability {} outside [0, 1]", self.reliability)));
        }
        if !(self.processing_delay >= 0.0 && self.processing_delay.is_finite()) {
            return Err(invalid(format!(
                "processing delay {} must be finite and non-negative",
                self.processing_delay
            )));
        }
        if self.kind == NodeKind::Edge && self.index.is_none() {
            return Err(OffloadError::MissingIndex(self.id.clone()));
        }
        Ok(())
    }
}

/// Network segment delays, seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDelays {
    pub d_5g: f64,
    /// `d_edge[i - 1]` is the path delay to edge server `i`.
    pub d_edge: Vec<f64>,
}

impl SegmentDelays {
    fn validate(&self) -> Result<(), OffloadError> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.d_5g) || !self.d_edge.iter().all(|v| ok(*v)) {
            return Err(OffloadError::InvalidSegments(
                "segment delays must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    fn edge(&self, node: &CandidateNode) -> Result<f64, OffloadError> {
        let index = node
            .index
            .ok_or_else(|| OffloadError::MissingIndex(node.id.clone()))?;
        index
            .checked_sub(1)
            .and_then(|i| self.d_edge.get(i))
            .copied()
            .ok_or_else(|| OffloadError::MissingSegment {
                id: node.id.clone(),
                index,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Weight on normalized delay; `1 − alpha` weighs unreliability.
    pub alpha: f64,
    /// 5G uplink delay above which the task stays local, seconds.
    pub delta_max: f64,
}

impl SelectionConfig {
    pub fn new(alpha: f64, delta_max: f64) -> Result<Self, OffloadError> {
        let cfg = Self { alpha, delta_max };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default `alpha = 0.5`; the guard threshold has no default.
    pub fn with_delta_max(delta_max: f64) -> Result<Self, OffloadError> {
        Self::new(0.5, delta_max)
    }

    pub fn validate(&self) -> Result<(), OffloadError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(OffloadError::InvalidConfig(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.delta_max > 0.0) {
            return Err(OffloadError::InvalidConfig(format!(
                "delta_max {} must be positive",
                self.delta_max
            )));
        }
        Ok(())
    }
}

/// Total delay for each node, in input order.
pub fn compose_delays(s: &SegmentDelays, nodes: &[CandidateNode]) -> Result<Vec<f64>, OffloadError> {
    if nodes.is_empty() {
        return Err(OffloadError::NoCandidates);
    }
    s.validate()?;
    nodes
        .iter()
        .map(|n| {
            n.validate()?;
            Ok(match n.kind {
                NodeKind::Local => n.processing_delay,
                NodeKind::Near => s.d_5g + n.processing_delay,
                NodeKind::Edge => s.d_5g + s.edge(n)? + n.processing_delay,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub id: String,
    pub total_delay: f64,
    pub normalized_delay: f64,
    pub reliability: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub selected: String,
    pub total_delay: f64,
    /// `None` when the guard fired and no scores were computed.
    pub score: Option<f64>,
    pub fallback: bool,
    pub candidates: Vec<ScoredCandidate>,
}

/// Picks an offloading target.
///
/// Equal scores resolve to the higher-priority node (LOCAL, NEAR, EDGE1,
/// EDGE2, ...). When every total delay is zero the normalized delays are
/// taken as zero and reliability alone decides.
pub fn select_node(
    s: &SegmentDelays,
    nodes: &[CandidateNode],
    cfg: &SelectionConfig,
) -> Result<Decision, OffloadError> {
    if nodes.is_empty() {
        return Err(OffloadError::NoCandidates);
    }
    cfg.validate()?;
    let locals = nodes.iter().filter(|n| n.kind == NodeKind::Local).count();
    if locals != 1 {
        return Err(OffloadError::LocalCount(locals));
    }
    let totals = compose_delays(s, nodes)?;

    if s.d_5g > cfg.delta_max {
        let (local, t) = nodes
            .iter()
            .zip(&totals)
            .find(|(n, _)| n.kind == NodeKind::Local)
            .unwrap();
        return Ok(Decision {
            selected: local.id.clone(),
            total_delay: *t,
            score: None,
            fallback: true,
            candidates: vec![],
        });
    }

    let t_max = totals.iter().copied().fold(0.0, f64::max);
    let candidates: Vec<ScoredCandidate> = nodes
        .iter()
        .zip(&totals)
        .map(|(n, &t)| {
            let normalized = if t_max > 0.0 { t / t_max } else { 0.0 };
            ScoredCandidate {
                id: n.id.clone(),
                total_delay: t,
                normalized_delay: normalized,
                reliability: n.reliability,
                score: cfg.alpha * normalized + (1.0 - cfg.alpha) * (1.0 - n.reliability),
            }
        })
        .collect();

    let best = (0..nodes.len())
        .min_by(|&i, &j| {
            candidates[i]
                .score
                .total_cmp(&candidates[j].score)
                .then_with(|| nodes[i].priority().cmp(&nodes[j].priority()))
                .then(Ordering::Equal)
        })
        .unwrap();
    Ok(Decision {
        selected: candidates[best].id.clone(),
        total_delay: candidates[best].total_delay,
        score: Some(candidates[best].score),
        fallback: false,
        candidates,
    })
}

/// Model-backed segment delay estimator.
///
/// Counts predictions that came out negative and were clamped to zero; the
/// counter may be bumped from several threads at once.
#[derive(Debug)]
pub struct SegmentPredictor {
    pub model: FittedModel,
    clamped: AtomicU64,
}

impl SegmentPredictor {
    pub fn new(model: FittedModel) -> Self {
        Self {
            model,
            clamped: AtomicU64::new(0),
        }
    }

    /// Rescales the sample with the model's stored scaling and predicts.
    pub fn predict_segment(&self, telemetry: &TelemetrySample) -> Result<f64, ModelError> {
        let y = self.model.predict_sample(telemetry)?;
        if y < 0.0 {
            self.clamped.fetch_add(1, AtomicOrdering::Relaxed);
            log::warn!("negative segment delay {y:e} clamped to 0");
            return Ok(0.0);
        }
        Ok(y)
    }

    pub fn predict_batch(&self, telemetry: &[TelemetrySample]) -> Result<Vec<f64>, ModelError> {
        telemetry
            .iter()
            .enumerate()
            .map(|(i, t)| self.predict_segment(t).map_err(|e| e.at_row(i)))
            .collect()
    }

    pub fn clamp_count(&self) -> u64 {
        self.clamped.load(AtomicOrdering::Relaxed)
    }
}

/// Fraction of decisions whose selected node matches the reference.
pub fn agreement_rate(decisions: &[Decision], reference: &[Decision]) -> f64 {
    assert_eq!(decisions.len(), reference.len(), "decision counts differ");
    if decisions.is_empty() {
        return 0.0;
    }
    let hits = decisions
        .iter()
        .zip(reference)
        .filter(|(a, b)| a.selected == b.selected)
        .count();
    hits as f64 / decisions.len() as f64
}

/// Settings for the simulated decision-accuracy experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyConfig {
    pub epochs: usize,
    pub seed: u64,
    /// Number of edge paths; one extra telemetry row per epoch feeds `D_5G`.
    pub edges: usize,
    pub selection: SelectionConfig,
    /// Processing delays are drawn uniformly from `[0, max_processing]`.
    pub max_processing: f64,
    /// Reliabilities are drawn uniformly from `[min_reliability, 1]`.
    pub min_reliability: f64,
    /// Source of segment telemetry; `n` and `seed` are overridden.
    pub generator: GeneratorConfig,
}

impl Default for AccuracyConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            seed: 1,
            edges: 3,
            selection: SelectionConfig {
                alpha: 0.5,
                delta_max: 0.3,
            },
            max_processing: 0.2,
            min_reliability: 0.9,
            generator: GeneratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub epochs: usize,
    /// `(model name, fraction of epochs matching the true-delay choice)`.
    pub agreement: Vec<(String, f64)>,
    /// Negative predictions clamped per model.
    pub clamped: Vec<(String, u64)>,
}

/// Replays `epochs` offloading decisions. Each epoch draws fresh telemetry
/// for the 5G segment and every edge path, plus random processing delays and
/// reliabilities. The oracle decides from the noiseless generator delays;
/// each model decides from its own predictions of the same segments.
pub fn decision_accuracy(
    models: &[(&str, &FittedModel)],
    cfg: &AccuracyConfig,
) -> Result<AccuracyReport, OffloadError> {
    cfg.selection.validate()?;
    if cfg.epochs == 0 {
        return Err(OffloadError::InvalidConfig("need at least one epoch".into()));
    }
    if !(cfg.max_processing >= 0.0) || !(0.0..=1.0).contains(&cfg.min_reliability) {
        return Err(OffloadError::InvalidConfig(
            "processing bound must be non-negative and reliability floor in [0, 1]".into(),
        ));
    }
    let per_epoch = cfg.edges + 1;
    let gen_cfg = GeneratorConfig {
        n: cfg.epochs * per_epoch,
        seed: cfg.seed,
        ..cfg.generator.clone()
    };
    let (set, truth) = generate(&gen_cfg)?;
    let predictors: Vec<SegmentPredictor> = models
        .iter()
        .map(|(_, m)| SegmentPredictor::new((*m).clone()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xD1B5_4A32_D192_ED03);
    let mut hits = vec![0usize; models.len()];

    for e in 0..cfg.epochs {
        let rows = e * per_epoch..(e + 1) * per_epoch;
        let mut nodes = vec![
            CandidateNode::local("local", 0.0, 0.0),
            CandidateNode::near("near", 0.0, 0.0),
        ];
        nodes.extend((1..=cfg.edges).map(|i| CandidateNode::edge(&format!("edge{i}"), i, 0.0, 0.0)));
        for n in &mut nodes {
            n.processing_delay = rng.random_range(0.0..=cfg.max_processing);
            n.reliability = rng.random_range(cfg.min_reliability..=1.0);
        }
        let true_delays = &truth.noiseless[rows.clone()];
        let oracle = select_node(
            &SegmentDelays {
                d_5g: true_delays[0],
                d_edge: true_delays[1..].to_vec(),
            },
            &nodes,
            &cfg.selection,
        )?;
        for (k, p) in predictors.iter().enumerate() {
            let pred = p.predict_batch(&set.samples[rows.clone()])?;
            let d = select_node(
                &SegmentDelays {
                    d_5g: pred[0],
                    d_edge: pred[1..].to_vec(),
                },
                &nodes,
                &cfg.selection,
            )?;
            if d.selected == oracle.selected {
                hits[k] += 1;
            }
        }
    }
    Ok(AccuracyReport {
        epochs: cfg.epochs,
        agreement: models
            .iter()
            .zip(&hits)
            .map(|((name, _), h)| (name.to_string(), *h as f64 / cfg.epochs as f64))
            .collect(),
        clamped: models
            .iter()
            .zip(&predictors)
            .map(|((name, _), p)| (name.to_string(), p.clamp_count()))
            .collect(),
    })
}
