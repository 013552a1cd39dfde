//! Command-line front end. Every subcommand writes its artifacts plus one
//! `<subcommand>.manifest.json` into the output directory (`--out-dir`,
//! else `$RATDELAY_OUT_DIR`, else the current directory).
//!
//! Exit codes: 0 success, 1 usage error, 2 computation failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dataset::{
    load_csv, select_features, to_feature_matrix, write_csv, ColumnMapping, Feature,
    FeatureMatrix, SampleSet, ScalingSpec, TelemetrySample,
};
use crate::evaluation::{
    holdout_split, kfold_cv, metrics, residual_points, profile_points, time_inference,
};
use crate::fitter::{fit_model, FitOptions};
use crate::models::{Family, FittedModel};
use crate::offload::{select_node, CandidateNode, SegmentDelays, SegmentPredictor, SelectionConfig};
use crate::telemetry::{generate, GeneratorConfig, HiddenModel};

/// Console output that tolerates a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! say_raw {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

pub const OUT_DIR_ENV: &str = "RATDELAY_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ratdelay", version, about = "Rational-exponential delay models and offloading decisions")]
struct Cli {
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic telemetry and its ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Fit one model family to a telemetry CSV.
    Fit(FitArgs),
    /// Score a model file against a telemetry CSV.
    Evaluate(EvaluateArgs),
    /// K-fold cross-validation of one family.
    Cv(CvArgs),
    /// Per-sample inference latency of a model file.
    Bench(BenchArgs),
    /// Residuals against one feature, raw and binned.
    Residuals(ResidualsArgs),
    /// Choose an offloading target for a topology document.
    Decide(DecideArgs),
    /// Cross-validated accuracy and latency for several families.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// Generator config (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    correlation: Option<f64>,
    #[arg(long, value_enum)]
    hidden: Option<HiddenKind>,
    /// Output CSV, relative to the output directory.
    #[arg(long, default_value = "telemetry.csv")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum HiddenKind {
    SaturatingQueue,
    RationalExp,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FitSplit {
    /// Train on every row.
    All,
    /// Train on the complement of a seeded holdout fraction.
    Holdout,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum EvalSplit {
    /// Score every row.
    InSample,
    /// Score only the seeded holdout fraction.
    Holdout,
}

#[derive(Debug, Args, Serialize)]
struct FitArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    multistarts: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, value_enum, default_value = "all")]
    split: FitSplit,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Pearson threshold for dropping redundant features.
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    split: EvalSplit,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Seed of the holdout split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "evaluate.json")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CvArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    multistarts: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value = "cv.json")]
    out: PathBuf,
    /// Optional per-fold CSV.
    #[arg(long)]
    folds_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct BenchArgs {
    #[arg(long)]
    model: PathBuf,
    /// Rows to time; generated from `--seed` when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    warmup: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "bench.json")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ResidualsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "Utilization", value_parser = parse_feature)]
    feature: Feature,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Plot-ready `(feature_value, residual)` CSV.
    #[arg(long, default_value = "residuals.csv")]
    out: PathBuf,
    #[arg(long, default_value = "residual_profile.json")]
    profile: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DecideArgs {
    #[arg(long)]
    topology: PathBuf,
    /// Overrides the topology's alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Overrides the topology's delta_max.
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long, default_value = "decision.json")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CompareArgs {
    /// Comma-separated family tags.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_family,
        default_value = "rational-exp,mlp,rational,linear"
    )]
    families: Vec<Family>,
    /// Telemetry CSV; generated from `--seed` when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timed predictions per family.
    #[arg(long, default_value_t = 100)]
    bench_n: usize,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value = "compare.json")]
    out: PathBuf,
    /// Print an aligned text table instead of CSV.
    #[arg(long)]
    pretty: bool,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: crate::error::ModelError| e.to_string())
}

fn parse_feature(s: &str) -> Result<Feature, String> {
    s.parse().map_err(|e: crate::error::DatasetError| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Compute(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Debug, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one invocation.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<Artifact>,
    pub duration_ms: f64,
}

struct Ctx {
    out_dir: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seeds: Vec<u64>,
}

impl Ctx {
    fn out_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn input(&mut self, p: &Path) -> PathBuf {
        self.inputs.push(p.to_path_buf());
        p.to_path_buf()
    }

    fn write(&mut self, p: &Path, body: &str) -> CmdResult {
        let path = self.out_path(p);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, body)?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, p: &Path, value: &T) -> CmdResult {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.write(p, &body)
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut ctx = Ctx {
        out_dir,
        inputs: vec![],
        outputs: vec![],
        seeds: vec![],
    };
    let started = Instant::now();
    let (name, config, result) = match &cli.command {
        Command::Simulate(a) => ("simulate", to_value(a), simulate(a, &mut ctx)),
        Command::Fit(a) => ("fit", to_value(a), fit(a, &mut ctx)),
        Command::Evaluate(a) => ("evaluate", to_value(a), evaluate(a, &mut ctx)),
        Command::Cv(a) => ("cv", to_value(a), cv(a, &mut ctx)),
        Command::Bench(a) => ("bench", to_value(a), bench(a, &mut ctx)),
        Command::Residuals(a) => ("residuals", to_value(a), residuals(a, &mut ctx)),
        Command::Decide(a) => ("decide", to_value(a), decide(a, &mut ctx)),
        Command::Compare(a) => ("compare", to_value(a), compare(a, &mut ctx)),
    };
    match result.and_then(|_| write_manifest(name, config, started, &mut ctx)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn write_manifest(name: &str, config: Value, started: Instant, ctx: &mut Ctx) -> CmdResult {
    let outputs = ctx
        .outputs
        .iter()
        .map(|p| {
            Ok(Artifact {
                sha256: hex::encode(Sha256::digest(fs::read(p)?)),
                path: p.clone(),
            })
        })
        .collect::<Result<Vec<_>, std::io::Error>>()?;
    let manifest = RunManifest {
        subcommand: name.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config,
        seeds: ctx.seeds.clone(),
        inputs: ctx.inputs.clone(),
        outputs,
        duration_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let path = ctx.out_path(Path::new(&format!("{name}.manifest.json")));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn load_samples(path: &Path) -> Result<SampleSet, Failure> {
    let loaded = load_csv(path, &ColumnMapping::default())?;
    if !loaded.rejected.is_empty() {
        log::warn!("{}: skipped {} invalid rows", path.display(), loaded.rejected.len());
    }
    Ok(loaded.samples)
}

/// CSV → selected features → rescaled matrix.
fn prepare(path: &Path, threshold: f64) -> Result<(FeatureMatrix, ScalingSpec), Failure> {
    let set = load_samples(path)?;
    matrix_from_set(&set, threshold)
}

fn matrix_from_set(set: &SampleSet, threshold: f64) -> Result<(FeatureMatrix, ScalingSpec), Failure> {
    let retained = select_features(set, threshold)?;
    log::info!("retained features: {retained:?}");
    let scaling = ScalingSpec::default();
    Ok((to_feature_matrix(set, &retained, &scaling)?, scaling))
}

fn model_matrix(model: &FittedModel, set: &SampleSet) -> Result<FeatureMatrix, Failure> {
    Ok(to_feature_matrix(set, &model.features, &model.scaling)?)
}

fn check_fraction(f: f64) -> CmdResult {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--test-fraction {f} must lie strictly between 0 and 1")))
    }
}

fn fit_options(seed: u64, multistarts: usize, max_iters: usize) -> FitOptions {
    FitOptions {
        max_iterations: max_iters,
        multistarts,
        ..FitOptions::with_seed(seed)
    }
}

fn simulate(a: &SimulateArgs, ctx: &mut Ctx) -> CmdResult {
    let mut cfg = match &a.config {
        Some(p) => {
            let p = ctx.input(p);
            serde_json::from_str::<GeneratorConfig>(&fs::read_to_string(p)?)?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(kind) = a.hidden {
        cfg.hidden = match kind {
            HiddenKind::SaturatingQueue => GeneratorConfig::default().hidden,
            HiddenKind::RationalExp => HiddenModel::default_rational_exp(),
        };
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(s) = a.noise_sigma {
        cfg.noise_sigma = s;
    }
    if let Some(r) = a.correlation {
        cfg.correlation = r;
    }
    ctx.seeds.push(cfg.seed);
    let (set, truth) = generate(&cfg)?;
    let csv_path = ctx.out_path(&a.out);
    if let Some(parent) = csv_path.parent() {
        fs::create_dir_all(parent)?;
    }
    write_csv(&csv_path, &set)?;
    ctx.outputs.push(csv_path.clone());
    let sidecar = csv_path.with_extension("truth.json");
    ctx.write_json(&sidecar, &json!({ "config": cfg, "ground_truth": truth }))?;
    say!("wrote {} rows to {}", set.len(), csv_path.display());
    Ok(())
}

fn fit(a: &FitArgs, ctx: &mut Ctx) -> CmdResult {
    ctx.seeds.push(a.seed);
    let data = ctx.input(&a.data);
    let (m, scaling) = prepare(&data, a.threshold)?;
    let (train, split) = match a.split {
        FitSplit::All => (m, "all".to_string()),
        FitSplit::Holdout => {
            check_fraction(a.test_fraction)?;
            let (train_idx, _) = holdout_split(m.len(), a.test_fraction, a.seed)?;
            (
                m.subset(&train_idx),
                format!("holdout(test_fraction={}, seed={})", a.test_fraction, a.seed),
            )
        }
    };
    let opts = fit_options(a.seed, a.multistarts, a.max_iters);
    let model = fit_model(a.family, &train, &scaling, &opts, Some(split))?;
    let path = ctx.out_path(&a.out);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    model.save(&path)?;
    ctx.outputs.push(path.clone());
    if let Some(r) = &model.metadata.fit {
        say!(
            "{}: cost {:.6e} -> {:.6e} ({:?}), saved {}",
            a.family.tag(),
            r.initial_cost,
            r.final_cost,
            r.reason,
            path.display()
        );
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs, ctx: &mut Ctx) -> CmdResult {
    ctx.seeds.push(a.seed);
    let model = FittedModel::load(&ctx.input(&a.model))?;
    let set = load_samples(&ctx.input(&a.data))?;
    let m = model_matrix(&model, &set)?;
    let (rows, split) = match a.split {
        EvalSplit::InSample => (m, "in-sample".to_string()),
        EvalSplit::Holdout => {
            check_fraction(a.test_fraction)?;
            let (_, test_idx) = holdout_split(m.len(), a.test_fraction, a.seed)?;
            (
                m.subset(&test_idx),
                format!("holdout(test_fraction={}, seed={})", a.test_fraction, a.seed),
            )
        }
    };
    let pred = model.predict_matrix(&rows)?;
    let report = metrics(&rows.y, &pred)?;
    let doc = json!({
        "family": model.family(),
        "split": split,
        "report": report,
    });
    ctx.write_json(&a.out, &doc)?;
    say!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn cv(a: &CvArgs, ctx: &mut Ctx) -> CmdResult {
    ctx.seeds.push(a.seed);
    if a.k < 2 {
        return Err(Failure::Usage("--k must be at least 2".into()));
    }
    let (m, _) = prepare(&ctx.input(&a.data), a.threshold)?;
    let opts = fit_options(a.seed, a.multistarts, a.max_iters);
    let report = kfold_cv(&m, a.family, a.k, a.seed, &opts)?;
    ctx.write_json(&a.out, &report)?;
    if let Some(p) = &a.folds_csv {
        let mut body = String::from("fold,train_rows,test_rows,mae,mse,r2,error\n");
        for f in &report.folds {
            let (mae, mse, r2) = match &f.report {
                Some(r) => (
                    r.mae.to_string(),
                    r.mse.to_string(),
                    r.r2.map(|v| v.to_string()).unwrap_or_default(),
                ),
                None => Default::default(),
            };
            let err = f.error.as_deref().unwrap_or("").replace(['"', ','], ";");
            let _ = writeln!(body, "{},{},{},{mae},{mse},{r2},{err}", f.fold, f.train_rows, f.test_rows);
        }
        ctx.write(p, &body)?;
    }
    say!(
        "{} k={}: mean R2 {:?}, MAE {:.6e}, MSE {:.6e}",
        a.family.tag(),
        a.k,
        report.mean.r2,
        report.mean.mae,
        report.mean.mse
    );
    Ok(())
}

fn bench(a: &BenchArgs, ctx: &mut Ctx) -> CmdResult {
    ctx.seeds.push(a.seed);
    if a.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let model = FittedModel::load(&ctx.input(&a.model))?;
    let set = match &a.data {
        Some(p) => load_samples(&ctx.input(p))?,
        None => generate(&GeneratorConfig {
            n: a.n + a.warmup,
            seed: a.seed,
            ..GeneratorConfig::default()
        })?
        .0,
    };
    let m = model_matrix(&model, &set)?;
    let report = time_inference(&model, &m, a.n, a.warmup)?;
    let doc = json!({ "family": model.family(), "timing": report });
    ctx.write_json(&a.out, &doc)?;
    say!(
        "{}: {:.6} ms/sample (min {:.6}, max {:.6}) over {} calls",
        model.family().tag(),
        report.avg_ms,
        report.min_ms,
        report.max_ms,
        report.n
    );
    Ok(())
}

fn residuals(a: &ResidualsArgs, ctx: &mut Ctx) -> CmdResult {
    if a.bins == 0 {
        return Err(Failure::Usage("--bins must be at least 1".into()));
    }
    let model = FittedModel::load(&ctx.input(&a.model))?;
    let set = load_samples(&ctx.input(&a.data))?;
    let m = model_matrix(&model, &set)?;
    let points = residual_points(&model, &m, a.feature)?;
    let profile = profile_points(&points, a.feature, a.bins)?;
    let mut body = String::from("feature_value,residual\n");
    for (x, r) in &points {
        let _ = writeln!(body, "{x},{r}");
    }
    ctx.write(&a.out, &body)?;
    ctx.write_json(&a.profile, &profile)?;
    for b in &profile.bins {
        say!("[{:.4}, {:.4}] n={} mean={:+.6e} std={:.6e}", b.lower, b.upper, b.count, b.mean, b.std);
    }
    Ok(())
}

/// Topology document for `decide`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Topology {
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    delta_max: Option<f64>,
    nodes: Vec<CandidateNode>,
    /// Measured segment delays.
    #[serde(default)]
    segments: Option<SegmentDelays>,
    /// Model-predicted segment delays.
    #[serde(default)]
    segment_models: Option<SegmentModels>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentModels {
    d_5g: SegmentSource,
    d_edge: Vec<SegmentSource>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSource {
    /// Model file, relative to the topology document.
    model: PathBuf,
    telemetry: TelemetrySample,
}

fn decide(a: &DecideArgs, ctx: &mut Ctx) -> CmdResult {
    let topo_path = ctx.input(&a.topology);
    let topo: Topology = serde_json::from_str(&fs::read_to_string(&topo_path)?)?;
    let alpha = a.alpha.or(topo.alpha).unwrap_or(0.5);
    let delta_max = a
        .delta_max
        .or(topo.delta_max)
        .ok_or_else(|| Failure::Usage("delta_max must be given by --delta-max or the topology".into()))?;
    let cfg = SelectionConfig::new(alpha, delta_max)?;
    let base = topo_path.parent().unwrap_or(Path::new("."));

    let mut clamped = 0;
    let segments = match (topo.segments, topo.segment_models) {
        (Some(s), None) => s,
        (None, Some(sm)) => {
            let mut predict = |src: &SegmentSource| -> Result<f64, Failure> {
                let path = ctx.input(&base.join(&src.model));
                let p = SegmentPredictor::new(FittedModel::load(&path)?);
                let y = p.predict_segment(&src.telemetry)?;
                clamped += p.clamp_count();
                Ok(y)
            };
            let d_5g = predict(&sm.d_5g)?;
            let d_edge = sm.d_edge.iter().map(&mut predict).collect::<Result<Vec<_>, _>>()?;
            SegmentDelays { d_5g, d_edge }
        }
        _ => {
            return Err(Failure::Compute(
                "topology needs exactly one of `segments` or `segment_models`".into(),
            ))
        }
    };
    let decision = select_node(&segments, &topo.nodes, &cfg)?;
    let doc = json!({
        "alpha": alpha,
        "delta_max": delta_max,
        "segments": segments,
        "clamped_predictions": clamped,
        "decision": decision,
    });
    ctx.write_json(&a.out, &doc)?;
    say!(
        "selected {} (total delay {:.6e} s{})",
        decision.selected,
        decision.total_delay,
        if decision.fallback { ", 5G guard" } else { "" }
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompareRow {
    family: Family,
    model: &'static str,
    mae: f64,
    mse: f64,
    r2: Option<f64>,
    inference_ms: f64,
    complete: bool,
}

fn compare(a: &CompareArgs, ctx: &mut Ctx) -> CmdResult {
    ctx.seeds.push(a.seed);
    if a.k < 2 {
        return Err(Failure::Usage("--k must be at least 2".into()));
    }
    if a.families.is_empty() || a.bench_n == 0 {
        return Err(Failure::Usage("need at least one family and --bench-n >= 1".into()));
    }
    let (m, scaling) = match &a.data {
        Some(p) => prepare(&ctx.input(p), a.threshold)?,
        None => {
            let cfg = GeneratorConfig {
                seed: a.seed,
                ..GeneratorConfig::default()
            };
            matrix_from_set(&generate(&cfg)?.0, a.threshold)?
        }
    };
    let opts = FitOptions::with_seed(a.seed);
    let mut rows = Vec::new();
    for &family in &a.families {
        let report = kfold_cv(&m, family, a.k, a.seed, &opts)?;
        let model = fit_model(family, &m, &scaling, &opts, Some("all".into()))?;
        let timing = time_inference(&model, &m, a.bench_n, a.bench_n / 5)?;
        rows.push(CompareRow {
            family,
            model: family.label(),
            mae: report.mean.mae,
            mse: report.mean.mse,
            r2: report.mean.r2,
            inference_ms: timing.avg_ms,
            complete: report.complete,
        });
    }
    ctx.write_json(&a.out, &json!({ "k": a.k, "seed": a.seed, "rows": rows }))?;
    say_raw!("{}", if a.pretty { pretty_table(&rows) } else { csv_table(&rows) });
    Ok(())
}

fn r2_text(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into())
}

fn csv_table(rows: &[CompareRow]) -> String {
    let mut s = String::from("model,mae,mse,r2,inference_ms\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e},{:e},{},{:.6}", r.model, r.mae, r.mse, r2_text(r.r2), r.inference_ms);
    }
    s
}

fn pretty_table(rows: &[CompareRow]) -> String {
    let width = rows.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
    let mut s = format!(
        "{:<width$}  {:>12}  {:>12}  {:>8}  {:>14}\n",
        "Model", "MAE", "MSE", "R2", "Inference (ms)"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:>12.4e}  {:>12.4e}  {:>8}  {:>14.6}",
            r.model,
            r.mae,
            r.mse,
            r2_text(r.r2),
            r.inference_ms
        );
    }
    s
}
