//! Per-sample latency of the fitted rational-exponential model and the MLP.

use ratdelay::dataset::{select_features, to_feature_matrix};
use ratdelay::evaluation::time_inference;
use ratdelay::fitter::{fit_model, FitOptions};
use ratdelay::models::Family;
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig {
        n: 2000,
        ..GeneratorConfig::default()
    };
    let (set, _) = generate(&cfg)?;
    let m = to_feature_matrix(&set, &select_features(&set, 0.95)?, &cfg.scaling)?;
    for family in [Family::RationalExp, Family::Mlp, Family::Linear] {
        let model = fit_model(family, &m, &cfg.scaling, &FitOptions::with_seed(1), None)?;
        let t = time_inference(&model, &m, 10_000, 1000)?;
        println!(
            "{:<22} avg {:.6} ms  min {:.6}  max {:.6}",
            family.label(),
            t.avg_ms,
            t.min_ms,
            t.max_ms
        );
    }
    Ok(())
}
