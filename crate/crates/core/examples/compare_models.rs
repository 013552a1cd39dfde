//! Cross-validated accuracy of every family on the default generator, plus
//! per-sample prediction latency, laid out like a results table.

use ratdelay::dataset::{select_features, to_feature_matrix};
use ratdelay::evaluation::{kfold_cv, time_inference};
use ratdelay::fitter::{fit_model, FitOptions};
use ratdelay::models::Family;
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::default();
    let (set, _) = generate(&cfg)?;
    let m = to_feature_matrix(&set, &select_features(&set, 0.95)?, &cfg.scaling)?;
    let opts = FitOptions::with_seed(0);

    println!("{:<22} {:>10} {:>10} {:>8} {:>10}", "Model", "MAE", "MSE", "R2", "ms/sample");
    for family in [
        Family::RationalExp,
        Family::Mlp,
        Family::Rational,
        Family::Polynomial2,
        Family::Sigmoid,
        Family::UnivariateRational,
        Family::Linear,
    ] {
        let cv = kfold_cv(&m, family, 5, 0, &opts)?;
        let model = fit_model(family, &m, &cfg.scaling, &opts, None)?;
        let t = time_inference(&model, &m, 1000, 100)?;
        println!(
            "{:<22} {:>10.3e} {:>10.3e} {:>8.4} {:>10.6}",
            family.label(),
            cv.mean.mae,
            cv.mean.mse,
            cv.mean.r2.unwrap_or(f64::NAN),
            t.avg_ms
        );
    }
    Ok(())
}
