//! Recovers a known rational-exponential surface from noiseless data, then
//! saves and reloads the fitted model.

use ratdelay::dataset::{to_feature_matrix, Feature};
use ratdelay::fitter::{fit_model, FitOptions};
use ratdelay::models::{Family, FittedModel};
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::rational_exp(2000, 11, 0.0);
    let (set, truth) = generate(&cfg)?;
    let m = to_feature_matrix(&set, &Feature::MODEL_INPUTS, &cfg.scaling)?;

    let model = fit_model(Family::RationalExp, &m, &cfg.scaling, &FitOptions::with_seed(11), None)?;
    let report = model.metadata.fit.as_ref().unwrap();
    println!(
        "cost {:.3e} -> {:.3e} in {} iterations ({:?})",
        report.initial_cost, report.final_cost, report.iterations, report.reason
    );
    for (name, v) in model.params.param_names().iter().zip(model.params.to_vec()) {
        println!("  {name:>3} = {v:+.6}");
    }

    let pred = model.predict_matrix(&m)?;
    let rmse = (pred
        .iter()
        .zip(&truth.noiseless)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64)
        .sqrt();
    println!("RMSE against ground truth: {rmse:.3e} s");

    let path = std::env::temp_dir().join("ratdelay_rational_exp.json");
    model.save(&path)?;
    let back = FittedModel::load(&path)?;
    assert_eq!(back.predict_matrix(&m)?, pred);
    println!("model round-tripped through {}", path.display());
    Ok(())
}
