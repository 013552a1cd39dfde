//! Mean residual per utilization decile for a linear and a
//! rational-exponential fit. The linear model under-predicts at high load.

use ratdelay::dataset::{select_features, to_feature_matrix, Feature};
use ratdelay::evaluation::residual_profile;
use ratdelay::fitter::{fit_model, FitOptions};
use ratdelay::models::Family;
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::default();
    let (set, _) = generate(&cfg)?;
    let m = to_feature_matrix(&set, &select_features(&set, 0.95)?, &cfg.scaling)?;
    let opts = FitOptions::with_seed(0);
    let linear = fit_model(Family::Linear, &m, &cfg.scaling, &opts, None)?;
    let rational = fit_model(Family::RationalExp, &m, &cfg.scaling, &opts, None)?;
    let pl = residual_profile(&linear, &m, Feature::Utilization, 10)?;
    let pr = residual_profile(&rational, &m, Feature::Utilization, 10)?;

    println!("{:>17} {:>12} {:>12}", "utilization", "linear", "rational-exp");
    for (a, b) in pl.bins.iter().zip(&pr.bins) {
        println!(
            "{:>7.1}..{:<7.1} {:>+12.5} {:>+12.5}",
            a.lower, a.upper, a.mean, b.mean
        );
    }
    Ok(())
}
