//! How often decisions driven by each fitted model agree with decisions
//! made from the true segment delays.

use ratdelay::dataset::{select_features, to_feature_matrix};
use ratdelay::fitter::{fit_model, FitOptions};
use ratdelay::models::Family;
use ratdelay::offload::{decision_accuracy, AccuracyConfig};
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig::default();
    let (set, _) = generate(&cfg)?;
    let m = to_feature_matrix(&set, &select_features(&set, 0.95)?, &cfg.scaling)?;
    let opts = FitOptions::with_seed(0);

    let families = [Family::RationalExp, Family::Rational, Family::Polynomial2, Family::Linear];
    let models = families
        .iter()
        .map(|f| fit_model(*f, &m, &cfg.scaling, &opts, None))
        .collect::<Result<Vec<_>, _>>()?;
    let named: Vec<_> = families.iter().map(|f| f.label()).zip(&models).collect();

    let report = decision_accuracy(&named, &AccuracyConfig::default())?;
    for ((name, rate), (_, clamped)) in report.agreement.iter().zip(&report.clamped) {
        println!("{name:<22} {:.1}% agreement, {clamped} clamped predictions", rate * 100.0);
    }
    Ok(())
}
