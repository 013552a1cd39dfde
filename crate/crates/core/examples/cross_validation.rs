//! Five-fold cross-validation of the rational-exponential model, fold by fold.

use ratdelay::dataset::{select_features, to_feature_matrix};
use ratdelay::evaluation::kfold_cv;
use ratdelay::fitter::FitOptions;
use ratdelay::models::Family;
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GeneratorConfig {
        n: 3000,
        seed: 5,
        ..GeneratorConfig::default()
    };
    let (set, _) = generate(&cfg)?;
    let m = to_feature_matrix(&set, &select_features(&set, 0.95)?, &cfg.scaling)?;
    let report = kfold_cv(&m, Family::RationalExp, 5, 42, &FitOptions::with_seed(42))?;
    for f in &report.folds {
        match &f.report {
            Some(r) => println!(
                "fold {}: train {} test {}  MAE {:.3e}  R2 {:.4}",
                f.fold,
                f.train_rows,
                f.test_rows,
                r.mae,
                r.r2.unwrap_or(f64::NAN)
            ),
            None => println!("fold {} failed: {}", f.fold, f.error.as_deref().unwrap_or("?")),
        }
    }
    println!(
        "mean R2 {:.4} (sd {:.4}), complete: {}",
        report.mean.r2.unwrap_or(f64::NAN),
        report.std.r2.unwrap_or(f64::NAN),
        report.complete
    );
    Ok(())
}
