//! Correlation screening of the raw telemetry columns.

use ratdelay::dataset::{correlation_matrix, FeatureSelector};
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (set, _) = generate(&GeneratorConfig::default())?;
    for ((a, b), r) in correlation_matrix(&set) {
        if a < b {
            match r {
                Some(r) => println!("{:>18} ~ {:<18} {r:+.3}", a.name(), b.name()),
                None => println!("{:>18} ~ {:<18} undefined", a.name(), b.name()),
            }
        }
    }
    let kept = FeatureSelector::default().select(&set)?;
    let names: Vec<_> = kept.iter().map(|f| f.name()).collect();
    println!("retained: {}", names.join(", "));
    Ok(())
}
