//! Generates a small synthetic telemetry set and writes it as CSV.
//!
//! cargo run --example simulate_telemetry -- [rows] [seed]

use ratdelay::dataset::{pearson, write_csv, Feature};
use ratdelay::telemetry::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5000);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let cfg = GeneratorConfig {
        n,
        seed,
        ..GeneratorConfig::default()
    };
    let (set, truth) = generate(&cfg)?;
    let delays = set.delays();
    let mean = delays.iter().sum::<f64>() / delays.len() as f64;
    let r = pearson(
        &set.column(Feature::ClientFrameSize),
        &set.column(Feature::ArrivalRateCl),
    )?;
    println!("{n} rows, mean delay {mean:.5} s, noise std {:.2e} s", truth.noise_std);
    println!("pearson(frame size, client rate) = {r:.4}");

    let path = std::env::temp_dir().join("ratdelay_telemetry.csv");
    write_csv(&path, &set)?;
    println!("wrote {}", path.display());
    Ok(())
}
