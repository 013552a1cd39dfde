use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratdelay::dataset::{
    load_csv, pearson, select_features, to_feature_matrix, write_csv, ColumnMapping, Feature,
    FeatureMatrix,
};
use ratdelay::evaluation::{kfold_cv, metrics, time_inference};
use ratdelay::fitter::{fit, fit_model, least_squares, FitOptions};
use ratdelay::models::{Family, RationalExpParams};
use ratdelay::offload::{compose_delays, CandidateNode, NodeKind, SegmentDelays};
use ratdelay::telemetry::{generate, GeneratorConfig, HiddenModel};

fn default_matrix() -> FeatureMatrix {
    let cfg = GeneratorConfig::default();
    let (set, _) = generate(&cfg).unwrap();
    to_feature_matrix(&set, &select_features(&set, 0.95).unwrap(), &cfg.scaling).unwrap()
}

#[test]
fn generated_csv_reloads_field_for_field() {
    let (set, _) = generate(&GeneratorConfig {
        n: 700,
        seed: 31,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_csv(&path, &set).unwrap();
    let back = load_csv(&path, &ColumnMapping::default()).unwrap();
    assert!(back.rejected.is_empty());
    assert_eq!(back.samples.samples, set.samples);
}

#[test]
fn engineered_correlation_is_reproduced() {
    for seed in 0..3 {
        let (set, _) = generate(&GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let r = pearson(
            &set.column(Feature::ClientFrameSize),
            &set.column(Feature::ArrivalRateCl),
        )
        .unwrap();
        assert!((r - 0.98).abs() <= 0.02, "seed {seed}: {r}");
    }
}

#[test]
fn rational_matches_rational_exp_when_rate_is_zero() {
    let p = RationalExpParams {
        a: [0.08, 0.0008, 0.01],
        b: [0.2, -0.004, 0.05],
        c: 0.1,
        d: 0.0,
    };
    let cfg = GeneratorConfig {
        n: 1500,
        seed: 8,
        hidden: HiddenModel::rational_exp(p),
        ..GeneratorConfig::default()
    };
    let (set, _) = generate(&cfg).unwrap();
    let m = to_feature_matrix(&set, &Feature::MODEL_INPUTS, &cfg.scaling).unwrap();
    let opts = FitOptions::with_seed(8);
    let r2 = |family| {
        let f = fit(family, &m, &opts).unwrap();
        metrics(&m.y, &f.params.predict_rows(&m.rows).unwrap()).unwrap().r2.unwrap()
    };
    let (ra, re) = (r2(Family::Rational), r2(Family::RationalExp));
    assert!((ra - re).abs() <= 0.01, "rational {ra}, rational-exp {re}");
}

/// Gaussian elimination with partial pivoting on the normal equations.
fn normal_equation_solve(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = a[0].len();
    let mut m = vec![vec![0.0; n + 1]; n];
    for (row, &t) in a.iter().zip(y) {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += row[i] * row[j];
            }
            m[i][n] += row[i] * t;
        }
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut w = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * w[j]).sum();
        w[i] = (m[i][n] - s) / m[i][i];
    }
    w
}

#[test]
fn least_squares_cost_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let cols = rng.random_range(1..6);
        let rows = rng.random_range(cols + 2..60);
        let a: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let y: Vec<f64> = (0..rows).map(|_| rng.random_range(-5.0..5.0)).collect();
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        let cost = |w: &[f64]| -> f64 {
            a.iter()
                .zip(&y)
                .map(|(r, t)| {
                    let f: f64 = r.iter().zip(w).map(|(x, c)| x * c).sum();
                    (t - f) * (t - f)
                })
                .sum()
        };
        let ours = cost(&least_squares(&flat, cols, &y).unwrap());
        let reference = cost(&normal_equation_solve(&a, &y));
        assert!((ours - reference).abs() <= 1e-8 * reference.max(1e-300), "{ours} vs {reference}");
    }
}

#[test]
fn mean_predictor_scores_zero() {
    let y = [0.3, 0.1, 0.7, 0.2, 0.9];
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let r = metrics(&y, &[mean; 5]).unwrap();
    assert!(r.r2.unwrap().abs() < 1e-15);
}

#[test]
fn default_data_cross_validation() {
    let m = default_matrix();
    let opts = FitOptions::with_seed(0);
    let re = kfold_cv(&m, Family::RationalExp, 5, 0, &opts).unwrap();
    let li = kfold_cv(&m, Family::Linear, 5, 0, &opts).unwrap();
    let (a, b) = (re.mean.r2.unwrap(), li.mean.r2.unwrap());
    assert!(a >= 0.98, "rational-exp {a}");
    assert!(a > b, "rational-exp {a} vs linear {b}");
    assert_eq!(re, kfold_cv(&m, Family::RationalExp, 5, 0, &opts).unwrap());
}

#[test]
fn repeated_timings_agree_within_an_order_of_magnitude() {
    let cfg = GeneratorConfig {
        n: 500,
        ..GeneratorConfig::default()
    };
    let (set, _) = generate(&cfg).unwrap();
    let m = to_feature_matrix(&set, &Feature::MODEL_INPUTS, &cfg.scaling).unwrap();
    let model = fit_model(Family::RationalExp, &m, &cfg.scaling, &FitOptions::with_seed(0), None).unwrap();
    // Best of a few runs on each side, so one descheduled batch cannot dominate.
    let best = || {
        (0..3)
            .map(|_| time_inference(&model, &m, 20_000, 500).unwrap().avg_ms)
            .fold(f64::INFINITY, f64::min)
    };
    let (a, b) = (best(), best());
    assert!(a / b < 10.0 && b / a < 10.0, "{a} vs {b}");
}

#[test]
fn composed_delays_match_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let edges: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..0.1)).collect();
        let s = SegmentDelays {
            d_5g: rng.random_range(0.0..0.1),
            d_edge: edges.clone(),
        };
        let nodes = vec![
            CandidateNode::local("l", rng.random_range(0.0..0.5), 1.0),
            CandidateNode::near("n", rng.random_range(0.0..0.5), 1.0),
            CandidateNode::edge("e1", 1, rng.random_range(0.0..0.5), 1.0),
            CandidateNode::edge("e2", 2, rng.random_range(0.0..0.5), 1.0),
            CandidateNode::edge("e3", 3, rng.random_range(0.0..0.5), 1.0),
        ];
        let t = compose_delays(&s, &nodes).unwrap();
        for (n, got) in nodes.iter().zip(t) {
            let want = match n.kind {
                NodeKind::Local => n.processing_delay,
                NodeKind::Near => n.processing_delay + s.d_5g,
                NodeKind::Edge => n.processing_delay + s.d_5g + edges[n.index.unwrap() - 1],
            };
            assert!((got - want).abs() <= 1e-15, "{}: {got} vs {want}", n.id);
        }
    }
}

#[test]
fn compare_on_default_data_ranks_rational_exp_above_linear() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let code = ratdelay::cli::run([
        "ratdelay",
        "--out-dir",
        &out,
        "compare",
        "--families",
        "linear,rational-exp",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compare.json")).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let r2 = |tag: &str| {
        rows.iter()
            .find(|r| r["family"] == tag)
            .and_then(|r| r["r2"].as_f64())
            .unwrap()
    };
    assert!(r2("rational-exp") > r2("linear"));
}
