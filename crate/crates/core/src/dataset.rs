//! Telemetry ingestion, correlation-based feature selection and rescaling.
//!
//! Raw telemetry carries four candidate features. The delay models consume
//! exactly three of them, in a fixed column order:
//!
//! | column | feature            |
//! |--------|--------------------|
//! | `x1`   | `Client_Frame_Size`|
//! | `x2`   | `Utilization`      |
//! | `x3`   | `Arrival_rate_All` |
//!
//! `Arrival_rate_Cl` tracks frame size almost perfectly and is dropped by
//! [`select_features`] when that redundancy is present.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DatasetError;

/// A raw telemetry feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "Client_Frame_Size")]
    ClientFrameSize,
    #[serde(rename = "Arrival_rate_Cl")]
    ArrivalRateCl,
    #[serde(rename = "Arrival_rate_All")]
    ArrivalRateAll,
    #[serde(rename = "Utilization")]
    Utilization,
}

impl Feature {
    /// All raw features, in canonical CSV column order.
    pub const ALL: [Feature; 4] = [
        Feature::ClientFrameSize,
        Feature::ArrivalRateCl,
        Feature::ArrivalRateAll,
        Feature::Utilization,
    ];

    /// Model input columns `(x1, x2, x3)`.
    pub const MODEL_INPUTS: [Feature; 3] = [
        Feature::ClientFrameSize,
        Feature::Utilization,
        Feature::ArrivalRateAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::ClientFrameSize => "Client_Frame_Size",
            Feature::ArrivalRateCl => "Arrival_rate_Cl",
            Feature::ArrivalRateAll => "Arrival_rate_All",
            Feature::Utilization => "Utilization",
        }
    }

    /// Raw value of this feature in a sample.
    pub fn value(self, sample: &TelemetrySample) -> f64 {
        match self {
            Feature::ClientFrameSize => sample.client_frame_size,
            Feature::ArrivalRateCl => sample.arrival_rate_cl,
            Feature::ArrivalRateAll => sample.arrival_rate_all,
            Feature::Utilization => sample.utilization,
        }
    }

    /// Column index in a [`FeatureMatrix`], if this is a model input.
    pub fn model_column(self) -> Option<usize> {
        Feature::MODEL_INPUTS.iter().position(|f| *f == self)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| DatasetError::UnknownFeature(s.to_string()))
    }
}

/// One monitored observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySample {
    /// Bytes.
    pub client_frame_size: f64,
    /// Packets per second at the client interface.
    pub arrival_rate_cl: f64,
    /// Packets per second from all devices on the segment.
    pub arrival_rate_all: f64,
    /// Link utilization as recorded; may exceed 100.
    pub utilization: f64,
    /// End-to-end delay in seconds.
    #[serde(default)]
    pub delay: f64,
}

impl TelemetrySample {
    /// Checks the row invariants, returning the first violation.
    pub fn validate(&self) -> Result<(), String> {
        for feature in Feature::ALL {
            let v = feature.value(self);
            if !v.is_finite() {
                return Err(format!("{feature} is not finite"));
            }
            if v < 0.0 {
                return Err(format!("{feature} is negative ({v})"));
            }
        }
        if !self.delay.is_finite() || self.delay <= 0.0 {
            return Err(format!("Delay must be positive, got {}", self.delay));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    File(PathBuf),
    Generator { seed: u64 },
    Derived(String),
}

/// Ordered collection of telemetry samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<TelemetrySample>,
    pub provenance: Provenance,
}

impl SampleSet {
    pub fn new(samples: Vec<TelemetrySample>, provenance: Provenance) -> Self {
        Self {
            samples,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn column(&self, feature: Feature) -> Vec<f64> {
        self.samples.iter().map(|s| feature.value(s)).collect()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.delay).collect()
    }
}

/// Header names for each telemetry field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub client_frame_size: String,
    pub arrival_rate_cl: String,
    pub arrival_rate_all: String,
    pub utilization: String,
    pub delay: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            client_frame_size: Feature::ClientFrameSize.name().into(),
            arrival_rate_cl: Feature::ArrivalRateCl.name().into(),
            arrival_rate_all: Feature::ArrivalRateAll.name().into(),
            utilization: Feature::Utilization.name().into(),
            delay: "Delay".into(),
        }
    }
}

impl ColumnMapping {
    fn names(&self) -> [&str; 5] {
        [
            &self.client_frame_size,
            &self.arrival_rate_cl,
            &self.arrival_rate_all,
            &self.utilization,
            &self.delay,
        ]
    }
}

/// A data row dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    /// 1-based data row index (the header is not counted).
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadedSamples {
    pub samples: SampleSet,
    pub rejected: Vec<RejectedRow>,
}

/// Reads a telemetry CSV. Rows that violate sample invariants are skipped
/// and listed in `rejected`; malformed cells abort the load.
pub fn load_csv(path: &Path, mapping: &ColumnMapping) -> Result<LoadedSamples, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(mapping.names()) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))?;
    }

    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let mut vals = [0.0f64; 5];
        for ((v, &col), name) in vals.iter_mut().zip(&idx).zip(mapping.names()) {
            let cell = record.get(col).unwrap_or("");
            *v = cell.parse::<f64>().map_err(|_| DatasetError::NonNumeric {
                row,
                column: name.to_string(),
                value: cell.to_string(),
            })?;
        }
        let sample = TelemetrySample {
            client_frame_size: vals[0],
            arrival_rate_cl: vals[1],
            arrival_rate_all: vals[2],
            utilization: vals[3],
            delay: vals[4],
        };
        match sample.validate() {
            Ok(()) => samples.push(sample),
            Err(reason) => {
                log::warn!("{}: rejected row {row}: {reason}", path.display());
                rejected.push(RejectedRow { row, reason });
            }
        }
    }
    if samples.is_empty() {
        return Err(DatasetError::NoValidRows(path.display().to_string()));
    }
    Ok(LoadedSamples {
        samples: SampleSet::new(samples, Provenance::File(path.to_path_buf())),
        rejected,
    })
}

/// Writes samples with the canonical header. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_csv(path: &Path, set: &SampleSet) -> Result<(), DatasetError> {
    let file = std::fs::File::create(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(ColumnMapping::default().names())?;
    for s in &set.samples {
        writer.write_record([
            s.client_frame_size.to_string(),
            s.arrival_rate_cl.to_string(),
            s.arrival_rate_all.to_string(),
            s.utilization.to_string(),
            s.delay.to_string(),
        ])?;
    }
    writer.flush().map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, DatasetError> {
    if xs.len() != ys.len() {
        return Err(DatasetError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(DatasetError::TooShort(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(DatasetError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pairwise correlations between raw features; `None` where a column is constant.
pub fn correlation_matrix(set: &SampleSet) -> BTreeMap<(Feature, Feature), Option<f64>> {
    let cols: Vec<Vec<f64>> = Feature::ALL.iter().map(|f| set.column(*f)).collect();
    let mut out = BTreeMap::new();
    for i in 0..Feature::ALL.len() {
        for j in (i + 1)..Feature::ALL.len() {
            let r = pearson(&cols[i], &cols[j]).ok();
            out.insert((Feature::ALL[i], Feature::ALL[j]), r);
        }
    }
    out
}

/// Correlation-threshold feature filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelector {
    /// Pairs with `|r|` strictly above this are redundant.
    pub threshold: f64,
    /// Features in the order they are sacrificed; the earlier member of a
    /// redundant pair is dropped.
    pub drop_priority: Vec<Feature>,
}

impl Default for FeatureSelector {
    fn default() -> Self {
        Self {
            threshold: 0.95,
            drop_priority: vec![
                Feature::ArrivalRateCl,
                Feature::ArrivalRateAll,
                Feature::Utilization,
                Feature::ClientFrameSize,
            ],
        }
    }
}

impl FeatureSelector {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            threshold,
            ..Self::default()
        }
    }

    /// Retained features in canonical order.
    pub fn select(&self, set: &SampleSet) -> Result<Vec<Feature>, DatasetError> {
        if set.is_empty() {
            return Err(DatasetError::EmptySampleSet);
        }
        let corr = correlation_matrix(set);
        let rho = |a: Feature, b: Feature| {
            let key = if a < b { (a, b) } else { (b, a) };
            corr.get(&key).copied().flatten()
        };
        let mut retained: Vec<Feature> = Feature::ALL.to_vec();
        for &candidate in &self.drop_priority {
            let redundant = retained
                .iter()
                .filter(|&&other| other != candidate)
                .any(|&other| rho(candidate, other).is_some_and(|r| r.abs() > self.threshold));
            if redundant {
                retained.retain(|f| *f != candidate);
            }
        }
        Ok(retained)
    }
}

/// Drops redundant features using the default drop priority.
pub fn select_features(set: &SampleSet, threshold: f64) -> Result<Vec<Feature>, DatasetError> {
    FeatureSelector::with_threshold(threshold).select(set)
}

/// Per-feature divisors applied before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub divisors: BTreeMap<Feature, f64>,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        Self {
            divisors: BTreeMap::from([
                (Feature::ClientFrameSize, 1e6),
                (Feature::ArrivalRateCl, 1e3),
                (Feature::ArrivalRateAll, 1e3),
                (Feature::Utilization, 1.0),
            ]),
        }
    }
}

impl ScalingSpec {
    pub fn identity() -> Self {
        Self {
            divisors: Feature::ALL.iter().map(|f| (*f, 1.0)).collect(),
        }
    }

    pub fn divisor(&self, feature: Feature) -> Result<f64, DatasetError> {
        let value = *self
            .divisors
            .get(&feature)
            .ok_or(DatasetError::MissingDivisor(feature))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(DatasetError::InvalidDivisor { feature, value });
        }
        Ok(value)
    }

    /// Rescaled model inputs `(x1, x2, x3)` for one sample.
    pub fn model_inputs(&self, sample: &TelemetrySample) -> Result<[f64; 3], DatasetError> {
        let mut x = [0.0; 3];
        for (slot, f) in x.iter_mut().zip(Feature::MODEL_INPUTS) {
            *slot = f.value(sample) / self.divisor(f)?;
        }
        Ok(x)
    }
}

/// Model-ready design matrix. Columns are always `(x1, x2, x3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<[f64; 3]>,
    pub y: Vec<f64>,
    pub features: Vec<Feature>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<[f64; 3]>, y: Vec<f64>) -> Self {
        assert_eq!(rows.len(), y.len(), "row and target counts differ");
        Self {
            rows,
            y,
            features: Feature::MODEL_INPUTS.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    /// Rows picked by index, in the given order.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            features: self.features.clone(),
        }
    }

    /// SHA-256 over the little-endian bytes of every row and target.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (row, y) in self.rows.iter().zip(&self.y) {
            for v in row {
                hasher.update(v.to_le_bytes());
            }
            hasher.update(y.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Rescales the retained model inputs into a [`FeatureMatrix`].
pub fn to_feature_matrix(
    set: &SampleSet,
    retained: &[Feature],
    scaling: &ScalingSpec,
) -> Result<FeatureMatrix, DatasetError> {
    for f in retained {
        scaling.divisor(*f)?;
    }
    for f in Feature::MODEL_INPUTS {
        if !retained.contains(&f) {
            return Err(DatasetError::MissingFeature(f));
        }
    }
    let rows = set
        .samples
        .iter()
        .map(|s| scaling.model_inputs(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix {
        rows,
        y: set.delays(),
        features: Feature::MODEL_INPUTS.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn sample(f: f64, cl: f64, all: f64, u: f64, d: f64) -> TelemetrySample {
        TelemetrySample {
            client_frame_size: f,
            arrival_rate_cl: cl,
            arrival_rate_all: all,
            utilization: u,
            delay: d,
        }
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "Client_Frame_Size,Arrival_rate_Cl,Arrival_rate_All,Utilization,Delay\n";

    #[test]
    fn loads_rows_in_file_order() {
        let f = write_tmp(&format!(
            "{HEADER}1000,10,100,5,0.1\n2000,20,200,6,0.2\n3000,30,300,7,0.3\n"
        ));
        let loaded = load_csv(f.path(), &ColumnMapping::default()).unwrap();
        assert_eq!(loaded.samples.len(), 3);
        assert!(loaded.rejected.is_empty());
        let delays = loaded.samples.delays();
        assert_eq!(delays, vec![0.1, 0.2, 0.3]);
        assert_eq!(loaded.samples.samples[1], sample(2000.0, 20.0, 200.0, 6.0, 0.2));
    }

    #[test]
    fn negative_delay_row_is_rejected_with_index() {
        let f = write_tmp(&format!(
            "{HEADER}1000,10,100,5,0.1\n2000,20,200,6,-0.2\n3000,30,300,7,0.3\n"
        ));
        let loaded = load_csv(f.path(), &ColumnMapping::default()).unwrap();
        assert_eq!(loaded.samples.len(), 2);
        assert_eq!(loaded.rejected.len(), 1);
        assert_eq!(loaded.rejected[0].row, 2);
    }

    #[test]
    fn custom_headers_and_column_order() {
        let f = write_tmp("delay_s,util,size,all,cl\n0.5,3,100,7,9\n");
        let mapping = ColumnMapping {
            client_frame_size: "size".into(),
            arrival_rate_cl: "cl".into(),
            arrival_rate_all: "all".into(),
            utilization: "util".into(),
            delay: "delay_s".into(),
        };
        let loaded = load_csv(f.path(), &mapping).unwrap();
        assert_eq!(loaded.samples.samples[0], sample(100.0, 9.0, 7.0, 3.0, 0.5));
    }

    #[test]
    fn load_errors() {
        let missing = load_csv(Path::new("/nonexistent/x.csv"), &ColumnMapping::default());
        assert!(matches!(missing, Err(DatasetError::Io { .. })));

        let f = write_tmp("Client_Frame_Size,Arrival_rate_Cl,Utilization,Delay\n1,2,3,4\n");
        let err = load_csv(f.path(), &ColumnMapping::default()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingColumn(ref c) if c == "Arrival_rate_All"));

        let f = write_tmp(&format!("{HEADER}1,2,abc,4,0.1\n"));
        let err = load_csv(f.path(), &ColumnMapping::default()).unwrap_err();
        assert!(matches!(err, DatasetError::NonNumeric { row: 1, .. }));

        let f = write_tmp(&format!("{HEADER}1,2,3,4,0\n1,2,3,4,-1\n"));
        let err = load_csv(f.path(), &ColumnMapping::default()).unwrap_err();
        assert!(matches!(err, DatasetError::NoValidRows(_)));
    }

    #[test]
    fn pearson_basic_cases() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(DatasetError::LengthMismatch { .. })
        ));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(DatasetError::TooShort(1))));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(DatasetError::ZeroVariance)
        ));
    }

    fn uncorrelated_set() -> SampleSet {
        // Columns built from distinct incommensurate sequences.
        let samples = (0..200)
            .map(|i| {
                let t = i as f64;
                sample(
                    1000.0 + (t * 0.731).sin() * 500.0,
                    50.0 + (t * 1.913).cos() * 20.0,
                    300.0 + (t * 2.377).sin() * 100.0,
                    40.0 + (t * 3.141).cos() * 30.0,
                    0.1,
                )
            })
            .collect();
        SampleSet::new(samples, Provenance::Derived("test".into()))
    }

    #[test]
    fn low_correlation_keeps_everything() {
        let set = uncorrelated_set();
        for r in correlation_matrix(&set).values() {
            assert!(r.unwrap().abs() < 0.5);
        }
        assert_eq!(select_features(&set, 0.95).unwrap(), Feature::ALL.to_vec());
        assert_eq!(select_features(&set, 1.0).unwrap(), Feature::ALL.to_vec());
    }

    #[test]
    fn redundant_client_rate_is_dropped() {
        let mut set = uncorrelated_set();
        for s in &mut set.samples {
            s.arrival_rate_cl = s.client_frame_size * 0.01 + 3.0;
        }
        assert_eq!(
            select_features(&set, 0.95).unwrap(),
            vec![
                Feature::ClientFrameSize,
                Feature::ArrivalRateAll,
                Feature::Utilization
            ]
        );
    }

    #[test]
    fn empty_set_is_an_error() {
        let set = SampleSet::new(vec![], Provenance::Derived("empty".into()));
        assert!(matches!(
            select_features(&set, 0.95),
            Err(DatasetError::EmptySampleSet)
        ));
    }

    #[test]
    fn feature_matrix_scaling() {
        let set = SampleSet::new(
            vec![sample(1_000_000.0, 10.0, 2000.0, 80.0, 0.25)],
            Provenance::Derived("t".into()),
        );
        let m = to_feature_matrix(&set, &Feature::ALL, &ScalingSpec::default()).unwrap();
        assert_eq!(m.rows[0], [1.0, 80.0, 2.0]);
        assert_eq!(m.y, vec![0.25]);

        let m = to_feature_matrix(&set, &Feature::ALL, &ScalingSpec::identity()).unwrap();
        assert_eq!(m.rows[0], [1_000_000.0, 80.0, 2000.0]);
    }

    #[test]
    fn feature_matrix_errors() {
        let set = uncorrelated_set();
        let mut scaling = ScalingSpec::default();
        scaling.divisors.remove(&Feature::Utilization);
        assert!(matches!(
            to_feature_matrix(&set, &Feature::ALL, &scaling),
            Err(DatasetError::MissingDivisor(Feature::Utilization))
        ));
        let retained = [Feature::ClientFrameSize, Feature::Utilization];
        assert!(matches!(
            to_feature_matrix(&set, &retained, &ScalingSpec::default()),
            Err(DatasetError::MissingFeature(Feature::ArrivalRateAll))
        ));
        let mut scaling = ScalingSpec::default();
        scaling.divisors.insert(Feature::ArrivalRateAll, 0.0);
        assert!(matches!(
            to_feature_matrix(&set, &Feature::ALL, &scaling),
            Err(DatasetError::InvalidDivisor { .. })
        ));
    }

    #[test]
    fn rescale_inverse_roundtrip() {
        let set = uncorrelated_set();
        let scaling = ScalingSpec::default();
        let m = to_feature_matrix(&set, &Feature::ALL, &scaling).unwrap();
        for (row, s) in m.rows.iter().zip(&set.samples) {
            for (j, f) in Feature::MODEL_INPUTS.iter().enumerate() {
                let back = row[j] * scaling.divisor(*f).unwrap();
                let orig = f.value(s);
                assert!(((back - orig) / orig).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn feature_names_parse() {
        for f in Feature::ALL {
            assert_eq!(f.name().parse::<Feature>().unwrap(), f);
        }
        assert_eq!("utilization".parse::<Feature>().unwrap(), Feature::Utilization);
        assert!("Delay".parse::<Feature>().is_err());
    }
}
