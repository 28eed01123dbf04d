//! Iris dataset, deterministic splits and result persistence.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

pub const IRIS_CSV: &str = include_str!("../../assets/iris.csv");
pub const IRIS_SHA256: &str = "874d28c2148c94ac8bed1b98ab1d93d27a473f72b2a712b06833f49b3259e54d";
pub const CLASS_NAMES: [&str; 3] = ["setosa", "versicolor", "virginica"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

#[derive(Deserialize)]
struct IrisRow {
    sepal_length: f64,
    sepal_width: f64,
    petal_length: f64,
    petal_width: f64,
    label: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn class_counts(&self, classes: usize) -> Vec<usize> {
        let mut counts = vec![0; classes];
        for &l in &self.labels {
            if l < classes {
                counts[l] += 1;
            }
        }
        counts
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a CSV with the four iris feature columns and an integer label.
pub fn parse_iris_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut ds = Dataset { features: Vec::new(), labels: Vec::new() };
    for row in reader.deserialize::<IrisRow>() {
        let r = row.map_err(|e| Error::Parse(e.to_string()))?;
        ds.features.push(vec![r.sepal_length, r.sepal_width, r.petal_length, r.petal_width]);
        ds.labels.push(r.label);
    }
    Ok(ds)
}

/// Verifies `text` against `sha256` before parsing it.
pub fn load_checked(text: &str, sha256: &str) -> Result<Dataset> {
    let got = sha256_hex(text.as_bytes());
    if got != sha256 {
        return Err(Error::AssetCorrupt(format!("checksum {got} does not match {sha256}")));
    }
    parse_iris_csv(text)
}

/// The bundled 150-row iris table.
pub fn load_iris() -> Result<Dataset> {
    load_checked(IRIS_CSV, IRIS_SHA256)
}

/// Shuffles with `seed` and takes the first `ceil(n·test_fraction)` rows as test set.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::BadRange(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut rng::stream(seed, streams::SPLIT));
    let n_test = (ds.len() as f64 * test_fraction).ceil() as usize;
    let (test, train) = idx.split_at(n_test);
    Ok((ds.subset(train), ds.subset(test)))
}

/// Per-feature min-max scaling onto `[0, π]`, fitted on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Result<MinMaxScaler> {
        let first = ds.features.first().ok_or(Error::EmptyDataset)?;
        let mut min = first.clone();
        let mut max = first.clone();
        for row in &ds.features {
            for (j, v) in row.iter().enumerate() {
                min[j] = min[j].min(*v);
                max[j] = max[j].max(*v);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 { (v - self.min[j]) / span * std::f64::consts::PI } else { 0.0 }
            })
            .collect()
    }

    pub fn transform(&self, ds: &Dataset) -> Dataset {
        let features = ds.features.iter().map(|row| self.transform_row(row)).collect();
        Dataset { features, labels: ds.labels.clone() }
    }
}

pub const SCHEMA_VERSION: u32 = 1;

/// Persisted experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub metrics: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    /// Wall-clock seconds; the only field allowed to differ between reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl ResultRecord {
    pub fn new(experiment: impl Into<String>, config: serde_json::Value, seeds: Vec<u64>, metrics: serde_json::Value) -> ResultRecord {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config,
            seeds,
            metrics,
            data: None,
            wall_clock_s: None,
        }
    }
}

pub fn persist_results(path: &Path, record: &ResultRecord) -> Result<()> {
    let text = serde_json::to_string_pretty(record)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_results(path: &Path) -> Result<ResultRecord> {
    let text = std::fs::read_to_string(path)?;
    let record: ResultRecord = serde_json::from_str(&text)?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema version {}", record.schema_version)));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn iris_shape() {
        let ds = load_iris().unwrap();
        assert_eq!(ds.len(), 150);
        assert_eq!(ds.class_counts(3), vec![50, 50, 50]);
        assert!(ds.features.iter().flatten().all(|v| (0.1..=8.0).contains(v)));
        let idx = ds.features.iter().position(|r| r == &vec![5.9, 3.0, 4.2, 1.5]).unwrap();
        assert_eq!(CLASS_NAMES[ds.labels[idx]], "versicolor");
    }

    #[test]
    fn checksum_mismatch_is_reported() {
        let tampered = IRIS_CSV.replacen("5.1", "5.2", 1);
        assert!(matches!(load_checked(&tampered, IRIS_SHA256), Err(Error::AssetCorrupt(_))));
    }

    #[test]
    fn split_sizes_and_partition() {
        let ds = load_iris().unwrap();
        let (train, test) = split(&ds, 0.25, 42).unwrap();
        assert_eq!((train.len(), test.len()), (112, 38));
        assert_eq!(split(&ds, 0.25, 42).unwrap(), (train.clone(), test.clone()));
        assert_ne!(split(&ds, 0.25, 43).unwrap().1, test);
        let mut all: Vec<(Vec<u64>, usize)> = train
            .features
            .iter()
            .chain(&test.features)
            .zip(train.labels.iter().chain(&test.labels))
            .map(|(f, l)| (f.iter().map(|v| v.to_bits()).collect(), *l))
            .collect();
        let mut orig: Vec<(Vec<u64>, usize)> =
            ds.features.iter().zip(&ds.labels).map(|(f, l)| (f.iter().map(|v| v.to_bits()).collect(), *l)).collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
        assert!(split(&ds, 1.0, 0).is_err());
        assert!(split(&ds, 0.0, 0).is_err());
    }

    #[test]
    fn scaler_maps_onto_zero_pi() {
        let ds = load_iris().unwrap();
        let t = MinMaxScaler::fit(&ds).unwrap().transform(&ds);
        let flat: Vec<f64> = t.features.iter().flatten().copied().collect();
        assert!(flat.iter().all(|v| (0.0..=std::f64::consts::PI + 1e-12).contains(v)));
    }

    #[test]
    fn persistence_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let rec = ResultRecord::new("validate", json!({"shots": 4096}), vec![1, 2], json!({"accuracy": 0.9, "loss_history": [1.0, 0.5]}));
        persist_results(&path, &rec).unwrap();
        assert_eq!(load_results(&path).unwrap(), rec);
        std::fs::write(&path, r#"{"experiment":"x","config":{},"seeds":[],"metrics":{}}"#).unwrap();
        assert!(matches!(load_results(&path), Err(Error::Parse(_))));
        assert!(matches!(load_results(&dir.path().join("missing.json")), Err(Error::Io(_))));
    }
}
