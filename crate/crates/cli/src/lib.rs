//! Experiment commands behind the `qpdcut` binary.

pub mod args;
pub mod commands;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use qpdcut::classifier::TrainedModel;
use qpdcut::data::{load_iris, persist_results, split, Dataset, MinMaxScaler, ResultRecord};
use qpdcut::Exec;

pub use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qpdcut::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qpdcut::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Io(_)) => 3,
            CliError::Csv(e) if e.is_io_error() => 3,
            CliError::Core(E::Parse(_)) | CliError::Csv(_) => 4,
            CliError::Consistency(_) => 5,
            CliError::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Core(e.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1).
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(v: &[f64]) -> Summary {
        let n = v.len();
        if n == 0 {
            return Summary { n, mean: f64::NAN, std: f64::NAN, median: f64::NAN, min: f64::NAN, max: f64::NAN };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
        Summary { n, mean, std, median, min: s[0], max: s[n - 1] }
    }
}

/// Trained model plus the data split it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub split_seed: u64,
    pub test_fraction: f64,
    pub scale_features: bool,
    pub model: TrainedModel,
}

pub const MODEL_FILE_VERSION: u32 = 1;

impl ModelFile {
    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path)?;
        let mf: ModelFile = serde_json::from_str(&text).map_err(qpdcut::Error::from)?;
        if mf.schema_version != MODEL_FILE_VERSION {
            return Err(qpdcut::Error::Parse(format!("unsupported model file version {}", mf.schema_version)).into());
        }
        // Re-validate the embedded model.
        TrainedModel::from_json(&serde_json::to_string(&mf.model).expect("serializable"))?;
        Ok(mf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("serializable") + "\n")?;
        Ok(())
    }

    pub fn datasets(&self) -> Result<(Dataset, Dataset, Option<MinMaxScaler>)> {
        prepare_data(self.split_seed, self.test_fraction, self.scale_features)
    }
}

/// Train/test split of the bundled data, optionally scaled by a scaler
/// fitted on the training rows.
pub fn prepare_data(seed: u64, test_fraction: f64, scale: bool) -> Result<(Dataset, Dataset, Option<MinMaxScaler>)> {
    let (train, test) = split(&load_iris()?, test_fraction, seed)?;
    if !scale {
        return Ok((train, test, None));
    }
    let scaler = MinMaxScaler::fit(&train)?;
    Ok((scaler.transform(&train), scaler.transform(&test), Some(scaler)))
}

pub fn exec_for(threads: Option<usize>) -> Result<Exec> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(1) => Ok(Exec::Sequential),
        Some(n) => {
            // The global pool can only be configured once per process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Exec::Parallel)
        }
        None => Ok(Exec::Parallel),
    }
}

pub(crate) fn out_path(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

pub(crate) fn write_report(dir: &Path, name: &str, mut record: ResultRecord, started: Instant) -> Result<ResultRecord> {
    record.wall_clock_s = Some(started.elapsed().as_secs_f64());
    persist_results(&out_path(dir, name)?, &record)?;
    Ok(record)
}

pub(crate) fn write_matrix_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn confusion_csv(path: &Path, m: &[Vec<usize>]) -> Result<()> {
    let header: Vec<String> =
        std::iter::once("true\\predicted".to_string()).chain((0..m.len()).map(|c| c.to_string())).collect();
    let rows: Vec<Vec<String>> = m
        .iter()
        .enumerate()
        .map(|(t, row)| std::iter::once(t.to_string()).chain(row.iter().map(|v| v.to_string())).collect())
        .collect();
    write_matrix_csv(path, &header, &rows)
}

/// Runs a parsed command line and returns the report it wrote.
pub fn run(cli: Cli) -> Result<ResultRecord> {
    let exec = exec_for(cli.threads)?;
    match cli.command {
        Command::Validate(a) => commands::validate(&a, exec),
        Command::Train(a) => commands::train(&a, exec),
        Command::EvalCut(a) => commands::eval_cut(&a, exec),
        Command::NoiseCompare(a) => commands::noise_compare(&a, exec),
    }
}
