use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qpdcut::classifier::{BlockOrder, Head, Strategy};

#[derive(Parser, Debug)]
#[command(name = "qpdcut", version, about = "Gate-cutting experiments: validation, training and noisy comparisons")]
pub struct Cli {
    /// Worker threads (1 runs everything sequentially). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reconstruct a GHZ and a Haar-random two-qubit circuit over repeated runs.
    Validate(ValidateArgs),
    /// Train a classifier on the bundled iris data.
    Train(TrainArgs),
    /// Compare cut and uncut predictions of a trained model on its test split.
    EvalCut(EvalCutArgs),
    /// Compare cut and uncut output errors under depolarizing noise.
    NoiseCompare(NoiseArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Shots per circuit (per subexperiment fragment when cutting).
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Use exact probabilities instead of shots.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Monte Carlo term draws instead of full enumeration.
    #[arg(long)]
    pub qpd_samples: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Expected,
    Modulo,
    Parity,
}

impl From<ModelArg> for Head {
    fn from(m: ModelArg) -> Head {
        match m {
            ModelArg::Expected => Head::ExpectedValue,
            ModelArg::Modulo => Head::Modulo,
            ModelArg::Parity => Head::Parity,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    FitThenCut,
    CutThenFit,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::FitThenCut => Strategy::FitThenCut,
            StrategyArg::CutThenFit => Strategy::CutThenFit,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderArg {
    EncodeFirst,
    MixFirst,
}

impl From<OrderArg> for BlockOrder {
    fn from(o: OrderArg) -> BlockOrder {
        match o {
            OrderArg::EncodeFirst => BlockOrder::EncodeFirst,
            OrderArg::MixFirst => BlockOrder::MixFirst,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainArgs {
    /// `--runs N` repeats training on splits seeded seed, seed+1, ...
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "parity")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "fit-then-cut")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 25)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 55)]
    pub iterations: usize,
    /// Model file whose weights initialise training.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub mask_threshold: f64,
    #[arg(long, default_value_t = 10)]
    pub mask_reset: usize,
    #[arg(long)]
    pub qpd_samples: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub test_fraction: f64,
    #[arg(long, value_enum, default_value = "encode-first")]
    pub order: OrderArg,
    /// Min-max scale features onto [0, π] (fitted on the training split).
    #[arg(long)]
    pub scale_features: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvalCutArgs {
    pub model_file: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub qpd_samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NoiseArgs {
    pub model_file: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.001)]
    pub p1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p2: f64,
    #[arg(long, default_value_t = 0.02)]
    pub p_ro: f64,
    /// Input features of the compared circuit.
    #[arg(long, value_delimiter = ',', default_value = "5.9,3.0,4.2,1.5")]
    pub features: Vec<f64>,
    #[arg(long)]
    pub qpd_samples: Option<usize>,
}
