//! Forward evaluation, parameter-shift gradients, Adagrad and training.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{apply_head, argmax, build_model_circuit, softmax_nll, ModelConfig};
use crate::cutting::{execute_plan, reconstruct_distribution, CutPlan, Engine, ExecConfig, Mode};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rng::{self, derive_seed, streams};
use crate::sim::{run_statevector, NoiseModel, ShotSampler};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardMode {
    Exact,
    Shots { shots: u64, seed: u64 },
    /// Through the cutting pipeline, cutting CNOTs that cross the partition.
    Cut(ExecConfig),
}

impl ForwardMode {
    /// Same mode with a seed derived from `tags`, for independent evaluations.
    pub fn reseeded(self, tags: &[u64]) -> ForwardMode {
        match self {
            ForwardMode::Exact => ForwardMode::Exact,
            ForwardMode::Shots { shots, seed } => ForwardMode::Shots { shots, seed: derive_seed(seed, tags) },
            ForwardMode::Cut(c) => ForwardMode::Cut(ExecConfig { seed: derive_seed(c.seed, tags), ..c }),
        }
    }
}

/// Circuit executions, split by forward and gradient evaluations. In cut
/// mode every subexperiment counts as one execution.
#[derive(Debug, Default)]
pub struct Counters {
    forward: AtomicU64,
    backward: AtomicU64,
}

impl Counters {
    pub fn forward(&self) -> u64 {
        self.forward.load(Ordering::Relaxed)
    }

    pub fn backward(&self) -> u64 {
        self.backward.load(Ordering::Relaxed)
    }

    fn add(&self, backward: bool, n: u64) {
        let c = if backward { &self.backward } else { &self.forward };
        c.fetch_add(n, Ordering::Relaxed);
    }
}

/// Output distribution of the model circuit and the number of circuits run.
pub fn model_distribution(cfg: &ModelConfig, x: &[f64], w: &[f64], mode: ForwardMode) -> Result<(Vec<f64>, u64)> {
    let circuit = build_model_circuit(cfg, x, w)?;
    match mode {
        ForwardMode::Exact => Ok((run_statevector(&circuit)?.probabilities(), 1)),
        ForwardMode::Shots { shots, seed } => {
            let w = ShotSampler::new(&circuit, NoiseModel::ideal())?.net_weights(shots, seed, 0);
            Ok((w, 1))
        }
        ForwardMode::Cut(exec) => {
            let plan = CutPlan::for_partition(circuit, &cfg.partition)?;
            let tallies = execute_plan(&plan, &exec)?;
            let q = reconstruct_distribution(&tallies)?;
            Ok((q.normalized().probabilities, tallies.len() as u64))
        }
    }
}

pub fn class_scores(cfg: &ModelConfig, x: &[f64], w: &[f64], mode: ForwardMode) -> Result<(Vec<f64>, u64)> {
    let (dist, runs) = model_distribution(cfg, x, w, mode)?;
    Ok((apply_head(cfg.head, &dist, cfg.n_classes)?, runs))
}

/// Class probabilities.
pub fn forward(cfg: &ModelConfig, x: &[f64], w: &[f64], mode: ForwardMode) -> Result<Vec<f64>> {
    let (scores, _) = class_scores(cfg, x, w, mode)?;
    Ok(softmax_nll(&scores, 0).0)
}

pub fn predict(cfg: &ModelConfig, w: &[f64], x: &[f64], mode: ForwardMode) -> Result<usize> {
    Ok(argmax(&forward(cfg, x, w, mode)?))
}

/// Predicted labels; sample `i` uses `mode` reseeded with `i`.
pub fn predictions(cfg: &ModelConfig, w: &[f64], ds: &Dataset, mode: ForwardMode, exec: Exec) -> Result<Vec<usize>> {
    par::map_range(exec, ds.len(), |i| predict(cfg, w, &ds.features[i], mode.reseeded(&[i as u64]))).into_iter().collect()
}

pub fn accuracy(labels: &[usize], predicted: &[usize]) -> f64 {
    let hits = labels.iter().zip(predicted).filter(|(a, b)| a == b).count();
    hits as f64 / labels.len().max(1) as f64
}

/// Rows are true labels, columns predictions.
pub fn confusion_matrix(labels: &[usize], predicted: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; classes]; classes];
    for (&t, &p) in labels.iter().zip(predicted) {
        m[t][p] += 1;
    }
    m
}

pub fn score(cfg: &ModelConfig, w: &[f64], ds: &Dataset, mode: ForwardMode, exec: Exec) -> Result<f64> {
    Ok(accuracy(&ds.labels, &predictions(cfg, w, ds, mode, exec)?))
}

pub fn confusion(cfg: &ModelConfig, w: &[f64], ds: &Dataset, mode: ForwardMode, exec: Exec) -> Result<Vec<Vec<usize>>> {
    Ok(confusion_matrix(&ds.labels, &predictions(cfg, w, ds, mode, exec)?, cfg.n_classes))
}

/// Mean NLL over a dataset.
pub fn mean_loss(cfg: &ModelConfig, w: &[f64], ds: &Dataset, mode: ForwardMode, exec: Exec) -> Result<f64> {
    let losses = par::map_range(exec, ds.len(), |i| {
        let (s, _) = class_scores(cfg, &ds.features[i], w, mode.reseeded(&[i as u64]))?;
        Ok(softmax_nll(&s, ds.labels[i]).1)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / ds.len().max(1) as f64)
}

/// Batch-mean gradient of the NLL by the ±π/2 shift rule, plus the batch
/// loss at `w`. Masked parameters are not evaluated and get gradient 0.
pub fn grad_parameter_shift(
    cfg: &ModelConfig,
    batch: &Dataset,
    w: &[f64],
    mode: ForwardMode,
    mask: &[bool],
    counters: &Counters,
    exec: Exec,
) -> Result<(Vec<f64>, f64)> {
    if mask.len() != w.len() {
        return Err(Error::DimMismatch { expected: w.len(), got: mask.len() });
    }
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let per_sample = par::map_range(exec, batch.len(), |i| -> Result<(Vec<f64>, f64)> {
        let x = &batch.features[i];
        let label = batch.labels[i];
        let (s0, runs) = class_scores(cfg, x, w, mode.reseeded(&[i as u64, u64::MAX]))?;
        counters.add(false, runs);
        let (p, loss) = softmax_nll(&s0, label);
        let dlds: Vec<f64> = p.iter().enumerate().map(|(m, pm)| pm - if m == label { 1.0 } else { 0.0 }).collect();
        let mut g = vec![0.0; w.len()];
        let mut shifted = w.to_vec();
        for j in (0..w.len()).filter(|&j| !mask[j]) {
            shifted[j] = w[j] + FRAC_PI_2;
            let (sp, rp) = class_scores(cfg, x, &shifted, mode.reseeded(&[i as u64, j as u64, 0]))?;
            shifted[j] = w[j] - FRAC_PI_2;
            let (sm, rm) = class_scores(cfg, x, &shifted, mode.reseeded(&[i as u64, j as u64, 1]))?;
            shifted[j] = w[j];
            counters.add(true, rp + rm);
            g[j] = dlds.iter().zip(sp.iter().zip(&sm)).map(|(d, (a, b))| d * (a - b) / 2.0).sum();
        }
        Ok((g, loss))
    });
    let mut grad = vec![0.0; w.len()];
    let mut loss = 0.0;
    for r in per_sample {
        let (g, l) = r?;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        loss += l;
    }
    let n = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((grad, loss / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adagrad {
    pub lr: f64,
    pub weight_decay: f64,
    pub eps: f64,
    pub accumulators: Vec<f64>,
    pub steps: u64,
}

impl Adagrad {
    pub fn new(n: usize, lr: f64, weight_decay: f64) -> Adagrad {
        Adagrad { lr, weight_decay, eps: 1e-10, accumulators: vec![0.0; n], steps: 0 }
    }

    pub fn step(&mut self, w: &mut [f64], grad: &[f64]) {
        for ((wi, gi), acc) in w.iter_mut().zip(grad).zip(self.accumulators.iter_mut()) {
            let g = gi + self.weight_decay * *wi;
            *acc += g * g;
            *wi -= self.lr * g / (acc.sqrt() + self.eps);
        }
        self.steps += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Train uncut; cutting is only used at evaluation time.
    FitThenCut,
    /// Every training evaluation runs through the cutting pipeline.
    CutThenFit,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::FitThenCut => "fit-then-cut",
            Strategy::CutThenFit => "cut-then-fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub iterations: usize,
    /// Shots per circuit (per subexperiment fragment when cutting); exact if `None`.
    pub shots: Option<u64>,
    /// Monte Carlo term draws per cut evaluation; full enumeration if `None`.
    pub qpd_samples: Option<usize>,
    pub mask_threshold: f64,
    pub mask_reset: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            strategy: Strategy::FitThenCut,
            lr: 0.1,
            weight_decay: 1e-4,
            batch_size: 25,
            iterations: 55,
            shots: None,
            qpd_samples: None,
            mask_threshold: 1e-9,
            mask_reset: 10,
            seed: 42,
            exec: Exec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::BadParameter { kind: "train", reason });
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 {
            return bad(format!("weight decay {} must be non-negative", self.weight_decay));
        }
        if self.mask_threshold.is_nan() || self.mask_threshold < 0.0 {
            return bad(format!("mask threshold {} must be non-negative", self.mask_threshold));
        }
        if self.batch_size == 0 || self.mask_reset == 0 {
            return bad("batch size and mask reset period must be positive".into());
        }
        if self.shots == Some(0) || self.qpd_samples == Some(0) {
            return bad("shots and QPD samples must be positive".into());
        }
        Ok(())
    }

    /// Evaluation mode used during training.
    pub fn mode(&self) -> ForwardMode {
        match (self.strategy, self.shots) {
            (Strategy::FitThenCut, None) => ForwardMode::Exact,
            (Strategy::FitThenCut, Some(shots)) => ForwardMode::Shots { shots, seed: self.seed },
            (Strategy::CutThenFit, shots) => ForwardMode::Cut(ExecConfig {
                mode: self.qpd_samples.map_or(Mode::Enumerate, Mode::Sample),
                engine: if shots.is_some() { Engine::Sampled } else { Engine::Exact },
                shots: shots.unwrap_or(0),
                seed: self.seed,
                fragments: true,
                exec: self.exec,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub forward: u64,
    pub backward: u64,
    /// Gradient executions in the first iteration, before any masking.
    pub first_backward: u64,
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub config: ModelConfig,
    pub train: TrainConfig,
    pub weights: Vec<f64>,
    pub optimizer: Adagrad,
    pub mask: Vec<bool>,
    pub loss_history: Vec<f64>,
    pub evaluations: EvalCounts,
}

impl TrainedModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let m: TrainedModel = serde_json::from_str(text)?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported model schema version {}", m.schema_version)));
        }
        m.config.validate()?;
        if m.weights.len() != m.config.n_params() {
            return Err(Error::DimMismatch { expected: m.config.n_params(), got: m.weights.len() });
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        TrainedModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Gradient mask for cut training: parameters whose gradient magnitude
/// falls below `threshold` are skipped until the next reset, every
/// `period` iterations (counting from 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientMask {
    pub masked: Vec<bool>,
    pub threshold: f64,
    pub period: usize,
}

impl GradientMask {
    pub fn new(n: usize, threshold: f64, period: usize) -> GradientMask {
        GradientMask { masked: vec![false; n], threshold, period }
    }

    pub fn begin_iteration(&mut self, it: usize) {
        if self.period > 0 && it.is_multiple_of(self.period) {
            self.masked.iter_mut().for_each(|m| *m = false);
        }
    }

    pub fn update(&mut self, grad: &[f64]) {
        for (m, g) in self.masked.iter_mut().zip(grad) {
            if !*m && g.abs() < self.threshold {
                *m = true;
            }
        }
    }
}

pub fn init_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, streams::INIT_WEIGHTS);
    (0..n).map(|_| r.random_range(0.0..TAU)).collect()
}

/// Epoch-wise shuffled mini-batches; the last batch of an epoch may be short.
struct Batches {
    order: Vec<usize>,
    pos: usize,
    size: usize,
    rng: ChaCha8Rng,
}

impl Batches {
    fn new(n: usize, size: usize, seed: u64) -> Batches {
        let mut b = Batches { order: (0..n).collect(), pos: n, size, rng: rng::stream(seed, streams::BATCHES) };
        b.order.shuffle(&mut b.rng);
        b.pos = 0;
        b
    }

    fn next(&mut self) -> &[usize] {
        if self.pos >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let end = (self.pos + self.size).min(self.order.len());
        let batch = &self.order[self.pos..end];
        self.pos = end;
        batch
    }
}

pub fn fit(cfg: &ModelConfig, tc: &TrainConfig, train: &Dataset, warm_start: Option<&[f64]>) -> Result<TrainedModel> {
    cfg.validate()?;
    tc.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(&l) = train.labels.iter().find(|&&l| l >= cfg.n_classes) {
        return Err(Error::BadParameter { kind: "dataset", reason: format!("label {l} outside 0..{}", cfg.n_classes) });
    }
    if let Some(row) = train.features.iter().find(|r| r.len() != cfg.n_qubits) {
        return Err(Error::DimMismatch { expected: cfg.n_qubits, got: row.len() });
    }
    let n = cfg.n_params();
    let mut weights = match warm_start {
        Some(w) if w.len() != n => return Err(Error::DimMismatch { expected: n, got: w.len() }),
        Some(w) => w.to_vec(),
        None => init_weights(n, tc.seed),
    };
    let masking = tc.strategy == Strategy::CutThenFit;
    let mut mask = GradientMask::new(n, tc.mask_threshold, tc.mask_reset);
    let mut optimizer = Adagrad::new(n, tc.lr, tc.weight_decay);
    let mut batches = Batches::new(train.len(), tc.batch_size, tc.seed);
    let counters = Counters::default();
    let base = tc.mode();
    let mut loss_history = Vec::with_capacity(tc.iterations);
    let mut first_backward = 0;
    for it in 0..tc.iterations {
        if masking {
            mask.begin_iteration(it);
        }
        let batch = train.subset(batches.next());
        let before = counters.backward();
        let (grad, loss) =
            grad_parameter_shift(cfg, &batch, &weights, base.reseeded(&[it as u64]), &mask.masked, &counters, tc.exec)?;
        if it == 0 {
            first_backward = counters.backward() - before;
        }
        if masking {
            mask.update(&grad);
        }
        optimizer.step(&mut weights, &grad);
        loss_history.push(loss);
    }
    Ok(TrainedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        config: cfg.clone(),
        train: tc.clone(),
        weights,
        optimizer,
        mask: mask.masked,
        loss_history,
        evaluations: EvalCounts { forward: counters.forward(), backward: counters.backward(), first_backward },
    })
}
