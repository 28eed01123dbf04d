use std::time::Instant;

use serde_json::json;

use qpdcut::classifier::{accuracy, apply_head, argmax, build_model_circuit, confusion_matrix, predict, ForwardMode};
use qpdcut::cutting::{execute_plan, reconstruct_distribution, total_deviation, CutPlan, Engine, ExecConfig, Mode};
use qpdcut::data::ResultRecord;
use qpdcut::rng::derive_seed;
use qpdcut::sim::run_statevector;
use qpdcut::{par, Exec};

use crate::args::EvalCutArgs;
use crate::{confusion_csv, out_path, write_report, CliError, ModelFile, Result, Summary};

struct CutOutcome {
    predicted: usize,
    deviation: f64,
    clamped_mass: f64,
    subexperiments: usize,
}

pub fn eval_cut(a: &EvalCutArgs, exec: Exec) -> Result<ResultRecord> {
    let started = Instant::now();
    let c = &a.common;
    if c.runs.is_some() {
        return Err(CliError::Usage("eval-cut evaluates the test split once; --runs is not supported".into()));
    }
    let shots = c.shots.unwrap_or(4096);
    if shots == 0 {
        return Err(CliError::Usage("--shots must be positive".into()));
    }
    let mf = ModelFile::load(&a.model_file)?;
    let (_, test, _) = mf.datasets()?;
    let cfg = &mf.model.config;
    let w = &mf.model.weights;
    let cut_cfg = ExecConfig {
        mode: a.qpd_samples.map_or(Mode::Enumerate, Mode::Sample),
        engine: if c.exact { Engine::Exact } else { Engine::Sampled },
        shots,
        seed: c.seed,
        fragments: true,
        // Samples are already spread across threads.
        exec: Exec::Sequential,
    };

    let uncut: Vec<usize> = par::map_range(exec, test.len(), |i| {
        let mode =
            if c.exact { ForwardMode::Exact } else { ForwardMode::Shots { shots, seed: derive_seed(c.seed, &[0, i as u64]) } };
        predict(cfg, w, &test.features[i], mode)
    })
    .into_iter()
    .collect::<qpdcut::Result<_>>()?;

    let cut: Vec<CutOutcome> = par::map_range(exec, test.len(), |i| {
        let circuit = build_model_circuit(cfg, &test.features[i], w)?;
        let p = run_statevector(&circuit)?.probabilities();
        let plan = CutPlan::for_partition(circuit, &cfg.partition)?;
        let tallies = execute_plan(&plan, &ExecConfig { seed: derive_seed(c.seed, &[1, i as u64]), ..cut_cfg })?;
        let q = reconstruct_distribution(&tallies)?;
        let normalized = q.normalized();
        let scores = apply_head(cfg.head, &normalized.probabilities, cfg.n_classes)?;
        Ok(CutOutcome {
            predicted: argmax(&scores),
            deviation: total_deviation(&q.weights, &p),
            clamped_mass: normalized.clamped_mass,
            subexperiments: tallies.len(),
        })
    })
    .into_iter()
    .collect::<qpdcut::Result<_>>()?;

    let cut_pred: Vec<usize> = cut.iter().map(|o| o.predicted).collect();
    let deviations: Vec<f64> = cut.iter().map(|o| o.deviation).collect();
    let agreement = accuracy(&uncut, &cut_pred);
    let uncut_conf = confusion_matrix(&test.labels, &uncut, cfg.n_classes);
    let cut_conf = confusion_matrix(&test.labels, &cut_pred, cfg.n_classes);
    confusion_csv(&out_path(&c.out, "confusion_uncut.csv")?, &uncut_conf)?;
    confusion_csv(&out_path(&c.out, "confusion_cut.csv")?, &cut_conf)?;

    let deviation = Summary::of(&deviations);
    let metrics = json!({
        "headline": {
            "agreement": agreement,
            "uncut_accuracy": accuracy(&test.labels, &uncut),
            "cut_accuracy": accuracy(&test.labels, &cut_pred),
            "mean_deviation": deviation.mean,
        },
        "test_samples": test.len(),
        "agreement": agreement,
        "uncut_accuracy": accuracy(&test.labels, &uncut),
        "cut_accuracy": accuracy(&test.labels, &cut_pred),
        "uncut_predictions": uncut,
        "cut_predictions": cut_pred,
        "confusion_uncut": uncut_conf,
        "confusion_cut": cut_conf,
        "deviation": deviation,
        "accumulated_deviation": deviations.iter().sum::<f64>(),
        "per_sample_deviation": deviations,
        "per_sample_clamped_mass": cut.iter().map(|o| o.clamped_mass).collect::<Vec<_>>(),
        "subexperiments_per_sample": cut.first().map_or(0, |o| o.subexperiments),
    });
    let config = json!({ "args": a, "model": cfg, "shots": shots, "engine": cut_cfg.engine, "mode": cut_cfg.mode });
    let record = write_report(&c.out, "eval_cut.json", ResultRecord::new("eval-cut", config, vec![c.seed], metrics), started)?;
    if c.exact && agreement < 1.0 {
        return Err(CliError::Consistency(format!("exact cut and uncut predictions agree on only {:.1}%", 100.0 * agreement)));
    }
    Ok(record)
}
