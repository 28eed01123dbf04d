use std::time::Instant;

use serde_json::json;

use qpdcut::classifier::{accuracy, mean_loss, predictions, confusion_matrix, fit, ModelConfig, TrainConfig};
use qpdcut::data::ResultRecord;
use qpdcut::Exec;

use crate::args::TrainArgs;
use crate::{confusion_csv, out_path, prepare_data, write_matrix_csv, write_report, CliError, ModelFile, Result, Summary, MODEL_FILE_VERSION};

/// Tag separating test-set evaluations from training evaluations.
const TEST_TAG: u64 = 0x7e57;

pub fn train(a: &TrainArgs, exec: Exec) -> Result<ResultRecord> {
    let started = Instant::now();
    let c = &a.common;
    let runs = c.runs.unwrap_or(1);
    if runs == 0 {
        return Err(CliError::Usage("--runs must be positive".into()));
    }
    if c.exact && c.shots.is_some() {
        return Err(CliError::Usage("--exact and --shots are mutually exclusive".into()));
    }
    let mut cfg = ModelConfig::iris(a.model.into());
    cfg.order = a.order.into();
    let warm = match &a.warm_start {
        Some(p) => {
            let mf = ModelFile::load(p)?;
            if mf.model.config != cfg {
                return Err(CliError::Usage(format!("warm-start model {} has a different model configuration", p.display())));
            }
            Some(mf.model.weights)
        }
        None => None,
    };
    let seeds: Vec<u64> = (0..runs as u64).map(|r| c.seed.wrapping_add(r)).collect();
    let mut per_run = Vec::with_capacity(runs);
    let mut first = None;
    for &seed in &seeds {
        let tc = TrainConfig {
            strategy: a.strategy.into(),
            lr: a.lr,
            weight_decay: a.weight_decay,
            batch_size: a.batch_size,
            iterations: a.iterations,
            shots: c.shots,
            qpd_samples: a.qpd_samples,
            mask_threshold: a.mask_threshold,
            mask_reset: a.mask_reset,
            seed,
            exec,
        };
        let (train_ds, test_ds, _) = prepare_data(seed, a.test_fraction, a.scale_features)?;
        let model = fit(&cfg, &tc, &train_ds, warm.as_deref())?;
        let mode = tc.mode().reseeded(&[TEST_TAG]);
        let test_pred = predictions(&cfg, &model.weights, &test_ds, mode, exec)?;
        let train_pred = predictions(&cfg, &model.weights, &train_ds, mode.reseeded(&[1]), exec)?;
        let test_loss = mean_loss(&cfg, &model.weights, &test_ds, mode, exec)?;
        let confusion = confusion_matrix(&test_ds.labels, &test_pred, cfg.n_classes);
        per_run.push(json!({
            "seed": seed,
            "test_accuracy": accuracy(&test_ds.labels, &test_pred),
            "train_accuracy": accuracy(&train_ds.labels, &train_pred),
            "test_loss": test_loss,
            "initial_loss": model.loss_history.first(),
            "final_loss": model.loss_history.last(),
            "loss_history": model.loss_history,
            "evaluations": model.evaluations,
            "masked_parameters": model.mask.iter().filter(|&&m| m).count(),
            "confusion_test": confusion,
        }));
        if first.is_none() {
            first = Some((model, confusion));
        }
    }
    let (model, confusion) = first.expect("at least one run");
    let test_acc: Vec<f64> = per_run.iter().map(|r| r["test_accuracy"].as_f64().unwrap_or(f64::NAN)).collect();
    let train_acc: Vec<f64> = per_run.iter().map(|r| r["train_accuracy"].as_f64().unwrap_or(f64::NAN)).collect();

    ModelFile {
        schema_version: MODEL_FILE_VERSION,
        split_seed: c.seed,
        test_fraction: a.test_fraction,
        scale_features: a.scale_features,
        model: model.clone(),
    }
    .save(&out_path(&c.out, "model.json")?)?;
    confusion_csv(&out_path(&c.out, "confusion_test.csv")?, &confusion)?;
    let header: Vec<String> = ["iteration", "loss"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> =
        model.loss_history.iter().enumerate().map(|(i, l)| vec![i.to_string(), l.to_string()]).collect();
    write_matrix_csv(&out_path(&c.out, "loss_history.csv")?, &header, &rows)?;

    let test_summary = Summary::of(&test_acc);
    let metrics = json!({
        "headline": {
            "model": a.model,
            "strategy": a.strategy,
            "runs": runs,
            "test_accuracy_mean": test_summary.mean,
            "test_accuracy_std": test_summary.std,
            "first_backward_evaluations": model.evaluations.first_backward,
        },
        "test_accuracy": test_summary,
        "train_accuracy": Summary::of(&train_acc),
        "per_run": per_run,
    });
    let config = json!({ "args": a, "model": cfg });
    let record = ResultRecord::new("train", config, seeds, metrics);
    write_report(&c.out, "train.json", record, started)
}

