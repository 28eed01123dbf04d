use std::time::Instant;

use serde_json::json;

use qpdcut::classifier::build_model_circuit;
use qpdcut::cutting::{execute_plan_runs, reconstruct_distribution, total_deviation, CutPlan, Engine, ExecConfig, Mode};
use qpdcut::data::ResultRecord;
use qpdcut::rng::streams;
use qpdcut::sim::{bitstring, run_statevector, NoiseModel, ShotSampler};
use qpdcut::Exec;

use super::run_seeds;
use crate::args::NoiseArgs;
use crate::{out_path, write_matrix_csv, write_report, CliError, ModelFile, Result, Summary};

fn column(rows: &[Vec<f64>], x: usize) -> Summary {
    Summary::of(&rows.iter().map(|r| r[x]).collect::<Vec<_>>())
}

pub fn noise_compare(a: &NoiseArgs, exec: Exec) -> Result<ResultRecord> {
    let started = Instant::now();
    let c = &a.common;
    if c.exact {
        return Err(CliError::Usage("noise-compare samples noisy shots; --exact is not supported".into()));
    }
    let runs = c.runs.unwrap_or(50);
    let shots = c.shots.unwrap_or(4096);
    if runs == 0 || shots == 0 {
        return Err(CliError::Usage("--runs and --shots must be positive".into()));
    }
    let noise = NoiseModel::new(a.p1, a.p2, a.p_ro)?;
    let mf = ModelFile::load(&a.model_file)?;
    let cfg = &mf.model.config;
    let x = match mf.datasets()?.2 {
        Some(scaler) => scaler.transform_row(&a.features),
        None => a.features.clone(),
    };
    let circuit = build_model_circuit(cfg, &x, &mf.model.weights)?;
    let p = run_statevector(&circuit)?.probabilities();
    let plan = CutPlan::for_partition(circuit, &cfg.partition)?;
    let seeds = run_seeds(c.seed, runs);

    let mut sampler = ShotSampler::new(plan.base(), noise)?;
    let uncut: Vec<Vec<f64>> = seeds.iter().map(|&s| sampler.net_weights(shots, s, streams::UNCUT)).collect();
    let cut_cfg = ExecConfig {
        mode: a.qpd_samples.map_or(Mode::Enumerate, Mode::Sample),
        engine: Engine::Noisy(noise),
        shots,
        seed: c.seed,
        fragments: true,
        exec,
    };
    let cut: Vec<Vec<f64>> = execute_plan_runs(&plan, &cut_cfg, &seeds)?
        .iter()
        .map(|t| reconstruct_distribution(t).map(|q| q.weights))
        .collect::<qpdcut::Result<_>>()?;

    let uncut_err: Vec<f64> = uncut.iter().map(|q| total_deviation(q, &p)).collect();
    let cut_err: Vec<f64> = cut.iter().map(|q| total_deviation(q, &p)).collect();
    let cut_norm_err: Vec<f64> = cut
        .iter()
        .map(|q| {
            let n = qpdcut::cutting::QuasiDistribution { weights: q.clone() }.normalized();
            total_deviation(&n.probabilities, &p)
        })
        .collect();
    let (u, k) = (Summary::of(&uncut_err), Summary::of(&cut_err));
    let stderr = (u.std.powi(2) / u.n as f64 + k.std.powi(2) / k.n as f64).sqrt();
    let separation = if stderr > 0.0 { (u.mean - k.mean) / stderr } else { f64::INFINITY };

    let header: Vec<String> =
        ["bitstring", "exact_p", "uncut_mean", "uncut_std", "cut_mean", "cut_std"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = (0..p.len())
        .map(|xi| {
            let (us, cs) = (column(&uncut, xi), column(&cut, xi));
            vec![
                bitstring(xi, plan.base().width()),
                p[xi].to_string(),
                us.mean.to_string(),
                us.std.to_string(),
                cs.mean.to_string(),
                cs.std.to_string(),
            ]
        })
        .collect();
    write_matrix_csv(&out_path(&c.out, "noise_compare.csv")?, &header, &rows)?;

    let metrics = json!({
        "headline": {
            "uncut_error_mean": u.mean,
            "cut_error_mean": k.mean,
            "ratio": k.mean / u.mean,
            "separation_sigma": separation,
        },
        "uncut_error": u,
        "cut_error": k,
        "cut_error_normalized": Summary::of(&cut_norm_err),
        "ratio": k.mean / u.mean,
        "separation_sigma": separation,
        "per_run_uncut_error": uncut_err,
        "per_run_cut_error": cut_err,
        "exact_distribution": p,
        "cuts": plan.k(),
    });
    let config = json!({ "args": a, "features": x, "model": cfg, "runs": runs, "shots": shots, "noise": noise });
    write_report(&c.out, "noise_compare.json", ResultRecord::new("noise-compare", config, seeds, metrics), started)
}
