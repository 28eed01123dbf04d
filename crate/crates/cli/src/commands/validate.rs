use std::time::Instant;

use serde_json::{json, Value};

use qpdcut::circuit::synth::RandomBlocks;
use qpdcut::circuit::{Circuit, GateOp};
use qpdcut::cutting::{
    execute_plan_runs, reconstruct_distribution, reconstruct_expectation, total_deviation, CutPlan, Engine,
    ExecConfig, Mode,
};
use qpdcut::data::ResultRecord;
use qpdcut::rng::{self, streams};
use qpdcut::sim::{bitstring, parity_sign, parse_pauli, run_statevector, z_mask, NoiseModel, ShotSampler};
use qpdcut::Exec;

use super::run_seeds;
use crate::args::ValidateArgs;
use crate::{out_path, write_matrix_csv, write_report, CliError, Result, Summary};

const OBSERVABLES: [&str; 3] = ["ZI", "IZ", "ZZ"];

fn expectation(w: &[f64], pauli: &str) -> Result<f64> {
    let mask = z_mask(&parse_pauli(pauli, w.len().trailing_zeros() as usize)?);
    Ok(w.iter().enumerate().map(|(x, p)| p * parity_sign(x, mask)).sum())
}

/// The validation circuits: GHZ with its CNOT cut, and a seeded Haar-random
/// two-qubit circuit with its three RZZ gates cut.
pub fn validation_plans(seed: u64) -> Result<Vec<(&'static str, CutPlan)>> {
    let ghz = Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1)])?;
    let blocks = RandomBlocks::sample(&mut rng::stream(seed, streams::SYNTH));
    Ok(vec![
        ("ghz", CutPlan::new(ghz, &[1])?),
        ("random", CutPlan::for_partition(blocks.circuit()?, &[0])?),
    ])
}

fn column_stats(rows: &[Vec<f64>], x: usize) -> Summary {
    Summary::of(&rows.iter().map(|r| r[x]).collect::<Vec<_>>())
}

fn mean_vector(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    (0..rows[0].len()).map(|x| rows.iter().map(|r| r[x]).sum::<f64>() / n).collect()
}

struct Side {
    distributions: Vec<Vec<f64>>,
    expectations: Vec<[f64; 3]>,
}

impl Side {
    fn metrics(&self, p: &[f64], exact_expect: &[f64; 3]) -> Value {
        let deviations: Vec<f64> = self.distributions.iter().map(|q| total_deviation(q, p)).collect();
        let mut errors = serde_json::Map::new();
        for (k, obs) in OBSERVABLES.iter().enumerate() {
            let e: Vec<f64> = self.expectations.iter().map(|v| (v[k] - exact_expect[k]).abs()).collect();
            errors.insert(obs.to_string(), json!({ "summary": Summary::of(&e), "per_run": e }));
        }
        json!({
            "deviation_of_mean": total_deviation(&mean_vector(&self.distributions), p),
            "deviation": Summary::of(&deviations),
            "per_run_deviation": deviations,
            "expectation_abs_error": errors,
        })
    }
}

pub fn validate(a: &ValidateArgs, exec: Exec) -> Result<ResultRecord> {
    let started = Instant::now();
    let c = &a.common;
    let runs = c.runs.unwrap_or(100);
    let shots = c.shots.unwrap_or(4096);
    if runs == 0 || shots == 0 {
        return Err(CliError::Usage("--runs and --shots must be positive".into()));
    }
    let seeds = run_seeds(c.seed, runs);
    let cfg = ExecConfig {
        mode: a.qpd_samples.map_or(Mode::Enumerate, Mode::Sample),
        engine: if c.exact { Engine::Exact } else { Engine::Sampled },
        shots,
        seed: c.seed,
        fragments: true,
        exec,
    };
    let mut metrics = serde_json::Map::new();
    let mut headline = serde_json::Map::new();
    let mut worst_exact: f64 = 0.0;
    for (name, plan) in validation_plans(c.seed)? {
        let p = run_statevector(plan.base())?.probabilities();
        let exact_expect = [expectation(&p, "ZI")?, expectation(&p, "IZ")?, expectation(&p, "ZZ")?];
        let cut_runs = execute_plan_runs(&plan, &cfg, &seeds)?;
        let mut cut = Side { distributions: Vec::new(), expectations: Vec::new() };
        for tallies in &cut_runs {
            cut.distributions.push(reconstruct_distribution(tallies)?.weights);
            let mut e = [0.0; 3];
            for (k, obs) in OBSERVABLES.iter().enumerate() {
                e[k] = reconstruct_expectation(tallies, obs)?;
            }
            cut.expectations.push(e);
        }
        let mut sampler = ShotSampler::new(plan.base(), NoiseModel::ideal())?;
        let mut uncut = Side { distributions: Vec::new(), expectations: Vec::new() };
        for &s in &seeds {
            let w = if c.exact { p.clone() } else { sampler.net_weights(shots, s, streams::UNCUT) };
            uncut.expectations.push([expectation(&w, "ZI")?, expectation(&w, "IZ")?, expectation(&w, "ZZ")?]);
            uncut.distributions.push(w);
        }
        let cut_m = cut.metrics(&p, &exact_expect);
        let uncut_m = uncut.metrics(&p, &exact_expect);
        if c.exact && cfg.mode == Mode::Enumerate {
            let worst = cut.distributions.iter().map(|q| total_deviation(q, &p)).fold(0.0, f64::max);
            worst_exact = worst_exact.max(worst);
        }
        headline.insert(
            name.to_string(),
            json!({
                "cut_deviation_of_mean": cut_m["deviation_of_mean"],
                "cut_per_run_mean": cut_m["deviation"]["mean"],
                "cut_per_run_std": cut_m["deviation"]["std"],
                "uncut_per_run_mean": uncut_m["deviation"]["mean"],
            }),
        );
        metrics.insert(
            name.to_string(),
            json!({
                "cuts": plan.k(),
                "gamma": plan.gamma(),
                "exact_distribution": p,
                "cut": cut_m,
                "uncut": uncut_m,
            }),
        );
        let cut_mean = mean_vector(&cut.distributions);
        let uncut_mean = mean_vector(&uncut.distributions);
        let header: Vec<String> =
            ["bitstring", "exact_p", "cut_mean", "cut_std", "uncut_mean", "uncut_std"].map(String::from).to_vec();
        let rows: Vec<Vec<String>> = (0..p.len())
            .map(|x| {
                vec![
                    bitstring(x, 2),
                    p[x].to_string(),
                    cut_mean[x].to_string(),
                    column_stats(&cut.distributions, x).std.to_string(),
                    uncut_mean[x].to_string(),
                    column_stats(&uncut.distributions, x).std.to_string(),
                ]
            })
            .collect();
        write_matrix_csv(&out_path(&c.out, &format!("validate_{name}.csv"))?, &header, &rows)?;
    }
    metrics.insert("headline".into(), Value::Object(headline));
    let config = json!({ "args": a, "runs": runs, "shots": shots, "engine": cfg.engine, "mode": cfg.mode });
    let record = write_report(&c.out, "validate.json", ResultRecord::new("validate", config, seeds, Value::Object(metrics)), started)?;
    if worst_exact > 1e-9 {
        return Err(CliError::Consistency(format!("exact reconstruction deviates by {worst_exact:e}")));
    }
    Ok(record)
}
