//! Executing cut plans into weighted tallies.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::plan::{sample_subexperiment_terms, CutPlan};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rng::streams;
use crate::sim::{bitstring, exact_signed_weights, parse_bitstring, NoiseModel, ShotSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Enumerate,
    /// Monte Carlo over term assignments with this many draws.
    Sample(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Engine {
    /// Exact branch probabilities, no shot noise.
    Exact,
    Sampled,
    Noisy(NoiseModel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecConfig {
    pub mode: Mode,
    pub engine: Engine,
    /// Shots per subexperiment (per fragment when fragmenting).
    pub shots: u64,
    pub seed: u64,
    /// Run connected components separately and combine by outer product.
    pub fragments: bool,
    pub exec: Exec,
}

impl Default for ExecConfig {
    fn default() -> ExecConfig {
        ExecConfig {
            mode: Mode::Enumerate,
            engine: Engine::Exact,
            shots: 4096,
            seed: 0,
            fragments: true,
            exec: Exec::default(),
        }
    }
}

/// Signed per-bitstring weights of one executed subexperiment.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTally {
    pub assignment: u64,
    pub coefficient: f64,
    /// Zero for the exact engine.
    pub shots: u64,
    pub net_weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TallyDoc {
    assignment: u64,
    coefficient: f64,
    shots: u64,
    width: usize,
    net_weights: BTreeMap<String, f64>,
}

impl WeightedTally {
    pub fn width(&self) -> usize {
        self.net_weights.len().trailing_zeros() as usize
    }

    /// Σ_x |net_weight(x)|, at most 1.
    pub fn l1(&self) -> f64 {
        self.net_weights.iter().map(|w| w.abs()).sum()
    }
}

/// JSON export; only nonzero weights are written, keyed by bitstring.
pub fn tallies_to_json(tallies: &[WeightedTally]) -> String {
    let docs: Vec<TallyDoc> = tallies
        .iter()
        .map(|t| TallyDoc {
            assignment: t.assignment,
            coefficient: t.coefficient,
            shots: t.shots,
            width: t.width(),
            net_weights: t
                .net_weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(x, w)| (bitstring(x, t.width()), *w))
                .collect(),
        })
        .collect();
    serde_json::to_string(&docs).expect("tallies serialize")
}

pub fn tallies_from_json(text: &str) -> Result<Vec<WeightedTally>> {
    let docs: Vec<TallyDoc> = serde_json::from_str(text)?;
    docs.into_iter()
        .map(|d| {
            let mut net_weights = vec![0.0; 1 << d.width];
            for (key, w) in d.net_weights {
                if key.len() != d.width {
                    return Err(Error::Parse(format!("bitstring {key:?} has wrong width")));
                }
                net_weights[parse_bitstring(&key)?] = w;
            }
            Ok(WeightedTally { assignment: d.assignment, coefficient: d.coefficient, shots: d.shots, net_weights })
        })
        .collect()
}

/// `(assignment, coefficient)` pairs to run, ordered by assignment id.
fn schedule(plan: &CutPlan, mode: Mode, seed: u64) -> Result<Vec<(u64, f64)>> {
    match mode {
        Mode::Enumerate => {
            plan.check_cap()?;
            Ok((0..plan.num_assignments()).map(|id| (id, plan.coefficient(&plan.assignment(id)))).collect())
        }
        Mode::Sample(n) => {
            let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
            for s in sample_subexperiment_terms(plan, n, seed)? {
                counts.entry(s.assignment).or_insert((s.sign, 0)).1 += 1;
            }
            let scale = plan.gamma() / n as f64;
            Ok(counts.into_iter().map(|(id, (sign, count))| (id, sign * scale * count as f64)).collect())
        }
    }
}

/// Scatter of fragment bit positions into the full register.
struct Fragments {
    parts: Vec<(Vec<usize>, Circuit)>,
    width: usize,
}

impl Fragments {
    fn new(circuit: Circuit, split: bool) -> Result<Fragments> {
        let width = circuit.width();
        let comps = if split { circuit.connected_components() } else { vec![(0..width).collect()] };
        if comps.len() == 1 {
            return Ok(Fragments { parts: vec![(comps[0].clone(), circuit)], width });
        }
        let parts = comps
            .into_iter()
            .map(|qs| {
                let c = circuit.restrict(&qs)?;
                Ok((qs, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Fragments { parts, width })
    }

    fn combine(&self, weights: &[Vec<f64>]) -> Vec<f64> {
        if self.parts.len() == 1 {
            return weights[0].clone();
        }
        let mut out = vec![1.0; 1 << self.width];
        for ((qubits, _), w) in self.parts.iter().zip(weights) {
            for (x, o) in out.iter_mut().enumerate() {
                let local = qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | (((x >> q) & 1) << j));
                *o *= w[local];
            }
        }
        out
    }
}

/// Net weights of one subexperiment for each requested seed.
fn run_subexperiment(plan: &CutPlan, id: u64, cfg: &ExecConfig, seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    let circuit = plan.subexperiment(&plan.assignment(id))?;
    let frags = Fragments::new(circuit, cfg.fragments)?;
    // per_part[f][s]: weights of fragment f under seed s.
    let mut per_part: Vec<Vec<Vec<f64>>> = Vec::with_capacity(frags.parts.len());
    for (f, (_, part)) in frags.parts.iter().enumerate() {
        let stream = streams::fragment(id, f);
        per_part.push(match cfg.engine {
            Engine::Exact => {
                let w = exact_signed_weights(part)?;
                vec![w; seeds.len()]
            }
            Engine::Sampled | Engine::Noisy(_) => {
                let noise = match cfg.engine {
                    Engine::Noisy(n) => n,
                    _ => NoiseModel::ideal(),
                };
                let mut sampler = ShotSampler::new(part, noise)?;
                seeds.iter().map(|&s| sampler.net_weights(cfg.shots, s, stream)).collect()
            }
        });
    }
    Ok((0..seeds.len())
        .map(|s| {
            let ws: Vec<Vec<f64>> = per_part.iter_mut().map(|p| std::mem::take(&mut p[s])).collect();
            frags.combine(&ws)
        })
        .collect())
}

/// Runs a plan once with `cfg.seed`.
pub fn execute_plan(plan: &CutPlan, cfg: &ExecConfig) -> Result<Vec<WeightedTally>> {
    Ok(execute_plan_runs(plan, cfg, &[cfg.seed])?.pop().expect("one run"))
}

/// Runs a plan once per seed, building each subexperiment (and its
/// sampler caches) once. Run `r` equals `execute_plan` with seed `seeds[r]`.
pub fn execute_plan_runs(plan: &CutPlan, cfg: &ExecConfig, seeds: &[u64]) -> Result<Vec<Vec<WeightedTally>>> {
    let schedules = seeds
        .iter()
        .map(|&s| schedule(plan, cfg.mode, s))
        .collect::<Result<Vec<_>>>()?;
    // For each assignment, the runs that use it.
    let mut users: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (r, sched) in schedules.iter().enumerate() {
        for &(id, _) in sched {
            users.entry(id).or_default().push(r);
        }
    }
    let jobs: Vec<(u64, Vec<usize>)> = users.into_iter().collect();
    let shots = if cfg.engine == Engine::Exact { 0 } else { cfg.shots };
    let results = par::map(cfg.exec, &jobs, |(id, runs)| {
        let run_seeds: Vec<u64> = runs.iter().map(|&r| seeds[r]).collect();
        run_subexperiment(plan, *id, cfg, &run_seeds)
    });
    let mut table: HashMap<(u64, usize), Vec<f64>> = HashMap::new();
    for ((id, runs), res) in jobs.iter().zip(results) {
        for (r, w) in runs.iter().zip(res?) {
            table.insert((*id, *r), w);
        }
    }
    Ok(schedules
        .into_iter()
        .enumerate()
        .map(|(r, sched)| {
            sched
                .into_iter()
                .map(|(id, coefficient)| WeightedTally {
                    assignment: id,
                    coefficient,
                    shots,
                    net_weights: table.remove(&(id, r)).expect("executed"),
                })
                .collect()
        })
        .collect())
}
