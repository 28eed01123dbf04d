//! Shot sampling with sign-carrying mid-circuit measurements and Pauli
//! noise trajectories.
//!
//! Mid-circuit Z measurements branch the state. Each branch carries the
//! product of its outcome eigenvalues, so a circuit defines an exact joint
//! distribution over `(sign, output)`; shots are drawn from it. A noisy
//! shot first draws its Pauli error pattern, then samples from the joint
//! distribution of the circuit with those errors inserted. Distributions
//! are memoised per pattern, so repeated patterns cost one lookup.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::program::{apply_pauli_code, apply_unitary, norm_sqr, project, Instr, Program};
use super::bitstring;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng;

/// Depolarizing Pauli noise after every gate plus readout bit flips.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub p_ro: f64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, p_ro: f64) -> Result<NoiseModel> {
        for (name, p) in [("p1", p1), ("p2", p2), ("p_ro", p_ro)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadRange(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(NoiseModel { p1, p2, p_ro })
    }

    pub fn ideal() -> NoiseModel {
        NoiseModel::default()
    }

    pub fn is_ideal(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_ro == 0.0
    }
}

/// One shot: measured output and the product of mid-measurement eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub output: usize,
    pub sign: i8,
}

type Pattern = Vec<(u16, u8)>;

/// Joint probabilities indexed by `negative << width | output`.
fn outcome_distribution(program: &Program, loc_instr: &[usize], errors: &[(u16, u8)]) -> Vec<f64> {
    let n = program.width;
    let mut start = vec![C64::new(0.0, 0.0); 1 << n];
    start[0] = C64::new(1.0, 0.0);
    let mut branches: Vec<(bool, Vec<C64>)> = vec![(false, start)];
    let mut next_error = errors.iter().peekable();
    for (idx, ins) in program.instrs.iter().enumerate() {
        match *ins {
            Instr::Measure { q } => {
                let mut split = Vec::with_capacity(branches.len() * 2);
                for (neg, amps) in branches {
                    let mut one = amps.clone();
                    let mut zero = amps;
                    project(&mut zero, q, 0);
                    project(&mut one, q, 1);
                    if norm_sqr(&zero) > 1e-30 {
                        split.push((neg, zero));
                    }
                    if norm_sqr(&one) > 1e-30 {
                        split.push((!neg, one));
                    }
                }
                branches = split;
            }
            Instr::Proj { .. } => unreachable!("projectors rejected at construction"),
            _ => {
                for (_, amps) in branches.iter_mut() {
                    apply_unitary(amps, ins);
                }
                while let Some(&&(loc, code)) = next_error.peek() {
                    if loc_instr[loc as usize] != idx {
                        break;
                    }
                    let support = ins.noise_support().expect("unitary location");
                    for (_, amps) in branches.iter_mut() {
                        apply_pauli_code(amps, support, code);
                    }
                    next_error.next();
                }
            }
        }
    }
    let mut joint = vec![0.0; 2 << n];
    for (neg, amps) in &branches {
        let offset = if *neg { 1 << n } else { 0 };
        for (x, a) in amps.iter().enumerate() {
            joint[offset + x] += a.norm_sqr();
        }
    }
    joint
}

fn cumulative(joint: &[f64]) -> Vec<f64> {
    joint
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

fn draw<R: RngCore>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty distribution");
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Signed net weight per output, `P(x, +) − P(x, −)`, computed exactly.
pub fn exact_signed_weights(circuit: &Circuit) -> Result<Vec<f64>> {
    let program = Program::compile(circuit)?;
    program.reject_projectors("exact weights")?;
    let joint = outcome_distribution(&program, &[], &[]);
    let half = 1 << circuit.width();
    Ok((0..half).map(|x| joint[x] - joint[half + x]).collect())
}

/// Reusable shot source for one circuit under one noise model.
pub struct ShotSampler {
    program: Program,
    noise: NoiseModel,
    loc_instr: Vec<usize>,
    loc_p: Vec<f64>,
    loc_two: Vec<bool>,
    /// `suffix[j]` is the probability of no error at locations `j..`.
    suffix: Vec<f64>,
    /// Draw every location independently; skipping is unstable for p ≥ 0.5.
    per_gate: bool,
    clean: Vec<f64>,
    cache: HashMap<Pattern, Vec<f64>>,
}

impl ShotSampler {
    pub fn new(circuit: &Circuit, noise: NoiseModel) -> Result<ShotSampler> {
        let program = Program::compile(circuit)?;
        program.reject_projectors("shot sampling")?;
        let mut loc_instr = Vec::new();
        let mut loc_p = Vec::new();
        let mut loc_two = Vec::new();
        for (i, ins) in program.instrs.iter().enumerate() {
            if let Some((_, second)) = ins.noise_support() {
                loc_instr.push(i);
                loc_two.push(second.is_some());
                loc_p.push(if second.is_some() { noise.p2 } else { noise.p1 });
            }
        }
        if loc_instr.len() > u16::MAX as usize {
            return Err(Error::BadRange("too many gates for noise tracking".into()));
        }
        let mut suffix = vec![1.0; loc_p.len() + 1];
        for j in (0..loc_p.len()).rev() {
            suffix[j] = suffix[j + 1] * (1.0 - loc_p[j]);
        }
        let per_gate = suffix[0] == 0.0 || loc_p.iter().any(|&p| p >= 0.5);
        let clean = cumulative(&outcome_distribution(&program, &loc_instr, &[]));
        Ok(ShotSampler {
            program,
            noise,
            loc_instr,
            loc_p,
            loc_two,
            suffix,
            per_gate,
            clean,
            cache: HashMap::new(),
        })
    }

    pub fn width(&self) -> usize {
        self.program.width
    }

    /// Number of distinct error patterns simulated so far.
    pub fn cached_patterns(&self) -> usize {
        self.cache.len()
    }

    fn pauli_code<R: RngCore>(&self, loc: usize, rng: &mut R) -> u8 {
        if self.loc_two[loc] {
            rng.random_range(1..16u8)
        } else {
            rng.random_range(1..4u8)
        }
    }

    fn error_pattern_into<R: RngCore>(&self, rng: &mut R, pattern: &mut Pattern) {
        pattern.clear();
        let n_locs = self.loc_p.len();
        if self.per_gate {
            for loc in 0..n_locs {
                if rng.random::<f64>() < self.loc_p[loc] {
                    let code = self.pauli_code(loc, rng);
                    pattern.push((loc as u16, code));
                }
            }
            return;
        }
        let mut j = 0;
        while j < n_locs {
            let u: f64 = rng.random();
            if u < self.suffix[j] {
                break;
            }
            // First error location m: the smallest m with suffix[m + 1] >= suffix[j] / u.
            let threshold = self.suffix[j] / u;
            let m = j + self.suffix[j + 1..].partition_point(|&s| s < threshold);
            let m = m.min(n_locs - 1);
            let code = self.pauli_code(m, rng);
            pattern.push((m as u16, code));
            j = m + 1;
        }
    }

    /// Draw `shots` shots on stream `stream` of `seed`, calling `f(output, sign)`.
    ///
    /// Noise-free sampling reads one `f64` per shot sequentially from the
    /// stream; each noisy shot has its own generator.
    pub fn for_each_shot(&mut self, shots: u64, seed: u64, stream: u64, mut f: impl FnMut(usize, i8)) {
        let n = self.program.width;
        let mask = (1usize << n) - 1;
        if self.noise.is_ideal() {
            let mut r = rng::stream(seed, stream);
            for _ in 0..shots {
                let idx = draw(&self.clean, &mut r);
                f(idx & mask, if idx >> n == 1 { -1 } else { 1 });
            }
            return;
        }
        let mut pattern = Pattern::new();
        for shot in 0..shots {
            let mut r = rng::shot_stream(seed, stream, shot);
            self.error_pattern_into(&mut r, &mut pattern);
            let idx = if pattern.is_empty() {
                draw(&self.clean, &mut r)
            } else {
                if !self.cache.contains_key(pattern.as_slice()) {
                    let joint = outcome_distribution(&self.program, &self.loc_instr, &pattern);
                    self.cache.insert(pattern.clone(), cumulative(&joint));
                }
                draw(&self.cache[pattern.as_slice()], &mut r)
            };
            let mut x = idx & mask;
            if self.noise.p_ro > 0.0 {
                for q in 0..n {
                    if r.random::<f64>() < self.noise.p_ro {
                        x ^= 1 << q;
                    }
                }
            }
            f(x, if idx >> n == 1 { -1 } else { 1 });
        }
    }

    /// `(1/N)·Σ sign·1[output = x]` for every `x`.
    pub fn net_weights(&mut self, shots: u64, seed: u64, stream: u64) -> Vec<f64> {
        let mut counts = vec![0i64; 1 << self.program.width];
        self.for_each_shot(shots, seed, stream, |x, s| counts[x] += s as i64);
        let inv = if shots == 0 { 0.0 } else { 1.0 / shots as f64 };
        counts.into_iter().map(|c| c as f64 * inv).collect()
    }

    pub fn records(&mut self, shots: u64, seed: u64, stream: u64) -> Vec<ShotRecord> {
        let mut out = Vec::with_capacity(shots as usize);
        self.for_each_shot(shots, seed, stream, |output, sign| out.push(ShotRecord { output, sign }));
        out
    }
}

/// Ideal shots; a pure function of `(circuit, shots, seed)`.
pub fn sample_shots(circuit: &Circuit, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
    Ok(ShotSampler::new(circuit, NoiseModel::ideal())?.records(shots, seed, 0))
}

/// Shots under Pauli trajectory noise; a pure function of its inputs.
pub fn noisy_trajectory_sample(
    circuit: &Circuit,
    noise: NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    Ok(ShotSampler::new(circuit, noise)?.records(shots, seed, 0))
}

/// Debug export: one `output,sign` row per shot.
pub fn write_shots_csv<W: Write>(records: &[ShotRecord], width: usize, mut out: W) -> Result<()> {
    writeln!(out, "output,sign")?;
    for r in records {
        writeln!(out, "{},{}", bitstring(r.output, width), r.sign)?;
    }
    Ok(())
}
