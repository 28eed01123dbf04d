//! Statevector simulation, shot sampling and noise trajectories.

pub mod oracle;
pub(crate) mod program;
mod shots;

use num_complex::Complex64 as C64;

pub use oracle::{channel_oracle, circuit_unitary_oracle, random_density_matrix};
pub use shots::{
    exact_signed_weights, noisy_trajectory_sample, sample_shots, write_shots_csv, NoiseModel,
    ShotRecord, ShotSampler,
};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use program::{apply_unitary, Program};

/// Amplitudes of an `n`-qubit pure state, little-endian indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(width: usize) -> StateVector {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << width];
        amps[0] = C64::new(1.0, 0.0);
        StateVector { width, amps }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        program::norm_sqr(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨ψ|P|ψ⟩` for a Pauli string written most-significant qubit first.
    pub fn expectation_pauli(&self, pauli: &str) -> Result<f64> {
        let ops = parse_pauli(pauli, self.width)?;
        if ops.iter().all(|&p| p == 'I' || p == 'Z') {
            let mask = z_mask(&ops);
            return Ok(self
                .amps
                .iter()
                .enumerate()
                .map(|(x, a)| parity_sign(x, mask) * a.norm_sqr())
                .sum());
        }
        let mut phi = self.amps.clone();
        for (q, &p) in ops.iter().enumerate() {
            let m = match p {
                'X' => program::PAULI_X,
                'Y' => program::PAULI_Y,
                'Z' => program::PAULI_Z,
                _ => continue,
            };
            program::apply_one(&mut phi, q, &m);
        }
        Ok(self
            .amps
            .iter()
            .zip(&phi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum())
    }
}

/// Pauli letters indexed by qubit. The string is written with qubit
/// `width - 1` leftmost, matching bitstring printing.
pub fn parse_pauli(pauli: &str, width: usize) -> Result<Vec<char>> {
    let chars: Vec<char> = pauli.chars().collect();
    if chars.len() != width || chars.iter().any(|c| !"IXYZ".contains(*c)) {
        return Err(Error::BadPauliString(pauli.to_string()));
    }
    Ok(chars.into_iter().rev().collect())
}

/// Bit mask of qubits carrying `Z` in a diagonal Pauli string.
pub fn z_mask(ops: &[char]) -> usize {
    ops.iter()
        .enumerate()
        .filter(|(_, &p)| p == 'Z')
        .map(|(q, _)| 1usize << q)
        .sum()
}

/// `(-1)^{popcount(x & mask)}`.
pub fn parity_sign(x: usize, mask: usize) -> f64 {
    if (x & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Bitstring of `x` over `width` qubits, qubit 0 rightmost.
pub fn bitstring(x: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|q| if (x >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > 63 || s.chars().any(|c| c != '0' && c != '1') {
        return Err(Error::Parse(format!("bad bitstring `{s}`")));
    }
    Ok(usize::from_str_radix(s, 2).expect("validated binary literal"))
}

/// `U|0…0⟩` for a bound, measurement-free circuit.
pub fn run_statevector(circuit: &Circuit) -> Result<StateVector> {
    let program = Program::compile(circuit)?;
    program.reject_nonunitary("statevector run")?;
    let mut state = StateVector::zero(circuit.width());
    for ins in &program.instrs {
        apply_unitary(&mut state.amps, ins);
    }
    Ok(state)
}
