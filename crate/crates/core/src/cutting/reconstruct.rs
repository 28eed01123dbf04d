//! Recombining tallies into expectation values and distributions.

use serde::{Deserialize, Serialize};

use super::exec::WeightedTally;
use super::qpd::gamma;
use crate::error::{Error, Result};
use crate::sim::{parse_pauli, parity_sign, z_mask};

/// Signed reconstruction `q(x) = Σ_i c_i · net_weight_i(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub weights: Vec<f64>,
}

/// Clamped and renormalized reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub probabilities: Vec<f64>,
    /// Total negative mass removed by clamping.
    pub clamped_mass: f64,
}

impl QuasiDistribution {
    pub fn width(&self) -> usize {
        self.weights.len().trailing_zeros() as usize
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Negative entries set to zero, then rescaled to sum to one. Falls back
    /// to uniform if nothing positive remains.
    pub fn normalized(&self) -> Normalized {
        let clamped_mass = self.weights.iter().filter(|w| **w < 0.0).map(|w| -w).sum();
        let mut probabilities: Vec<f64> = self.weights.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = probabilities.iter().sum();
        if total > 0.0 {
            probabilities.iter_mut().for_each(|p| *p /= total);
        } else {
            let u = 1.0 / probabilities.len() as f64;
            probabilities.iter_mut().for_each(|p| *p = u);
        }
        Normalized { probabilities, clamped_mass }
    }
}

/// `Σ_x |q(x) − p(x)|`.
pub fn total_deviation(q: &[f64], p: &[f64]) -> f64 {
    q.iter().zip(p).map(|(a, b)| (a - b).abs()).sum()
}

fn check_widths(tallies: &[WeightedTally]) -> Result<usize> {
    let len = tallies.first().map(|t| t.net_weights.len()).ok_or(Error::EmptyDataset)?;
    for t in tallies {
        if t.net_weights.len() != len {
            return Err(Error::DimMismatch { expected: len, got: t.net_weights.len() });
        }
    }
    Ok(len)
}

/// Folds tallies in the given order (assignment order from the executor).
pub fn reconstruct_distribution(tallies: &[WeightedTally]) -> Result<QuasiDistribution> {
    let len = check_widths(tallies)?;
    let mut weights = vec![0.0; len];
    for t in tallies {
        for (q, w) in weights.iter_mut().zip(&t.net_weights) {
            *q += t.coefficient * w;
        }
    }
    Ok(QuasiDistribution { weights })
}

/// Expectation of a Z/I string. Other Paulis need basis changes before cutting.
pub fn reconstruct_expectation(tallies: &[WeightedTally], pauli: &str) -> Result<f64> {
    let len = check_widths(tallies)?;
    let ops = parse_pauli(pauli, len.trailing_zeros() as usize)?;
    if ops.iter().any(|&c| c != 'I' && c != 'Z') {
        return Err(Error::BadPauliString(format!("{pauli}: only I/Z are measurable from tallies")));
    }
    let mask = z_mask(&ops);
    Ok(tallies
        .iter()
        .map(|t| t.coefficient * t.net_weights.iter().enumerate().map(|(x, w)| w * parity_sign(x, mask)).sum::<f64>())
        .sum())
}

/// Shots so that a `[−Γ, Γ]`-bounded mean is within `epsilon` with
/// probability `1 − delta`: `ceil(Γ² ln(2/δ) / (2ε²))`.
pub fn required_shots(epsilon: f64, delta: f64, thetas: &[f64]) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadRange(format!("epsilon = {epsilon}, delta = {delta}; both must be in (0, 1)")));
    }
    let g: f64 = thetas.iter().map(|&t| gamma(t)).product();
    Ok((g * g * (2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, GateOp};
    use crate::cutting::{execute_plan, CutPlan, Engine, ExecConfig};
    use std::f64::consts::FRAC_PI_4;

    fn ghz_tallies(cfg: &ExecConfig) -> Vec<WeightedTally> {
        let plan = CutPlan::new(Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1)]).unwrap(), &[1]).unwrap();
        execute_plan(&plan, cfg).unwrap()
    }

    #[test]
    fn ghz_exact_reconstruction() {
        let t = ghz_tallies(&ExecConfig::default());
        let q = reconstruct_distribution(&t).unwrap();
        for (x, want) in [0.5, 0.0, 0.0, 0.5].iter().enumerate() {
            assert!((q.weights[x] - want).abs() < 1e-12);
        }
        assert!((reconstruct_expectation(&t, "ZZ").unwrap() - 1.0).abs() < 1e-12);
        assert!(reconstruct_expectation(&t, "ZI").unwrap().abs() < 1e-12);
        assert!(matches!(reconstruct_expectation(&t, "XX"), Err(Error::BadPauliString(_))));
        assert!(reconstruct_expectation(&t, "Z").is_err());
    }

    #[test]
    fn sampled_reconstruction_is_close() {
        let cfg = ExecConfig { engine: Engine::Sampled, shots: 4096, seed: 1, ..ExecConfig::default() };
        let q = reconstruct_distribution(&ghz_tallies(&cfg)).unwrap();
        assert!(total_deviation(&q.weights, &[0.5, 0.0, 0.0, 0.5]) < 0.2);
        let n = q.normalized();
        assert!((n.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(n.probabilities.iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn clamping_reports_removed_mass() {
        let q = QuasiDistribution { weights: vec![0.6, -0.1, 0.5, 0.0] };
        let n = q.normalized();
        assert!((n.clamped_mass - 0.1).abs() < 1e-15);
        assert!((n.probabilities[0] - 0.6 / 1.1).abs() < 1e-15);
        assert_eq!(n.probabilities[1], 0.0);
        let all_negative = QuasiDistribution { weights: vec![-1.0, 0.0] }.normalized();
        assert_eq!(all_negative.probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn required_shots_formula() {
        assert_eq!(required_shots(0.1, 0.05, &[]).unwrap(), 185);
        let base = (40f64.ln() / 0.02).ceil();
        let cz = required_shots(0.1, 0.05, &[FRAC_PI_4]).unwrap() as f64;
        assert_eq!(cz, (9.0 * 40f64.ln() / 0.02).ceil());
        // Halving epsilon quadruples the unrounded count.
        let half = required_shots(0.05, 0.05, &[]).unwrap();
        assert_eq!(half, (4.0 * 40f64.ln() / 0.02).ceil() as u64);
        assert!((half as f64 / base - 4.0).abs() < 4.0 / base);
        assert!(required_shots(0.0, 0.5, &[]).is_err());
        assert!(required_shots(0.1, 1.0, &[]).is_err());
    }

    #[test]
    fn required_shots_is_monotone() {
        let mut prev = u64::MAX;
        for eps in [0.01, 0.02, 0.05, 0.1, 0.3] {
            let n = required_shots(eps, 0.1, &[0.3]).unwrap();
            assert!(n <= prev);
            prev = n;
        }
        assert!(required_shots(0.1, 0.01, &[]).unwrap() >= required_shots(0.1, 0.2, &[]).unwrap());
    }
}
