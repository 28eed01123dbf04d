//! End-to-end reconstruction checks against the uncut simulator.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpdcut::circuit::{Circuit, GateOp};
use qpdcut::cutting::{
    enumerate_subexperiments, execute_plan, execute_plan_runs, reconstruct_distribution, reconstruct_expectation,
    total_deviation, CutPlan, Engine, ExecConfig, Mode,
};
use qpdcut::sim::run_statevector;
use qpdcut::Exec;

/// Random circuit of rotations and entangling gates; returns the circuit and
/// the indices of its entangling gates.
fn random_circuit(width: usize, gates: usize, rng: &mut ChaCha8Rng) -> (Circuit, Vec<usize>) {
    let mut c = Circuit::new(width).unwrap();
    let mut entangling = Vec::new();
    for _ in 0..gates {
        let q = rng.random_range(0..width);
        let mut r = rng.random_range(0..width - 1);
        if r >= q {
            r += 1;
        }
        let t = rng.random_range(-3.0..3.0);
        let op = match rng.random_range(0..7) {
            0 => GateOp::rx(q, t),
            1 => GateOp::ry(q, t),
            2 => GateOp::rz(q, t),
            3 => GateOp::h(q),
            4 => GateOp::cz(q, r),
            5 => GateOp::cnot(q, r),
            _ => GateOp::rzz(q, r, t),
        };
        if op.qubits.len() == 2 {
            entangling.push(c.len());
        }
        c.push(op).unwrap();
    }
    (c, entangling)
}

fn exact_cfg() -> ExecConfig {
    ExecConfig { engine: Engine::Exact, ..ExecConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_reconstruction_matches_uncut(seed in any::<u64>(), width in 2usize..=5, gates in 4usize..24, cuts in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, entangling) = random_circuit(width, gates, &mut rng);
        let chosen: Vec<usize> = entangling.iter().copied().take(cuts).collect();
        let p = run_statevector(&c).unwrap().probabilities();
        let plan = CutPlan::new(c, &chosen).unwrap();
        for fragments in [true, false] {
            let cfg = ExecConfig { fragments, ..exact_cfg() };
            let q = reconstruct_distribution(&execute_plan(&plan, &cfg).unwrap()).unwrap();
            for (a, b) in q.weights.iter().zip(&p) {
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn fragment_and_whole_execution_agree(seed in any::<u64>(), width in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, entangling) = random_circuit(width, 16, &mut rng);
        let plan = CutPlan::new(c, &entangling[..entangling.len().min(2)]).unwrap();
        let split = execute_plan(&plan, &exact_cfg()).unwrap();
        let whole = execute_plan(&plan, &ExecConfig { fragments: false, ..exact_cfg() }).unwrap();
        for (a, b) in split.iter().zip(&whole) {
            prop_assert_eq!(a.assignment, b.assignment);
            for (x, y) in a.net_weights.iter().zip(&b.net_weights) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_coefficients_sum_to_one(seed in any::<u64>(), cuts in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, entangling) = random_circuit(4, 20, &mut rng);
        let chosen: Vec<usize> = entangling.iter().copied().take(cuts).collect();
        let plan = CutPlan::new(c, &chosen).unwrap();
        let subs = enumerate_subexperiments(&plan).unwrap();
        prop_assert_eq!(subs.len(), 6usize.pow(chosen.len() as u32));
        let total: f64 = subs.iter().map(|(_, c)| c).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

fn ghz3() -> Circuit {
    Circuit::from_ops(3, [GateOp::h(0), GateOp::cnot(0, 1), GateOp::cnot(1, 2), GateOp::ry(2, 0.7)]).unwrap()
}

fn mean_and_se(samples: &[Vec<f64>], x: usize) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s[x]).sum::<f64>() / n;
    let var = samples.iter().map(|s| (s[x] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn sampled_reconstruction_is_unbiased() {
    let c = ghz3();
    let p = run_statevector(&c).unwrap().probabilities();
    let plan = CutPlan::new(c, &[1, 2]).unwrap();
    let cfg = ExecConfig { engine: Engine::Sampled, shots: 128, seed: 5, ..ExecConfig::default() };
    let seeds: Vec<u64> = (0..500).collect();
    let runs: Vec<Vec<f64>> = execute_plan_runs(&plan, &cfg, &seeds)
        .unwrap()
        .iter()
        .map(|t| reconstruct_distribution(t).unwrap().weights)
        .collect();
    for (x, &px) in p.iter().enumerate() {
        let (mean, se) = mean_and_se(&runs, x);
        assert!((mean - px).abs() < 3.0 * se + 1e-12, "x={x}: {mean} vs {px} (se {se})");
    }
    let totals: Vec<Vec<f64>> = runs.iter().map(|q| vec![q.iter().sum()]).collect();
    let (mean, se) = mean_and_se(&totals, 0);
    assert!((mean - 1.0).abs() < 3.0 * se + 1e-12, "total {mean} (se {se})");
}

#[test]
fn sample_mode_is_unbiased_for_two_cuts() {
    let c = ghz3();
    let p = run_statevector(&c).unwrap().probabilities();
    let plan = CutPlan::new(c, &[1, 2]).unwrap();
    let cfg = ExecConfig { mode: Mode::Sample(100), engine: Engine::Exact, ..ExecConfig::default() };
    let seeds: Vec<u64> = (0..200).collect();
    let runs: Vec<Vec<f64>> = execute_plan_runs(&plan, &cfg, &seeds)
        .unwrap()
        .iter()
        .map(|t| reconstruct_distribution(t).unwrap().weights)
        .collect();
    for (x, &px) in p.iter().enumerate() {
        let (mean, se) = mean_and_se(&runs, x);
        assert!((mean - px).abs() < 3.0 * se + 1e-12, "x={x}: {mean} vs {px} (se {se})");
    }
}

#[test]
fn expectations_follow_distribution() {
    let c = ghz3();
    let sv = run_statevector(&c).unwrap();
    let plan = CutPlan::new(c, &[1, 2]).unwrap();
    let tallies = execute_plan(&plan, &exact_cfg()).unwrap();
    for pauli in ["ZII", "IZI", "ZZZ", "IIZ", "ZIZ"] {
        let got = reconstruct_expectation(&tallies, pauli).unwrap();
        assert!((got - sv.expectation_pauli(pauli).unwrap()).abs() < 1e-10, "{pauli}");
    }
    assert!(reconstruct_expectation(&tallies, "XII").is_err());
}

#[test]
fn execution_policy_does_not_change_results() {
    let plan = CutPlan::new(ghz3(), &[1, 2]).unwrap();
    let base = ExecConfig { engine: Engine::Sampled, shots: 256, seed: 77, ..ExecConfig::default() };
    let par = execute_plan(&plan, &ExecConfig { exec: Exec::Parallel, ..base }).unwrap();
    let seq = execute_plan(&plan, &ExecConfig { exec: Exec::Sequential, ..base }).unwrap();
    assert_eq!(par, seq);
    let q = reconstruct_distribution(&par).unwrap();
    let p = run_statevector(plan.base()).unwrap().probabilities();
    assert!(total_deviation(&q.weights, &p) < 0.5);
}
