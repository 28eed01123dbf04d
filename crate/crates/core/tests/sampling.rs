//! Statistical behaviour of the shot sampler.

use qpdcut::circuit::{Circuit, GateOp};
use qpdcut::cutting::total_deviation;
use qpdcut::sim::{run_statevector, sample_shots};

fn empirical(circuit: &Circuit, shots: u64, seed: u64) -> Vec<f64> {
    let mut f = vec![0.0; 1 << circuit.width()];
    for r in sample_shots(circuit, shots, seed).unwrap() {
        f[r.output] += 1.0 / shots as f64;
    }
    f
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    (v[v.len() / 2 - 1] + v[v.len() / 2]) / 2.0
}

#[test]
fn deviation_halves_when_shots_quadruple() {
    let c = Circuit::from_ops(
        3,
        [GateOp::h(0), GateOp::ry(1, 1.1), GateOp::cnot(0, 2), GateOp::rx(2, 0.4), GateOp::cz(1, 2)],
    )
    .unwrap();
    let p = run_statevector(&c).unwrap().probabilities();
    let med = |shots| median((0..100).map(|s| total_deviation(&empirical(&c, shots, s), &p)).collect());
    let ratio = med(1024) / med(4096);
    assert!((1.4..=2.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn identical_seeds_give_identical_records() {
    let c = Circuit::from_ops(2, [GateOp::h(0), GateOp::cnot(0, 1)]).unwrap();
    assert_eq!(sample_shots(&c, 500, 9).unwrap(), sample_shots(&c, 500, 9).unwrap());
    assert_ne!(sample_shots(&c, 500, 9).unwrap(), sample_shots(&c, 500, 10).unwrap());
}
