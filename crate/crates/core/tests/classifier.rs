//! Cut-mode forward and gradient equivalence for the iris model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpdcut::classifier::{
    class_scores, grad_parameter_shift, softmax_nll, Counters, ForwardMode, Head, ModelConfig,
};
use qpdcut::cutting::{CutPlan, Engine, ExecConfig};
use qpdcut::classifier::build_model_circuit;
use qpdcut::data::{load_iris, Dataset};
use qpdcut::Exec;

fn cut_exact() -> ForwardMode {
    ForwardMode::Cut(ExecConfig { engine: Engine::Exact, ..ExecConfig::default() })
}

fn random_weights(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..24).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

fn batch_loss(cfg: &ModelConfig, ds: &Dataset, w: &[f64]) -> f64 {
    let total: f64 = (0..ds.len())
        .map(|i| {
            let (s, _) = class_scores(cfg, &ds.features[i], w, ForwardMode::Exact).unwrap();
            softmax_nll(&s, ds.labels[i]).1
        })
        .sum();
    total / ds.len() as f64
}

#[test]
fn cut_forward_matches_exact_forward() {
    let iris = load_iris().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..50 {
        let cfg = ModelConfig::iris(Head::ALL[trial % 3]);
        let w = random_weights(&mut rng);
        let x = &iris.features[rng.random_range(0..iris.len())];
        let (exact, _) = class_scores(&cfg, x, &w, ForwardMode::Exact).unwrap();
        let (cut, runs) = class_scores(&cfg, x, &w, cut_exact()).unwrap();
        assert_eq!(runs, 1296);
        for (a, b) in exact.iter().zip(&cut) {
            assert!((a - b).abs() < 1e-9, "trial {trial}: {a} vs {b}");
        }
    }
}

#[test]
fn cut_gradient_matches_exact_gradient_and_costs_62208() {
    let cfg = ModelConfig::iris(Head::Parity);
    let ds = load_iris().unwrap().subset(&[17]);
    let w = random_weights(&mut ChaCha8Rng::seed_from_u64(8));
    let mask = vec![false; 24];
    let exact_counts = Counters::default();
    let (g_exact, l_exact) =
        grad_parameter_shift(&cfg, &ds, &w, ForwardMode::Exact, &mask, &exact_counts, Exec::Parallel).unwrap();
    let cut_counts = Counters::default();
    let (g_cut, l_cut) = grad_parameter_shift(&cfg, &ds, &w, cut_exact(), &mask, &cut_counts, Exec::Parallel).unwrap();
    assert!((l_exact - l_cut).abs() < 1e-9);
    for (a, b) in g_exact.iter().zip(&g_cut) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert_eq!(exact_counts.backward(), 48);
    let plan = CutPlan::for_partition(build_model_circuit(&cfg, &ds.features[0], &w).unwrap(), &cfg.partition).unwrap();
    assert_eq!(plan.k(), 4);
    assert_eq!(cut_counts.backward(), 2 * 24 * plan.num_assignments());
    assert_eq!(cut_counts.backward(), 62208);
}

#[test]
fn shift_rule_matches_finite_differences() {
    let iris = load_iris().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let h = 1e-5;
    for trial in 0..6 {
        let cfg = ModelConfig::iris(Head::ALL[trial % 3]);
        let idx: Vec<usize> = (0..3).map(|_| rng.random_range(0..iris.len())).collect();
        let ds = iris.subset(&idx);
        let w = random_weights(&mut rng);
        let (g, _) = grad_parameter_shift(&cfg, &ds, &w, ForwardMode::Exact, &[false; 24], &Counters::default(), Exec::Sequential)
            .unwrap();
        let mut shifted = w.clone();
        for j in 0..24 {
            shifted[j] = w[j] + h;
            let up = batch_loss(&cfg, &ds, &shifted);
            shifted[j] = w[j] - h;
            let down = batch_loss(&cfg, &ds, &shifted);
            shifted[j] = w[j];
            let fd = (up - down) / (2.0 * h);
            assert!((g[j] - fd).abs() < 1e-6, "trial {trial} param {j}: {} vs {fd}", g[j]);
        }
    }
}
