mod eval_cut;
mod noise;
mod train;
mod validate;

pub use eval_cut::eval_cut;
pub use noise::noise_compare;
pub use train::train;
pub use validate::validate;

use qpdcut::rng::derive_seed;

/// Seed of run `r` under master seed `seed`.
pub fn run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|r| derive_seed(seed, &[r])).collect()
}
