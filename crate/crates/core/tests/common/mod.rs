#![allow(dead_code)]

use abbflow::analysis::reference::ReferenceParams;
use abbflow::collision::{CollisionModel, RelaxationRates};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rates drawn uniformly from `(lo, hi)`.
pub fn random_rates(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> RelaxationRates {
    let mut s = || rng.random_range(lo..hi);
    RelaxationRates {
        s_j: s(),
        s_e: s(),
        s_x: s(),
        s_q: s(),
        s_d: s(),
    }
}

pub fn reference(model: &CollisionModel) -> ReferenceParams {
    ReferenceParams {
        alpha: model.alpha(),
        beta: model.beta(),
        lambda: model.lambda(),
        rates: model.rates(),
    }
}

pub fn random_populations(rng: &mut ChaCha8Rng) -> [f64; 9] {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}
