#![allow(dead_code)]

use elliptic_lattice::{validate, CouplingParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random valid generic parameter set at level (n, m), `|p| <= p_max`.
pub fn random_params(rng: &mut ChaCha8Rng, n: usize, m: u32, p_max: f64) -> CouplingParams {
    loop {
        let g = rng.gen_range(0.2..0.85);
        let gs = [rng.gen_range(0.3..0.9), rng.gen_range(0.3..0.9), rng.gen_range(0.05..0.5), rng.gen_range(0.05..0.5)];
        let gps = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
        let p = if p_max > 0.0 { rng.gen_range(-p_max..=p_max) } else { 0.0 };
        let params = CouplingParams::new(n, m, g, gs, gps, p);
        if validate(&params).valid {
            return params;
        }
    }
}

pub fn sample() -> CouplingParams {
    CouplingParams::new(2, 2, 0.5, [0.6, 0.7, 0.1, 0.1], [0.05; 4], 0.3)
}
