//! Random irreducible instances for property tests and cross-checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polyalg::RealMatrix;
use crate::stability::StabilityInstance;

/// A random irreducible `P_π` on `n` states: a random Hamiltonian cycle plus
/// each other edge with probability `density`, with random row weights, and
/// a random positive `d_μ` normalized to sum one.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> StabilityInstance {
    assert!(n >= 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut w = vec![0.0; n * n];
    for k in 0..n {
        let (i, j) = (order[k], order[(k + 1) % n]);
        w[i * n + j] = rng.random_range(0.1..1.0);
    }
    for x in w.iter_mut() {
        if *x == 0.0 && rng.random_bool(density.clamp(0.0, 1.0)) {
            *x = rng.random_range(0.0..1.0);
        }
    }
    for i in 0..n {
        let s: f64 = w[i * n..(i + 1) * n].iter().sum();
        w[i * n..(i + 1) * n].iter_mut().for_each(|x| *x /= s);
    }
    let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = d.iter().sum();
    d.iter_mut().for_each(|x| *x /= s);
    let p = RealMatrix::from_row_major(n, w).expect("square by construction");
    StabilityInstance::new(d, p).expect("irreducible by construction")
}

/// `count` instances with sizes uniform on `1..=max_n`, reproducible from `seed`.
pub fn random_instances(seed: u64, count: usize, max_n: usize) -> Vec<StabilityInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=max_n);
            let density = rng.random_range(0.0..0.6);
            random_instance(&mut rng, n, density)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_valid_and_reproducible() {
        let a = random_instances(7, 30, 8);
        let b = random_instances(7, 30, 8);
        assert_eq!(a, b);
        assert!(a.iter().all(|i| i.is_normalized()));
    }
}
