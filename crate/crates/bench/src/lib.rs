//! Fixtures shared by the criterion benches.

use lipwidth_core::{FiniteSet, NormedSpace};

/// `m` points of a fixed low-discrepancy sequence in `[-1, 1]^dim` under l2.
pub fn halton_cloud(m: usize, dim: usize) -> FiniteSet {
    const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];
    let points = (1..=m)
        .map(|i| {
            (0..dim)
                .map(|k| 2.0 * radical_inverse(i as u32, PRIMES[k % PRIMES.len()]) - 1.0)
                .collect()
        })
        .collect();
    FiniteSet::new(NormedSpace::l2(dim), points).expect("valid cloud")
}

fn radical_inverse(mut i: u32, base: u32) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}
