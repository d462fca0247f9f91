//! Seeded randomness.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), a
//! counter-based stream cipher whose output for a given `(seed, stream)` is
//! fixed by the algorithm itself. Seeds are expanded to keys with
//! `seed_from_u64`. Derived draws use explicit formulas so they are easy to
//! reproduce elsewhere:
//!
//! * uniform: `(next_u64 >> 11) * 2^-53`, in `[0, 1)`
//! * standard normal: Box-Muller, `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`
//! * standard complex normal: independent real and imaginary parts with
//!   variance 1/2 each, so `E|c|^2 = 1`

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::math::ComplexVector;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for the same seed (ChaCha stream id).
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.standard_normal() * std::f64::consts::FRAC_1_SQRT_2;
        let im = self.standard_normal() * std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(re, im)
    }

    pub fn complex_normal_vector(&mut self, d: usize) -> ComplexVector {
        (0..d).map(|_| self.complex_normal()).collect()
    }

    /// Poisson draw with the given mean; zero mean returns zero.
    pub fn poisson(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        match Poisson::new(mean) {
            Ok(dist) => dist.sample(self),
            // means beyond the sampler's range: normal approximation
            Err(_) => (mean + mean.sqrt() * self.standard_normal()).max(0.0).round(),
        }
    }

    /// Index drawn by inverse CDF from `weights` (assumed to sum to one).
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_give_equal_streams() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = Rng::with_stream(42, 0);
        let mut b = Rng::with_stream(42, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = Rng::new(0);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn complex_normal_has_unit_second_moment() {
        let mut rng = Rng::new(7);
        let n = 200_000;
        let m2: f64 = (0..n).map(|_| rng.complex_normal().norm_sqr()).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.02, "m2={m2}");
    }

    #[test]
    fn categorical_point_mass() {
        let mut rng = Rng::new(1);
        for _ in 0..100 {
            assert_eq!(rng.categorical(&[0.0, 1.0, 0.0]), 1);
        }
    }
}
