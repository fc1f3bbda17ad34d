//! Deterministic random streams and the special functions shared by the
//! channel, PHY and learning code.
//!
//! Streams are xoshiro256++ generators whose 256-bit state is expanded from a
//! 64-bit key with SplitMix64. Child streams are derived by hashing the
//! parent's key together with a label, so splitting never advances the parent.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

const SPLITMIX_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a, used for labels and content digests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A labelled, reproducible pseudo-random stream.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: Xoshiro256PlusPlus,
    key: u64,
    label: String,
    spare_normal: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::from_key(seed, "root".to_string())
    }

    fn from_key(key: u64, label: String) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(key),
            key,
            label,
            spare_normal: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Derives an independent child stream. The parent is left untouched.
    pub fn split(&self, label: &str) -> RandomStream {
        let key = splitmix64(splitmix64(self.key) ^ fnv1a64(label.as_bytes()));
        Self::from_key(key, format!("{}/{}", self.label, label))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw on [0, 1) with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` by widening multiply. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Standard normal draw by Box-Muller; the second output is cached and
    /// returned by the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Draw from N(mu, sigma^2). `sigma == 0` returns `mu` without consuming
    /// randomness.
    pub fn gaussian(&mut self, mu: f64, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("gaussian sigma must be >= 0, got {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(mu);
        }
        Ok(mu + sigma * self.standard_normal())
    }

    /// Linear power gain `10^((mean_db + X)/10)` with `X ~ N(0, sigma_db^2)`.
    pub fn lognormal_db(&mut self, mean_db: f64, sigma_db: f64) -> Result<f64> {
        if !(sigma_db >= 0.0) || !sigma_db.is_finite() {
            return Err(Error::Domain(format!("lognormal sigma_db must be >= 0, got {sigma_db}")));
        }
        let db = self.gaussian(mean_db, sigma_db)?;
        Ok(db_to_linear(db))
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Complementary error function.
pub fn erfc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("erfc of non-finite {x}")));
    }
    Ok(libm::erfc(x))
}

/// `erfc` for callers that have already established a finite argument.
pub(crate) fn erfc_finite(x: f64) -> f64 {
    debug_assert!(x.is_finite());
    libm::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_points() {
        assert_eq!(erfc(0.0).unwrap(), 1.0);
        for x in [0.3, 1.7] {
            assert!((erfc(x).unwrap() - (2.0 - erfc(-x).unwrap())).abs() < 1e-15);
        }
        assert!(erfc(f64::NAN).is_err());
        assert!(erfc(f64::INFINITY).is_err());
    }

    #[test]
    fn gaussian_degenerate_and_errors() {
        let mut s = RandomStream::new(1);
        assert_eq!(s.gaussian(3.5, 0.0).unwrap(), 3.5);
        assert!(s.gaussian(0.0, -1.0).is_err());
        assert!(s.lognormal_db(0.0, -0.1).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let mut s = RandomStream::new(42);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.gaussian(0.0, 1.5f64.sqrt()).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.5).abs() < 0.05, "var {var}");
    }

    #[test]
    fn lognormal_reference_and_median() {
        let mut s = RandomStream::new(3);
        assert!((s.lognormal_db(-20.0, 0.0).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(s.lognormal_db(0.0, 0.0).unwrap(), 1.0);
        let mut xs: Vec<f64> = (0..100_000).map(|_| s.lognormal_db(-10.0, 4.0).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = xs[xs.len() / 2];
        assert!((median / 0.1 - 1.0).abs() < 0.05, "median {median}");
    }

    #[test]
    fn split_is_deterministic_and_label_sensitive() {
        let parent = RandomStream::new(7);
        let mut a = parent.split("jammer");
        let mut b = parent.clone().split("jammer");
        let mut c = parent.split("uav");
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa[0], c.next_u64());
    }

    #[test]
    fn split_does_not_consume_parent() {
        let mut p1 = RandomStream::new(11);
        let mut p2 = RandomStream::new(11);
        let _child = p1.split("jammer");
        for _ in 0..32 {
            assert_eq!(p1.next_u64(), p2.next_u64());
        }
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = RandomStream::new(5);
        for n in 1..40 {
            for _ in 0..200 {
                assert!(s.below(n) < n);
            }
        }
    }
}
