//! Seedable random streams.
//!
//! Every Monte Carlo trial owns its streams. Streams are addressed by a
//! `(seed, key, purpose)` triple so that, for instance, the channel stream of
//! one sweep point is identical no matter which pilot policy consumes it.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent purposes a trial draws randomness for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    Channel = 1,
    Noise = 2,
    Data = 3,
    Pilot = 4,
    Code = 5,
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for one purpose of one trial. Distinct `(key, purpose)` pairs
    /// yield non-overlapping ChaCha streams under the same seed.
    pub fn for_trial(seed: u64, key: u64, purpose: StreamPurpose) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&key.to_le_bytes());
        bytes[16..24].copy_from_slice(b"dpilot\0\0");
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(purpose as u64);
        Self { rng }
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circularly-symmetric complex Gaussian with total variance `var`.
    pub fn complex_gaussian(&mut self, var: f64) -> Complex64 {
        let s = (0.5 * var).sqrt();
        Complex64::new(s * self.gaussian(), s * self.gaussian())
    }

    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u32() & 1) as u8
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.bit()).collect()
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
