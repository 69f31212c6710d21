//! Seeded, splittable random streams.
//!
//! A substream is ChaCha8 keyed by `seed` (expanded to a 256-bit key with
//! `SeedableRng::seed_from_u64`) and positioned on stream id `index`. ChaCha
//! is counter based, so distinct ids give non-overlapping keystreams under
//! the same key. Uniform draws take the top 53 bits of one `u64` output and
//! scale by 2^-53, which lands in `[0, 1)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Anything that yields independent uniform draws on `[0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

impl<R: RngCore + ?Sized> UniformSource for R {
    fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// An isolated random stream identified by `(seed, index)`.
#[derive(Debug, Clone)]
pub struct Substream {
    inner: ChaCha8Rng,
}

impl RngCore for Substream {
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

pub fn derive_substream(seed: u64, stream_index: u64) -> Substream {
    let mut inner = ChaCha8Rng::seed_from_u64(seed);
    inner.set_stream(stream_index);
    Substream { inner }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(seed: u64, index: u64, n: usize) -> Vec<f64> {
        let mut s = derive_substream(seed, index);
        (0..n).map(|_| s.next_uniform()).collect()
    }

    #[test]
    fn same_key_same_stream() {
        assert_eq!(draws(42, 0, 1000), draws(42, 0, 1000));
    }

    #[test]
    fn distinct_indices_differ() {
        assert_ne!(draws(42, 0, 1000), draws(42, 1, 1000));
        assert_ne!(draws(42, 0, 1000), draws(43, 0, 1000));
    }

    #[test]
    fn draws_in_unit_interval() {
        assert!(draws(42, 0, 1000).iter().all(|&u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn extreme_outputs_stay_in_range() {
        struct Fixed(u64);
        impl RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                self.0 as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {}
        }
        assert_eq!(Fixed(0).next_uniform(), 0.0);
        assert!(Fixed(u64::MAX).next_uniform() < 1.0);
    }

    #[test]
    fn stream_is_stable_across_versions() {
        // Frozen from the first run; guards the documented derivation.
        let first = derive_substream(42, 0).next_u64();
        let again = derive_substream(42, 0).next_u64();
        assert_eq!(first, again);
        assert_eq!(first, STREAM_42_0_FIRST);
    }

    const STREAM_42_0_FIRST: u64 = 12_578_764_544_318_200_737;
}
