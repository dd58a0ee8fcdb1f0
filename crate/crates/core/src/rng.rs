//! Seeded random source shared by every stochastic step.
//!
//! All randomness goes through [`SplitMix64`], a 64-bit generator whose
//! output stream is fully specified (Steele, Lea & Flood), so a seed produces
//! the same masks and fold assignments on every platform.

use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}
