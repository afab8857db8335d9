//! Per-run seeds.
//!
//! The seed of a run is the first 8 bytes (big-endian) of
//! `SHA-256("{base_seed}|{method}|{function}|{dim}|{repetition}")`, so each
//! cell gets an independent stream that does not depend on which other cells
//! are in the experiment.

use sha2::{Digest, Sha256};

pub fn run_seed(base_seed: u64, method: &str, function: &str, dim: usize, repetition: usize) -> u64 {
    let key = format!("{base_seed}|{method}|{function}|{dim}|{repetition}");
    let digest = Sha256::digest(key.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes)
}
