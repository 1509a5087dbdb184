//! Fixtures shared by the criterion benches.

use fsa_core::{random_trig_path, MatPath};

/// The random element used across benches: norm 0.9, `Q = 2`.
pub fn fixture(n: usize, m: usize, seed: u64) -> MatPath {
    random_trig_path(n, m, 2, seed).expect("valid fixture shape")
}
