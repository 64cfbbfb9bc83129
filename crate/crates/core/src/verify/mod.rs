//! Seeded verification campaigns with machine-readable reports.

pub mod identities;
pub mod report;
pub mod suites;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use identities::{run_identity_suite, run_identity_suite_with, IdentityOptions};
pub use report::{CheckKind, CheckRecord, SuiteReport};
pub use suites::{
    run_cp2_suite, run_nogo_suite, run_nogo_suite_with, run_poisson_suite, run_poisson_suite_with, run_thm2_suite,
    run_thm2_suite_with, PoissonOptions, MAX_N,
};

/// Independent stream for the component `label` of a run seeded with `seed`.
pub fn subseed(seed: u64, label: u64) -> u64 {
    ChaCha8Rng::seed_from_u64(seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15)).next_u64()
}

/// `tau` with `|Re tau| <= 1/2` and `0.8 <= Im tau <= 2`.
pub fn random_tau(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(0.8..2.0))
}
