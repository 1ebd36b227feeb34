//! Per-realization seeds.
//!
//! Contract (stable across releases and platforms):
//!
//! ```text
//! mix(z)  = SplitMix64 finalizer:
//!           z += 0x9E3779B97F4A7C15
//!           z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!           z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!           z ^ (z >> 31)                     (wrapping arithmetic)
//! seed(base, ensemble, r) = mix(mix(mix(base) ^ ensemble) ^ r)
//! ```
//!
//! `ensemble` is the index of the disorder-ensemble coordinate — the
//! `(L, disorder mode, Gamma, scenario)` tuple in sweep order — and `r` is
//! the realization index `0..seeds.count`. Axes that do not change the
//! ensemble (`mu`, `beta`, `U`, boundary) share realizations, so for example
//! PBC and OBC rows of the same `r` see the same disorder fields.

pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn task_seed(base: u64, ensemble: u64, realization: u64) -> u64 {
    mix(mix(mix(base) ^ ensemble) ^ realization)
}
