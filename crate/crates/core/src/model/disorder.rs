//! Seeded disorder fields.
//!
//! The seed-to-field mapping is a stable contract so that result tables are
//! reproducible across platforms and releases:
//!
//! 1. `ChaCha20Rng::seed_from_u64(seed)` (rand_core's PCG32-based seed
//!    expansion).
//! 2. `U(x)` for `x = 0..L`, in order: `u = (next_u64() >> 11) * 2^-53`,
//!    `U(x) = 2u - 1`, so `U(x)` lies in `[-1, 1)`.
//! 3. Uncorrelated AB flux only: a second pass over `x = 0..L` where the top
//!    bit of `next_u64()` selects `phi(x) = +pi/2` (bit 0) or `-pi/2` (bit 1).
//! 4. Phase-correlated AB flux: `phi(x) = +pi/2` where `U(x) >= 0` and `-pi/2`
//!    otherwise. No extra draws.
//!
//! `gamma(x) = Gamma * U(x)`. HN realizations carry `phi(x) = 0`.

use num_complex::Complex64 as C64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::f64::consts::FRAC_PI_2;

use super::{DisorderMode, ModelKind, ModelSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub u_field: Vec<f64>,
    pub gamma_field: Vec<C64>,
    pub phi_field: Vec<f64>,
    pub seed: u64,
}

impl DisorderRealization {
    pub fn len(&self) -> usize {
        self.u_field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_field.is_empty()
    }

    /// Cyclic shift by `shift` cells: field `x` moves to `x + shift`.
    pub fn translated(&self, shift: usize) -> Self {
        let rot = |v: &[f64]| -> Vec<f64> {
            let n = v.len();
            (0..n).map(|x| v[(x + n - shift % n) % n]).collect()
        };
        let n = self.gamma_field.len();
        DisorderRealization {
            u_field: rot(&self.u_field),
            gamma_field: (0..n).map(|x| self.gamma_field[(x + n - shift % n) % n]).collect(),
            phi_field: rot(&self.phi_field),
            seed: self.seed,
        }
    }
}

fn unit_interval(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn draw_disorder(spec: &ModelSpec) -> Result<DisorderRealization> {
    if spec.disorder == DisorderMode::None {
        return Err(Error::Contract("draw_disorder called with disorder mode NONE".into()));
    }
    if spec.disorder == DisorderMode::PhaseCorrelated && spec.kind == ModelKind::HatanoNelson {
        return Err(Error::Config("PHASE_CORRELATED disorder is only defined for AB_FLUX".into()));
    }
    let cells = spec.cells;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let u_field: Vec<f64> = (0..cells).map(|_| 2.0 * unit_interval(&mut rng) - 1.0).collect();
    let gamma_field = u_field.iter().map(|&u| spec.gamma_scale * u).collect();

    let phi_field = match (spec.kind, spec.disorder) {
        (ModelKind::HatanoNelson, _) => vec![0.0; cells],
        (ModelKind::AbFlux, DisorderMode::PhaseCorrelated) => u_field
            .iter()
            .map(|&u| if u >= 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 })
            .collect(),
        (ModelKind::AbFlux, _) => (0..cells)
            .map(|_| if rng.next_u64() >> 63 == 0 { FRAC_PI_2 } else { -FRAC_PI_2 })
            .collect(),
    };

    Ok(DisorderRealization { u_field, gamma_field, phi_field, seed: spec.seed })
}
