//! Single-particle lattice Hamiltonians.
//!
//! Two families are supported:
//!
//! - the Hatano-Nelson chain, with asymmetric hoppings `1 + delta` (rightward)
//!   and `1 - delta` (leftward) and an optional real onsite disorder field;
//! - the AB-sublattice flux chain, where each cell `x` holds an `A` and a `B`
//!   orbital, the triangle `A_x -> B_x -> A_{x+1}` encloses a flux `phi(x)` and
//!   the `B` orbital carries a (generally complex) potential `gamma(x)`.
//!
//! Every hopping is stored as a [`Bond`] together with its real-space
//! displacement, which is what the velocity operator is built from. Under
//! periodic boundaries the wrap-around bond uses the minimal-image
//! displacement (one lattice step), so the velocity operator stays
//! translation covariant.

mod disorder;
mod lattice;

pub use disorder::{draw_disorder, DisorderRealization};
pub use lattice::{
    build_ab_flux, build_hamiltonian, build_hn, velocity_operator, Bond,
    SingleParticleHamiltonian,
};

use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    HatanoNelson,
    AbFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DisorderMode {
    None,
    Uncorrelated,
    PhaseCorrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Periodic,
    Open,
}

impl ModelKind {
    pub fn orbitals_per_cell(self) -> usize {
        match self {
            ModelKind::HatanoNelson => 1,
            ModelKind::AbFlux => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::HatanoNelson => "HN",
            ModelKind::AbFlux => "AB_FLUX",
        }
    }
}

impl DisorderMode {
    pub fn name(self) -> &'static str {
        match self {
            DisorderMode::None => "NONE",
            DisorderMode::Uncorrelated => "UNCORRELATED",
            DisorderMode::PhaseCorrelated => "PHASE_CORRELATED",
        }
    }
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "PBC",
            Boundary::Open => "OBC",
        }
    }
}

macro_rules! display_by_name {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    )*};
}
display_by_name!(ModelKind, DisorderMode, Boundary);

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HN" | "HATANO_NELSON" => Ok(ModelKind::HatanoNelson),
            "AB_FLUX" | "AB" => Ok(ModelKind::AbFlux),
            _ => Err(Error::Config(format!("unknown model kind `{s}` (expected HN or AB_FLUX)"))),
        }
    }
}

impl FromStr for DisorderMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NONE" => Ok(DisorderMode::None),
            "UNCORRELATED" => Ok(DisorderMode::Uncorrelated),
            "PHASE_CORRELATED" | "CORRELATED" => Ok(DisorderMode::PhaseCorrelated),
            _ => Err(Error::Config(format!(
                "unknown disorder mode `{s}` (expected NONE, UNCORRELATED or PHASE_CORRELATED)"
            ))),
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PBC" | "PERIODIC" => Ok(Boundary::Periodic),
            "OBC" | "OPEN" => Ok(Boundary::Open),
            _ => Err(Error::Config(format!("unknown boundary `{s}` (expected PBC or OBC)"))),
        }
    }
}

/// Declarative description of one model instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Number of unit cells `L`.
    pub cells: usize,
    /// Hatano-Nelson hopping asymmetry.
    pub delta: f64,
    /// Disorder amplitude `Gamma`; the drawn potential is `Gamma * U(x)`.
    pub gamma_scale: C64,
    pub disorder: DisorderMode,
    /// Flux used on every cell when `disorder == None`.
    pub phase_uniform: f64,
    /// Potential used on every (B, or HN) site when `disorder == None`.
    pub gamma_uniform: C64,
    pub boundary: Boundary,
    /// Nearest-neighbour density-density coupling (HN only, many-body layer).
    pub interaction: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn hatano_nelson(cells: usize, delta: f64) -> Self {
        ModelSpec {
            kind: ModelKind::HatanoNelson,
            cells,
            delta,
            gamma_scale: C64::new(0.0, 0.0),
            disorder: DisorderMode::None,
            phase_uniform: 0.0,
            gamma_uniform: C64::new(0.0, 0.0),
            boundary: Boundary::Periodic,
            interaction: 0.0,
            seed: 0,
        }
    }

    pub fn ab_flux(cells: usize) -> Self {
        ModelSpec {
            kind: ModelKind::AbFlux,
            ..ModelSpec::hatano_nelson(cells, 0.0)
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_disorder(mut self, mode: DisorderMode, gamma_scale: C64, seed: u64) -> Self {
        self.disorder = mode;
        self.gamma_scale = gamma_scale;
        self.seed = seed;
        self
    }

    pub fn with_uniform(mut self, gamma: C64, phase: f64) -> Self {
        self.gamma_uniform = gamma;
        self.phase_uniform = phase;
        self
    }

    pub fn with_interaction(mut self, u: f64) -> Self {
        self.interaction = u;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Single-particle dimension `N`.
    pub fn dim(&self) -> usize {
        self.cells * self.kind.orbitals_per_cell()
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.disorder == DisorderMode::None
    }

    /// Collects every violated constraint rather than stopping at the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.cells < 2 {
            out.push(format!("L must be at least 2 (got {})", self.cells));
        }
        if !self.delta.is_finite() {
            out.push("delta must be finite".into());
        }
        if !(self.gamma_scale.re.is_finite() && self.gamma_scale.im.is_finite()) {
            out.push("gamma_scale must be finite".into());
        }
        if !(self.gamma_uniform.re.is_finite() && self.gamma_uniform.im.is_finite()) {
            out.push("gamma_uniform must be finite".into());
        }
        if !self.phase_uniform.is_finite() || !self.interaction.is_finite() {
            out.push("phase_uniform and interaction_u must be finite".into());
        }
        if self.kind == ModelKind::HatanoNelson {
            if self.disorder == DisorderMode::PhaseCorrelated {
                out.push("PHASE_CORRELATED disorder is only defined for AB_FLUX".into());
            }
            if self.disorder != DisorderMode::None && self.gamma_scale.im != 0.0 {
                out.push("HN disorder requires a real gamma_scale".into());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}
