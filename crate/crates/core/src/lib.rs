//! Non-Hermitian lattice models and their delocalization diagnostics.
//!
//! Layers, bottom-up: [`model`] builds single-particle Hamiltonians and
//! velocity operators, [`spectral`] performs the biorthogonal
//! eigendecomposition, [`observables`] evaluates free-fermion quantities,
//! [`ed`] handles the interacting chain, and [`adiabatic`] tracks ground
//! states along interpolation paths.

pub mod adiabatic;
pub mod ed;
pub mod error;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod spectral;
pub mod stats;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use model::{
    build_ab_flux, build_hamiltonian, build_hn, draw_disorder, velocity_operator, Bond, Boundary,
    DisorderMode, DisorderRealization, ModelKind, ModelSpec, SingleParticleHamiltonian,
};
pub use spectral::{
    bloch_grid, decompose, decompose_matrix, BiorthogonalSpectrum, KGrid, PairFlag,
};
pub use observables::{
    correlation_matrix, fermi_sea, velocity_expectation, CorrelationMatrix, FermiSea,
};
pub use adiabatic::{AdiabaticPath, Scenario, ScenarioPath};
pub use ed::{FockSector, ManyBodyOperator};
