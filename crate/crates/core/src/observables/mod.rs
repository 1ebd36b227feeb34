//! Free-fermion observables built from a biorthogonal spectrum.

mod eigenstates;
mod entanglement;
mod sea;
mod velocity;

pub use eigenstates::{eigenstate_diagnostics, ipr, peak_cell, ring_distance, StateDiagnostics};
pub use entanglement::{
    classify_decay, correlation_profile, renyi2, renyi2_half, DecayClass, DecayFit,
};
pub use sea::{
    correlation_matrix, fermi_function, fermi_sea, fill_lowest, CorrelationMatrix, FermiSea, TIE_TOL,
};
pub use velocity::{
    momentum_velocity, sea_velocity, state_velocities, velocity_expectation, winding_estimate,
};
