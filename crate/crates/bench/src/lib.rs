//! Benchmark fixtures shared by the criterion targets in `benches/`.

use nhlab_core::{DisorderMode, ModelSpec, C64};

/// Disordered AB-flux ring with imaginary, phase-correlated potentials.
pub fn ab_ring(cells: usize) -> ModelSpec {
    ModelSpec::ab_flux(cells).with_disorder(DisorderMode::PhaseCorrelated, C64::new(0.0, 1.5 * 3f64.sqrt()), 7)
}

/// Disordered interacting HN ring.
pub fn hn_ring(cells: usize, u: f64) -> ModelSpec {
    ModelSpec::hatano_nelson(cells, 0.5)
        .with_disorder(DisorderMode::Uncorrelated, C64::new(1.0, 0.0), 7)
        .with_interaction(u)
}
