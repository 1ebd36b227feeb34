//! Ground-state tracking along `H(lambda) = lambda H1 + (1 - lambda) H0`.
//!
//! The state carried along the path is the Slater determinant of the
//! `n` right eigenvectors with the lowest real energies. Its occupied
//! subspace is orthonormalized, and consecutive states are compared through
//! the normalized Slater overlap `F = |det(Qa^dagger Qb)|`, which lies in
//! `[0, 1]`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{adjoint, det, orthonormal_frame};
use crate::model::{build_hamiltonian, Bond, Boundary, DisorderMode, ModelSpec, SingleParticleHamiltonian};
use crate::spectral::lowest_right_vectors;

/// Real-part gap at the filling boundary below which a frame is ambiguous.
pub const BOUNDARY_GAP_TOL: f64 = 1e-10;

pub fn interpolate(
    h0: &SingleParticleHamiltonian,
    h1: &SingleParticleHamiltonian,
    lambda: f64,
) -> Result<SingleParticleHamiltonian> {
    if h0.kind != h1.kind || h0.boundary != h1.boundary || h0.cells != h1.cells {
        return Err(Error::Geometry(format!(
            "cannot interpolate {} {} L={} with {} {} L={}",
            h0.kind, h0.boundary, h0.cells, h1.kind, h1.boundary, h1.cells
        )));
    }
    let same_bonds = h0.bonds.len() == h1.bonds.len()
        && h0
            .bonds
            .iter()
            .zip(&h1.bonds)
            .all(|(a, b)| (a.row, a.col, a.displacement) == (b.row, b.col, b.displacement));
    if !same_bonds {
        return Err(Error::Geometry("endpoint Hamiltonians have different bond lists".into()));
    }
    let mix = |a: C64, b: C64| a * (1.0 - lambda) + b * lambda;
    let bonds = h0
        .bonds
        .iter()
        .zip(&h1.bonds)
        .map(|(a, b)| Bond { amplitude: mix(a.amplitude, b.amplitude), ..*a })
        .collect();
    let onsite = h0.onsite.iter().zip(&h1.onsite).map(|(a, b)| mix(*a, *b)).collect();
    Ok(SingleParticleHamiltonian::assemble(h0.kind, h0.boundary, h0.cells, bonds, onsite))
}

/// Orthonormal frame of an occupied right subspace.
#[derive(Debug, Clone)]
pub struct GroundFrame {
    /// `N x n`, with `frame^dagger frame = 1`.
    pub frame: Array2<C64>,
    /// Set when the last occupied and first empty level are closer in real
    /// part than [`BOUNDARY_GAP_TOL`].
    pub boundary_degenerate: bool,
}

pub fn ground_state_basis(h: &SingleParticleHamiltonian, n_particles: usize) -> Result<GroundFrame> {
    let n = h.dim();
    if n_particles > n {
        return Err(Error::Contract(format!("{n_particles} particles in {n} states")));
    }
    if n_particles == 0 {
        return Ok(GroundFrame { frame: Array2::zeros((n, 0)), boundary_degenerate: false });
    }
    let (eps, cols) = lowest_right_vectors(&h.matrix, n_particles)?;
    let boundary_degenerate = n_particles < n && eps[n_particles].re - eps[n_particles - 1].re < BOUNDARY_GAP_TOL;
    Ok(GroundFrame { frame: orthonormal_frame(&cols.view())?, boundary_degenerate })
}

/// `|det(a^dagger b)|` of two orthonormal frames.
pub fn step_fidelity(a: &Array2<C64>, b: &Array2<C64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: b.ncols() });
    }
    Ok(det(&adjoint(&a.view()).dot(b).view())?.norm())
}

#[derive(Debug, Clone)]
pub struct AdiabaticPath {
    pub h0: SingleParticleHamiltonian,
    pub h1: SingleParticleHamiltonian,
    pub lambda_grid: Vec<f64>,
    pub n_particles: usize,
    /// `F(lambda_i, lambda_{i+1})`; empty until [`run_path`].
    pub fidelities: Vec<f64>,
    pub min_fidelity: f64,
    /// Grid points whose frame had a degenerate filling boundary.
    pub degenerate_points: Vec<usize>,
}

impl AdiabaticPath {
    /// Uniform grid of `points` values from 0 to 1.
    pub fn new(
        h0: SingleParticleHamiltonian,
        h1: SingleParticleHamiltonian,
        points: usize,
        n_particles: usize,
    ) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config(format!("the lambda grid needs at least 2 points (got {points})")));
        }
        let lambda_grid = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
        Ok(AdiabaticPath {
            h0,
            h1,
            lambda_grid,
            n_particles,
            fidelities: Vec::new(),
            min_fidelity: f64::NAN,
            degenerate_points: Vec::new(),
        })
    }
}

pub fn run_path(mut path: AdiabaticPath) -> Result<AdiabaticPath> {
    let mut previous: Option<Array2<C64>> = None;
    path.fidelities.clear();
    path.degenerate_points.clear();
    for (i, &lambda) in path.lambda_grid.iter().enumerate() {
        let h = interpolate(&path.h0, &path.h1, lambda)?;
        let g = ground_state_basis(&h, path.n_particles)?;
        if g.boundary_degenerate {
            path.degenerate_points.push(i);
        }
        if let Some(prev) = &previous {
            path.fidelities.push(step_fidelity(prev, &g.frame)?);
        }
        previous = Some(g.frame);
    }
    if !path.degenerate_points.is_empty() {
        log::warn!(
            "filling boundary degenerate at {} of {} grid points",
            path.degenerate_points.len(),
            path.lambda_grid.len()
        );
    }
    path.min_fidelity = path.fidelities.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(path)
}

/// Endpoint ensembles compared along interpolation paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Real `gamma(x)` (flux pattern drawn correlated, irrelevant for the
    /// Hermitian endpoint).
    RealGamma,
    /// Imaginary `gamma(x)`, flux signs independent of the potential.
    ImaginaryUncorrelated,
    /// Imaginary `gamma(x)`, flux signs locked to the potential.
    ImaginaryCorrelated,
}

impl Scenario {
    pub const ALL: [Scenario; 3] =
        [Scenario::RealGamma, Scenario::ImaginaryUncorrelated, Scenario::ImaginaryCorrelated];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::RealGamma => "real_gamma",
            Scenario::ImaginaryUncorrelated => "imag_uncorrelated",
            Scenario::ImaginaryCorrelated => "imag_correlated",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown adiabatic scenario `{s}`")))
    }

    /// AB-flux endpoint spec for amplitude `|Gamma|`.
    pub fn endpoint(self, cells: usize, gamma_amplitude: f64, boundary: Boundary, seed: u64) -> ModelSpec {
        let (gamma, mode) = match self {
            Scenario::RealGamma => (C64::new(gamma_amplitude, 0.0), DisorderMode::PhaseCorrelated),
            Scenario::ImaginaryUncorrelated => (C64::new(0.0, gamma_amplitude), DisorderMode::Uncorrelated),
            Scenario::ImaginaryCorrelated => (C64::new(0.0, gamma_amplitude), DisorderMode::PhaseCorrelated),
        };
        ModelSpec::ab_flux(cells).with_boundary(boundary).with_disorder(mode, gamma, seed)
    }
}

/// Parameters of a scenario path; endpoints use seeds `2 s` and `2 s + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPath {
    pub scenario: Scenario,
    pub boundary: Boundary,
    pub cells: usize,
    pub gamma_amplitude: f64,
    /// Sets the particle number at `lambda = 0`: states with `Re eps < mu`.
    pub mu: f64,
    pub points: usize,
    pub seed_pair: u64,
}

impl ScenarioPath {
    /// `L = 40`, `|Gamma| = 1.5 sqrt 3`, `mu = -1`, 101 grid points.
    pub fn preset(scenario: Scenario, boundary: Boundary, seed_pair: u64) -> Self {
        ScenarioPath {
            scenario,
            boundary,
            cells: 40,
            gamma_amplitude: 1.5 * 3f64.sqrt(),
            mu: -1.0,
            points: 101,
            seed_pair,
        }
    }

    pub fn build(&self) -> Result<AdiabaticPath> {
        let seed0 = self.seed_pair.wrapping_mul(2);
        let spec0 = self.scenario.endpoint(self.cells, self.gamma_amplitude, self.boundary, seed0);
        let spec1 = spec0.clone().with_seed(seed0.wrapping_add(1));
        let h0 = build_hamiltonian(&spec0)?;
        let h1 = build_hamiltonian(&spec1)?;
        let eps = crate::spectral::sorted_eigenvalues(&h0.matrix)?;
        let n_particles = eps.iter().filter(|e| e.re < self.mu).count();
        AdiabaticPath::new(h0, h1, self.points, n_particles)
    }

    pub fn run(&self) -> Result<AdiabaticPath> {
        run_path(self.build()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectrum_distance;
    use crate::spectral::sorted_eigenvalues;
    use ndarray_linalg::QR;

    fn endpoints() -> (SingleParticleHamiltonian, SingleParticleHamiltonian) {
        let s = Scenario::ImaginaryCorrelated.endpoint(10, 2.0, Boundary::Periodic, 6);
        (build_hamiltonian(&s).unwrap(), build_hamiltonian(&s.clone().with_seed(7)).unwrap())
    }

    #[test]
    fn interpolation_endpoints_are_exact() {
        let (h0, h1) = endpoints();
        assert_eq!(interpolate(&h0, &h1, 0.0).unwrap().matrix, h0.matrix);
        assert_eq!(interpolate(&h0, &h1, 1.0).unwrap().matrix, h1.matrix);
        assert_eq!(interpolate(&h0, &h0, 0.5).unwrap().matrix, h0.matrix);
    }

    #[test]
    fn geometry_mismatch() {
        let (h0, _) = endpoints();
        let obc = build_hamiltonian(&Scenario::ImaginaryCorrelated.endpoint(10, 2.0, Boundary::Open, 6)).unwrap();
        assert!(matches!(interpolate(&h0, &obc, 0.3), Err(Error::Geometry(_))));
        let other = build_hamiltonian(&ModelSpec::ab_flux(11)).unwrap();
        assert!(matches!(interpolate(&h0, &other, 0.3), Err(Error::Geometry(_))));
    }

    #[test]
    fn spectrum_is_continuous_in_lambda() {
        let (h0, h1) = endpoints();
        let max_step = |m: usize| {
            let mut worst = 0.0f64;
            let mut prev = sorted_eigenvalues(&h0.matrix).unwrap();
            for i in 1..m {
                let lam = i as f64 / (m - 1) as f64;
                let ev = sorted_eigenvalues(&interpolate(&h0, &h1, lam).unwrap().matrix).unwrap();
                worst = worst.max(spectrum_distance(&prev, &ev));
                prev = ev;
            }
            worst
        };
        let coarse = max_step(21);
        let fine = max_step(41);
        assert!(fine < coarse, "{fine} !< {coarse}");
    }

    #[test]
    fn frames() {
        let (h0, _) = endpoints();
        assert_eq!(ground_state_basis(&h0, 0).unwrap().frame.dim(), (20, 0));
        let g = ground_state_basis(&h0, 7).unwrap();
        let gram = adjoint(&g.frame.view()).dot(&g.frame);
        for ((i, j), z) in gram.indexed_iter() {
            assert!((z - if i == j { 1.0 } else { 0.0 }).norm() < 1e-10);
        }
        assert!((step_fidelity(&g.frame, &g.frame).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_frame_spans_fermi_sea() {
        let h = build_hamiltonian(&ModelSpec::hatano_nelson(10, 0.0)).unwrap();
        let g = ground_state_basis(&h, 5).unwrap();
        // projector onto the frame commutes with H
        let p = g.frame.dot(&adjoint(&g.frame.view()));
        let comm = p.dot(&h.matrix) - h.matrix.dot(&p);
        assert!(comm.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn orthogonal_subspaces_have_zero_fidelity() {
        let mut a = Array2::<C64>::zeros((4, 2));
        let mut b = Array2::<C64>::zeros((4, 2));
        a[[0, 0]] = C64::new(1.0, 0.0);
        a[[1, 1]] = C64::new(1.0, 0.0);
        b[[2, 0]] = C64::new(1.0, 0.0);
        b[[3, 1]] = C64::new(0.0, 1.0);
        assert_eq!(step_fidelity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_ignores_internal_rotations() {
        let (h0, h1) = endpoints();
        let a = ground_state_basis(&h0, 6).unwrap().frame;
        let b = ground_state_basis(&h1, 6).unwrap().frame;
        let f = step_fidelity(&a, &b).unwrap();
        let raw = Array2::from_shape_fn((6, 6), |(i, j)| C64::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0));
        let (u, _) = raw.qr().unwrap();
        let rotated = b.dot(&u);
        assert!((step_fidelity(&a, &rotated).unwrap() - f).abs() < 1e-10);
        assert!((0.0..=1.0 + 1e-9).contains(&f));
    }

    #[test]
    fn identical_endpoints_give_unit_fidelity() {
        let (h0, _) = endpoints();
        let path = run_path(AdiabaticPath::new(h0.clone(), h0, 11, 8).unwrap()).unwrap();
        assert_eq!(path.fidelities.len(), 10);
        assert!(path.fidelities.iter().all(|f| (f - 1.0).abs() < 1e-10));
    }

    #[test]
    fn scenario_paths_are_deterministic() {
        let mut p = ScenarioPath::preset(Scenario::ImaginaryUncorrelated, Boundary::Periodic, 3);
        p.cells = 12;
        p.points = 11;
        let a = p.run().unwrap();
        let b = p.run().unwrap();
        assert_eq!(a.fidelities, b.fidelities);
        assert!(a.fidelities.iter().all(|f| (-1e-9..=1.0 + 1e-9).contains(f)));
        assert!(AdiabaticPath::new(a.h0.clone(), a.h1.clone(), 1, 3).is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_name(s.name()).unwrap(), s);
        }
        assert!(Scenario::from_name("bogus").is_err());
    }
}
