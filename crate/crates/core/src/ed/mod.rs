//! Exact diagonalization of interacting spinless fermions on the
//! Hatano-Nelson chain, `H = sum_b t_b c_row^dagger c_col + sum_x gamma_x n_x
//! + U sum_x n_x n_{x+1}`.
//!
//! Fermionic signs follow the Jordan-Wigner ordering of site indices:
//! `c_j |s>` carries `(-1)^(occupied sites below j)`. The wrap-around hop of a
//! ring therefore picks up `(-1)^(n-1)` automatically, i.e. the fermions obey
//! periodic boundary conditions in every particle-number sector, and the
//! non-interacting many-body spectrum is made of sums of the single-particle
//! ring energies.

mod solve;

pub use solve::{
    ed_ground_state_velocity, ed_thermal_velocity, GroundStateVelocity, ThermalEnsemble,
    DEGENERACY_TOL, THERMAL_MAX_SITES,
};

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{build_hn, velocity_operator, Boundary, DisorderRealization, ModelKind, ModelSpec};

/// Largest chain handled by the many-body layer.
pub const MAX_SITES: usize = 16;

/// Fixed-particle-number sector, basis sorted ascending by bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSector {
    pub sites: usize,
    pub n_particles: usize,
    pub basis: Vec<u32>,
}

impl FockSector {
    pub fn new(sites: usize, n_particles: usize) -> Result<Self> {
        if sites > MAX_SITES {
            return Err(Error::SizeCap { size: sites, cap: MAX_SITES });
        }
        if n_particles > sites {
            return Err(Error::Contract(format!("{n_particles} particles on {sites} sites")));
        }
        let basis = (0u32..1 << sites).filter(|s| s.count_ones() as usize == n_particles).collect();
        Ok(FockSector { sites, n_particles, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        self.basis.binary_search(&state).ok()
    }
}

/// Sign and image of `c_i^dagger c_j |s>`, or `None` if it vanishes.
fn hop(state: u32, i: usize, j: usize) -> Option<(f64, u32)> {
    if state & (1 << j) == 0 {
        return None;
    }
    let after = state & !(1 << j);
    if after & (1 << i) != 0 {
        return None;
    }
    let below = |s: u32, k: usize| (s & ((1u32 << k) - 1)).count_ones();
    let parity = below(state, j) + below(after, i);
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, after | (1 << i)))
}

/// Compressed-sparse-row operator on one sector.
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    pub sector: FockSector,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<C64>,
}

impl ManyBodyOperator {
    /// Second quantization `sum_ij m_ij c_i^dagger c_j` of a single-particle
    /// matrix, plus a diagonal `diag(state)` term.
    fn from_one_body(sector: &FockSector, m: &Array2<C64>, diag: impl Fn(u32) -> f64) -> Self {
        let terms: Vec<(usize, usize, C64)> = m
            .indexed_iter()
            .filter(|(_, z)| **z != C64::new(0.0, 0.0))
            .map(|((i, j), z)| (i, j, *z))
            .collect();
        let mut row_ptr = Vec::with_capacity(sector.dim() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut row = std::collections::BTreeMap::<usize, C64>::new();
        for (r, &s) in sector.basis.iter().enumerate() {
            row.clear();
            for &(i, j, z) in &terms {
                // <s| c_i^dagger c_j |t> = <t| c_j^dagger c_i |s>, both real-signed
                if let Some((sign, t)) = hop(s, j, i) {
                    let c = sector.index_of(t).expect("hops conserve particle number");
                    *row.entry(c).or_default() += z * sign;
                }
            }
            let d = diag(s);
            if d != 0.0 {
                *row.entry(r).or_default() += d;
            }
            for (&c, &v) in &row {
                if v != C64::new(0.0, 0.0) {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        ManyBodyOperator { sector: sector.clone(), row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> Array2<C64> {
        let n = self.dim();
        let mut a = Array2::<C64>::zeros((n, n));
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[[r, self.col_idx[k]]] += self.values[k];
            }
        }
        a
    }

    /// `A X` for a dense block of column vectors.
    pub fn apply(&self, x: &Array2<C64>) -> Array2<C64> {
        let mut y = Array2::<C64>::zeros((self.dim(), x.ncols()));
        for r in 0..self.dim() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (c, v) = (self.col_idx[k], self.values[k]);
                for q in 0..x.ncols() {
                    y[[r, q]] += v * x[[c, q]];
                }
            }
        }
        y
    }
}

fn check_spec(spec: &ModelSpec, sector: &FockSector) -> Result<()> {
    if spec.kind != ModelKind::HatanoNelson {
        return Err(Error::Contract("the many-body layer only covers the HN chain".into()));
    }
    if spec.cells > MAX_SITES {
        return Err(Error::SizeCap { size: spec.cells, cap: MAX_SITES });
    }
    if sector.sites != spec.cells {
        return Err(Error::DimensionMismatch { expected: spec.cells, got: sector.sites });
    }
    Ok(())
}

/// Nearest-neighbour pairs `(x, x+1)` entering the interaction, wrap included
/// under periodic boundaries.
fn neighbour_pairs(spec: &ModelSpec) -> Vec<(usize, usize)> {
    let l = spec.cells;
    let mut pairs: Vec<(usize, usize)> = (0..l - 1).map(|x| (x, x + 1)).collect();
    if spec.boundary == Boundary::Periodic {
        pairs.push((l - 1, 0));
    }
    pairs
}

pub fn build_sector_hamiltonian(
    spec: &ModelSpec,
    sector: &FockSector,
    dis: Option<&DisorderRealization>,
) -> Result<ManyBodyOperator> {
    check_spec(spec, sector)?;
    // the single-particle matrix already carries hops and onsite fields
    let h = build_hn(spec, dis)?;
    let u = spec.interaction;
    let pairs = neighbour_pairs(spec);
    let density = move |s: u32| -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let bonds = pairs.iter().filter(|(a, b)| s & (1 << a) != 0 && s & (1 << b) != 0).count();
        u * bonds as f64
    };
    Ok(ManyBodyOperator::from_one_body(sector, &h.matrix, density))
}

/// `V = -i sum_b d_b t_b c_row^dagger c_col`; onsite and interaction terms
/// carry no displacement and drop out.
pub fn many_body_velocity(
    spec: &ModelSpec,
    sector: &FockSector,
    dis: Option<&DisorderRealization>,
) -> Result<ManyBodyOperator> {
    check_spec(spec, sector)?;
    let v = velocity_operator(&build_hn(spec, dis)?);
    Ok(ManyBodyOperator::from_one_body(sector, &v, |_| 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, spectrum_distance};
    use crate::model::{build_hamiltonian, DisorderMode};
    use crate::spectral::sorted_eigenvalues;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sector_sizes() {
        for (l, n) in [(4, 2), (10, 5), (12, 6), (12, 0), (7, 7)] {
            let s = FockSector::new(l, n).unwrap();
            assert_eq!(s.dim(), binomial(l, n));
            assert!(s.basis.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(matches!(FockSector::new(17, 3), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn two_site_ring_single_particle() {
        let spec = ModelSpec::hatano_nelson(2, 0.5);
        let h = build_sector_hamiltonian(&spec, &FockSector::new(2, 1).unwrap(), None).unwrap();
        let m = h.to_dense();
        assert_eq!(m[[0, 1]], C64::new(2.0, 0.0));
        assert_eq!(m[[1, 0]], C64::new(2.0, 0.0));
    }

    #[test]
    fn one_particle_sector_is_single_particle_problem() {
        let spec = ModelSpec::hatano_nelson(7, 0.3).with_disorder(DisorderMode::Uncorrelated, C64::new(1.5, 0.0), 5);
        let dis = crate::model::draw_disorder(&spec).unwrap();
        let sector = FockSector::new(7, 1).unwrap();
        let h = build_sector_hamiltonian(&spec, &sector, Some(&dis)).unwrap();
        let sp = build_hn(&spec, Some(&dis)).unwrap();
        assert_eq!(h.to_dense(), sp.matrix);
        let v = many_body_velocity(&spec, &sector, Some(&dis)).unwrap();
        assert_eq!(v.to_dense(), velocity_operator(&sp));
    }

    #[test]
    fn free_spectrum_is_additive() {
        for (l, n) in [(6, 3), (7, 2), (8, 4)] {
            let spec = ModelSpec::hatano_nelson(l, 0.5);
            let eps = sorted_eigenvalues(&build_hamiltonian(&spec).unwrap().matrix).unwrap();
            let sector = FockSector::new(l, n).unwrap();
            let oracle: Vec<C64> = sector
                .basis
                .iter()
                .map(|s| (0..l).filter(|k| s & (1 << k) != 0).map(|k| eps[k]).sum())
                .collect();
            let many = sorted_eigenvalues(&build_sector_hamiltonian(&spec, &sector, None).unwrap().to_dense()).unwrap();
            assert!(spectrum_distance(&oracle, &many) < 1e-9, "L={l} n={n}");
        }
    }

    #[test]
    fn hermitian_limit_and_interaction() {
        let sector = FockSector::new(8, 4).unwrap();
        let spec = ModelSpec::hatano_nelson(8, 0.0).with_interaction(2.5);
        let h = build_sector_hamiltonian(&spec, &sector, None).unwrap().to_dense();
        let defect = (&h - &adjoint(&h.view())).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(defect, 0.0);
        let ev = sorted_eigenvalues(&h).unwrap();
        assert!(ev.iter().all(|e| e.im.abs() < 1e-10));
        let v = many_body_velocity(&spec, &sector, None).unwrap().to_dense();
        assert_eq!((&v - &adjoint(&v.view())).iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
        // V does not depend on U
        let v0 = many_body_velocity(&spec.clone().with_interaction(0.0), &sector, None).unwrap().to_dense();
        assert_eq!(v, v0);
        assert!(v.diag().iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn interaction_counts_neighbour_pairs() {
        let spec = ModelSpec::hatano_nelson(4, 0.0).with_interaction(1.0);
        let sector = FockSector::new(4, 4).unwrap();
        // full ring: four occupied bonds, no hopping possible
        assert_eq!(build_sector_hamiltonian(&spec, &sector, None).unwrap().to_dense()[[0, 0]], C64::new(4.0, 0.0));
        let obc = spec.with_boundary(Boundary::Open);
        assert_eq!(build_sector_hamiltonian(&obc, &sector, None).unwrap().to_dense()[[0, 0]], C64::new(3.0, 0.0));
    }

    #[test]
    fn operators_conserve_particle_number() {
        let spec = ModelSpec::hatano_nelson(9, 0.4).with_interaction(1.0);
        for n in 0..=9 {
            let sector = FockSector::new(9, n).unwrap();
            let h = build_sector_hamiltonian(&spec, &sector, None).unwrap();
            assert_eq!(h.row_ptr.len(), sector.dim() + 1);
            assert!(h.col_idx.iter().all(|&c| c < sector.dim()));
        }
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let spec = ModelSpec::hatano_nelson(8, 0.4).with_interaction(1.3);
        let sector = FockSector::new(8, 3).unwrap();
        let h = build_sector_hamiltonian(&spec, &sector, None).unwrap();
        let x = Array2::from_shape_fn((sector.dim(), 2), |(i, j)| C64::new(i as f64, j as f64 - 0.5));
        let diff = (&h.apply(&x) - &h.to_dense().dot(&x)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn rejects_other_models_and_big_chains() {
        let sector = FockSector::new(4, 2).unwrap();
        assert!(matches!(
            build_sector_hamiltonian(&ModelSpec::ab_flux(4), &sector, None),
            Err(Error::Contract(_))
        ));
        let big = ModelSpec::hatano_nelson(20, 0.5);
        assert!(matches!(build_sector_hamiltonian(&big, &sector, None), Err(Error::SizeCap { .. })));
    }
}
