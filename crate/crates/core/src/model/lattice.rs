use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{Boundary, DisorderMode, DisorderRealization, ModelKind, ModelSpec};
use crate::error::{Error, Result};

/// One directed hopping term `amplitude * |row><col|`.
///
/// `displacement` is `x(row) - x(col)` in cell units, minimal image under
/// periodic boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub row: usize,
    pub col: usize,
    pub amplitude: C64,
    pub displacement: i32,
}

#[derive(Debug, Clone)]
pub struct SingleParticleHamiltonian {
    pub kind: ModelKind,
    pub boundary: Boundary,
    pub cells: usize,
    pub matrix: Array2<C64>,
    pub bonds: Vec<Bond>,
    pub onsite: Vec<C64>,
}

impl SingleParticleHamiltonian {
    pub(crate) fn assemble(
        kind: ModelKind,
        boundary: Boundary,
        cells: usize,
        bonds: Vec<Bond>,
        onsite: Vec<C64>,
    ) -> Self {
        let dim = onsite.len();
        let mut matrix = Array2::<C64>::zeros((dim, dim));
        for b in &bonds {
            matrix[[b.row, b.col]] += b.amplitude;
        }
        for (i, e) in onsite.iter().enumerate() {
            matrix[[i, i]] += *e;
        }
        SingleParticleHamiltonian { kind, boundary, cells, matrix, bonds, onsite }
    }

    pub fn dim(&self) -> usize {
        self.onsite.len()
    }

    pub fn orbitals(&self) -> usize {
        self.kind.orbitals_per_cell()
    }

    /// Cell coordinate of a site index.
    pub fn cell_of(&self, site: usize) -> usize {
        site / self.orbitals()
    }

    /// Diagonal of the position operator, in cell units.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.cell_of(i) as f64).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
            }
        }
        worst
    }
}

fn check_realization(spec: &ModelSpec, dis: Option<&DisorderRealization>) -> Result<()> {
    match (spec.disorder, dis) {
        (DisorderMode::None, Some(_)) => Err(Error::Config(
            "disorder realization supplied for a spec with disorder mode NONE".into(),
        )),
        (DisorderMode::None, None) => Ok(()),
        (_, None) => Err(Error::Config(format!(
            "disorder mode {} requires a disorder realization",
            spec.disorder
        ))),
        (_, Some(d)) if d.len() != spec.cells => Err(Error::Config(format!(
            "disorder realization has {} cells but the spec has L = {}",
            d.len(),
            spec.cells
        ))),
        _ => Ok(()),
    }
}

/// Neighbour of cell `x` to the right, `None` across an open boundary.
fn next_cell(x: usize, cells: usize, boundary: Boundary) -> Option<usize> {
    if x + 1 < cells {
        Some(x + 1)
    } else if boundary == Boundary::Periodic {
        Some(0)
    } else {
        None
    }
}

pub fn build_hn(spec: &ModelSpec, dis: Option<&DisorderRealization>) -> Result<SingleParticleHamiltonian> {
    if spec.kind != ModelKind::HatanoNelson {
        return Err(Error::Contract(format!("build_hn called for {}", spec.kind)));
    }
    spec.validate()?;
    check_realization(spec, dis)?;

    let cells = spec.cells;
    let forward = C64::new(1.0 + spec.delta, 0.0);
    let backward = C64::new(1.0 - spec.delta, 0.0);
    let mut bonds = Vec::with_capacity(2 * cells);
    for x in 0..cells {
        if let Some(y) = next_cell(x, cells, spec.boundary) {
            bonds.push(Bond { row: y, col: x, amplitude: forward, displacement: 1 });
            bonds.push(Bond { row: x, col: y, amplitude: backward, displacement: -1 });
        }
    }
    let onsite = match dis {
        Some(d) => d.gamma_field.clone(),
        None => vec![spec.gamma_uniform; cells],
    };
    Ok(SingleParticleHamiltonian::assemble(spec.kind, spec.boundary, cells, bonds, onsite))
}

pub fn build_ab_flux(
    spec: &ModelSpec,
    dis: Option<&DisorderRealization>,
) -> Result<SingleParticleHamiltonian> {
    if spec.kind != ModelKind::AbFlux {
        return Err(Error::Contract(format!("build_ab_flux called for {}", spec.kind)));
    }
    spec.validate()?;
    check_realization(spec, dis)?;

    let cells = spec.cells;
    let a = |x: usize| 2 * x;
    let b = |x: usize| 2 * x + 1;
    let one = C64::new(1.0, 0.0);
    let mut bonds = Vec::with_capacity(6 * cells);
    let mut onsite = vec![C64::new(0.0, 0.0); 2 * cells];

    for x in 0..cells {
        let (gamma, phi) = match dis {
            Some(d) => (d.gamma_field[x], d.phi_field[x]),
            None => (spec.gamma_uniform, spec.phase_uniform),
        };
        onsite[b(x)] = gamma;
        bonds.push(Bond { row: b(x), col: a(x), amplitude: one, displacement: 0 });
        bonds.push(Bond { row: a(x), col: b(x), amplitude: one, displacement: 0 });
        if let Some(y) = next_cell(x, cells, spec.boundary) {
            bonds.push(Bond { row: a(y), col: a(x), amplitude: one, displacement: 1 });
            bonds.push(Bond { row: a(x), col: a(y), amplitude: one, displacement: -1 });
            let flux = C64::from_polar(1.0, phi);
            bonds.push(Bond { row: a(y), col: b(x), amplitude: flux, displacement: 1 });
            bonds.push(Bond { row: b(x), col: a(y), amplitude: flux.conj(), displacement: -1 });
        }
    }
    Ok(SingleParticleHamiltonian::assemble(spec.kind, spec.boundary, cells, bonds, onsite))
}

/// Validates the spec, draws its disorder (if any) and builds the matrix.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<SingleParticleHamiltonian> {
    spec.validate()?;
    let dis = match spec.disorder {
        DisorderMode::None => None,
        _ => Some(super::draw_disorder(spec)?),
    };
    match spec.kind {
        ModelKind::HatanoNelson => build_hn(spec, dis.as_ref()),
        ModelKind::AbFlux => build_ab_flux(spec, dis.as_ref()),
    }
}

/// `V = -i sum_b d_b t_b |row_b><col_b|`.
///
/// Onsite terms drop out. Without wrap bonds this is exactly `-i [X, H]`.
pub fn velocity_operator(h: &SingleParticleHamiltonian) -> Array2<C64> {
    let n = h.dim();
    let mut v = Array2::<C64>::zeros((n, n));
    for b in &h.bonds {
        v[[b.row, b.col]] += C64::new(0.0, -(b.displacement as f64)) * b.amplitude;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::draw_disorder;
    use ndarray_linalg::EigVals;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn max_dist(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hermitian_ring_l4() {
        let h = build_hamiltonian(&ModelSpec::hatano_nelson(4, 0.0)).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        let ev = sorted(h.matrix.eigvals().unwrap().to_vec());
        let want = [-2.0, 0.0, 0.0, 2.0].map(|e| C64::new(e, 0.0));
        assert!(max_dist(&ev, &want) < 1e-12, "{ev:?}");
    }

    #[test]
    fn hn_pbc_matches_dispersion() {
        let (l, delta) = (62, 0.5);
        let h = build_hamiltonian(&ModelSpec::hatano_nelson(l, delta)).unwrap();
        let ev = sorted(h.matrix.eigvals().unwrap().to_vec());
        let oracle = sorted(
            (0..l)
                .map(|m| {
                    let k = 2.0 * PI * m as f64 / l as f64;
                    C64::new(2.0 * k.cos(), -2.0 * delta * k.sin())
                })
                .collect(),
        );
        assert!(crate::linalg::spectrum_distance(&ev, &oracle) < 1e-10);
    }

    #[test]
    fn hn_obc_is_similar_to_hermitian_chain() {
        let (l, delta) = (10, 0.5f64);
        let spec = ModelSpec::hatano_nelson(l, delta).with_boundary(Boundary::Open);
        let h = build_hamiltonian(&spec).unwrap();
        let ev = sorted(h.matrix.eigvals().unwrap().to_vec());
        let oracle = sorted(
            (1..=l)
                .map(|m| {
                    let e = 2.0 * (1.0 - delta * delta).sqrt() * (PI * m as f64 / (l + 1) as f64).cos();
                    C64::new(e, 0.0)
                })
                .collect(),
        );
        assert!(max_dist(&ev, &oracle) < 1e-10, "{ev:?}");
    }

    #[test]
    fn obc_has_no_wrap_bond() {
        for spec in [
            ModelSpec::hatano_nelson(6, 0.3).with_boundary(Boundary::Open),
            ModelSpec::ab_flux(6).with_boundary(Boundary::Open),
        ] {
            let h = build_hamiltonian(&spec).unwrap();
            for b in &h.bonds {
                let span = h.cell_of(b.row) as i64 - h.cell_of(b.col) as i64;
                assert_eq!(span, b.displacement as i64);
            }
        }
    }

    #[test]
    fn matrix_is_bonds_plus_onsite() {
        let spec = ModelSpec::ab_flux(5).with_disorder(DisorderMode::Uncorrelated, C64::new(0.0, 3.0), 4);
        let h = build_hamiltonian(&spec).unwrap();
        let mut m = Array2::<C64>::zeros((10, 10));
        for b in &h.bonds {
            m[[b.row, b.col]] += b.amplitude;
        }
        for i in 0..10 {
            m[[i, i]] += h.onsite[i];
        }
        assert_eq!(m, h.matrix);
        // A sites carry no potential
        assert!(h.onsite.iter().step_by(2).all(|e| *e == C64::new(0.0, 0.0)));
    }

    #[test]
    fn ab_without_potential_is_hermitian() {
        let h = build_hamiltonian(&ModelSpec::ab_flux(3)).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        let ev = h.matrix.eigvals().unwrap();
        assert!(ev.iter().all(|e| e.im.abs() < 1e-12));

        // real disorder keeps it Hermitian for any flux pattern
        let spec = ModelSpec::ab_flux(20).with_disorder(DisorderMode::Uncorrelated, C64::new(2.5, 0.0), 8);
        assert!(build_hamiltonian(&spec).unwrap().hermiticity_defect() < 1e-15);
    }

    #[test]
    fn velocity_equals_commutator_under_obc() {
        for spec in [
            ModelSpec::hatano_nelson(12, 0.4)
                .with_boundary(Boundary::Open)
                .with_disorder(DisorderMode::Uncorrelated, C64::new(2.0, 0.0), 3),
            ModelSpec::ab_flux(9)
                .with_boundary(Boundary::Open)
                .with_disorder(DisorderMode::PhaseCorrelated, C64::new(0.0, 4.0), 11),
        ] {
            let h = build_hamiltonian(&spec).unwrap();
            let v = velocity_operator(&h);
            let x = Array2::from_diag(&ndarray::Array1::from(h.positions()).mapv(|p| C64::new(p, 0.0)));
            let comm = (x.dot(&h.matrix) - h.matrix.dot(&x)).mapv(|z| z * C64::new(0.0, -1.0));
            let err = (&v - &comm).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-14, "err = {err}");
        }
    }

    #[test]
    fn velocity_hermitian_for_hermitian_ring() {
        let h = build_hamiltonian(&ModelSpec::hatano_nelson(9, 0.0)).unwrap();
        let v = velocity_operator(&h);
        let defect = (&v - &v.t().mapv(|z| z.conj())).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_eq!(defect, 0.0);
        assert!(v.diag().iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn hn_velocity_eigenvalues_are_band_derivative() {
        let (l, delta) = (16, 0.5);
        let h = build_hamiltonian(&ModelSpec::hatano_nelson(l, delta)).unwrap();
        let v = velocity_operator(&h);
        // plane waves diagonalize V
        for m in 0..l {
            let k = 2.0 * PI * m as f64 / l as f64;
            let psi: ndarray::Array1<C64> =
                (0..l).map(|x| C64::from_polar(1.0, k * x as f64)).collect();
            let vpsi = v.dot(&psi);
            let want = C64::new(-2.0 * k.sin(), -2.0 * delta * k.cos());
            for x in 0..l {
                assert!((vpsi[x] - want * psi[x]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_site_ring_merges_hops() {
        let h = build_hamiltonian(&ModelSpec::hatano_nelson(2, 0.5)).unwrap();
        assert_eq!(h.matrix[[0, 1]], C64::new(2.0, 0.0));
        assert_eq!(h.matrix[[1, 0]], C64::new(2.0, 0.0));
    }

    #[test]
    fn realization_mismatch_is_config_error() {
        let spec = ModelSpec::hatano_nelson(8, 0.5).with_disorder(DisorderMode::Uncorrelated, C64::new(1.0, 0.0), 1);
        let other = draw_disorder(&ModelSpec { cells: 9, ..spec.clone() }).unwrap();
        assert!(matches!(build_hn(&spec, Some(&other)), Err(Error::Config(_))));
        assert!(matches!(build_hn(&spec, None), Err(Error::Config(_))));
    }

    #[test]
    fn uniform_ab_uses_uniform_fields() {
        let spec = ModelSpec::ab_flux(4).with_uniform(C64::new(0.0, 3.0), FRAC_PI_2);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.matrix[[1, 1]], C64::new(0.0, 3.0));
        assert!((h.matrix[[2, 1]] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((h.matrix[[1, 2]] - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn equal_specs_give_bit_identical_matrices() {
        let spec = ModelSpec::ab_flux(30).with_disorder(DisorderMode::PhaseCorrelated, C64::new(0.0, 2.6), 77);
        let a = build_hamiltonian(&spec).unwrap();
        let b = build_hamiltonian(&spec).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }
}
