//! Bloch bands of translation-invariant rings.
//!
//! A plane wave `psi_beta(x) = e^{ikx} u_beta` solves the ring iff
//! `H(k) u = eps u` with `H(k)_{alpha beta} = sum t_b e^{-ik d_b}` over the bonds
//! whose row lies in cell 0. The band velocity `d eps / dk` is taken in closed
//! form: trivially for one orbital, from the 2x2 square root for two.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, Boundary, ModelSpec, SingleParticleHamiltonian};

#[derive(Debug, Clone)]
pub struct KGrid {
    /// `k_m = 2 pi m / L`, `m = 0..L`.
    pub momenta: Vec<f64>,
    /// `L x bands`, bands at each `k` sorted by real part.
    pub bloch_eigenvalues: Array2<C64>,
    /// `d eps / dk` matching `bloch_eigenvalues`.
    pub bloch_velocities: Array2<C64>,
}

impl KGrid {
    pub fn bands(&self) -> usize {
        self.bloch_eigenvalues.ncols()
    }

    /// All Bloch energies, flattened in `(k, band)` order.
    pub fn energies(&self) -> Vec<C64> {
        self.bloch_eigenvalues.iter().copied().collect()
    }
}

/// `H(k)` and `dH/dk` from the bonds of a translation-invariant ring.
pub fn bloch_matrix(h: &SingleParticleHamiltonian, k: f64) -> (Array2<C64>, Array2<C64>) {
    let m = h.orbitals();
    let mut hk = Array2::<C64>::zeros((m, m));
    let mut dk = Array2::<C64>::zeros((m, m));
    for b in h.bonds.iter().filter(|b| h.cell_of(b.row) == 0) {
        let d = b.displacement as f64;
        let phase = C64::from_polar(1.0, -k * d);
        hk[[b.row % m, b.col % m]] += b.amplitude * phase;
        dk[[b.row % m, b.col % m]] += b.amplitude * phase * C64::new(0.0, -d);
    }
    for alpha in 0..m {
        hk[[alpha, alpha]] += h.onsite[alpha];
    }
    (hk, dk)
}

/// Eigenvalues and their `k`-derivatives of a 1x1 or 2x2 Bloch matrix.
///
/// For 2x2, `eps = tr/2 +- s` with `s^2 = ((a-d)/2)^2 + bc`, so
/// `d eps = tr'/2 +- (s^2)'/(2s)`. At an exceptional point (`s = 0`) the
/// individual band slopes diverge; both are then reported as `tr'/2`, which
/// keeps the band sum exact.
fn bands_and_slopes(hk: &Array2<C64>, dk: &Array2<C64>) -> Vec<(C64, C64)> {
    match hk.nrows() {
        1 => vec![(hk[[0, 0]], dk[[0, 0]])],
        2 => {
            let (a, b, c, d) = (hk[[0, 0]], hk[[0, 1]], hk[[1, 0]], hk[[1, 1]]);
            let (da, db, dc, dd) = (dk[[0, 0]], dk[[0, 1]], dk[[1, 0]], dk[[1, 1]]);
            let half_tr = (a + d) / 2.0;
            let half_dtr = (da + dd) / 2.0;
            let x = ((a - d) / 2.0).powi(2) + b * c;
            let dx = (a - d) * (da - dd) / 2.0 + db * c + b * dc;
            let s = x.sqrt();
            let slope = if s.norm() > 1e-12 { dx / (2.0 * s) } else { C64::new(0.0, 0.0) };
            let mut out = vec![(half_tr + s, half_dtr + slope), (half_tr - s, half_dtr - slope)];
            out.sort_by(|p, q| crate::linalg::cmp_re_im(&p.0, &q.0));
            out
        }
        m => unreachable!("models have at most two orbitals per cell, got {m}"),
    }
}

pub fn bloch_grid(spec: &ModelSpec) -> Result<KGrid> {
    if !spec.is_translation_invariant() {
        return Err(Error::Contract(format!(
            "bloch_grid requires a translation-invariant spec (disorder mode is {})",
            spec.disorder
        )));
    }
    if spec.boundary != Boundary::Periodic {
        return Err(Error::Contract("bloch_grid requires periodic boundaries".into()));
    }
    let h = build_hamiltonian(spec)?;
    let l = spec.cells;
    let m = h.orbitals();
    let momenta: Vec<f64> = (0..l).map(|j| 2.0 * PI * j as f64 / l as f64).collect();
    let mut bloch_eigenvalues = Array2::<C64>::zeros((l, m));
    let mut bloch_velocities = Array2::<C64>::zeros((l, m));
    for (j, &k) in momenta.iter().enumerate() {
        let (hk, dk) = bloch_matrix(&h, k);
        for (band, (e, v)) in bands_and_slopes(&hk, &dk).into_iter().enumerate() {
            bloch_eigenvalues[[j, band]] = e;
            bloch_velocities[[j, band]] = v;
        }
    }
    Ok(KGrid { momenta, bloch_eigenvalues, bloch_velocities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DisorderMode;
    use crate::spectral::decompose;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn hermitian_hn_velocity_is_real() {
        let g = bloch_grid(&ModelSpec::hatano_nelson(20, 0.0)).unwrap();
        for (k, v) in g.momenta.iter().zip(g.bloch_velocities.column(0)) {
            assert!((v - C64::new(-2.0 * k.sin(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn hn_velocity_at_zero_momentum() {
        let g = bloch_grid(&ModelSpec::hatano_nelson(62, 0.5)).unwrap();
        assert!((g.bloch_velocities[[0, 0]] - C64::new(0.0, -1.0)).norm() < 1e-14);
        for (k, e) in g.momenta.iter().zip(g.bloch_eigenvalues.column(0)) {
            assert!((e - C64::new(2.0 * k.cos(), -k.sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn ab_bands_match_ring_spectrum() {
        let spec = ModelSpec::ab_flux(100).with_uniform(C64::new(0.0, 3.0), FRAC_PI_2);
        let g = bloch_grid(&spec).unwrap();
        let ring = decompose(&build_hamiltonian(&spec).unwrap()).unwrap();
        let worst = crate::linalg::spectrum_distance(&g.energies(), &ring.eigenvalues);
        assert!(worst < 1e-10, "worst = {worst}");
    }

    #[test]
    fn ab_slopes_match_finite_differences() {
        let spec = ModelSpec::ab_flux(8).with_uniform(C64::new(0.0, 3.0), FRAC_PI_2);
        let h = build_hamiltonian(&spec).unwrap();
        let eps = 1e-6;
        for k in [0.1, 0.9, 2.0, 3.0, 4.4, 5.9] {
            let (hk, dk) = bloch_matrix(&h, k);
            let (hp, dp) = bloch_matrix(&h, k + eps);
            let (hm, dm) = bloch_matrix(&h, k - eps);
            let c = bands_and_slopes(&hk, &dk);
            let p = bands_and_slopes(&hp, &dp);
            let m = bands_and_slopes(&hm, &dm);
            for band in 0..2 {
                let fd = (p[band].0 - m[band].0) / (2.0 * eps);
                assert!((fd - c[band].1).norm() < 1e-6, "k={k} band={band}");
            }
        }
    }

    #[test]
    fn rejects_disorder_and_open_boundaries() {
        let dis = ModelSpec::ab_flux(8).with_disorder(DisorderMode::Uncorrelated, C64::new(0.0, 1.0), 1);
        assert!(matches!(bloch_grid(&dis), Err(Error::Contract(_))));
        let obc = ModelSpec::hatano_nelson(8, 0.5).with_boundary(Boundary::Open);
        assert!(matches!(bloch_grid(&obc), Err(Error::Contract(_))));
    }
}
