use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{CorrelationMatrix, FermiSea};
use crate::error::{Error, Result};
use crate::linalg::trace_of_product;
use crate::spectral::{BiorthogonalSpectrum, KGrid};

/// Fermi-sea velocity `v = tr(V C)`.
pub fn velocity_expectation(cmat: &CorrelationMatrix, vop: &Array2<C64>) -> Result<C64> {
    if vop.dim() != cmat.c.dim() {
        return Err(Error::DimensionMismatch { expected: cmat.dim(), got: vop.nrows() });
    }
    Ok(trace_of_product(&vop.view(), &cmat.c.view()))
}

/// `<L_n| V |R_n>` for every eigenpair. With these, the velocity of any
/// sea is `sum_n f_n v_n` (see [`sea_velocity`]), which equals `tr(V C)`
/// without forming `C`.
pub fn state_velocities(spectrum: &BiorthogonalSpectrum, vop: &Array2<C64>) -> Result<Vec<C64>> {
    if vop.nrows() != spectrum.len() || vop.ncols() != spectrum.len() {
        return Err(Error::DimensionMismatch { expected: spectrum.len(), got: vop.nrows() });
    }
    let vr = vop.dot(&spectrum.right_vectors);
    Ok((0..spectrum.len()).map(|n| spectrum.left_vectors.row(n).dot(&vr.column(n))).collect())
}

/// `sum_n f_n v_n`; flagged states inside the sea are an error, as for
/// [`super::correlation_matrix`].
pub fn sea_velocity(spectrum: &BiorthogonalSpectrum, sea: &FermiSea, velocities: &[C64]) -> Result<C64> {
    if sea.occupation_weights.len() != velocities.len() {
        return Err(Error::DimensionMismatch { expected: velocities.len(), got: sea.occupation_weights.len() });
    }
    let support = sea.support();
    let bad: Vec<usize> = support.iter().copied().filter(|&n| spectrum.is_flagged(n)).collect();
    if !bad.is_empty() {
        return Err(Error::DefectiveSea { indices: bad });
    }
    Ok(support.iter().map(|&n| sea.occupation_weights[n] * velocities[n]).sum())
}

/// `sum over occupied (k, band) of d eps / dk`, with strict `Re eps < mu`.
pub fn momentum_velocity(kgrid: &KGrid, mu: f64) -> C64 {
    kgrid
        .bloch_eigenvalues
        .iter()
        .zip(kgrid.bloch_velocities.iter())
        .filter(|(e, _)| e.re < mu)
        .map(|(_, v)| *v)
        .sum()
}

/// Winding-number estimate `w = Im(v) beta / L`.
pub fn winding_estimate(im_v: f64, beta: f64, cells: usize) -> f64 {
    im_v * beta / cells as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, velocity_operator, ModelSpec};
    use crate::observables::{correlation_matrix, fermi_sea};
    use crate::spectral::{bloch_grid, decompose};
    use std::f64::consts::PI;

    fn ground_velocity(spec: &ModelSpec, mu: f64) -> C64 {
        let h = build_hamiltonian(spec).unwrap();
        let s = decompose(&h).unwrap();
        let c = correlation_matrix(&s, &fermi_sea(&s, mu, f64::INFINITY).unwrap()).unwrap();
        velocity_expectation(&c, &velocity_operator(&h)).unwrap()
    }

    #[test]
    fn hn_sea_velocity_matches_k_sum() {
        let (l, delta) = (62usize, 0.5);
        let oracle: C64 = (0..l)
            .map(|m| 2.0 * PI * m as f64 / l as f64)
            .filter(|k| 2.0 * k.cos() < 0.0)
            .map(|k| C64::new(-2.0 * k.sin(), -2.0 * delta * k.cos()))
            .sum();
        assert!((oracle.im - 19.7).abs() < 0.1, "oracle = {oracle}");
        let spec = ModelSpec::hatano_nelson(l, delta);
        let v = ground_velocity(&spec, 0.0);
        assert!((v - oracle).norm() < 1e-8, "v = {v}, oracle = {oracle}");
        let vk = momentum_velocity(&bloch_grid(&spec).unwrap(), 0.0);
        assert!((v - vk).norm() < 1e-8);
    }

    #[test]
    fn diagonal_sum_equals_trace() {
        let spec = ModelSpec::ab_flux(30).with_disorder(
            crate::model::DisorderMode::Uncorrelated,
            C64::new(0.0, 2.0),
            3,
        );
        let h = build_hamiltonian(&spec).unwrap();
        let s = decompose(&h).unwrap();
        let vop = velocity_operator(&h);
        let vn = state_velocities(&s, &vop).unwrap();
        for (mu, beta) in [(-1.0, f64::INFINITY), (0.3, 2.0), (0.0, 0.0)] {
            let sea = fermi_sea(&s, mu, beta).unwrap();
            let c = correlation_matrix(&s, &sea).unwrap();
            let a = velocity_expectation(&c, &vop).unwrap();
            let b = sea_velocity(&s, &sea, &vn).unwrap();
            assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn full_band_sums_to_zero() {
        let g = bloch_grid(&ModelSpec::hatano_nelson(30, 0.5)).unwrap();
        assert!(momentum_velocity(&g, 10.0).norm() < 1e-12);
        assert_eq!(momentum_velocity(&g, -10.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn flux_reversal_flips_im_v() {
        use std::f64::consts::FRAC_PI_2;
        let base = ModelSpec::ab_flux(100);
        let plus = base.clone().with_uniform(C64::new(0.0, 3.0), FRAC_PI_2);
        let minus = base.with_uniform(C64::new(0.0, 3.0), -FRAC_PI_2);
        let mut seen = false;
        for mu in [-2.0, -1.0, 0.0, 1.0] {
            let a = momentum_velocity(&bloch_grid(&plus).unwrap(), mu);
            let b = momentum_velocity(&bloch_grid(&minus).unwrap(), mu);
            assert!((a.im + b.im).abs() < 1e-9 * (1.0 + a.im.abs()));
            seen |= a.im.abs() > 1.0;
        }
        assert!(seen);
    }

    #[test]
    fn winding_arithmetic() {
        assert_eq!(winding_estimate(0.0, 100.0, 62), 0.0);
        let w = winding_estimate(19.73, 100.0, 62);
        assert!((w - 31.82).abs() < 0.01);
        assert_eq!(winding_estimate(19.73, 200.0, 62), 2.0 * w);
    }
}
