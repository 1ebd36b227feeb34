use ndarray::{s, Array2};
use ndarray_linalg::EigVals;
use num_complex::Complex64 as C64;
use std::ops::Range;

use super::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::stats::{linear_fit, LinearFit};

/// Translation-averaged `C(d) = (1/L) sum_x <c_x^dagger c_{x+d}>`, `d = 0..=L/2`.
///
/// `x` runs over cells with periodic wrap; on a multi-orbital lattice the
/// average is over the first orbital of each cell (the A sublattice).
pub fn correlation_profile(cmat: &CorrelationMatrix) -> Vec<C64> {
    let l = cmat.cells();
    let o = cmat.orbitals;
    (0..=l / 2)
        .map(|d| {
            let sum: C64 = (0..l).map(|x| cmat.c[[o * ((x + d) % l), o * x]]).sum();
            sum / l as f64
        })
        .collect()
}

/// Second Renyi entropy `S2 = -sum_i log(xi_i^2 + (1 - xi_i)^2)` of the sites
/// in `sites`, with `xi_i` the eigenvalues of that block of `C`.
pub fn renyi2(cmat: &CorrelationMatrix, sites: Range<usize>) -> Result<C64> {
    if sites.end > cmat.dim() || sites.start > sites.end {
        return Err(Error::Contract(format!(
            "subsystem {sites:?} outside 0..{}",
            cmat.dim()
        )));
    }
    if sites.is_empty() {
        return Ok(C64::new(0.0, 0.0));
    }
    let view = cmat.c.slice(s![sites.clone(), sites]);
    // fresh C-ordered copy: LAPACK rejects the zero strides a 1x1 slice can carry
    let block = Array2::from_shape_fn(view.dim(), |ij| view[ij]);
    let xi = block.eigvals()?;
    let mut s2 = C64::new(0.0, 0.0);
    for (index, x) in xi.iter().enumerate() {
        let purity = x * x + (1.0 - x) * (1.0 - x);
        if purity.norm() < 1e-12 {
            return Err(Error::SingularCut { index, value: purity.norm() });
        }
        s2 -= purity.ln();
    }
    Ok(s2)
}

/// `S2` of the first half of the chain (cells `0..L/2`).
pub fn renyi2_half(cmat: &CorrelationMatrix) -> Result<C64> {
    renyi2(cmat, 0..cmat.orbitals * (cmat.cells() / 2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecayClass {
    PowerLaw,
    Exponential,
    /// Too few usable points to fit.
    Undetermined,
}

impl DecayClass {
    pub fn name(self) -> &'static str {
        match self {
            DecayClass::PowerLaw => "power-law",
            DecayClass::Exponential => "exponential",
            DecayClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub class: DecayClass,
    /// `log|C| = slope * log d + c`; slope is minus the exponent.
    pub power_law: Option<LinearFit>,
    /// `log|C| = slope * d + c`; slope is minus the inverse decay length.
    pub exponential: Option<LinearFit>,
}

/// Fits `log|C(d)|` against `log d` and against `d` over `d in [5, L/4]`
/// and picks the model with the smaller residual sum of squares.
pub fn classify_decay(profile: &[C64], cells: usize) -> DecayFit {
    let (mut d_lin, mut d_log, mut y) = (Vec::new(), Vec::new(), Vec::new());
    let last = (cells / 4).min(profile.len().saturating_sub(1));
    for (d, c) in profile.iter().enumerate().take(last + 1).skip(5) {
        let a = c.norm();
        if a > 0.0 && a.is_finite() {
            d_lin.push(d as f64);
            d_log.push((d as f64).ln());
            y.push(a.ln());
        }
    }
    let power_law = linear_fit(&d_log, &y);
    let exponential = linear_fit(&d_lin, &y);
    let class = match (power_law, exponential) {
        (Some(p), Some(e)) if y.len() >= 3 => {
            if p.rss <= e.rss {
                DecayClass::PowerLaw
            } else {
                DecayClass::Exponential
            }
        }
        _ => DecayClass::Undetermined,
    };
    DecayFit { class, power_law, exponential }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, ModelSpec};
    use crate::observables::{correlation_matrix, fermi_sea};
    use crate::spectral::decompose;
    use std::f64::consts::PI;

    fn diag_c(xi: &[f64]) -> CorrelationMatrix {
        let c = Array2::from_diag(&ndarray::Array1::from(xi.iter().map(|x| C64::new(*x, 0.0)).collect::<Vec<_>>()));
        CorrelationMatrix { particle_number: c.diag().sum(), c, orbitals: 1 }
    }

    #[test]
    fn pure_blocks_have_zero_entropy() {
        let c = diag_c(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(renyi2(&c, 0..4).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(renyi2(&c, 1..1).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn half_filled_mode_gives_log2() {
        let c = diag_c(&[0.5]);
        assert!((renyi2(&c, 0..1).unwrap() - C64::new(2f64.ln(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_cut() {
        let xi = C64::new(0.5, 0.5);
        let c = Array2::from_elem((1, 1), xi);
        let cm = CorrelationMatrix { c, particle_number: xi, orbitals: 1 };
        assert!(matches!(renyi2(&cm, 0..1), Err(Error::SingularCut { .. })));
    }

    #[test]
    fn hermitian_ring_profile_matches_k_sum() {
        let l = 62;
        let s = decompose(&build_hamiltonian(&ModelSpec::hatano_nelson(l, 0.0)).unwrap()).unwrap();
        let c = correlation_matrix(&s, &fermi_sea(&s, 0.0, f64::INFINITY).unwrap()).unwrap();
        let prof = correlation_profile(&c);
        assert_eq!(prof.len(), l / 2 + 1);
        assert!((prof[0] - 0.5).norm() < 1e-12 && prof[0].im.abs() < 1e-10);
        for (d, p) in prof.iter().enumerate() {
            let oracle: C64 = (0..l)
                .map(|m| 2.0 * PI * m as f64 / l as f64)
                .filter(|k| k.cos() < 0.0)
                .map(|k| C64::from_polar(1.0, k * d as f64))
                .sum::<C64>()
                / l as f64;
            assert!((p - oracle).norm() < 1e-12, "d = {d}");
            // thermodynamic envelope |sin(pi d / 2)| / (pi d)
            if d > 0 && d < 8 {
                let env = (PI * d as f64 / 2.0).sin().abs() / (PI * d as f64);
                assert!((p.norm() - env).abs() < 0.01);
            }
        }
    }

    #[test]
    fn subsystem_and_complement_agree() {
        let spec = ModelSpec::ab_flux(20).with_disorder(
            crate::model::DisorderMode::Uncorrelated,
            C64::new(0.0, 1.5),
            3,
        );
        let s = decompose(&build_hamiltonian(&spec).unwrap()).unwrap();
        let c = correlation_matrix(&s, &fermi_sea(&s, -1.0, f64::INFINITY).unwrap()).unwrap().on_lattice(2);
        let a = renyi2_half(&c).unwrap();
        let b = renyi2(&c, 20..40).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn classifier_separates_clean_laws() {
        let l = 400;
        let power: Vec<C64> = (0..=l / 2).map(|d| C64::new((d.max(1) as f64).powf(-1.5), 0.0)).collect();
        let expo: Vec<C64> = (0..=l / 2).map(|d| C64::new((-0.3 * d as f64).exp(), 0.0)).collect();
        assert_eq!(classify_decay(&power, l).class, DecayClass::PowerLaw);
        let fit = classify_decay(&expo, l);
        assert_eq!(fit.class, DecayClass::Exponential);
        assert!((fit.exponential.unwrap().slope + 0.3).abs() < 1e-10);
        assert_eq!(classify_decay(&power[..6], 20).class, DecayClass::Undetermined);
    }
}
