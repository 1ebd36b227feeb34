use ndarray::ArrayView1;
use num_complex::Complex64 as C64;

use crate::spectral::BiorthogonalSpectrum;

/// Localization diagnostics of one eigenpair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub ipr_right: f64,
    pub ipr_left: f64,
    /// Cell where the right vector's weight peaks.
    pub peak_right: usize,
    pub peak_left: usize,
}

/// `sum |psi|^4 / (sum |psi|^2)^2` over sites.
pub fn ipr(psi: ArrayView1<C64>) -> f64 {
    let (mut p2, mut p4) = (0.0, 0.0);
    for z in psi {
        let w = z.norm_sqr();
        p2 += w;
        p4 += w * w;
    }
    p4 / (p2 * p2)
}

/// Cell with the largest summed weight `sum_alpha |psi(x, alpha)|^2`; the
/// lowest cell wins ties.
pub fn peak_cell(psi: ArrayView1<C64>, orbitals: usize) -> usize {
    let cells = psi.len() / orbitals;
    let mut best = (0, f64::NEG_INFINITY);
    for x in 0..cells {
        let w: f64 = (0..orbitals).map(|a| psi[orbitals * x + a].norm_sqr()).sum();
        if w > best.1 {
            best = (x, w);
        }
    }
    best.0
}

/// Distance between two cells on a ring of `cells` cells.
pub fn ring_distance(a: usize, b: usize, cells: usize) -> usize {
    let d = a.abs_diff(b) % cells;
    d.min(cells - d)
}

pub fn eigenstate_diagnostics(spectrum: &BiorthogonalSpectrum, orbitals: usize) -> Vec<StateDiagnostics> {
    (0..spectrum.len())
        .map(|n| {
            let r = spectrum.right_vectors.column(n);
            let l = spectrum.left_vectors.row(n);
            StateDiagnostics {
                ipr_right: ipr(r),
                ipr_left: ipr(l),
                peak_right: peak_cell(r, orbitals),
                peak_left: peak_cell(l, orbitals),
            }
        })
        .collect()
}
