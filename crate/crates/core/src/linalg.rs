//! Small dense helpers shared by the spectral, observable and ED layers.

use ndarray::{Array2, ArrayView2};
use ndarray_linalg::{Determinant, QR};
use num_complex::Complex64 as C64;
use std::cmp::Ordering;

use crate::error::Result;

pub fn adjoint(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn max_abs(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &ArrayView2<C64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Total order used for every spectrum in the crate: real part, then
/// imaginary part.
pub fn cmp_re_im(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Largest distance in a greedy nearest-neighbour matching of two equally
/// long eigenvalue lists. Insensitive to how near-ties were ordered.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different length");
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Orthonormal basis (thin Q factor) of the column span of `cols`.
pub fn orthonormal_frame(cols: &ArrayView2<C64>) -> Result<Array2<C64>> {
    let (n, m) = cols.dim();
    if m == 0 {
        return Ok(Array2::zeros((n, 0)));
    }
    let (q, _r) = cols.to_owned().qr()?;
    Ok(q.slice(ndarray::s![.., ..m]).to_owned())
}

pub fn det(a: &ArrayView2<C64>) -> Result<C64> {
    if a.nrows() == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(a.det()?)
}

/// `tr(A B)` without forming the product.
pub fn trace_of_product(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, row) in a.rows().into_iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if *x != C64::new(0.0, 0.0) {
                acc += x * b[[j, i]];
            }
        }
    }
    acc
}
