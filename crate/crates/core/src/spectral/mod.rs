//! Biorthogonal eigendecomposition of dense non-Hermitian matrices.
//!
//! Right vectors come from a dense eigensolve of `H`; left vectors from a
//! second, independent eigensolve of `H^dagger`, paired with the right ones
//! by greedy nearest-eigenvalue matching. Clusters of eigenvalues closer than
//! `1e-8 * ||H||` are biorthogonalized as a block when the block overlap is
//! invertible (a genuine degeneracy) and flagged near-defective when it is
//! not (an exceptional point).
//!
//! Gauge: `||psi_R||_2 = 1`, and the full biorthogonal factor sits in the
//! left vector so that `<psi_L|psi_R> = 1`.

mod bloch;

pub use bloch::{bloch_grid, bloch_matrix, KGrid};

use ndarray::{s, Array1, Array2, Axis};
use ndarray_linalg::{Eig, Inverse, SVD};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{adjoint, cmp_re_im, inf_norm};
use crate::model::SingleParticleHamiltonian;

/// Relative eigenvalue distance below which two eigenpairs form a cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Hard limit on the scale-invariant biorthogonality residual.
pub const BIORTHOGONALITY_LIMIT: f64 = 1e-6;
/// Reciprocal condition number below which a cluster's left/right overlap
/// block is treated as singular.
const CLUSTER_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFlag {
    Clean,
    /// Member of a degenerate cluster that was biorthogonalized as a block.
    Degenerate,
    /// Eigenvectors coalesce (or pairing was ambiguous); the pair is not
    /// biorthonormal and must not enter a Fermi sea.
    NearDefective,
}

#[derive(Debug, Clone)]
pub struct BiorthogonalSpectrum {
    /// Sorted by real part, ties by imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Column `n` is `psi_R` of eigenvalue `n`.
    pub right_vectors: Array2<C64>,
    /// Row `n` holds the bra `<psi_L|` of eigenvalue `n`: `row * H = eps * row`.
    pub left_vectors: Array2<C64>,
    pub flags: Vec<PairFlag>,
    /// `||H||_inf` of the decomposed matrix.
    pub matrix_norm: f64,
    /// Worst scale-invariant biorthogonality residual over unflagged pairs.
    pub biorthogonality_residual: f64,
}

impl BiorthogonalSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_flagged(&self, n: usize) -> bool {
        self.flags[n] == PairFlag::NearDefective
    }

    pub fn flagged(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.is_flagged(n)).collect()
    }

    /// Eigenvector condition number `||psi_L|| * ||psi_R||`.
    pub fn condition(&self, n: usize) -> f64 {
        self.left_vectors.row(n).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |sum_n |R_n><L_n| - 1|`; only meaningful when nothing is flagged.
    pub fn completeness_defect(&self) -> f64 {
        let p = self.right_vectors.dot(&self.left_vectors);
        let mut worst = 0.0f64;
        for ((i, j), z) in p.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((z - want).norm());
        }
        worst
    }
}

pub fn decompose(h: &SingleParticleHamiltonian) -> Result<BiorthogonalSpectrum> {
    decompose_matrix(&h.matrix)
}

pub fn decompose_matrix(a: &Array2<C64>) -> Result<BiorthogonalSpectrum> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    let matrix_norm = inf_norm(&a.view());
    if n == 0 {
        return Ok(BiorthogonalSpectrum {
            eigenvalues: vec![],
            right_vectors: Array2::zeros((0, 0)),
            left_vectors: Array2::zeros((0, 0)),
            flags: vec![],
            matrix_norm,
            biorthogonality_residual: 0.0,
        });
    }
    let tol = CLUSTER_TOL * matrix_norm.max(f64::MIN_POSITIVE);

    let (w_right, v_right) = a.eig()?;
    let (w_adj, v_adj) = adjoint(&a.view()).eig()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_re_im(&w_right[i], &w_right[j]));
    let eigenvalues: Vec<C64> = order.iter().map(|&i| w_right[i]).collect();

    let mut right = Array2::<C64>::zeros((n, n));
    for (slot, &src) in order.iter().enumerate() {
        let col = v_right.column(src);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        right.column_mut(slot).assign(&col.mapv(|z| z / norm));
    }

    let mut flags = vec![PairFlag::Clean; n];
    let clusters = clusters(&eigenvalues, tol);

    // Greedy nearest matching of conj(eig(H^dagger)) onto eig(H).
    let candidates: Vec<C64> = w_adj.iter().map(|z| z.conj()).collect();
    let mut used = vec![false; n];
    let mut left = Array2::<C64>::zeros((n, n));
    for (slot, eps) in eigenvalues.iter().enumerate() {
        let mut best = None::<(usize, f64)>;
        let mut runner_up = f64::INFINITY;
        for (j, c) in candidates.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (c - eps).norm();
            match best {
                Some((_, bd)) if d >= bd => runner_up = runner_up.min(d),
                Some((_, bd)) => {
                    runner_up = bd;
                    best = Some((j, d));
                }
                None => best = Some((j, d)),
            }
        }
        let (j, _) = best.expect("one unused candidate per slot");
        used[j] = true;
        if runner_up < tol && clusters[slot].len() == 1 {
            flags[slot] = PairFlag::NearDefective;
        }
        left.row_mut(slot).assign(&v_adj.column(j).mapv(|z| z.conj()));
    }

    for members in unique_clusters(&clusters) {
        if members.len() == 1 {
            let m = members[0];
            let overlap = left.row(m).dot(&right.column(m));
            if overlap.norm() == 0.0 || !overlap.re.is_finite() || !overlap.im.is_finite() {
                flags[m] = PairFlag::NearDefective;
            } else {
                let scaled = left.row(m).mapv(|z| z / overlap);
                left.row_mut(m).assign(&scaled);
            }
            continue;
        }
        biorthogonalize_cluster(&members, &mut left, &right, &mut flags)?;
    }

    let biorthogonality_residual = biorthogonality_residual(&left, &right, &flags);
    if biorthogonality_residual > BIORTHOGONALITY_LIMIT {
        return Err(Error::Biorthogonality {
            residual: biorthogonality_residual,
            limit: BIORTHOGONALITY_LIMIT,
        });
    }

    Ok(BiorthogonalSpectrum {
        eigenvalues,
        right_vectors: right,
        left_vectors: left,
        flags,
        matrix_norm,
        biorthogonality_residual,
    })
}

/// For each sorted slot, the slots of its cluster (connected components of
/// the "closer than `tol`" relation).
fn clusters(sorted: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = sorted.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if sorted[j].re - sorted[i].re >= tol {
                break;
            }
            if (sorted[j] - sorted[i]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out = vec![Vec::new(); n];
    for members in groups.into_values() {
        for &m in &members {
            out[m] = members.clone();
        }
    }
    out
}

fn unique_clusters(clusters: &[Vec<usize>]) -> Vec<Vec<usize>> {
    clusters
        .iter()
        .enumerate()
        .filter(|(i, c)| c[0] == *i)
        .map(|(_, c)| c.clone())
        .collect()
}

// the negated comparisons make NaN singular values count as failures
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn biorthogonalize_cluster(
    members: &[usize],
    left: &mut Array2<C64>,
    right: &Array2<C64>,
    flags: &mut [PairFlag],
) -> Result<()> {
    let g = members.len();
    let mut l_block = Array2::<C64>::zeros((g, left.ncols()));
    let mut r_block = Array2::<C64>::zeros((right.nrows(), g));
    for (k, &m) in members.iter().enumerate() {
        let row = left.row(m);
        let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        l_block.row_mut(k).assign(&row.mapv(|z| z / norm));
        r_block.column_mut(k).assign(&right.column(m));
    }
    // Coalescing right vectors are the defining signature of an exceptional
    // point; a singular overlap block is the left-side counterpart.
    let (_, r_sv, _) = r_block.svd(false, false)?;
    let overlap = l_block.dot(&r_block);
    let (_, sv, _) = overlap.svd(false, false)?;
    let coalesced = !(r_sv[g - 1] > CLUSTER_RCOND.sqrt() * r_sv[0]);
    if coalesced || !(sv[g - 1] > CLUSTER_RCOND * sv[0]) {
        for &m in members {
            flags[m] = PairFlag::NearDefective;
        }
        return Ok(());
    }
    let fixed = overlap.inv()?.dot(&l_block);
    for (k, &m) in members.iter().enumerate() {
        left.row_mut(m).assign(&fixed.row(k));
        flags[m] = PairFlag::Degenerate;
    }
    Ok(())
}

/// `max |<L_m|R_n> - delta_mn| / (||L_m|| ||R_n||)` over unflagged pairs.
fn biorthogonality_residual(left: &Array2<C64>, right: &Array2<C64>, flags: &[PairFlag]) -> f64 {
    let gram = left.dot(right);
    let left_norms: Array1<f64> = left
        .map_axis(Axis(1), |r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    let mut worst = 0.0f64;
    for (m, row) in gram.axis_iter(Axis(0)).enumerate() {
        if flags[m] == PairFlag::NearDefective {
            continue;
        }
        for (nn, z) in row.iter().enumerate() {
            if flags[nn] == PairFlag::NearDefective {
                continue;
            }
            let r = if m == nn { (z - 1.0).norm() } else { z.norm() / left_norms[m] };
            worst = worst.max(r);
        }
    }
    worst
}

/// Eigenvalues only, sorted like [`decompose`].
pub fn sorted_eigenvalues(a: &Array2<C64>) -> Result<Vec<C64>> {
    use ndarray_linalg::EigVals;
    let mut w = a.eigvals()?.to_vec();
    w.sort_by(cmp_re_im);
    Ok(w)
}

/// Right eigenvectors of the `count` eigenvalues with the lowest real part,
/// as columns of an `N x count` matrix, plus the full sorted spectrum.
pub fn lowest_right_vectors(a: &Array2<C64>, count: usize) -> Result<(Vec<C64>, Array2<C64>)> {
    let (w, v) = a.eig()?;
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&i, &j| cmp_re_im(&w[i], &w[j]));
    let sorted = order.iter().map(|&i| w[i]).collect();
    let mut cols = Array2::<C64>::zeros((a.nrows(), count));
    for (slot, &src) in order.iter().take(count).enumerate() {
        cols.column_mut(slot).assign(&v.column(src));
    }
    Ok((sorted, cols.slice(s![.., ..count]).to_owned()))
}
