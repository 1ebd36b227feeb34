use num_complex::Complex64 as C64;

use super::{build_sector_hamiltonian, many_body_velocity, FockSector, ManyBodyOperator};
use crate::error::{Error, Result};
use crate::model::{DisorderRealization, ModelSpec};
use crate::linalg::cmp_re_im;
use crate::spectral::{decompose_matrix, BiorthogonalSpectrum, CLUSTER_TOL};
use ndarray_linalg::EigVals;

/// Real-part window within which many-body levels count as degenerate
/// ground-state candidates.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Largest chain for the grand-canonical thermal trace.
pub const THERMAL_MAX_SITES: usize = 12;

#[derive(Debug, Clone)]
pub struct GroundStateVelocity {
    /// Energy of the first candidate (lowest real part).
    pub energy: C64,
    /// Mean of the candidates' velocities.
    pub velocity: C64,
    /// `(E, <L|V|R>)` for every level within [`DEGENERACY_TOL`] of the lowest
    /// real part.
    pub candidates: Vec<(C64, C64)>,
    /// `|<L|R>| / (||L|| ||R||)` of the first candidate.
    pub overlap: f64,
}

impl GroundStateVelocity {
    pub fn is_degenerate(&self) -> bool {
        self.candidates.len() > 1
    }
}

/// `<L_n| V |R_n>` for the listed eigenpairs.
fn diagonal_elements(spec: &BiorthogonalSpectrum, v: &ManyBodyOperator, which: &[usize]) -> Vec<C64> {
    let mut cols = ndarray::Array2::<C64>::zeros((spec.len(), which.len()));
    for (q, &n) in which.iter().enumerate() {
        cols.column_mut(q).assign(&spec.right_vectors.column(n));
    }
    let vr = v.apply(&cols);
    which
        .iter()
        .enumerate()
        .map(|(q, &n)| spec.left_vectors.row(n).dot(&vr.column(q)))
        .collect()
}

/// Velocities of the candidate levels. Levels that are exactly degenerate
/// (same complex energy) span a subspace in which `V` is diagonalized, so the
/// reported values do not depend on the basis the eigensolver picked.
fn candidate_velocities(
    spec: &BiorthogonalSpectrum,
    v: &ManyBodyOperator,
    which: &[usize],
) -> Result<Vec<(C64, C64)>> {
    let tol = CLUSTER_TOL * spec.matrix_norm;
    let mut out = Vec::with_capacity(which.len());
    let mut done = vec![false; which.len()];
    for a in 0..which.len() {
        if done[a] {
            continue;
        }
        let group: Vec<usize> = (a..which.len())
            .filter(|&b| !done[b] && (spec.eigenvalues[which[b]] - spec.eigenvalues[which[a]]).norm() < tol)
            .collect();
        group.iter().for_each(|&b| done[b] = true);
        let members: Vec<usize> = group.iter().map(|&b| which[b]).collect();
        let energy = spec.eigenvalues[members[0]];
        if members.len() == 1 {
            out.push((energy, diagonal_elements(spec, v, &members)[0]));
            continue;
        }
        let mut cols = ndarray::Array2::<C64>::zeros((spec.len(), members.len()));
        let mut rows = ndarray::Array2::<C64>::zeros((members.len(), spec.len()));
        for (q, &n) in members.iter().enumerate() {
            cols.column_mut(q).assign(&spec.right_vectors.column(n));
            rows.row_mut(q).assign(&spec.left_vectors.row(n));
        }
        let block = rows.dot(&v.apply(&cols));
        let mut vs = block.eigvals()?.to_vec();
        vs.sort_by(cmp_re_im);
        out.extend(vs.into_iter().map(|vq| (energy, vq)));
    }
    Ok(out)
}

/// Biorthogonal ground-state velocity `<GS_L|V|GS_R> / <GS_L|GS_R>`, with the
/// ground state taken as the level of lowest real energy.
///
/// When several levels share that real part (a complex-conjugate pair, say)
/// each candidate is reported and `velocity` is their mean.
pub fn ed_ground_state_velocity(h: &ManyBodyOperator, v: &ManyBodyOperator) -> Result<GroundStateVelocity> {
    if h.sector != v.sector {
        return Err(Error::Contract("H and V live in different sectors".into()));
    }
    if h.dim() == 0 {
        return Err(Error::Contract("empty sector".into()));
    }
    let spec = decompose_matrix(&h.to_dense())?;
    let lowest = spec.eigenvalues[0].re;
    let which: Vec<usize> =
        (0..spec.len()).filter(|&n| spec.eigenvalues[n].re - lowest < DEGENERACY_TOL).collect();
    let bad: Vec<usize> = which.iter().copied().filter(|&n| spec.is_flagged(n)).collect();
    if !bad.is_empty() {
        return Err(Error::DefectiveSea { indices: bad });
    }
    let candidates = candidate_velocities(&spec, v, &which)?;
    if candidates.len() > 1 {
        log::warn!(
            "{} ground-state candidates share Re E = {lowest:.12}; reporting their mean velocity",
            candidates.len()
        );
    }
    let velocity = candidates.iter().map(|c| c.1).sum::<C64>() / candidates.len() as f64;
    Ok(GroundStateVelocity {
        energy: candidates[0].0,
        velocity,
        candidates,
        overlap: 1.0 / spec.condition(which[0]),
    })
}

/// Full many-body spectrum of every particle-number sector, kept so that the
/// thermal velocity can be evaluated at many `(beta, mu)` points cheaply.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    pub sites: usize,
    /// `(E_m, n_m, <L_m|V|R_m>)` for every diagonalizable level.
    pub levels: Vec<(C64, usize, C64)>,
    /// Levels dropped because they sit at an exceptional point.
    pub skipped: usize,
}

impl ThermalEnsemble {
    pub fn build(spec: &ModelSpec, dis: Option<&DisorderRealization>) -> Result<Self> {
        if spec.cells > THERMAL_MAX_SITES {
            return Err(Error::SizeCap { size: spec.cells, cap: THERMAL_MAX_SITES });
        }
        let mut levels = Vec::new();
        let mut skipped = 0;
        for n in 0..=spec.cells {
            let sector = FockSector::new(spec.cells, n)?;
            let h = build_sector_hamiltonian(spec, &sector, dis)?;
            let v = many_body_velocity(spec, &sector, dis)?;
            let s = decompose_matrix(&h.to_dense())?;
            let ok: Vec<usize> = (0..s.len()).filter(|&m| !s.is_flagged(m)).collect();
            skipped += s.len() - ok.len();
            let vs = diagonal_elements(&s, &v, &ok);
            levels.extend(ok.iter().zip(vs).map(|(&m, vm)| (s.eigenvalues[m], n, vm)));
        }
        if skipped > 0 {
            log::warn!("thermal trace skips {skipped} near-defective many-body levels");
        }
        Ok(ThermalEnsemble { sites: spec.cells, levels, skipped })
    }

    /// `tr(e^{-beta(H - mu N)} V) / tr(e^{-beta(H - mu N)})`, with the
    /// exponent shifted by its largest real part to avoid overflow.
    pub fn velocity(&self, beta: f64, mu: f64) -> C64 {
        let exponent = |e: C64, n: usize| -(e - mu * n as f64) * beta;
        let shift = self
            .levels
            .iter()
            .map(|&(e, n, _)| exponent(e, n).re)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &(e, n, v) in &self.levels {
            let w = (exponent(e, n) - shift).exp();
            num += w * v;
            den += w;
        }
        num / den
    }
}

/// Grand-canonical thermal velocity of the HN chain (`L <= 12`).
pub fn ed_thermal_velocity(
    spec: &ModelSpec,
    dis: Option<&DisorderRealization>,
    beta: f64,
    mu: f64,
) -> Result<C64> {
    Ok(ThermalEnsemble::build(spec, dis)?.velocity(beta, mu))
}
