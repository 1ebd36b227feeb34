use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spectral::BiorthogonalSpectrum;

/// Real-part gap below which two levels count as tied at a filling boundary.
pub const TIE_TOL: f64 = 1e-10;

/// Occupation of a single-particle spectrum.
#[derive(Debug, Clone)]
pub struct FermiSea {
    pub mu: f64,
    /// `f64::INFINITY` for the ground state.
    pub beta: f64,
    /// `{n : Re eps_n < mu}`, whatever `beta` is.
    pub occupied: Vec<usize>,
    /// `f_n` for every state of the spectrum.
    pub occupation_weights: Vec<C64>,
}

impl FermiSea {
    pub fn is_ground_state(&self) -> bool {
        self.beta.is_infinite()
    }

    /// States with a nonzero weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.occupation_weights.len())
            .filter(|&n| self.occupation_weights[n] != C64::new(0.0, 0.0))
            .collect()
    }

    pub fn filling(&self) -> C64 {
        self.occupation_weights.iter().sum()
    }
}

/// `1 / (e^z + 1)` for complex `z`, without overflowing for large `|Re z|`.
pub fn fermi_function(z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    if z.re > 0.0 {
        let e = (-z).exp();
        e / (one + e)
    } else {
        one / (z.exp() + one)
    }
}

/// Ground-state (`beta = inf`) or thermal occupation at chemical potential `mu`.
///
/// At `beta = inf` the weights are exactly 0 or 1 with strict `Re eps < mu`.
/// At finite `beta` they are the complex Fermi factors `f(beta (eps - mu))`.
pub fn fermi_sea(spectrum: &BiorthogonalSpectrum, mu: f64, beta: f64) -> Result<FermiSea> {
    if beta.is_nan() || beta < 0.0 || mu.is_nan() {
        return Err(Error::Contract(format!("need beta >= 0 and finite mu (beta = {beta}, mu = {mu})")));
    }
    let occupied: Vec<usize> =
        (0..spectrum.len()).filter(|&n| spectrum.eigenvalues[n].re < mu).collect();
    let occupation_weights = if beta.is_infinite() {
        let mut w = vec![C64::new(0.0, 0.0); spectrum.len()];
        for &n in &occupied {
            w[n] = C64::new(1.0, 0.0);
        }
        w
    } else {
        spectrum
            .eigenvalues
            .iter()
            .map(|e| fermi_function((e - mu) * beta))
            .collect()
    };
    Ok(FermiSea { mu, beta, occupied, occupation_weights })
}

/// Ground state with exactly `count` particles.
///
/// When the filling boundary cuts through a group of levels whose real parts
/// agree within [`TIE_TOL`], the remaining particles are spread evenly over
/// the whole group. That is the average over the degenerate Slater
/// determinants, which is what an exact diagonalization of the many-body
/// problem sees as a degenerate ground-state manifold.
pub fn fill_lowest(spectrum: &BiorthogonalSpectrum, count: usize) -> Result<FermiSea> {
    let n = spectrum.len();
    if count > n {
        return Err(Error::Contract(format!("cannot place {count} particles in {n} states")));
    }
    let re: Vec<f64> = spectrum.eigenvalues.iter().map(|e| e.re).collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mu;
    if count == 0 {
        mu = re.first().map_or(0.0, |r| r - 1.0);
    } else if count == n {
        mu = re[n - 1] + 1.0;
        w.iter_mut().for_each(|x| *x = C64::new(1.0, 0.0));
    } else {
        let edge = re[count - 1];
        let lo = (0..count).find(|&i| edge - re[i] < TIE_TOL).unwrap();
        let hi = (count..n).find(|&i| re[i] - edge >= TIE_TOL).unwrap_or(n);
        for x in w.iter_mut().take(lo) {
            *x = C64::new(1.0, 0.0);
        }
        let share = (count - lo) as f64 / (hi - lo) as f64;
        for x in w.iter_mut().take(hi).skip(lo) {
            *x = C64::new(share, 0.0);
        }
        mu = if hi == count { 0.5 * (edge + re[count]) } else { edge };
    }
    let occupied = (0..n).filter(|&i| w[i].re == 1.0).collect();
    Ok(FermiSea { mu, beta: f64::INFINITY, occupied, occupation_weights: w })
}

/// Single-particle density matrix `C = sum_n f_n |R_n><L_n|`.
///
/// Convention: `<c_x^dagger c_y> = C[y, x]`, so `<O> = tr(O C)` for any
/// quadratic `O = sum O_xy c_x^dagger c_y`.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub c: Array2<C64>,
    pub particle_number: C64,
    /// Orbitals per cell of the underlying lattice.
    pub orbitals: usize,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// Tags the matrix with the orbitals per cell of its lattice, which the
    /// profile and half-system cut need.
    pub fn on_lattice(mut self, orbitals: usize) -> Self {
        self.orbitals = orbitals;
        self
    }

    pub fn cells(&self) -> usize {
        self.dim() / self.orbitals
    }

    /// `max |C^2 - C|`.
    pub fn idempotency_defect(&self) -> f64 {
        let c2 = self.c.dot(&self.c);
        (&c2 - &self.c).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Builds `C` for a one-orbital lattice; see [`CorrelationMatrix::on_lattice`].
pub fn correlation_matrix(spectrum: &BiorthogonalSpectrum, sea: &FermiSea) -> Result<CorrelationMatrix> {
    if sea.occupation_weights.len() != spectrum.len() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.len(),
            got: sea.occupation_weights.len(),
        });
    }
    let support = sea.support();
    let bad: Vec<usize> = support.iter().copied().filter(|&n| spectrum.is_flagged(n)).collect();
    if !bad.is_empty() {
        return Err(Error::DefectiveSea { indices: bad });
    }
    let dim = spectrum.len();
    let m = support.len();
    let mut right = Array2::<C64>::zeros((dim, m));
    let mut left = Array2::<C64>::zeros((m, dim));
    for (slot, &n) in support.iter().enumerate() {
        let f = sea.occupation_weights[n];
        right.column_mut(slot).assign(&spectrum.right_vectors.column(n).mapv(|z| z * f));
        left.row_mut(slot).assign(&spectrum.left_vectors.row(n));
    }
    let c = right.dot(&left);
    let particle_number = c.diag().sum();
    Ok(CorrelationMatrix { c, particle_number, orbitals: 1 })
}
