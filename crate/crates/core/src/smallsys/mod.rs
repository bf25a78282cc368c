//! Dense reference simulator for registers of up to a dozen qubits.
//!
//! Everything here is exact linear algebra on `2^n`-dimensional vectors and
//! matrices. The faster sector and collective paths elsewhere in the crate
//! are validated against these routines.

mod correlation;
mod family;
mod fisher;
mod observable;

pub use correlation::{
    corr, group_corr_max, group_corr_max_reduced, GroupCorrelation, GroupPartition,
};
pub use family::SensingFamily;
pub use fisher::{
    classical_fi, computational_basis_fi, moment_fi, qfi, qfi_sld, sld_operator, FiReport,
};
pub use observable::{DenseObservable, DiagonalObservable, LocalProductSum, Observable};

use nalgebra::{DMatrix, DVector, Dyn, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::pauli::{dense_dim, WeightedPauliSum};

const STATE_TOL: f64 = 1e-10;

/// A normalized state vector on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: DVector<Complex64>,
}

impl PureState {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        let dim = dense_dim(n)?;
        let mut amps = DVector::zeros(dim);
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `|+>` on every site.
    pub fn plus(n: usize) -> Result<Self> {
        let dim = dense_dim(n)?;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            n,
            amps: DVector::from_element(dim, a),
        })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        let dim = dense_dim(n)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amps.len(),
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state norm {norm}")));
        }
        Ok(Self { n, amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(n: usize, mut amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amps /= Complex64::new(norm, 0.0);
        Self::from_amplitudes(n, amps)
    }

    /// Wraps a vector without normalizing it, for intermediate results.
    pub(crate) fn unnormalized(n: usize, amps: DVector<Complex64>) -> Self {
        Self { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn apply_1q(&mut self, site: usize, u: &Matrix2<Complex64>) {
        let dim = self.amps.len();
        apply_1q_strided(self.amps.as_mut_slice(), 0, 1, dim, site, u);
    }

    /// Two-qubit gate with local basis index `2 q_a + q_b`.
    pub fn apply_2q(&mut self, a: usize, b: usize, u: &Matrix4<Complex64>) {
        let dim = self.amps.len();
        apply_2q_strided(self.amps.as_mut_slice(), 0, 1, dim, a, b, u);
    }

    /// `<psi|O|psi>` for a Pauli sum.
    pub fn expectation(&self, op: &WeightedPauliSum) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in op.terms() {
            let mut term = Complex64::new(0.0, 0.0);
            for (x, a) in self.amps.iter().enumerate() {
                let (f, y) = p.apply_to_basis(x);
                term += self.amps[y].conj() * f * a;
            }
            acc += c * term;
        }
        acc
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            n: self.n,
            mat: &self.amps * self.amps.adjoint(),
        }
    }

    /// Reduced density matrix on `sites`; `sites[k]` becomes local bit `k`.
    pub fn reduced(&self, sites: &[usize]) -> Result<DensityOperator> {
        let (local, rest) = scatter_tables(self.n, sites)?;
        let k = local.len();
        let mut m = DMatrix::zeros(k, k);
        for &r in &rest {
            for (a, &fa) in local.iter().enumerate() {
                let va = self.amps[fa | r];
                if va == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (b, &fb) in local.iter().enumerate() {
                    m[(a, b)] += va * self.amps[fb | r].conj();
                }
            }
        }
        Ok(DensityOperator {
            n: sites.len(),
            mat: m,
        })
    }
}

/// A density matrix on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    n: usize,
    mat: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Checks shape, Hermiticity and unit trace.
    pub fn new(n: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = dense_dim(n)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mat.nrows(),
            });
        }
        let defect = hermiticity_defect(&mat);
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = mat.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        Ok(Self { n, mat })
    }

    pub(crate) fn from_matrix_unchecked(n: usize, mat: DMatrix<Complex64>) -> Self {
        Self { n, mat }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = dense_dim(n)?;
        Ok(Self {
            n,
            mat: DMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
        })
    }

    /// Tensor product `self (x) other`, with `other` on the higher sites.
    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        dense_dim(self.n + other.n)?;
        Ok(Self {
            n: self.n + other.n,
            mat: other.mat.kronecker(&self.mat),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Smallest eigenvalue; useful to confirm positivity of inputs.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigen(&self.mat)?
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }

    /// Reduced density matrix on `sites`; `sites[k]` becomes local bit `k`.
    pub fn reduced(&self, sites: &[usize]) -> Result<DensityOperator> {
        let (local, rest) = scatter_tables(self.n, sites)?;
        let k = local.len();
        let mut m = DMatrix::zeros(k, k);
        for (b, &fb) in local.iter().enumerate() {
            for (a, &fa) in local.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &r in &rest {
                    acc += self.mat[(fa | r, fb | r)];
                }
                m[(a, b)] = acc;
            }
        }
        Ok(DensityOperator {
            n: sites.len(),
            mat: m,
        })
    }

    /// `U rho U^dagger` for a single-site unitary.
    pub fn conjugate_1q(&mut self, site: usize, u: &Matrix2<Complex64>) {
        conjugate_1q(&mut self.mat, site, u);
    }

    /// `U rho U^dagger` for a two-site unitary (local index `2 q_a + q_b`).
    pub fn conjugate_2q(&mut self, a: usize, b: usize, u: &Matrix4<Complex64>) {
        conjugate_2q(&mut self.mat, a, b, u);
    }
}

/// Lifts an operator on `sites` (local bit `k` is `sites[k]`) to the full register.
pub fn embed_local(
    n: usize,
    sites: &[usize],
    op: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let (local, rest) = scatter_tables(n, sites)?;
    if op.nrows() != local.len() || op.ncols() != local.len() {
        return Err(Error::DimensionMismatch {
            expected: local.len(),
            found: op.nrows(),
        });
    }
    let dim = dense_dim(n)?;
    let mut out = DMatrix::zeros(dim, dim);
    for &r in &rest {
        for (b, &fb) in local.iter().enumerate() {
            for (a, &fa) in local.iter().enumerate() {
                out[(fa | r, fb | r)] = op[(a, b)];
            }
        }
    }
    Ok(out)
}

pub(crate) fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// The QR iteration is retried with looser convergence thresholds when it
/// fails to converge or produces non-finite values. If that still fails the
/// matrix is first conjugated by a fixed pseudo-random unitary, which keeps
/// the spectrum but removes the exact sparsity pattern that can stall the
/// iteration. A decomposition is accepted only if its residual
/// `|H V - V diag(lambda)|` is small.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> Result<SymmetricEigen<Complex64, Dyn>> {
    if let Some(eig) = try_eigen(h) {
        return Ok(eig);
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
    let u = crate::random::haar_unitary(h.nrows(), &mut rng);
    let mixed = u.adjoint() * h * &u;
    let herm = (&mixed + mixed.adjoint()) * Complex64::new(0.5, 0.0);
    if let Some(mut eig) = try_eigen(&herm) {
        eig.eigenvectors = &u * eig.eigenvectors;
        if residual(h, &eig) <= 1e-9 * h.norm().max(f64::MIN_POSITIVE) {
            return Ok(eig);
        }
    }
    Err(Error::Numerical(
        "Hermitian eigensolver did not converge".into(),
    ))
}

fn residual(h: &DMatrix<Complex64>, eig: &SymmetricEigen<Complex64, Dyn>) -> f64 {
    let lam = eig.eigenvalues.map(|l| Complex64::new(l, 0.0));
    (h * &eig.eigenvectors - &eig.eigenvectors * DMatrix::from_diagonal(&lam)).norm()
}

fn try_eigen(h: &DMatrix<Complex64>) -> Option<SymmetricEigen<Complex64, Dyn>> {
    let scale = h.norm().max(f64::MIN_POSITIVE);
    for eps in [f64::EPSILON, 1e-15, 1e-14, 1e-13, 1e-12] {
        let Some(eig) = h.clone().try_symmetric_eigen(eps, 0) else {
            continue;
        };
        if eig.eigenvalues.iter().any(|l| !l.is_finite())
            || eig.eigenvectors.iter().any(|z| !z.is_finite())
        {
            continue;
        }
        if residual(h, &eig) <= 1e-9 * scale {
            return Some(eig);
        }
    }
    None
}

/// Full-register indices of each local configuration of `sites`, and of
/// each configuration of the remaining sites.
fn scatter_tables(n: usize, sites: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut seen = 0usize;
    for &s in sites {
        if s >= n {
            return Err(invalid(format!("site {s} outside a {n}-qubit register")));
        }
        if seen & (1 << s) != 0 {
            return Err(invalid(format!("site {s} listed twice")));
        }
        seen |= 1 << s;
    }
    let local = (0..1usize << sites.len())
        .map(|a| {
            sites
                .iter()
                .enumerate()
                .filter(|(k, _)| a >> k & 1 == 1)
                .fold(0, |acc, (_, &s)| acc | 1 << s)
        })
        .collect();
    let others: Vec<usize> = (0..n).filter(|s| seen & (1 << s) == 0).collect();
    let rest = (0..1usize << others.len())
        .map(|r| {
            others
                .iter()
                .enumerate()
                .filter(|(k, _)| r >> k & 1 == 1)
                .fold(0, |acc, (_, &s)| acc | 1 << s)
        })
        .collect();
    Ok((local, rest))
}

/// Applies `u` to one qubit of the vector `data[base + k * stride]`, `k < dim`.
pub(crate) fn apply_1q_strided(
    data: &mut [Complex64],
    base: usize,
    stride: usize,
    dim: usize,
    site: usize,
    u: &Matrix2<Complex64>,
) {
    let bit = 1usize << site;
    for k in (0..dim).filter(|k| k & bit == 0) {
        let i0 = base + k * stride;
        let i1 = base + (k | bit) * stride;
        let (a, b) = (data[i0], data[i1]);
        data[i0] = u[(0, 0)] * a + u[(0, 1)] * b;
        data[i1] = u[(1, 0)] * a + u[(1, 1)] * b;
    }
}

pub(crate) fn apply_2q_strided(
    data: &mut [Complex64],
    base: usize,
    stride: usize,
    dim: usize,
    a: usize,
    b: usize,
    u: &Matrix4<Complex64>,
) {
    let (ba, bb) = (1usize << a, 1usize << b);
    for k in (0..dim).filter(|k| k & (ba | bb) == 0) {
        // local index 2 q_a + q_b
        let idx = [k, k | bb, k | ba, k | ba | bb].map(|i| base + i * stride);
        let v = idx.map(|i| data[i]);
        for (r, &i) in idx.iter().enumerate() {
            data[i] = u[(r, 0)] * v[0] + u[(r, 1)] * v[1] + u[(r, 2)] * v[2] + u[(r, 3)] * v[3];
        }
    }
}

pub(crate) fn conjugate_1q(m: &mut DMatrix<Complex64>, site: usize, u: &Matrix2<Complex64>) {
    let dim = m.nrows();
    let uc = u.map(|z| z.conj());
    let data = m.as_mut_slice();
    for col in 0..dim {
        apply_1q_strided(data, col * dim, 1, dim, site, u);
    }
    for row in 0..dim {
        apply_1q_strided(data, row, dim, dim, site, &uc);
    }
}

pub(crate) fn conjugate_2q(m: &mut DMatrix<Complex64>, a: usize, b: usize, u: &Matrix4<Complex64>) {
    let dim = m.nrows();
    let uc = u.map(|z| z.conj());
    let data = m.as_mut_slice();
    for col in 0..dim {
        apply_2q_strided(data, col * dim, 1, dim, a, b, u);
    }
    for row in 0..dim {
        apply_2q_strided(data, row, dim, dim, a, b, &uc);
    }
}

/// `m -> U m U^dagger` with `U = exp(-i theta Z)` on all `n` sites.
pub(crate) fn rotate_z_in_place(m: &mut DMatrix<Complex64>, n: usize, theta: f64) {
    if theta == 0.0 {
        return;
    }
    // The phase only depends on the difference of Hamming weights.
    let table: Vec<Complex64> = (0..=2 * n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * theta * (k as f64 - n as f64)))
        .collect();
    let dim = m.nrows();
    for y in 0..dim {
        let wy = y.count_ones() as usize;
        for x in 0..dim {
            let wx = x.count_ones() as usize;
            m[(x, y)] *= table[wx + n - wy];
        }
    }
}

/// Total `Z` eigenvalue `n - 2|x|` of a basis state.
pub(crate) fn total_z(n: usize, x: usize) -> f64 {
    n as f64 - 2.0 * x.count_ones() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliString};
    use crate::testutil::{
        embed_site_op, random_density, random_pure, random_unitary2, random_unitary4, rng,
    };

    #[test]
    fn conjugation_matches_kron_oracle() {
        let mut r = rng(3);
        let rho = random_density(3, &mut r);
        let u = random_unitary2(&mut r);
        let mut m = rho.clone();
        conjugate_1q(&mut m, 1, &u);
        let e = embed_site_op(3, 1, &u);
        assert!((m - &e * &rho * e.adjoint()).norm() < 1e-13);
    }

    #[test]
    fn two_qubit_gate_ordering() {
        // CNOT with control a (high local bit) and target b.
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let cnot = Matrix4::new(l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o);
        let mut psi = PureState::zero(3).unwrap();
        psi.apply_1q(2, &Pauli::X.matrix());
        psi.apply_2q(2, 0, &cnot);
        assert!((psi.amplitudes()[0b101].re - 1.0).abs() < 1e-15);

        let mut r = rng(11);
        let rho = random_density(3, &mut r);
        let u = random_unitary4(&mut r);
        let mut a = rho.clone();
        conjugate_2q(&mut a, 0, 2, &u);
        // Dense oracle: build the full operator column by column from basis states.
        let mut full = DMatrix::<Complex64>::zeros(8, 8);
        for x in 0..8 {
            let mut v = DVector::zeros(8);
            v[x] = l;
            apply_2q_strided(v.as_mut_slice(), 0, 1, 8, 0, 2, &u);
            full.set_column(x, &v);
        }
        assert!((a - &full * &rho * full.adjoint()).norm() < 1e-13);
    }

    #[test]
    fn reduced_states_agree() {
        let mut r = rng(5);
        let psi = random_pure(4, &mut r);
        let rho = psi.to_density();
        for sites in [vec![0], vec![2, 1], vec![3, 0, 2]] {
            let a = psi.reduced(&sites).unwrap();
            let b = rho.reduced(&sites).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-13);
            assert!((a.matrix().trace().re - 1.0).abs() < 1e-13);
        }
        // Local ordering: Z on sites[0] is local bit 0.
        let mut psi = PureState::zero(3).unwrap();
        psi.apply_1q(2, &Pauli::X.matrix());
        let red = psi.reduced(&[2, 0]).unwrap();
        assert!((red.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_phase_convention() {
        let mut r = rng(9);
        let rho = random_density(3, &mut r);
        let mut m = rho.clone();
        rotate_z_in_place(&mut m, 3, 0.3);
        let u1 = Matrix2::new(
            Complex64::from_polar(1.0, -0.3),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, 0.3),
        );
        let mut expect = rho;
        for s in 0..3 {
            conjugate_1q(&mut expect, s, &u1);
        }
        assert!((m - expect).norm() < 1e-13);
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(1, DMatrix::identity(2, 2)).is_err());
        let ok = DensityOperator::maximally_mixed(2).unwrap();
        assert!((ok.purity() - 0.25).abs() < 1e-15);
        let psi = PureState::plus(2).unwrap();
        let x0 = WeightedPauliSum::from_string(
            Complex64::new(1.0, 0.0),
            &PauliString::single(0, Pauli::X),
        );
        assert!((psi.expectation(&x0).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigensolver_handles_sparse_domino_state() {
        let st = crate::domino::two_dw_evolve(12, (2, 9), 6, 0.5).unwrap();
        let sites: Vec<usize> = (2..10).collect();
        let rho = st.to_pure_state().unwrap().reduced(&sites).unwrap();
        let noise = crate::channels::PauliChannel::dephasing(0.03, 0.0).unwrap();
        let fam = SensingFamily::new(rho, noise);
        let m = fam.state(0.0).matrix().clone();
        let eig = hermitian_eigen(&m).unwrap();
        assert!((eig.eigenvalues.sum() - 1.0).abs() < 1e-10);
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
        let q = qfi(&fam, 0.0).unwrap();
        assert!(q.is_finite() && q > 0.0);
    }
}
