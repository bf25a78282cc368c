//! The domino Hamiltonian on the full `2^n`-dimensional register.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chebyshev::{propagate, SymmetricOperator};
use crate::error::{invalid, Error, Result};
use crate::smallsys::PureState;

/// Largest chain handled by the state-vector routines.
pub const MAX_STATEVECTOR_QUBITS: usize = 22;

/// Whether `site` carries a flip term in an open chain of `n` sites.
pub(crate) fn interior(site: usize, n: usize) -> bool {
    site >= 1 && site + 2 <= n
}

/// `H_do = sum_{k=1}^{n-2} X_k (1 - Z_{k-1} Z_{k+1}) / 2` on an open chain.
///
/// A site flips with unit amplitude exactly when its two neighbors disagree,
/// so the number of domain walls is conserved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DominoChain {
    n: usize,
}

impl DominoChain {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!(
                "a domino chain needs at least 3 sites, got {n}"
            )));
        }
        if n > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooLarge(n));
        }
        Ok(Self { n })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Basis states reached from `x` by one flip.
    pub fn flips(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        (1..self.n - 1)
            .filter(move |&k| (x >> (k - 1) ^ x >> (k + 1)) & 1 == 1)
            .map(move |k| x ^ 1 << k)
    }

    /// Dense real matrix; only sensible for short chains.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.n > crate::MAX_DENSE_QUBITS {
            return Err(Error::TooLarge(self.n));
        }
        let dim = 1usize << self.n;
        let mut h = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            for y in self.flips(x) {
                h[(y, x)] = 1.0;
            }
        }
        Ok(h)
    }

    /// `exp(-i t H_do) psi`.
    pub fn evolve(&self, psi: &PureState, t: f64) -> Result<PureState> {
        if psi.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: psi.n_qubits(),
            });
        }
        let out = propagate(self, psi.amplitudes().as_slice(), t)?;
        PureState::normalized(self.n, DVector::from_vec(out))
    }
}

impl SymmetricOperator for DominoChain {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.fill(Complex64::new(0.0, 0.0));
        for (b, a) in x.iter().enumerate() {
            if *a != Complex64::new(0.0, 0.0) {
                for c in self.flips(b) {
                    y[c] += a;
                }
            }
        }
    }

    fn spectral_bound(&self) -> f64 {
        (self.n - 2) as f64
    }
}

/// `|+>` on each of `sources` and `|0>` on every other site.
pub fn source_state(n: usize, sources: &[usize]) -> Result<PureState> {
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::TooLarge(n));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= n) {
        return Err(invalid(format!("source {s} outside a chain of {n} sites")));
    }
    let mask = sources.iter().fold(0usize, |m, &s| m | 1 << s);
    let weight = (0.5f64).powf(sources.len() as f64 / 2.0);
    let amps = DVector::from_fn(1 << n, |x, _| {
        if x & !mask == 0 {
            Complex64::new(weight, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    PureState::from_amplitudes(n, amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain_walls(x: usize, n: usize) -> u32 {
        (0..n - 1)
            .filter(|&k| (x >> k ^ x >> (k + 1)) & 1 == 1)
            .count() as u32
    }

    #[test]
    fn single_flip_matrix_element() {
        // |1_1> = ones on the first site, |1_2> = ones on the first two sites.
        let h = DominoChain::new(3).unwrap().to_dense().unwrap();
        assert_eq!(h[(0b011, 0b001)], 1.0);
        assert_eq!(h[(0b001, 0b011)], 1.0);
        assert_eq!(h[(0b010, 0b000)], 0.0);
        // The edge sites never flip.
        assert!((0..8).all(|x| h[(x ^ 1, x)] == 0.0 && h[(x ^ 4, x)] == 0.0));
    }

    #[test]
    fn matches_pauli_construction() {
        use crate::pauli::{Pauli, PauliString, WeightedPauliSum};
        let n = 5;
        let mut op = WeightedPauliSum::zero();
        for k in 1..n - 1 {
            op.add_string(Complex64::new(0.5, 0.0), &PauliString::single(k, Pauli::X));
            let xzz =
                PauliString::from_letters([(k - 1, Pauli::Z), (k, Pauli::X), (k + 1, Pauli::Z)]);
            op.add_string(Complex64::new(-0.5, 0.0), &xzz);
        }
        let want = op.to_dense(n).unwrap();
        let got = DominoChain::new(n).unwrap().to_dense().unwrap();
        assert!((want - got.map(|v| Complex64::new(v, 0.0))).norm() < 1e-14);
    }

    #[test]
    fn conserves_domain_walls() {
        let n = 7;
        let c = DominoChain::new(n).unwrap();
        for x in 0..1 << n {
            for y in c.flips(x) {
                assert_eq!(domain_walls(x, n), domain_walls(y, n));
            }
        }
    }

    #[test]
    fn evolution_matches_eigendecomposition() {
        let n = 6;
        let c = DominoChain::new(n).unwrap();
        let psi = source_state(n, &[2]).unwrap();
        let got = c.evolve(&psi, 1.7).unwrap();
        let eig = c.to_dense().unwrap().symmetric_eigen();
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = DVector::from_iterator(
            64,
            eig.eigenvalues
                .iter()
                .map(|e| Complex64::from_polar(1.0, -e * 1.7)),
        );
        let want = &v * (v.adjoint() * psi.amplitudes()).component_mul(&phases);
        assert!((got.amplitudes() - want).norm() < 1e-12);
    }
}
