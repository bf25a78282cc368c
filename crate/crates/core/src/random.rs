//! Seeded random matrices and states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| gaussian(rng))
}

/// Hermitian part of a Ginibre matrix.
pub fn hermitian(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = ginibre(d, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Haar-distributed unitary from the phase-corrected QR decomposition.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let qr = ginibre(d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Uniformly random unit vector.
pub fn unit_vector(d: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(d, |_, _| gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Random mixed state `G G^dagger / tr(G G^dagger)`.
pub fn density_matrix(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = ginibre(d, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}
