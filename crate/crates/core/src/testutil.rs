use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::smallsys::PureState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `1 (x) ... (x) u (x) ... (x) 1` built with Kronecker products; site `s` is bit `s`.
pub fn embed_site_op(n: usize, site: usize, u: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(2, 2);
    let local = DMatrix::from_iterator(2, 2, u.iter().copied());
    let mut m = DMatrix::<Complex64>::identity(1, 1);
    for s in (0..n).rev() {
        m = m.kronecker(if s == site { &local } else { &id });
    }
    m
}

pub fn random_density(n: usize, r: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    crate::random::density_matrix(1 << n, r)
}

pub fn random_pure(n: usize, r: &mut ChaCha8Rng) -> PureState {
    PureState::from_amplitudes(n, crate::random::unit_vector(1 << n, r)).unwrap()
}

pub fn random_unitary2(r: &mut ChaCha8Rng) -> Matrix2<Complex64> {
    let u = crate::random::haar_unitary(2, r);
    Matrix2::from_iterator(u.iter().copied())
}

pub fn random_unitary4(r: &mut ChaCha8Rng) -> Matrix4<Complex64> {
    let u = crate::random::haar_unitary(4, r);
    Matrix4::from_iterator(u.iter().copied())
}
