//! Block states: a vacuum plus one contiguous run of ones inside a window.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use num_complex::Complex64;

use super::hamiltonian::interior;
use crate::chebyshev::{propagate, SymmetricOperator};
use crate::error::{invalid, Error, Result};
use crate::smallsys::PureState;

/// Largest number of block states a window may carry during evolution.
pub const MAX_SECTOR_DIM: usize = 20_000;

/// Probability on window-edge blocks above which the hard walls are no longer trusted.
pub const LEAKAGE_LIMIT: f64 = 0.01;

const NORM_TOL: f64 = 1e-8;

fn tri(i: usize, j: usize) -> usize {
    j * (j + 1) / 2 + i
}

/// `(|0...0> + sum_{i<=j} psi_{ij} |1_{i..j}>) / sqrt(2)` on a chain of `n` sites,
/// with every block inside the window `lo ..= hi`.
///
/// Block amplitudes are normalized on their own. Coordinates passed to and
/// returned from the public methods are global site indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoDwState {
    n: usize,
    lo: usize,
    w: usize,
    source: usize,
    time: f64,
    psi: Vec<Complex64>,
}

impl TwoDwState {
    pub(crate) fn from_blocks(
        n: usize,
        lo: usize,
        hi: usize,
        source: usize,
        time: f64,
        blocks: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let w = hi - lo + 1;
        let mut psi = vec![Complex64::new(0.0, 0.0); w * (w + 1) / 2];
        for (i, j, z) in blocks {
            psi[tri(i - lo, j - lo)] = z;
        }
        Self {
            n,
            lo,
            w,
            source,
            time,
            psi,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Inclusive window `(lo, hi)`.
    pub fn window(&self) -> (usize, usize) {
        (self.lo, self.lo + self.w - 1)
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn vacuum_amplitude(&self) -> Complex64 {
        Complex64::new(FRAC_1_SQRT_2, 0.0)
    }

    /// Amplitude of the block with ones on sites `i ..= j`, zero outside the window.
    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        if i < self.lo || j >= self.lo + self.w || i > j {
            return Complex64::new(0.0, 0.0);
        }
        self.psi[tri(i - self.lo, j - self.lo)]
    }

    /// Window-local amplitude lookup.
    pub(crate) fn local(&self, i: usize, j: usize) -> Complex64 {
        self.psi[tri(i, j)]
    }

    /// Every block `(i, j, psi_ij)` in global coordinates.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.w).flat_map(move |j| {
            (0..=j).map(move |i| (self.lo + i, self.lo + j, self.psi[tri(i, j)]))
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Block weight touching a window edge that is not also a chain edge.
    pub fn leakage(&self) -> f64 {
        let left = self.lo > 0;
        let right = self.lo + self.w < self.n;
        self.blocks()
            .filter(|&(i, j, _)| (left && i == self.lo) || (right && j == self.lo + self.w - 1))
            .map(|(_, _, z)| z.norm_sqr())
            .sum()
    }

    pub fn check_leakage(&self, limit: f64) -> Result<()> {
        let mass = self.leakage();
        if mass > limit {
            return Err(Error::Leakage { mass, limit });
        }
        Ok(())
    }

    /// Dense state vector on the full chain.
    pub fn to_pure_state(&self) -> Result<PureState> {
        let dim = crate::pauli::dense_dim(self.n)?;
        let mut amps = DVector::zeros(dim);
        amps[0] = self.vacuum_amplitude();
        for (i, j, z) in self.blocks() {
            amps[((1usize << (j + 1)) - 1) & !((1usize << i) - 1)] = z * FRAC_1_SQRT_2;
        }
        PureState::normalized(self.n, amps)
    }
}

/// The domino Hamiltonian restricted to blocks inside one window.
///
/// A block end moves by one site when the site it crosses may flip in the
/// full chain and the move stays inside the window; a single-site block
/// cannot shrink away.
struct SectorHamiltonian {
    n: usize,
    lo: usize,
    w: usize,
}

impl SectorHamiltonian {
    fn flippable(&self, k: usize) -> bool {
        interior(self.lo + k, self.n)
    }
}

impl SymmetricOperator for SectorHamiltonian {
    fn dim(&self) -> usize {
        self.w * (self.w + 1) / 2
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for j in 0..self.w {
            for i in 0..=j {
                let mut acc = Complex64::new(0.0, 0.0);
                if i >= 1 && self.flippable(i - 1) {
                    acc += x[tri(i - 1, j)];
                }
                if i < j && self.flippable(i) {
                    acc += x[tri(i + 1, j)];
                }
                if j + 1 < self.w && self.flippable(j + 1) {
                    acc += x[tri(i, j + 1)];
                }
                if i < j && self.flippable(j) {
                    acc += x[tri(i, j - 1)];
                }
                y[tri(i, j)] = acc;
            }
        }
    }

    fn spectral_bound(&self) -> f64 {
        4.0
    }
}

/// Evolves `|+>_source (x) |0...0>` for time `t`, keeping every block inside
/// the inclusive `window`.
pub fn two_dw_evolve(
    n: usize,
    window: (usize, usize),
    source: usize,
    t: f64,
) -> Result<TwoDwState> {
    let (lo, hi) = window;
    if lo > hi || hi >= n {
        return Err(invalid(format!(
            "window {lo}..={hi} does not fit a chain of {n} sites"
        )));
    }
    if source < lo || source > hi {
        return Err(invalid(format!(
            "source {source} outside window {lo}..={hi}"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    let w = hi - lo + 1;
    let dim = w * (w + 1) / 2;
    if dim > MAX_SECTOR_DIM {
        return Err(Error::TooLarge(w));
    }
    let h = SectorHamiltonian { n, lo, w };
    let mut start = vec![Complex64::new(0.0, 0.0); dim];
    start[tri(source - lo, source - lo)] = Complex64::new(1.0, 0.0);
    let psi = propagate(&h, &start, t)?;
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Numerical(format!("block norm drifted to {norm}")));
    }
    Ok(TwoDwState {
        n,
        lo,
        w,
        source,
        time: t,
        psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domino::hamiltonian::{source_state, DominoChain};
    use crate::domino::one_dw::one_dw_evolve;

    #[test]
    fn zero_time_is_the_source_block() {
        let st = two_dw_evolve(12, (2, 9), 5, 0.0).unwrap();
        assert_eq!(st.amplitude(5, 5), Complex64::new(1.0, 0.0));
        assert!((st.norm_sqr() - 1.0).abs() < 1e-14);
        assert_eq!(st.leakage(), 0.0);
    }

    #[test]
    fn matches_full_register_on_whole_chain() {
        // Window spanning the whole 12-site chain with the source on the sixth site.
        let n = 12;
        let st = two_dw_evolve(n, (0, n - 1), 5, 1.2).unwrap();
        let dense = DominoChain::new(n)
            .unwrap()
            .evolve(&source_state(n, &[5]).unwrap(), 1.2)
            .unwrap();
        assert!((dense.amplitudes() - st.to_pure_state().unwrap().amplitudes()).norm() < 1e-8);
    }

    #[test]
    fn hard_walls_match_a_padded_chain() {
        // Window 3..=8 inside a long chain behaves like the chain 2..=9 whose end sites never flip.
        let st = two_dw_evolve(40, (3, 8), 5, 2.5).unwrap();
        let dense = DominoChain::new(8)
            .unwrap()
            .evolve(&source_state(8, &[3]).unwrap(), 2.5)
            .unwrap();
        for (i, j, z) in st.blocks() {
            let x = ((1usize << (j - 1)) - 1) & !((1usize << (i - 2)) - 1);
            assert!((dense.amplitudes()[x] - z * FRAC_1_SQRT_2).norm() < 1e-10);
        }
        assert!(st.leakage() > 0.01);
        assert!(st.check_leakage(LEAKAGE_LIMIT).is_err());
    }

    #[test]
    fn edge_source_reduces_to_one_wall() {
        let n = 60;
        let one = one_dw_evolve(n, 9.0).unwrap();
        let two = two_dw_evolve(n, (0, n - 1), 0, 9.0).unwrap();
        for i in 1..n {
            assert!((one.amplitude(i) - two.amplitude(0, i - 1)).norm() < 1e-10);
        }
        assert!((two.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(two_dw_evolve(10, (3, 2), 3, 1.0).is_err());
        assert!(two_dw_evolve(10, (0, 5), 7, 1.0).is_err());
        assert!(matches!(
            two_dw_evolve(400, (0, 299), 100, 1.0),
            Err(Error::TooLarge(300))
        ));
    }
}
