//! Exact dynamics of a single domain wall released from the chain edge.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;

use super::sector::TwoDwState;
use crate::error::{invalid, Error, Result};
use crate::smallsys::PureState;

/// Probability allowed on the last two reachable prefix lengths before the
/// wavefront counts as having hit the far end of the chain.
pub const BOUNDARY_LIMIT: f64 = 0.01;

/// `(|0...0> + sum_i a_i |1_i>) / sqrt(2)`, where `|1_i>` has ones on the
/// first `i` sites.
///
/// The prefix amplitudes are normalized on their own, `sum_i |a_i|^2 = 1`,
/// so the vacuum carries exactly half of the weight.
#[derive(Clone, Debug, PartialEq)]
pub struct OneDwState {
    n: usize,
    time: f64,
    a: Vec<Complex64>,
}

impl OneDwState {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn vacuum_amplitude(&self) -> Complex64 {
        Complex64::new(FRAC_1_SQRT_2, 0.0)
    }

    /// `a_1, ..., a_n`; the last entry is always zero because the final site never flips.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.a
    }

    /// `a_i` for a prefix of `i` ones, `1 <= i <= n`.
    pub fn amplitude(&self, i: usize) -> Complex64 {
        if i == 0 || i > self.n {
            return Complex64::new(0.0, 0.0);
        }
        self.a[i - 1]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.a.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `sum_i i |a_i|^2`.
    pub fn mean_position(&self) -> f64 {
        self.a
            .iter()
            .enumerate()
            .map(|(k, z)| (k + 1) as f64 * z.norm_sqr())
            .sum()
    }

    /// Weight on the prefix lengths `n - 2` and beyond.
    pub fn boundary_mass(&self) -> f64 {
        self.a
            .iter()
            .skip(self.n.saturating_sub(3))
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Weight on prefix lengths `lo ..= hi`.
    pub fn window_mass(&self, lo: usize, hi: usize) -> f64 {
        (lo.max(1)..=hi.min(self.n))
            .map(|i| self.a[i - 1].norm_sqr())
            .sum()
    }

    #[cfg(test)]
    pub(crate) fn set_amplitudes_for_test(&mut self, mut a: Vec<Complex64>) {
        a.push(Complex64::new(0.0, 0.0));
        self.a = a;
    }

    /// The same state in the block representation, with the whole chain as window.
    pub fn to_two_dw(&self) -> TwoDwState {
        let prefixes = self.a.iter().enumerate().map(|(k, z)| (0, k, *z));
        TwoDwState::from_blocks(self.n, 0, self.n - 1, 0, self.time, prefixes)
    }

    /// Dense state vector; site `k` is bit `k`.
    pub fn to_pure_state(&self) -> Result<PureState> {
        let dim = crate::pauli::dense_dim(self.n)?;
        let mut amps = DVector::zeros(dim);
        amps[0] = self.vacuum_amplitude();
        for (k, z) in self.a.iter().enumerate() {
            amps[(1usize << (k + 1)) - 1] = z * FRAC_1_SQRT_2;
        }
        PureState::normalized(self.n, amps)
    }
}

/// Evolves `(|0...0> + |1_1>) / sqrt(2)` for time `t` under the domino Hamiltonian.
///
/// In the one-wall sector the Hamiltonian is a uniform hopping chain over the
/// prefix lengths `1 ..= n - 1`, diagonalized by the open-chain sine modes
/// `phi_k(i) = sqrt(2 / n) sin(k pi i / n)` with energies `2 cos(k pi / n)`.
pub fn one_dw_evolve(n: usize, t: f64) -> Result<OneDwState> {
    if n < 3 {
        return Err(invalid(format!(
            "a domino chain needs at least 3 sites, got {n}"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    let d = n - 1;
    let scale = (2.0 / n as f64).sqrt();
    let modes: Vec<(f64, Complex64)> = (1..=d)
        .map(|k| {
            let q = k as f64 * PI / n as f64;
            (
                q,
                Complex64::from_polar(scale * q.sin(), -2.0 * q.cos() * t),
            )
        })
        .collect();
    let mut a: Vec<Complex64> = (1..=d)
        .map(|i| {
            modes
                .iter()
                .map(|(q, w)| w * (scale * (q * i as f64).sin()))
                .sum()
        })
        .collect();
    a.push(Complex64::new(0.0, 0.0));
    let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!("one-wall norm drifted to {norm}")));
    }
    Ok(OneDwState { n, time: t, a })
}

/// Mean wall position divided by the elapsed time.
pub fn velocity_estimate(st: &OneDwState) -> Result<f64> {
    if st.time.is_nan() || st.time <= 0.0 {
        return Err(invalid("a velocity needs a positive evolution time"));
    }
    let mass = st.boundary_mass();
    if mass > BOUNDARY_LIMIT {
        return Err(Error::Leakage {
            mass,
            limit: BOUNDARY_LIMIT,
        });
    }
    Ok(st.mean_position() / st.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domino::hamiltonian::{source_state, DominoChain};

    #[test]
    fn starts_on_the_first_site() {
        let st = one_dw_evolve(10, 0.0).unwrap();
        assert!((st.amplitude(1) - 1.0).norm() < 1e-14);
        assert!(st.amplitudes()[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn matches_full_register_evolution() {
        let n = 8;
        let st = one_dw_evolve(n, 1.5).unwrap();
        let chain = DominoChain::new(n).unwrap();
        let dense = chain.evolve(&source_state(n, &[0]).unwrap(), 1.5).unwrap();
        let want = st.to_pure_state().unwrap();
        assert!((dense.amplitudes() - want.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn norm_is_conserved_and_last_site_is_frozen() {
        let st = one_dw_evolve(30, 40.0).unwrap();
        assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
        assert_eq!(st.amplitude(30), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn ballistic_velocity() {
        let v = velocity_estimate(&one_dw_evolve(400, 20.0).unwrap()).unwrap();
        assert!((1.6..=2.4).contains(&v), "{v}");
        let x1 = one_dw_evolve(400, 40.0).unwrap().mean_position();
        let x0 = one_dw_evolve(400, 20.0).unwrap().mean_position();
        assert!((x1 / x0 - 2.0).abs() < 0.2);
    }

    #[test]
    fn velocity_preconditions() {
        assert!(velocity_estimate(&one_dw_evolve(50, 0.0).unwrap()).is_err());
        let hit = velocity_estimate(&one_dw_evolve(20, 30.0).unwrap());
        assert!(matches!(hit, Err(Error::Leakage { .. })));
    }
}
