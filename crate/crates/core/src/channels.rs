//! Single-qubit Pauli channels composed with the sensing rotation.
//!
//! One channel round acts on every site as `rho -> N(U rho U^dagger)` with
//! `U = exp(-i theta Z)` and `N` a Pauli channel with probabilities
//! `(p_I, p_X, p_Y, p_Z)`. Dephasing is the special case `p_X = p_Y = 0`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pauli::Pauli;
use crate::smallsys::DensityOperator;

const PROB_TOL: f64 = 1e-12;

/// Rotation by `theta` followed by a Pauli channel, applied per site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    theta: f64,
    probs: [f64; 4],
}

impl PauliChannel {
    /// Probabilities are ordered `[p_I, p_X, p_Y, p_Z]`.
    pub fn new(theta: f64, probs: [f64; 4]) -> Result<Self> {
        if !theta.is_finite() {
            return Err(invalid("rotation angle must be finite"));
        }
        if probs
            .iter()
            .any(|p| !p.is_finite() || *p < -PROB_TOL || *p > 1.0 + PROB_TOL)
        {
            return Err(invalid(format!(
                "channel probabilities {probs:?} outside [0, 1]"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(invalid(format!("channel probabilities sum to {total}")));
        }
        Ok(Self {
            theta,
            probs: probs.map(|p| p.clamp(0.0, 1.0)),
        })
    }

    /// `Z` error with probability `p` after the rotation.
    pub fn dephasing(p: f64, theta: f64) -> Result<Self> {
        Self::new(theta, [1.0 - p, 0.0, 0.0, p])
    }

    /// Each of `X`, `Y`, `Z` with probability `q / 3`.
    pub fn depolarizing(q: f64, theta: f64) -> Result<Self> {
        Self::new(theta, [1.0 - q, q / 3.0, q / 3.0, q / 3.0])
    }

    pub fn noiseless(theta: f64) -> Self {
        Self {
            theta,
            probs: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            probs: self.probs,
        }
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    /// Pauli-transfer eigenvalues `[lambda_X, lambda_Y, lambda_Z]` of the noise part.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let [pi, px, py, pz] = self.probs;
        [pi + px - py - pz, pi - px + py - pz, pi - px - py + pz]
    }

    pub fn letter_eigenvalue(&self, letter: Pauli) -> f64 {
        let [lx, ly, lz] = self.eigenvalues();
        match letter {
            Pauli::X => lx,
            Pauli::Y => ly,
            Pauli::Z => lz,
        }
    }

    /// `p_Z` when the noise is pure dephasing.
    pub fn dephasing_strength(&self) -> Option<f64> {
        let [_, px, py, pz] = self.probs;
        (px == 0.0 && py == 0.0).then_some(pz)
    }

    /// The common `X`/`Y` eigenvalue, or `None` when the two differ.
    pub fn transverse_eigenvalue(&self) -> Option<f64> {
        let [lx, ly, _] = self.eigenvalues();
        ((lx - ly).abs() <= 1e-14).then_some(lx)
    }

    /// Single-site Kraus operators `sqrt(p_k) sigma_k U`.
    pub fn kraus(&self) -> Vec<Matrix2<Complex64>> {
        let u = Matrix2::new(
            Complex64::from_polar(1.0, -self.theta),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, self.theta),
        );
        let mut ops = vec![u * Complex64::new(self.probs[0].sqrt(), 0.0)];
        for (k, letter) in Pauli::ALL.iter().enumerate() {
            if self.probs[k + 1] > 0.0 {
                ops.push(letter.matrix() * u * Complex64::new(self.probs[k + 1].sqrt(), 0.0));
            }
        }
        ops
    }

    /// Applies only the Pauli-noise part to one site of a density matrix.
    pub(crate) fn noise_site(&self, m: &mut DMatrix<Complex64>, site: usize) {
        let [pi, px, py, pz] = self.probs;
        if px == 0.0 && py == 0.0 && pz == 0.0 {
            return;
        }
        let dim = m.nrows();
        let bit = 1usize << site;
        for y in 0..dim {
            if y & bit != 0 {
                continue;
            }
            let y1 = y | bit;
            for x in 0..dim {
                if x & bit != 0 {
                    continue;
                }
                let x1 = x | bit;
                // Block of four entries related by flipping `site` on both indices.
                let (a00, a01, a10, a11) = (m[(x, y)], m[(x, y1)], m[(x1, y)], m[(x1, y1)]);
                // Diagonal-in-site entries keep the Z sign, off-diagonal ones flip it.
                let same = pi + pz;
                let same_flip = px + py;
                let diff = pi - pz;
                let diff_flip = px - py;
                m[(x, y)] = same * a00 + same_flip * a11;
                m[(x1, y1)] = same * a11 + same_flip * a00;
                m[(x, y1)] = diff * a01 + diff_flip * a10;
                m[(x1, y)] = diff * a10 + diff_flip * a01;
            }
        }
    }

    /// Applies the noise part to every site.
    pub(crate) fn noise_all(&self, m: &mut DMatrix<Complex64>, n: usize) {
        for s in 0..n {
            self.noise_site(m, s);
        }
    }
}

/// One full channel round (rotation then noise) on every site.
pub fn apply_channel(rho: &DensityOperator, ch: &PauliChannel) -> DensityOperator {
    let n = rho.n_qubits();
    let mut m = rho.matrix().clone();
    crate::smallsys::rotate_z_in_place(&mut m, n, ch.theta());
    ch.noise_all(&mut m, n);
    DensityOperator::from_matrix_unchecked(n, m)
}

/// Noise model as written in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Noiseless,
    Dephasing { p: f64 },
    Depolarizing { p: f64 },
    Pauli { px: f64, py: f64, pz: f64 },
}

impl NoiseModel {
    pub fn channel(&self, theta: f64) -> Result<PauliChannel> {
        match *self {
            NoiseModel::Noiseless => Ok(PauliChannel::noiseless(theta)),
            NoiseModel::Dephasing { p } => PauliChannel::dephasing(p, theta),
            NoiseModel::Depolarizing { p } => PauliChannel::depolarizing(p, theta),
            NoiseModel::Pauli { px, py, pz } => {
                PauliChannel::new(theta, [1.0 - px - py - pz, px, py, pz])
            }
        }
    }

    /// The dephasing strength when the model is pure dephasing.
    pub fn dephasing_p(&self) -> Option<f64> {
        match *self {
            NoiseModel::Dephasing { p } => Some(p),
            NoiseModel::Noiseless => Some(0.0),
            _ => None,
        }
    }
}

/// Inputs to the dephasing QFI upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub n_qubits: usize,
    pub p: f64,
}

/// Upper bound `4 N / (1 - (1 - 2p)^2)` on the QFI of `N` dephased qubits.
pub fn dephasing_qfi_bound(spec: &BoundSpec) -> Result<f64> {
    Ok(spec.n_qubits as f64 * per_qubit_bound(spec.p)?)
}

/// The dephasing bound divided by the number of qubits.
pub fn per_qubit_bound(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!(
            "dephasing bound needs 0 < p < 0.5, got {p}"
        )));
    }
    let lam = 1.0 - 2.0 * p;
    Ok(4.0 / (1.0 - lam * lam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{embed_site_op, random_density, rng};
    use proptest::prelude::*;

    #[test]
    fn bound_values() {
        assert!((per_qubit_bound(0.1).unwrap() - 100.0 / 9.0).abs() < 1e-12);
        assert!((per_qubit_bound(0.01).unwrap() - 10000.0 / 99.0).abs() < 1e-12);
        let total = dephasing_qfi_bound(&BoundSpec {
            n_qubits: 200,
            p: 0.1,
        })
        .unwrap();
        assert!((total - 20000.0 / 9.0).abs() < 1e-9);
        assert!(per_qubit_bound(0.0).is_err());
        assert!(per_qubit_bound(0.5).is_err());
    }

    #[test]
    fn eigenvalues_of_standard_channels() {
        let d = PauliChannel::dephasing(0.2, 0.0).unwrap();
        assert!((d.transverse_eigenvalue().unwrap() - 0.6).abs() < 1e-15);
        let q = PauliChannel::depolarizing(0.3, 0.0).unwrap();
        let [lx, ly, lz] = q.eigenvalues();
        for l in [lx, ly, lz] {
            assert!((l - (1.0 - 0.4)).abs() < 1e-15);
        }
        let skew = PauliChannel::new(0.0, [0.9, 0.1, 0.0, 0.0]).unwrap();
        assert!(skew.transverse_eigenvalue().is_none());
    }

    #[test]
    fn invalid_probabilities_rejected() {
        assert!(PauliChannel::new(0.0, [0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(PauliChannel::new(0.0, [0.5, 0.2, 0.2, 0.2]).is_err());
        assert!(PauliChannel::dephasing(1.2, 0.0).is_err());
    }

    #[test]
    fn noise_model_deserializes() {
        let m: NoiseModel = serde_json::from_str(r#"{"kind":"dephasing","p":0.01}"#).unwrap();
        assert_eq!(m, NoiseModel::Dephasing { p: 0.01 });
        assert_eq!(m.dephasing_p(), Some(0.01));
    }

    proptest! {
        #[test]
        fn in_place_channel_matches_kraus(
            seed in 0u64..500,
            theta in -2.0f64..2.0,
            w in proptest::collection::vec(0.0f64..1.0, 4),
        ) {
            let total: f64 = w.iter().sum::<f64>() + 1e-3;
            let probs = [(w[0] + 1e-3) / total, w[1] / total, w[2] / total, w[3] / total];
            let ch = PauliChannel::new(theta, probs).unwrap();
            let n = 3;
            let mut r = rng(seed);
            let rho = random_density(n, &mut r);
            let mut expect = rho.clone();
            for s in 0..n {
                let mut acc = DMatrix::zeros(8, 8);
                for k in ch.kraus() {
                    let e = embed_site_op(n, s, &k);
                    acc += &e * &expect * e.adjoint();
                }
                expect = acc;
            }
            let got = apply_channel(&DensityOperator::from_matrix_unchecked(n, rho), &ch);
            prop_assert!((got.matrix() - expect).norm() < 1e-12);
        }
    }
}
