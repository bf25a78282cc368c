use serde::{Deserialize, Serialize};

use super::LocalCircuit;
use crate::error::Result;
use crate::smallsys::PureState;

/// Return probability of the noiseless Loschmidt echo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoProbability {
    /// `|<0| U^dagger exp(-i theta Z) U |0>|^2`.
    pub probability: f64,
    /// `1 - probability`, accurate even when it is tiny.
    pub infidelity: f64,
}

/// Distribution of the total `Z` eigenvalue `n - 2k` in `U|0>`, indexed by `k`.
pub fn magnetization_weights(psi: &PureState) -> Vec<f64> {
    let n = psi.n_qubits();
    let mut w = vec![0.0; n + 1];
    for (x, a) in psi.amplitudes().iter().enumerate() {
        w[x.count_ones() as usize] += a.norm_sqr();
    }
    w
}

/// Echo probability at offset `theta_tilde`.
///
/// The phase `exp(-i theta Z)` is diagonal, so the overlap depends only on
/// the weight distribution `w_k`; the infidelity is evaluated as
/// `sum_{k,k'} w_k w_k' 2 sin^2(theta (z_k - z_k') / 2)`.
pub fn echo_probability(circuit: &LocalCircuit, theta_tilde: f64) -> Result<EchoProbability> {
    let psi = circuit.prepare()?;
    let n = psi.n_qubits();
    let w = magnetization_weights(&psi);
    let mut infidelity = 0.0;
    for (k, wk) in w.iter().enumerate() {
        for (l, wl) in w.iter().enumerate().skip(k + 1) {
            let dz = weight_z(n, k) - weight_z(n, l);
            infidelity += 2.0 * wk * wl * 2.0 * (0.5 * theta_tilde * dz).sin().powi(2);
        }
    }
    Ok(EchoProbability {
        probability: 1.0 - infidelity,
        infidelity,
    })
}

/// Noiseless QFI `4 Var(Z)` of `U|0>`, the curvature of the echo.
pub fn pure_state_qfi(circuit: &LocalCircuit) -> Result<f64> {
    let psi = circuit.prepare()?;
    let n = psi.n_qubits();
    let w = magnetization_weights(&psi);
    let mean: f64 = w
        .iter()
        .enumerate()
        .map(|(k, wk)| wk * weight_z(n, k))
        .sum();
    let second: f64 = w
        .iter()
        .enumerate()
        .map(|(k, wk)| wk * weight_z(n, k).powi(2))
        .sum();
    Ok(4.0 * (second - mean * mean))
}

/// Total `Z` of a basis state with `k` ones.
fn weight_z(n: usize, k: usize) -> f64 {
    n as f64 - 2.0 * k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallsys::total_z;
    use nalgebra::DVector;
    use num_complex::Complex64;

    #[test]
    fn matches_direct_overlap() {
        let c = LocalCircuit::random_brickwork(6, 2, 3).unwrap();
        let psi = c.prepare().unwrap();
        for theta in [0.3, 0.05, 1e-3] {
            let rotated: DVector<Complex64> = DVector::from_iterator(
                64,
                psi.amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(x, a)| a * Complex64::from_polar(1.0, -theta * total_z(6, x))),
            );
            let direct = psi.amplitudes().dotc(&rotated).norm_sqr();
            let e = echo_probability(&c, theta).unwrap();
            assert!((e.probability - direct).abs() < 1e-13);
            assert!((e.probability + e.infidelity - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn small_angle_curvature() {
        let c = LocalCircuit::random_brickwork(6, 2, 4).unwrap();
        let f = pure_state_qfi(&c).unwrap();
        let t = 1e-4;
        let e = echo_probability(&c, t).unwrap();
        assert!((e.infidelity / (t * t) - f / 4.0).abs() < 1e-6 * f);
    }
}
