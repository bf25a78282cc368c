use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{rotate_z_in_place, total_z, DensityOperator};
use crate::channels::PauliChannel;
use crate::error::{Error, Result};

/// The one-parameter family `rho_theta = N(U_theta rho U_theta^dagger)`.
///
/// An optional readout unitary `V` is applied afterwards, so that
/// [`SensingFamily::state`] returns `V rho_theta V^dagger`.
#[derive(Clone, Debug)]
pub struct SensingFamily {
    initial: DensityOperator,
    noise: PauliChannel,
    readout: Option<DMatrix<Complex64>>,
}

impl SensingFamily {
    /// The rotation angle stored in `noise` is ignored.
    pub fn new(initial: DensityOperator, noise: PauliChannel) -> Self {
        Self {
            initial,
            noise: noise.with_theta(0.0),
            readout: None,
        }
    }

    pub fn with_readout(mut self, v: DMatrix<Complex64>) -> Result<Self> {
        let dim = self.initial.matrix().nrows();
        if v.nrows() != dim || v.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.nrows(),
            });
        }
        let defect = (v.adjoint() * &v - DMatrix::<Complex64>::identity(dim, dim)).norm();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "readout is not unitary (defect {defect:.3e})"
            )));
        }
        self.readout = Some(v);
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.initial.n_qubits()
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn noise(&self) -> &PauliChannel {
        &self.noise
    }

    pub fn state(&self, theta: f64) -> DensityOperator {
        let n = self.n_qubits();
        let mut m = self.initial.matrix().clone();
        rotate_z_in_place(&mut m, n, theta);
        self.noise.noise_all(&mut m, n);
        DensityOperator::from_matrix_unchecked(n, self.read(m))
    }

    /// `d rho_theta / d theta`, computed as `N(-i [Z_tot, U rho U^dagger])`.
    pub fn derivative(&self, theta: f64) -> DMatrix<Complex64> {
        let n = self.n_qubits();
        let mut m = self.initial.matrix().clone();
        rotate_z_in_place(&mut m, n, theta);
        let dim = m.nrows();
        for y in 0..dim {
            let zy = total_z(n, y);
            for x in 0..dim {
                m[(x, y)] *= Complex64::new(0.0, -(total_z(n, x) - zy));
            }
        }
        self.noise.noise_all(&mut m, n);
        self.read(m)
    }

    fn read(&self, m: DMatrix<Complex64>) -> DMatrix<Complex64> {
        match &self.readout {
            Some(v) => v * m * v.adjoint(),
            None => m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::apply_channel;
    use crate::testutil::{random_density, rng};

    #[test]
    fn state_matches_channel_application() {
        let mut r = rng(1);
        let rho = DensityOperator::new(3, random_density(3, &mut r)).unwrap();
        let ch = PauliChannel::new(0.0, [0.8, 0.05, 0.1, 0.05]).unwrap();
        let fam = SensingFamily::new(rho.clone(), ch);
        let a = fam.state(0.41);
        let b = apply_channel(&rho, &ch.with_theta(0.41));
        assert!((a.matrix() - b.matrix()).norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut r = rng(2);
        let rho = DensityOperator::new(3, random_density(3, &mut r)).unwrap();
        let fam = SensingFamily::new(rho, PauliChannel::dephasing(0.2, 0.0).unwrap());
        let h = 1e-5;
        let fd = (fam.state(0.3 + h).into_matrix() - fam.state(0.3 - h).into_matrix())
            / Complex64::new(2.0 * h, 0.0);
        assert!((fam.derivative(0.3) - fd).norm() < 1e-8);
    }
}
