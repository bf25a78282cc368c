use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{hermiticity_defect, Observable, SensingFamily};
use crate::error::{Error, Result};

/// Eigenvalue pairs whose sum falls below this are treated as outside the support.
const SUPPORT_TOL: f64 = 1e-12;
const VARIANCE_FLOOR: f64 = 1e-14;
const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-6;

/// Method-of-moments estimate at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiReport {
    pub theta: f64,
    pub mean: f64,
    pub slope: f64,
    pub fd_slope: f64,
    pub variance: f64,
    pub fi: f64,
    pub qfi: Option<f64>,
}

impl FiReport {
    pub fn ratio_to_qfi(&self) -> Option<f64> {
        self.qfi.map(|q| self.fi / q)
    }
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    let defect = hermiticity_defect(m);
    if defect > 1e-10 * m.norm().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigen-decomposition of `rho` and `d rho` expressed in that eigenbasis.
fn eigen_frame(
    rho: &DMatrix<Complex64>,
    drho: &DMatrix<Complex64>,
) -> Result<(Vec<f64>, DMatrix<Complex64>, DMatrix<Complex64>)> {
    if rho.shape() != drho.shape() || rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: drho.nrows(),
        });
    }
    check_hermitian(rho)?;
    check_hermitian(drho)?;
    let eig = super::hermitian_eigen(rho)?;
    let v = eig.eigenvectors;
    let d = v.adjoint() * drho * &v;
    Ok((eig.eigenvalues.iter().copied().collect(), v, d))
}

/// Quantum Fisher information from the symmetric logarithmic derivative.
pub fn qfi_sld(rho: &DMatrix<Complex64>, drho: &DMatrix<Complex64>) -> Result<f64> {
    let (lam, _, d) = eigen_frame(rho, drho)?;
    let mut f = 0.0;
    for j in 0..lam.len() {
        for k in 0..lam.len() {
            let s = lam[j] + lam[k];
            if s > SUPPORT_TOL {
                f += 2.0 * d[(j, k)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// The symmetric logarithmic derivative operator itself.
pub fn sld_operator(
    rho: &DMatrix<Complex64>,
    drho: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let (lam, v, mut d) = eigen_frame(rho, drho)?;
    for j in 0..lam.len() {
        for k in 0..lam.len() {
            let s = lam[j] + lam[k];
            d[(j, k)] = if s > SUPPORT_TOL {
                d[(j, k)] * (2.0 / s)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
    }
    let l = &v * d * v.adjoint();
    Ok((&l + l.adjoint()) * Complex64::new(0.5, 0.0))
}

/// QFI of a sensing family at `theta`.
pub fn qfi(family: &SensingFamily, theta: f64) -> Result<f64> {
    qfi_sld(family.state(theta).matrix(), &family.derivative(theta))
}

/// `(d<O>/d theta)^2 / Var(O)` at `theta`, with a finite-difference check of the slope.
pub fn moment_fi<O: Observable + ?Sized>(
    obs: &O,
    family: &SensingFamily,
    theta: f64,
) -> Result<FiReport> {
    let rho = family.state(theta);
    let mean = obs.expectation(rho.matrix())?;
    let second = obs.second_moment(rho.matrix())?;
    let slope = obs.expectation(&family.derivative(theta))?;
    let variance = second - mean * mean;
    let plus = obs.expectation(family.state(theta + FD_STEP).matrix())?;
    let minus = obs.expectation(family.state(theta - FD_STEP).matrix())?;
    let fd_slope = (plus - minus) / (2.0 * FD_STEP);
    let scale = 1.0_f64.max(mean.abs()).max(second.abs().sqrt());
    if (slope - fd_slope).abs() > FD_REL_TOL * slope.abs().max(fd_slope.abs()) + 1e-9 * scale {
        return Err(Error::DerivativeMismatch {
            analytic: slope,
            finite_difference: fd_slope,
        });
    }
    if variance < VARIANCE_FLOOR {
        return Err(Error::DegenerateObservable(variance));
    }
    Ok(FiReport {
        theta,
        mean,
        slope,
        fd_slope,
        variance,
        fi: slope * slope / variance,
        qfi: None,
    })
}

/// Classical Fisher information of the POVM `effects` at `theta`.
pub fn classical_fi(
    effects: &[DMatrix<Complex64>],
    family: &SensingFamily,
    theta: f64,
) -> Result<f64> {
    let dim = family.initial().matrix().nrows();
    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for e in effects {
        if e.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.nrows(),
            });
        }
        check_hermitian(e)?;
        total += e;
    }
    let defect = (total - DMatrix::<Complex64>::identity(dim, dim)).norm();
    if defect > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "POVM effects do not sum to identity (defect {defect:.3e})"
        )));
    }
    let rho = family.state(theta);
    let drho = family.derivative(theta);
    let mut f = 0.0;
    for e in effects {
        let p = (e * rho.matrix()).trace().re;
        let dp = (e * &drho).trace().re;
        if p > SUPPORT_TOL {
            f += dp * dp / p;
        }
    }
    Ok(f)
}

/// Classical Fisher information of a computational-basis measurement
/// (after the family's readout unitary, if any).
pub fn computational_basis_fi(family: &SensingFamily, theta: f64) -> Result<f64> {
    let rho = family.state(theta);
    let drho = family.derivative(theta);
    Ok((0..drho.nrows())
        .filter_map(|x| {
            let p = rho.matrix()[(x, x)].re;
            (p > SUPPORT_TOL).then(|| drho[(x, x)].re.powi(2) / p)
        })
        .sum())
}
