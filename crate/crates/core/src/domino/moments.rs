//! Noisy first and second moments of string observables on one window.

use nalgebra::{DMatrix, DVector};

use super::observable::DominoObservable;
use super::sector::TwoDwState;
use super::strings::{Boundary, StringEngine};
use crate::channels::PauliChannel;
use crate::error::{invalid, Error, Result};
use crate::smallsys::FiReport;

const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-6;
const VARIANCE_FLOOR: f64 = 1e-14;
const RIDGE: f64 = 1e-10;

/// Transverse dual eigenvalue of a channel whose `X` and `Y` letters decay alike.
pub fn transverse_lambda(noise: &PauliChannel) -> Result<f64> {
    noise.transverse_eigenvalue().ok_or_else(|| {
        Error::UnsupportedNoise("the sector fast path needs equal X and Y decay".into())
    })
}

/// Noiseless expectations of a fixed string family and all pairwise products.
///
/// Products of strings sharing the same site angles are again strings, on
/// the symmetric difference of their supports, so the table stays valid for
/// every channel with equal `X` and `Y` decay.
#[derive(Clone, Debug)]
pub(crate) struct StringTable {
    theta: f64,
    lengths: Vec<i32>,
    e: DVector<f64>,
    de: DVector<f64>,
    e_plus: DVector<f64>,
    e_minus: DVector<f64>,
    g: DMatrix<f64>,
    g_len: DMatrix<i32>,
}

/// Noisy means, slopes and covariance of the strings in a [`StringTable`].
#[derive(Clone, Debug)]
pub(crate) struct NoisyMoments {
    pub theta: f64,
    pub mean: DVector<f64>,
    pub slope: DVector<f64>,
    pub fd_slope: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl StringTable {
    /// `strings` are window-local inclusive intervals, `phases` window-local angles.
    pub(crate) fn build(
        state: &TwoDwState,
        phases: &[f64],
        strings: &[(usize, usize)],
        theta: f64,
    ) -> Self {
        let bnd: Vec<Boundary> = strings
            .iter()
            .map(|&(a, b)| Boundary::interval(a, b))
            .collect();
        let m = bnd.len();
        let engine = StringEngine::new(state, phases, theta);
        let plus = StringEngine::new(state, phases, theta + FD_STEP);
        let minus = StringEngine::new(state, phases, theta - FD_STEP);
        let mut e = DVector::zeros(m);
        let mut de = DVector::zeros(m);
        let mut e_plus = DVector::zeros(m);
        let mut e_minus = DVector::zeros(m);
        for (k, s) in bnd.iter().enumerate() {
            (e[k], de[k]) = engine.expectation(s);
            e_plus[k] = plus.expectation(s).0;
            e_minus[k] = minus.expectation(s).0;
        }
        let mut g = DMatrix::zeros(m, m);
        let mut g_len = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let d = bnd[a]
                    .xor(&bnd[b])
                    .expect("two intervals differ by at most two intervals");
                let v = engine.expectation(&d).0;
                g[(a, b)] = v;
                g[(b, a)] = v;
                g_len[(a, b)] = d.weight() as i32;
                g_len[(b, a)] = d.weight() as i32;
            }
        }
        Self {
            theta,
            lengths: bnd.iter().map(|b| b.weight() as i32).collect(),
            e,
            de,
            e_plus,
            e_minus,
            g,
            g_len,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.lengths.len()
    }

    pub(crate) fn noisy(&self, lambda: f64) -> NoisyMoments {
        let m = self.len();
        let pw = |l: i32| lambda.powi(l);
        let scale = DVector::from_iterator(m, self.lengths.iter().map(|&l| pw(l)));
        let mean = self.e.component_mul(&scale);
        let mut cov = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let v = pw(self.g_len[(a, b)]) * self.g[(a, b)] - mean[a] * mean[b];
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        NoisyMoments {
            theta: self.theta,
            slope: self.de.component_mul(&scale),
            fd_slope: (&self.e_plus - &self.e_minus).component_mul(&scale) / (2.0 * FD_STEP),
            mean,
            cov,
        }
    }
}

impl NoisyMoments {
    /// Slope and variance of `sum_k b_k S_k`.
    pub(crate) fn slope_and_variance(&self, b: &DVector<f64>) -> (f64, f64) {
        (b.dot(&self.slope), b.dot(&(&self.cov * b)))
    }

    pub(crate) fn report(&self, b: &DVector<f64>) -> Result<FiReport> {
        let mean = b.dot(&self.mean);
        let (slope, variance) = self.slope_and_variance(b);
        let fd_slope = b.dot(&self.fd_slope);
        let scale = 1.0_f64.max(mean.abs()).max(b.abs().sum());
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
            theta: self.theta,
            mean,
            slope,
            fd_slope,
            variance,
            fi: slope * slope / variance,
            qfi: None,
        })
    }

    /// `(V + eps I)^{-1} s`, the coefficients maximizing `(b.s)^2 / (b.V b)`.
    pub(crate) fn rayleigh(&self) -> Result<DVector<f64>> {
        let m = self.slope.len();
        if m == 0 {
            return Err(invalid("no strings to combine"));
        }
        let eps = RIDGE * self.cov.trace() / m as f64;
        let mut v = self.cov.clone();
        for k in 0..m {
            v[(k, k)] += eps;
        }
        let chol = v.cholesky().ok_or(Error::DegenerateObservable(eps))?;
        Ok(chol.solve(&self.slope))
    }
}

/// Moment FI of `obs` on a single window state at `theta`.
///
/// Every string of `obs` must lie inside the state's window.
pub fn window_moment_fi(
    state: &TwoDwState,
    obs: &DominoObservable,
    noise: &PauliChannel,
    theta: f64,
) -> Result<FiReport> {
    let lambda = transverse_lambda(noise)?;
    let (lo, hi) = state.window();
    if obs.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: obs.n_qubits(),
        });
    }
    let mut strings = Vec::with_capacity(obs.terms().len());
    for t in obs.terms() {
        if t.first < lo || t.last > hi {
            return Err(invalid(format!(
                "string {}..={} leaves the window {lo}..={hi}",
                t.first, t.last
            )));
        }
        strings.push((t.first - lo, t.last - lo));
    }
    let table = StringTable::build(state, &obs.phases()[lo..=hi], &strings, theta);
    let b = DVector::from_iterator(strings.len(), obs.terms().iter().map(|t| t.coeff));
    table.noisy(lambda).report(&b)
}
