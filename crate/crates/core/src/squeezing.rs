//! Spin-squeezed states in the permutation-symmetric subspace.
//!
//! A [`CollectiveState`] on `n` qubits is a vector over the Dicke states
//! `|k>`, `k = 0..=n`, where `k` counts the qubits in `|1>`; the collective
//! Pauli operators `X = sum_i X_i`, `Y`, `Z` act on it as `(n+1)`-dimensional
//! tridiagonal matrices, and `Z |k> = (n - 2k) |k>`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::PauliChannel;
use crate::chebyshev::{propagate, SymmetricOperator};
use crate::error::{invalid, Error, Result};
use crate::exec::{map_cells, ExecMode};
use crate::pauli::{dense_dim, Pauli};
use crate::smallsys::{
    group_corr_max, group_corr_max_reduced, hermitian_eigen, GroupCorrelation, PureState,
};

/// Largest register handled by the collective representation.
pub const MAX_COLLECTIVE_QUBITS: usize = 4096;

/// Largest register for [`near_dicke_state`], which diagonalizes a dense matrix.
pub const MAX_NEAR_DICKE_QUBITS: usize = 512;

/// Field used for the default near-Dicke family.
pub const DEFAULT_NEAR_DICKE_FIELD: f64 = 0.1;

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state of the spin-`n/2` multiplet.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveState {
    n: usize,
    amps: Vec<Complex64>,
}

/// `sqrt(k (n - k + 1))`, the matrix element `<k-1| J_+ |k>`.
fn ladder(n: usize, k: usize) -> f64 {
    ((k * (n + 1 - k)) as f64).sqrt()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_COLLECTIVE_QUBITS {
        return Err(invalid(format!(
            "collective register size {n} outside 1..={MAX_COLLECTIVE_QUBITS}"
        )));
    }
    Ok(())
}

impl CollectiveState {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_n(n)?;
        if amps.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: amps.len(),
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("collective state has norm^2 {norm}")));
        }
        Ok(Self { n, amps })
    }

    /// The coherent state `|+>^n`.
    pub fn coherent_x(n: usize) -> Result<Self> {
        check_n(n)?;
        let ln2 = std::f64::consts::LN_2;
        let mut ln_binom = 0.0;
        let mut amps = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k > 0 {
                ln_binom += ((n + 1 - k) as f64 / k as f64).ln();
            }
            amps.push(Complex64::new(
                (0.5 * ln_binom - 0.5 * n as f64 * ln2).exp(),
                0.0,
            ));
        }
        Ok(Self { n, amps })
    }

    /// The Dicke state with `k` qubits in `|1>`.
    pub fn dicke(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        if k > n {
            return Err(invalid(format!("excitation number {k} exceeds {n}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `exp(-i theta Z)` on every site.
    pub fn rotate_z(&self, theta: f64) -> Self {
        let n = self.n as f64;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, -theta * (n - 2.0 * k as f64)))
            .collect();
        Self { n: self.n, amps }
    }

    /// `exp(-i (alpha / 2) X)` on every site, a rotation by `alpha` about the `x` axis.
    pub fn rotate_x(&self, alpha: f64) -> Result<Self> {
        let amps = propagate(&CollectiveX(self.n), &self.amps, alpha / 2.0)?;
        Ok(Self { n: self.n, amps })
    }

    /// `exp(-i t (Z / 2)^2)`.
    pub fn twist(&self, t: f64) -> Self {
        let half = self.n as f64 / 2.0;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let m = half - k as f64;
                a * Complex64::from_polar(1.0, -t * m * m)
            })
            .collect();
        Self { n: self.n, amps }
    }

    fn apply(&self, letter: Pauli) -> Vec<Complex64> {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        (0..=n)
            .map(|k| {
                // <k| J_+ |k+1> and <k| J_- |k-1>.
                let up = if k < n {
                    self.amps[k + 1] * ladder(n, k + 1)
                } else {
                    zero
                };
                let down = if k > 0 {
                    self.amps[k - 1] * ladder(n, k)
                } else {
                    zero
                };
                match letter {
                    Pauli::X => up + down,
                    Pauli::Y => -i * up + i * down,
                    Pauli::Z => self.amps[k] * (n as f64 - 2.0 * k as f64),
                }
            })
            .collect()
    }

    /// Means `<X>, <Y>, <Z>` and the symmetrized covariance matrix.
    pub fn moments(&self) -> CollectiveMoments {
        let vs = [
            self.apply(Pauli::X),
            self.apply(Pauli::Y),
            self.apply(Pauli::Z),
        ];
        let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        };
        let mean = [0, 1, 2].map(|a| dot(&self.amps, &vs[a]).re);
        let cov = Matrix3::from_fn(|a, b| dot(&vs[a], &vs[b]).re - mean[a] * mean[b]);
        CollectiveMoments {
            n: self.n,
            mean,
            cov,
        }
    }

    /// The same state as a `2^n` vector.
    pub fn to_pure_state(&self) -> Result<PureState> {
        let dim = dense_dim(self.n)?;
        let mut ln_binom = vec![0.0; self.n + 1];
        for k in 1..=self.n {
            ln_binom[k] = ln_binom[k - 1] + ((self.n + 1 - k) as f64 / k as f64).ln();
        }
        let v = DVector::from_iterator(
            dim,
            (0..dim).map(|x| {
                let k = x.count_ones() as usize;
                self.amps[k] * (-0.5 * ln_binom[k]).exp()
            }),
        );
        PureState::from_amplitudes(self.n, v)
    }

    /// Reduced state of any two qubits, with the first qubit as local bit 0.
    pub fn two_site_rdm(&self) -> Result<DMatrix<Complex64>> {
        if self.n < 2 {
            return Err(invalid("two-site reduced state needs at least two qubits"));
        }
        let mom = self.moments();
        let n = self.n as f64;
        let pairs = n * (n - 1.0);
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z].map(|p| p.matrix());
        let id = Matrix2::<Complex64>::identity();
        let kron = |a: &Matrix2<Complex64>, b: &Matrix2<Complex64>| -> Matrix4<Complex64> {
            // Local bit 0 is the low bit, so the first factor acts on the fast index.
            Matrix4::from_fn(|r, c| b[(r >> 1, c >> 1)] * a[(r & 1, c & 1)])
        };
        let mut rho = Matrix4::<Complex64>::identity();
        for a in 0..3 {
            let m = Complex64::new(mom.mean[a] / n, 0.0);
            rho += (kron(&paulis[a], &id) + kron(&id, &paulis[a])) * m;
            for b in 0..3 {
                let second = mom.cov[(a, b)] + mom.mean[a] * mom.mean[b];
                let t = (second - if a == b { n } else { 0.0 }) / pairs;
                rho += kron(&paulis[a], &paulis[b]) * Complex64::new(t, 0.0);
            }
        }
        rho *= Complex64::new(0.25, 0.0);
        Ok(DMatrix::from_fn(4, 4, |r, c| rho[(r, c)]))
    }
}

/// The collective `X` as a real symmetric operator on the multiplet.
struct CollectiveX(usize);

impl SymmetricOperator for CollectiveX {
    fn dim(&self) -> usize {
        self.0 + 1
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.0;
        for k in 0..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            if k < n {
                acc += x[k + 1] * ladder(n, k + 1);
            }
            if k > 0 {
                acc += x[k - 1] * ladder(n, k);
            }
            y[k] = acc;
        }
    }

    fn spectral_bound(&self) -> f64 {
        self.0 as f64
    }
}

/// First and second moments of the collective Pauli operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollectiveMoments {
    pub n: usize,
    pub mean: [f64; 3],
    /// `Re <A B> - <A><B>` for `A, B` in `X, Y, Z`.
    pub cov: Matrix3<f64>,
}

impl CollectiveMoments {
    /// Variance of `cos(phi) Y + sin(phi) Z`.
    pub fn transverse_variance(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        c * c * self.cov[(1, 1)] + 2.0 * s * c * self.cov[(1, 2)] + s * s * self.cov[(2, 2)]
    }

    /// The angle in the `y`-`z` plane of least variance and that variance.
    pub fn squeezed_axis(&self) -> (f64, f64) {
        let (a, b, d) = (self.cov[(1, 1)], self.cov[(1, 2)], self.cov[(2, 2)]);
        let phi = 0.5 * (2.0 * b).atan2(a - d) + std::f64::consts::FRAC_PI_2;
        let min = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
        (phi, min.max(0.0))
    }
}

/// `|+>^n` twisted for time `t`.
pub fn oat_state(n: usize, t: f64) -> Result<CollectiveState> {
    if !t.is_finite() {
        return Err(invalid("twisting time must be finite"));
    }
    Ok(CollectiveState::coherent_x(n)?.twist(t))
}

/// Squeezing parameter of the one-axis-twisted state at time `t`.
pub fn oat_xi2(n: usize, t: f64) -> Result<f64> {
    let (_, v) = oat_state(n, t)?.moments().squeezed_axis();
    Ok(v / n as f64)
}

/// Twisting time minimizing the squeezing parameter.
pub fn optimal_oat_time(n: usize) -> Result<f64> {
    check_n(n)?;
    if n < 2 {
        return Err(invalid("squeezing needs at least two qubits"));
    }
    let scale = (n as f64).powf(-2.0 / 3.0);
    let grid: Vec<f64> = (0..=160)
        .map(|i| scale * 10f64.powf(-2.0 + 3.0 * i as f64 / 160.0))
        .collect();
    let values = grid
        .iter()
        .map(|&t| oat_xi2(n, t))
        .collect::<Result<Vec<_>>>()?;
    let best = (0..grid.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(grid.len() - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if oat_xi2(n, a)? <= oat_xi2(n, b)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rotates `st` about `x` so that its least-variance transverse axis is `y`.
pub fn align_squeezing(st: &CollectiveState) -> Result<CollectiveState> {
    let (phi, _) = st.moments().squeezed_axis();
    st.rotate_x(-phi)
}

/// Thresholds for the squeezing conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqueezeThresholds {
    /// Polarization condition: `<X> >= c_x n`.
    pub c_x: f64,
    /// Direction condition: every scanned variance is at most `c_s n / xi^2`.
    pub c_s: f64,
    /// Azimuthal grid points on the Bloch sphere.
    pub azimuth: usize,
    /// Polar grid points on the Bloch sphere.
    pub polar: usize,
    /// Identity weights `alpha` mixed into each direction, with `|alpha| + |beta| = 1`.
    pub identity_weights: [f64; 3],
}

impl Default for SqueezeThresholds {
    fn default() -> Self {
        Self {
            c_x: 0.5,
            c_s: 4.0,
            azimuth: 32,
            polar: 16,
            identity_weights: [0.0, 0.25, 0.5],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeReport {
    pub n: usize,
    pub mean_x: f64,
    /// Least variance over `cos(phi) Y + sin(phi) Z`.
    pub var_y_min: f64,
    /// The minimizing `phi`.
    pub squeeze_angle: f64,
    pub xi2: f64,
    /// Variance of `Z` after aligning the squeezed axis with `y`.
    pub var_z_aligned: f64,
    /// Largest variance of `sum_i S_i` over the scanned identical single-site
    /// operators; a lower bound on the supremum over all such operators.
    pub max_dir_var: f64,
    pub polarization_ok: bool,
    pub direction_ok: bool,
    /// `(2 <X>)^2 / Var(Y)` on the aligned state without noise.
    pub fi_bound: f64,
}

/// Squeezing diagnostics of `st` under `th`.
pub fn squeeze_report(st: &CollectiveState, th: &SqueezeThresholds) -> Result<SqueezeReport> {
    if th.azimuth == 0 || th.polar == 0 {
        return Err(invalid("direction grid must be non-empty"));
    }
    let mom = st.moments();
    let n = st.n_qubits() as f64;
    let (phi, var_y_min) = mom.squeezed_axis();
    let xi2 = var_y_min / n;
    let var_z_aligned = mom.transverse_variance(phi + std::f64::consts::FRAC_PI_2);

    let mut max_dir_var = 0.0f64;
    for ip in 0..th.polar {
        let polar = std::f64::consts::PI * (ip as f64 + 0.5) / th.polar as f64;
        for ia in 0..th.azimuth {
            let az = 2.0 * std::f64::consts::PI * ia as f64 / th.azimuth as f64;
            let u =
                nalgebra::Vector3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
            let var = (u.transpose() * mom.cov * u)[(0, 0)];
            for &alpha in &th.identity_weights {
                let beta = 1.0 - alpha.abs();
                max_dir_var = max_dir_var.max(beta * beta * var);
            }
        }
    }
    for axis in 0..3 {
        max_dir_var = max_dir_var.max(mom.cov[(axis, axis)]);
    }

    let mean_x = mom.mean[0];
    Ok(SqueezeReport {
        n: st.n_qubits(),
        mean_x,
        var_y_min,
        squeeze_angle: phi,
        xi2,
        var_z_aligned,
        max_dir_var,
        polarization_ok: mean_x >= th.c_x * n,
        direction_ok: xi2 > 0.0 && max_dir_var <= th.c_s * n / xi2,
        fi_bound: if var_y_min > 0.0 {
            (2.0 * mean_x).powi(2) / var_y_min
        } else {
            f64::INFINITY
        },
    })
}

/// Moment FI of the collective `Y` on `st` rotated by `theta0` about `z` and
/// passed through the Pauli noise of `noise`.
pub fn noisy_squeeze_fi(st: &CollectiveState, noise: &PauliChannel, theta0: f64) -> Result<f64> {
    let lambda = noise.letter_eigenvalue(Pauli::Y);
    let mom = st.rotate_z(theta0).moments();
    let n = st.n_qubits() as f64;
    let slope = 2.0 * lambda * mom.mean[0];
    let second = mom.cov[(1, 1)] + mom.mean[1].powi(2);
    let variance = n + lambda * lambda * (second - n) - (lambda * mom.mean[1]).powi(2);
    if variance <= 0.0 {
        return Err(Error::DegenerateObservable(variance));
    }
    Ok(slope * slope / variance)
}

/// Ground state of `Y^2 - field X` in the multiplet.
///
/// A weak field selects a near-Dicke state with `Y` close to zero and a small
/// polarization along `x`; these states are extremely squeezed along `y`.
pub fn near_dicke_state(n: usize, field: f64) -> Result<CollectiveState> {
    check_n(n)?;
    if !field.is_finite() || field < 0.0 {
        return Err(invalid("field must be finite and non-negative"));
    }
    if n > MAX_NEAR_DICKE_QUBITS {
        return Err(Error::TooLarge(n));
    }
    let dim = n + 1;
    let column = |letter: Pauli, k: usize| {
        CollectiveState {
            n,
            amps: (0..dim)
                .map(|j| Complex64::new(if j == k { 1.0 } else { 0.0 }, 0.0))
                .collect(),
        }
        .apply(letter)
    };
    let y = DMatrix::from_fn(dim, dim, |r, c| column(Pauli::Y, c)[r]);
    let x = DMatrix::from_fn(dim, dim, |r, c| column(Pauli::X, c)[r]);
    let h = &y * &y - x * Complex64::new(field, 0.0);
    let eig = hermitian_eigen(&h)?;
    let ground = (0..dim)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .unwrap_or(0);
    let v = eig.eigenvectors.column(ground);
    // Fix the global phase so the largest amplitude is real and positive.
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    let norm = v.norm();
    CollectiveState::from_amplitudes(n, v.iter().map(|a| a * phase / norm).collect())
}

/// `max |C(A, B)|` between two single qubits of `st`.
pub fn pairwise_correlation(
    st: &CollectiveState,
    restarts: usize,
    seed: u64,
) -> Result<GroupCorrelation> {
    group_corr_max_reduced(&st.two_site_rdm()?, 1, 1, restarts, seed)
}

/// `max |C(A, B)|` between the first `size_i` qubits and the next `size_j`,
/// computed on the dense projection of `st`.
pub fn sss_violates_small_correlation(
    st: &CollectiveState,
    size_i: usize,
    size_j: usize,
    restarts: usize,
    seed: u64,
) -> Result<GroupCorrelation> {
    if size_i == 0 || size_j == 0 || size_i + size_j > st.n_qubits() {
        return Err(invalid(format!(
            "groups of sizes {size_i} and {size_j} do not fit in {} qubits",
            st.n_qubits()
        )));
    }
    let rho = st
        .to_pure_state()?
        .reduced(&(0..size_i + size_j).collect::<Vec<_>>())?;
    let gi: Vec<usize> = (0..size_i).collect();
    let gj: Vec<usize> = (size_i..size_i + size_j).collect();
    group_corr_max(&rho, &gi, &gj, restarts, seed)
}

/// One point of a twisting-time scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OatScanRow {
    pub t: f64,
    pub xi2: f64,
    pub mean_x: f64,
    pub var_y_min: f64,
    pub max_dir_var: f64,
    pub polarization_ok: bool,
    pub direction_ok: bool,
    pub noisy_fi: f64,
}

/// Squeezing report and noisy FI (of the aligned state) at each time in `times`.
pub fn oat_scan(
    n: usize,
    times: &[f64],
    noise: &PauliChannel,
    th: &SqueezeThresholds,
    mode: ExecMode,
) -> Result<Vec<OatScanRow>> {
    map_cells(mode, times, |&t| -> Result<OatScanRow> {
        let st = oat_state(n, t)?;
        let rep = squeeze_report(&st, th)?;
        let noisy_fi = noisy_squeeze_fi(&align_squeezing(&st)?, noise, 0.0)?;
        Ok(OatScanRow {
            t,
            xi2: rep.xi2,
            mean_x: rep.mean_x,
            var_y_min: rep.var_y_min,
            max_dir_var: rep.max_dir_var,
            polarization_ok: rep.polarization_ok,
            direction_ok: rep.direction_ok,
            noisy_fi,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::WeightedPauliSum;
    use crate::smallsys::{moment_fi, qfi, Observable, SensingFamily};
    use crate::testutil::{embed_site_op, rng};
    use rand::Rng;

    fn random_collective(n: usize, seed: u64) -> CollectiveState {
        let mut r = rng(seed);
        let v: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        CollectiveState::from_amplitudes(n, v.iter().map(|a| a / norm).collect()).unwrap()
    }

    fn collective(n: usize, letter: Pauli) -> WeightedPauliSum {
        WeightedPauliSum::uniform_sum(0..n, letter, 1.0)
    }

    #[test]
    fn coherent_state_is_unsqueezed() {
        let n = 40;
        let st = CollectiveState::coherent_x(n).unwrap();
        let rep = squeeze_report(&st, &SqueezeThresholds::default()).unwrap();
        assert!((rep.mean_x - n as f64).abs() < 1e-10);
        assert!((rep.var_y_min - n as f64).abs() < 1e-9);
        assert!((rep.xi2 - 1.0).abs() < 1e-10);
        assert!((rep.max_dir_var - n as f64).abs() < 1e-9);
        assert!(rep.polarization_ok && rep.direction_ok);
        let fi = noisy_squeeze_fi(&st, &PauliChannel::noiseless(0.0), 0.0).unwrap();
        assert!((fi - 4.0 * n as f64).abs() < 1e-8);
        let dead = noisy_squeeze_fi(&st, &PauliChannel::dephasing(0.5, 0.0).unwrap(), 0.0).unwrap();
        assert_eq!(dead, 0.0);
    }

    #[test]
    fn moments_match_dense_expectations() {
        let n = 6;
        let st = random_collective(n, 5);
        let dense = st.to_pure_state().unwrap();
        let mom = st.moments();
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        for (a, &la) in letters.iter().enumerate() {
            let oa = collective(n, la);
            assert!((dense.expectation(&oa).re - mom.mean[a]).abs() < 1e-10);
            for (b, &lb) in letters.iter().enumerate() {
                let ob = collective(n, lb);
                let sym = (dense.expectation(&oa.multiply(&ob))
                    + dense.expectation(&ob.multiply(&oa)))
                .re / 2.0;
                assert!((sym - mom.mean[a] * mom.mean[b] - mom.cov[(a, b)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn twisting_matches_dense_evolution() {
        let n = 4;
        let t = 0.37;
        let st = oat_state(n, t).unwrap().to_pure_state().unwrap();
        let plus = PureState::plus(n).unwrap();
        let amps = DVector::from_iterator(
            1 << n,
            plus.amplitudes().iter().enumerate().map(|(x, a)| {
                let z = n as f64 - 2.0 * x.count_ones() as f64;
                a * Complex64::from_polar(1.0, -t * z * z / 4.0)
            }),
        );
        let want = PureState::from_amplitudes(n, amps).unwrap();
        assert!((st.overlap(&want).norm() - 1.0).abs() < 1e-12);
        assert!((st.amplitudes() - want.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn x_rotation_matches_dense_product() {
        let n = 5;
        let alpha = 0.83;
        let st = random_collective(n, 9);
        let got = st.rotate_x(alpha).unwrap().to_pure_state().unwrap();
        let (s, c) = (alpha / 2.0).sin_cos();
        let u = Matrix2::new(
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        );
        let mut want = st.to_pure_state().unwrap().amplitudes().clone();
        for site in 0..n {
            want = embed_site_op(n, site, &u) * want;
        }
        assert!((got.amplitudes() - want).norm() < 1e-10);
    }

    #[test]
    fn two_site_state_matches_partial_trace() {
        let st = oat_state(7, 0.21).unwrap();
        let dense = st.to_pure_state().unwrap().reduced(&[0, 1]).unwrap();
        assert!((st.two_site_rdm().unwrap() - dense.matrix()).norm() < 1e-10);
        let st = random_collective(5, 2);
        let dense = st.to_pure_state().unwrap().reduced(&[3, 1]).unwrap();
        assert!((st.two_site_rdm().unwrap() - dense.matrix()).norm() < 1e-10);
    }

    #[test]
    fn noisy_fi_matches_dense_moment_fi() {
        let n = 8;
        let st = align_squeezing(&oat_state(n, 0.3).unwrap()).unwrap();
        let obs = collective(n, Pauli::Y);
        for noise in [
            PauliChannel::dephasing(0.07, 0.0).unwrap(),
            PauliChannel::depolarizing(0.05, 0.0).unwrap(),
            PauliChannel::new(0.0, [0.8, 0.05, 0.1, 0.05]).unwrap(),
        ] {
            for theta0 in [0.0, 0.11] {
                let fast = noisy_squeeze_fi(&st, &noise, theta0).unwrap();
                let fam = SensingFamily::new(st.to_pure_state().unwrap().to_density(), noise);
                let dense = moment_fi(&obs, &fam, theta0).unwrap().fi;
                assert!((fast - dense).abs() < 1e-8 * dense, "{fast} vs {dense}");
            }
        }
    }

    #[test]
    fn noiseless_fi_is_below_qfi() {
        let n = 6;
        for t in [0.05, 0.2, 0.6] {
            let st = align_squeezing(&oat_state(n, t).unwrap()).unwrap();
            let fi = noisy_squeeze_fi(&st, &PauliChannel::noiseless(0.0), 0.0).unwrap();
            let mom = st.moments();
            assert!((fi - (2.0 * mom.mean[0]).powi(2) / mom.cov[(1, 1)]).abs() < 1e-10 * fi);
            let q = qfi(
                &SensingFamily::new(
                    st.to_pure_state().unwrap().to_density(),
                    PauliChannel::noiseless(0.0),
                ),
                0.0,
            )
            .unwrap();
            assert!(fi <= q + 1e-8, "{fi} vs {q}");
        }
    }

    #[test]
    fn alignment_puts_least_variance_on_y() {
        let st = oat_state(64, 0.05).unwrap();
        let (_, min) = st.moments().squeezed_axis();
        let aligned = align_squeezing(&st).unwrap().moments();
        assert!((aligned.cov[(1, 1)] - min).abs() < 1e-8 * min.max(1.0));
        assert!(aligned.cov[(1, 2)].abs() < 1e-7 * aligned.cov[(2, 2)]);
    }

    #[test]
    fn optimal_twisting_squeezes_strongly() {
        let n = 128;
        let t = optimal_oat_time(n).unwrap();
        let xi2 = oat_xi2(n, t).unwrap();
        assert!(xi2 <= (n as f64).powf(-0.5), "{xi2}");
        assert!(oat_xi2(n, 0.9 * t).unwrap() >= xi2 && oat_xi2(n, 1.1 * t).unwrap() >= xi2);
    }

    #[test]
    fn direction_flag_and_anti_squeezing() {
        let n = 64;
        let st = oat_state(n, optimal_oat_time(n).unwrap()).unwrap();
        let rep = squeeze_report(&st, &SqueezeThresholds::default()).unwrap();
        assert!(rep.polarization_ok && rep.direction_ok, "{rep:?}");
        let product = rep.var_y_min * rep.var_z_aligned;
        assert!(product >= rep.mean_x.powi(2) * (1.0 - 1e-9));
        assert!(rep.var_z_aligned >= 0.25 * n as f64 / rep.xi2);
    }

    #[test]
    fn over_twisting_loses_polarization() {
        let n = 64;
        let st = oat_state(n, 20.0 * optimal_oat_time(n).unwrap()).unwrap();
        let rep = squeeze_report(&st, &SqueezeThresholds::default()).unwrap();
        assert!(!rep.polarization_ok, "{rep:?}");
    }

    #[test]
    fn uncertainty_holds_along_a_scan() {
        let n = 50;
        let t_opt = optimal_oat_time(n).unwrap();
        for k in 0..30 {
            let mom = oat_state(n, t_opt * k as f64 / 10.0).unwrap().moments();
            let (phi, vy) = mom.squeezed_axis();
            let vz = mom.transverse_variance(phi + std::f64::consts::FRAC_PI_2);
            assert!(vy * vz >= mom.mean[0].powi(2) - 1e-8 * n as f64 * n as f64);
        }
    }

    #[test]
    fn noisy_fi_degrades_monotonically() {
        let n = 128;
        let st = align_squeezing(&oat_state(n, optimal_oat_time(n).unwrap()).unwrap()).unwrap();
        let values: Vec<f64> = (0..=50)
            .map(|k| {
                noisy_squeeze_fi(
                    &st,
                    &PauliChannel::dephasing(0.01 * k as f64, 0.0).unwrap(),
                    0.0,
                )
                .unwrap()
            })
            .collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert_eq!(*values.last().unwrap(), 0.0);
    }

    #[test]
    fn product_state_has_no_pair_correlation() {
        let st = CollectiveState::coherent_x(6).unwrap();
        assert!(pairwise_correlation(&st, 4, 0).unwrap().value < 1e-10);
    }

    #[test]
    fn pair_correlation_fast_path_matches_dense() {
        let st = oat_state(8, 0.4).unwrap();
        let fast = pairwise_correlation(&st, 8, 1).unwrap().value;
        let dense = sss_violates_small_correlation(&st, 1, 1, 8, 1)
            .unwrap()
            .value;
        assert!(fast > 1e-3);
        assert!((fast - dense).abs() < 1e-8, "{fast} vs {dense}");
    }

    #[test]
    fn dense_projection_keeps_symmetry() {
        let st = random_collective(5, 4).to_pure_state().unwrap();
        let a = st.amplitudes();
        assert!((a[0b00011] - a[0b10100]).norm() < 1e-15);
        assert!(
            (st.expectation(&collective(5, Pauli::Z)).re
                - st.expectation(&collective(5, Pauli::Z)).re)
                .abs()
                < 1e-15
        );
        let obs = collective(5, Pauli::Z);
        assert!(obs.expectation(st.to_density().matrix()).is_ok());
    }
}
