//! Rotated-basis `Y`-string observables and the gauge that aligns their slopes.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::one_dw::{velocity_estimate, OneDwState};
use super::sector::TwoDwState;
use crate::error::{invalid, Error, Result};
use crate::smallsys::LocalProductSum;

/// Default lower bound on the prefix weight inside the dyadic window.
pub const DEFAULT_CONCENTRATION: f64 = 0.5;

const GAUGE_SWEEPS: usize = 400;
const GAUGE_TOL: f64 = 1e-13;

/// `coeff * prod_{k = first}^{last} Y^{phi_k}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YString {
    pub first: usize,
    pub last: usize,
    pub coeff: f64,
}

/// A real combination of contiguous rotated-`Y` strings on a chain.
///
/// Site `k` is measured in the eigenbasis of `Y^{phi_k} = cos(phi_k) Y + sin(phi_k) X`,
/// so every term is read off from products of single-site outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominoObservable {
    n: usize,
    theta_pr: f64,
    phases: Vec<f64>,
    terms: Vec<YString>,
}

impl DominoObservable {
    pub fn new(n: usize, theta_pr: f64, phases: Vec<f64>, terms: Vec<YString>) -> Result<Self> {
        if phases.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: phases.len(),
            });
        }
        if let Some(t) = terms.iter().find(|t| t.first > t.last || t.last >= n) {
            return Err(invalid(format!(
                "string {}..={} does not fit a chain of {n} sites",
                t.first, t.last
            )));
        }
        Ok(Self {
            n,
            theta_pr,
            phases,
            terms,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Working point the gauge was built for.
    pub fn theta_pr(&self) -> f64 {
        self.theta_pr
    }

    /// Measurement angle `phi_k` of every site.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn terms(&self) -> &[YString] {
        &self.terms
    }

    /// `Y^{phi_k}` as a 2x2 matrix.
    pub fn site_operator(&self, site: usize) -> Matrix2<Complex64> {
        rotated_y(self.phases[site])
    }

    /// Columns are the `+1` and `-1` eigenvectors of [`Self::site_operator`].
    pub fn measurement_basis(&self, site: usize) -> Matrix2<Complex64> {
        let e = Complex64::from_polar(1.0, -self.phases[site]) * Complex64::new(0.0, 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Matrix2::new(
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            e * h,
            -e * h,
        )
    }

    /// Value of the observable for one shot, `outcomes[k]` being true when site `k` read `-1`.
    pub fn outcome_value(&self, outcomes: &[bool]) -> f64 {
        let mut parity = Vec::with_capacity(outcomes.len() + 1);
        parity.push(false);
        for &o in outcomes {
            parity.push(parity.last().unwrap() ^ o);
        }
        self.terms
            .iter()
            .map(|t| {
                if parity[t.last + 1] ^ parity[t.first] {
                    -t.coeff
                } else {
                    t.coeff
                }
            })
            .sum()
    }

    pub fn to_local_product_sum(&self) -> LocalProductSum {
        let mut out = LocalProductSum::new();
        for t in &self.terms {
            out.push(
                t.coeff,
                (t.first..=t.last)
                    .map(|k| (k, self.site_operator(k)))
                    .collect(),
            );
        }
        out
    }

    /// Same strings on sites shifted by `offset`, padded to a chain of `n` sites.
    pub fn shifted(&self, offset: isize, n: usize) -> Result<Self> {
        let shift = |k: usize| -> Result<usize> {
            usize::try_from(k as isize + offset)
                .map_err(|_| invalid("shift moves a string off the chain"))
        };
        let mut phases = vec![0.0; n];
        for (k, p) in self.phases.iter().enumerate() {
            if let Ok(j) = shift(k) {
                if j < n {
                    phases[j] = *p;
                }
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(YString {
                    first: shift(t.first)?,
                    last: shift(t.last)?,
                    coeff: t.coeff,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(n, self.theta_pr, phases, terms)
    }
}

pub(crate) fn rotated_y(phi: f64) -> Matrix2<Complex64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(s, -c),
        Complex64::new(s, c),
        Complex64::new(0.0, 0.0),
    )
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Accumulated angle a block of `len` sites must carry for its vacuum
/// coupling to have the steepest positive slope at `theta_pr`.
fn target(psi: Complex64, len: usize, theta_pr: f64) -> f64 {
    -FRAC_PI_2 - psi.arg() - 2.0 * theta_pr * len as f64 + FRAC_PI_2 * len as f64
}

/// Per-site angles for a window together with the residual misalignment of every block.
#[derive(Clone, Debug)]
pub(crate) struct Gauge {
    /// Window-local `phi_k`.
    pub phases: Vec<f64>,
    /// `P[k] = phi_0 + ... + phi_{k-1}`.
    prefix: Vec<f64>,
    theta_pr: f64,
}

impl Gauge {
    /// Maximizes `sum_B |B| |psi_B|^2 cos(Phi_B - target_B)` over the per-site angles
    /// by coordinate ascent on the prefix sums.
    pub(crate) fn fit(state: &TwoDwState, theta_pr: f64) -> Self {
        let w = state.width();
        let s = state.source() - state.window().0;
        let tau = |i: usize, j: usize| target(state.local(i, j), j - i + 1, theta_pr);
        let weight = |i: usize, j: usize| (j - i + 1) as f64 * state.local(i, j).norm_sqr();

        let mut p = vec![0.0; w + 1];
        for (k, pk) in p.iter_mut().enumerate().skip(s + 1) {
            *pk = tau(s, k - 1);
        }
        for k in 0..s {
            p[k] = p[s + 1] - tau(k, s);
        }
        for _ in 0..GAUGE_SWEEPS {
            let mut change = 0.0f64;
            for k in 0..=w {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, pi) in p.iter().enumerate().take(k) {
                    let wt = weight(i, k - 1);
                    if wt > 0.0 {
                        acc += Complex64::from_polar(wt, -(pi + tau(i, k - 1)));
                    }
                }
                for j in k..w {
                    let wt = weight(k, j);
                    if wt > 0.0 {
                        acc += Complex64::from_polar(wt, -(p[j + 1] - tau(k, j)));
                    }
                }
                if acc.norm() > 0.0 {
                    let next = -acc.arg();
                    change = change.max(wrap(next - p[k]).abs());
                    p[k] = next;
                }
            }
            if change < GAUGE_TOL {
                break;
            }
        }
        let base = p[0];
        let prefix: Vec<f64> = p.iter().map(|x| x - base).collect();
        let phases = prefix.windows(2).map(|c| wrap(c[1] - c[0])).collect();
        Self {
            phases,
            prefix,
            theta_pr,
        }
    }

    /// Exact gauge for prefix-only states, where every target is met.
    pub(crate) fn exact_prefix(st: &OneDwState, theta_pr: f64) -> Self {
        let n = st.n_qubits();
        let mut prefix = vec![0.0; n + 1];
        for (i, p) in prefix.iter_mut().enumerate().skip(1) {
            *p = target(st.amplitude(i), i, theta_pr);
        }
        let phases = prefix.windows(2).map(|c| wrap(c[1] - c[0])).collect();
        Self {
            phases,
            prefix,
            theta_pr,
        }
    }

    /// `|psi_B| cos(Phi_B - target_B)` for the window-local block `i ..= j`.
    pub(crate) fn magnitude(&self, state: &TwoDwState, i: usize, j: usize) -> f64 {
        let psi = state.local(i, j);
        let phi = self.prefix[j + 1] - self.prefix[i];
        psi.norm() * (phi - target(psi, j - i + 1, self.theta_pr)).cos()
    }
}

/// Dyadic window `[floor(vT/2), ceil(2vT)]` of prefix lengths and its weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicWindow {
    pub velocity: f64,
    pub first: usize,
    pub last: usize,
    pub mass: f64,
}

pub fn dyadic_window(st: &OneDwState) -> Result<DyadicWindow> {
    let velocity = velocity_estimate(st)?;
    let vt = velocity * st.time();
    let first = ((vt / 2.0).floor() as usize).max(1);
    let last = ((2.0 * vt).ceil() as usize).min(st.n_qubits() - 1);
    if first > last {
        return Err(invalid("the dyadic window is empty"));
    }
    Ok(DyadicWindow {
        velocity,
        first,
        last,
        mass: st.window_mass(first, last),
    })
}

/// `sum_{vT/2 <= i <= 2vT} |a_i| Y_{1,i}` in the basis where every prefix
/// amplitude is aligned for the steepest slope at `theta_pr`.
pub fn build_o_do(st: &OneDwState, theta_pr: f64, concentration: f64) -> Result<DominoObservable> {
    let win = dyadic_window(st)?;
    if win.mass < concentration {
        return Err(Error::Concentration {
            mass: win.mass,
            required: concentration,
        });
    }
    let gauge = Gauge::exact_prefix(st, theta_pr);
    let terms = (win.first..=win.last)
        .map(|i| YString {
            first: 0,
            last: i - 1,
            coeff: st.amplitude(i).norm(),
        })
        .collect();
    DominoObservable::new(st.n_qubits(), theta_pr, gauge.phases, terms)
}
