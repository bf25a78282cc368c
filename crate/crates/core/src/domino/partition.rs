//! The partitioned domino state: one `|+>` every `L` sites, each evolved in its own window.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::moments::{transverse_lambda, NoisyMoments, StringTable};
use super::observable::{DominoObservable, Gauge, YString};
use super::sector::{two_dw_evolve, TwoDwState, LEAKAGE_LIMIT};
use crate::channels::{per_qubit_bound, PauliChannel};
use crate::error::{invalid, Error, Result};
use crate::smallsys::FiReport;

/// Strings kept per window, ranked by block weight.
pub const DEFAULT_STRING_CAP: usize = 1200;

/// How the real string coefficients of each group are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientRule {
    /// `b_B = |psi_B| cos(delta_B)`, with `delta_B` the residual gauge misalignment.
    Magnitude,
    /// `b = (V + eps)^{-1} s` from the noisy string covariance `V` and slopes `s`.
    #[default]
    Rayleigh,
}

/// Site ranges of one group: its `|+>` source and inclusive window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupWindow {
    pub source: usize,
    pub lo: usize,
    pub hi: usize,
}

/// Chain of `n` sites with sources on sites `0, L, 2L, ...`.
///
/// Group `I` owns the `L` sites from `IL - L/2` to `IL + L/2 - 1`, clipped
/// at the left edge, so group 0 holds a single wall in half a window and the
/// last `L/2` sites stay idle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominoLayout {
    n: usize,
    l: usize,
}

impl DominoLayout {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if l < 2 || l % 2 != 0 {
            return Err(invalid(format!(
                "group size must be even and at least 2, got {l}"
            )));
        }
        if n < 3 || n % l != 0 {
            return Err(invalid(format!(
                "group size {l} must divide the chain length {n}"
            )));
        }
        Ok(Self { n, l })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn group_len(&self) -> usize {
        self.l
    }

    pub fn n_groups(&self) -> usize {
        self.n / self.l
    }

    pub fn windows(&self) -> Vec<GroupWindow> {
        let h = self.l / 2;
        (0..self.n_groups())
            .map(|g| {
                let source = g * self.l;
                GroupWindow {
                    source,
                    lo: source.saturating_sub(h),
                    hi: source + h - 1,
                }
            })
            .collect()
    }
}

/// Knobs shared by every partitioned evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionSettings {
    pub theta_pr: f64,
    /// Offset `theta - theta_pr` at which the moments are evaluated.
    pub theta_tilde: f64,
    pub string_cap: usize,
    pub leakage_limit: f64,
}

impl Default for PartitionSettings {
    fn default() -> Self {
        Self {
            theta_pr: 0.0,
            theta_tilde: 0.0,
            string_cap: DEFAULT_STRING_CAP,
            leakage_limit: LEAKAGE_LIMIT,
        }
    }
}

#[derive(Clone, Debug)]
struct GroupModel {
    window: GroupWindow,
    state: TwoDwState,
    gauge: Gauge,
    strings: Vec<(usize, usize)>,
    magnitude: DVector<f64>,
    table: StringTable,
}

impl GroupModel {
    fn new(n: usize, window: GroupWindow, t: f64, settings: &PartitionSettings) -> Result<Self> {
        let state = two_dw_evolve(n, (window.lo, window.hi), window.source, t)?;
        state.check_leakage(settings.leakage_limit)?;
        let gauge = Gauge::fit(&state, settings.theta_pr);
        let w = state.width();
        let mut strings: Vec<(usize, usize)> =
            (0..w).flat_map(|j| (0..=j).map(move |i| (i, j))).collect();
        if strings.len() > settings.string_cap {
            strings.sort_by(|a, b| {
                state
                    .local(b.0, b.1)
                    .norm()
                    .total_cmp(&state.local(a.0, a.1).norm())
            });
            strings.truncate(settings.string_cap.max(1));
            strings.sort_by_key(|&(i, j)| (j, i));
        }
        let magnitude = DVector::from_iterator(
            strings.len(),
            strings.iter().map(|&(i, j)| gauge.magnitude(&state, i, j)),
        );
        let theta = settings.theta_pr + settings.theta_tilde;
        let table = StringTable::build(&state, &gauge.phases, &strings, theta);
        Ok(Self {
            window,
            state,
            gauge,
            strings,
            magnitude,
            table,
        })
    }

    fn coefficients(&self, moments: &NoisyMoments, rule: CoefficientRule) -> Result<DVector<f64>> {
        match rule {
            CoefficientRule::Magnitude => Ok(self.magnitude.clone()),
            CoefficientRule::Rayleigh => moments.rayleigh(),
        }
    }

    /// Terms and phases of this group, placed at its window.
    fn place(
        &self,
        window: GroupWindow,
        b: &DVector<f64>,
        phases: &mut [f64],
        terms: &mut Vec<YString>,
    ) {
        let lo = window.lo;
        phases[lo..=window.hi].copy_from_slice(&self.gauge.phases);
        for (&(i, j), &c) in self.strings.iter().zip(b.iter()) {
            if c != 0.0 {
                terms.push(YString {
                    first: lo + i,
                    last: lo + j,
                    coeff: c,
                });
            }
        }
    }
}

/// Outcome of a partitioned evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionedReport {
    pub n: usize,
    pub group_len: usize,
    pub time: f64,
    pub groups: usize,
    pub rule: CoefficientRule,
    pub leakage: f64,
    pub strings_per_group: usize,
    pub fi: FiReport,
    pub fi_per_qubit: f64,
    /// Dephasing strength, when the channel is pure dephasing.
    pub p: Option<f64>,
    pub bound_per_qubit: Option<f64>,
    pub ratio: Option<f64>,
}

/// Evolved groups and their string tables, reusable across noise strengths.
#[derive(Clone, Debug)]
pub struct PartitionedDomino {
    layout: DominoLayout,
    t: f64,
    settings: PartitionSettings,
    edge: GroupModel,
    bulk: Option<GroupModel>,
}

impl PartitionedDomino {
    /// Evolves the edge group and one bulk group; every other bulk group is a translate.
    pub fn prepare(layout: DominoLayout, t: f64, settings: PartitionSettings) -> Result<Self> {
        let windows = layout.windows();
        let n = layout.n_qubits();
        let edge = GroupModel::new(n, windows[0], t, &settings)?;
        let bulk = windows
            .get(1)
            .map(|&w| GroupModel::new(n, w, t, &settings))
            .transpose()?;
        Ok(Self {
            layout,
            t,
            settings,
            edge,
            bulk,
        })
    }

    pub fn layout(&self) -> &DominoLayout {
        &self.layout
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Largest window-edge weight over the groups.
    pub fn leakage(&self) -> f64 {
        self.bulk
            .as_ref()
            .map_or(0.0, |b| b.state.leakage())
            .max(self.edge.state.leakage())
    }

    /// The edge state and, when present, the bulk template state.
    pub fn group_states(&self) -> (&TwoDwState, Option<&TwoDwState>) {
        (&self.edge.state, self.bulk.as_ref().map(|b| &b.state))
    }

    fn n_bulk(&self) -> usize {
        self.layout.n_groups() - 1
    }

    fn solve(
        &self,
        noise: &PauliChannel,
        rule: CoefficientRule,
    ) -> Result<Vec<(NoisyMoments, DVector<f64>)>> {
        let lambda = transverse_lambda(noise)?;
        let mut out = Vec::new();
        for g in std::iter::once(&self.edge).chain(self.bulk.as_ref()) {
            let m = g.table.noisy(lambda);
            let b = g.coefficients(&m, rule)?;
            out.push((m, b));
        }
        Ok(out)
    }

    /// FI of the summed observable; groups are independent so slopes and variances add.
    pub fn evaluate(
        &self,
        noise: &PauliChannel,
        rule: CoefficientRule,
    ) -> Result<PartitionedReport> {
        let solved = self.solve(noise, rule)?;
        let weights = [1.0, self.n_bulk() as f64];
        let mut fi = FiReport {
            theta: solved[0].0.theta,
            mean: 0.0,
            slope: 0.0,
            fd_slope: 0.0,
            variance: 0.0,
            fi: 0.0,
            qfi: None,
        };
        let mut scale = 1.0f64;
        for ((m, b), w) in solved.iter().zip(weights) {
            let (s, v) = m.slope_and_variance(b);
            fi.mean += w * b.dot(&m.mean);
            fi.slope += w * s;
            fi.fd_slope += w * b.dot(&m.fd_slope);
            fi.variance += w * v;
            scale += w * b.abs().sum();
        }
        if (fi.slope - fi.fd_slope).abs()
            > 1e-6 * fi.slope.abs().max(fi.fd_slope.abs()) + 1e-9 * scale
        {
            return Err(Error::DerivativeMismatch {
                analytic: fi.slope,
                finite_difference: fi.fd_slope,
            });
        }
        if fi.variance < 1e-14 {
            return Err(Error::DegenerateObservable(fi.variance));
        }
        fi.fi = fi.slope * fi.slope / fi.variance;
        let n = self.layout.n_qubits();
        let p = noise.dephasing_strength();
        let bound_per_qubit = p
            .filter(|&p| p > 0.0 && p < 0.5)
            .map(per_qubit_bound)
            .transpose()?;
        let fi_per_qubit = fi.fi / n as f64;
        Ok(PartitionedReport {
            n,
            group_len: self.layout.group_len(),
            time: self.t,
            groups: self.layout.n_groups(),
            rule,
            leakage: self.leakage(),
            strings_per_group: self.bulk.as_ref().unwrap_or(&self.edge).strings.len(),
            fi_per_qubit,
            ratio: bound_per_qubit.map(|b| fi_per_qubit / b),
            bound_per_qubit,
            p,
            fi,
        })
    }

    /// The summed observable on the whole chain.
    pub fn observable(
        &self,
        noise: &PauliChannel,
        rule: CoefficientRule,
    ) -> Result<DominoObservable> {
        let solved = self.solve(noise, rule)?;
        let n = self.layout.n_qubits();
        let mut phases = vec![0.0; n];
        let mut terms = Vec::new();
        self.edge
            .place(self.edge.window, &solved[0].1, &mut phases, &mut terms);
        if let Some(bulk) = &self.bulk {
            let b = &solved[1].1;
            for w in self.layout.windows().into_iter().skip(1) {
                bulk.place(w, b, &mut phases, &mut terms);
            }
        }
        DominoObservable::new(n, self.settings.theta_pr, phases, terms)
    }
}

/// Moment FI of the partitioned domino protocol on `n` sites with groups of `l`.
pub fn partitioned_fi(
    n: usize,
    l: usize,
    t: f64,
    noise: &PauliChannel,
    rule: CoefficientRule,
    settings: PartitionSettings,
) -> Result<PartitionedReport> {
    PartitionedDomino::prepare(DominoLayout::new(n, l)?, t, settings)?.evaluate(noise, rule)
}

/// The observable used by [`partitioned_fi`].
pub fn build_partitioned_observable(
    n: usize,
    l: usize,
    t: f64,
    noise: &PauliChannel,
    rule: CoefficientRule,
    settings: PartitionSettings,
) -> Result<DominoObservable> {
    PartitionedDomino::prepare(DominoLayout::new(n, l)?, t, settings)?.observable(noise, rule)
}
