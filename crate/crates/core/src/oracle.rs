//! Randomized agreement checks between the fast paths and dense simulation.
//!
//! Every case draws a small instance from a seeded generator, evaluates one
//! quantity through a sector, collective, closed-form or Heisenberg-picture
//! route, recomputes it with the dense routines of [`crate::smallsys`], and
//! records the relative discrepancy.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_channel, PauliChannel};
use crate::domino::{
    build_o_do, one_dw_evolve, one_dw_moment_fi, partitioned_fi, source_state, two_dw_evolve,
    CoefficientRule, DominoChain, DominoLayout, DominoObservable, GroupWindow, PartitionSettings,
    PartitionedDomino,
};
use crate::error::{invalid, Result};
use crate::exec::{map_cells, ExecMode};
use crate::parity::{parity_qfi, parity_state};
use crate::pauli::{channel_dual, Pauli, PauliString, WeightedPauliSum};
use crate::smallsys::{
    moment_fi, qfi, DensityOperator, LocalProductSum, Observable, SensingFamily,
};
use crate::squeezing::{align_squeezing, noisy_squeeze_fi, oat_state, CollectiveState};

/// Relative tolerance every case must meet.
pub const ORACLE_TOL: f64 = 1e-8;

/// The fast path under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// One-wall amplitudes and the moment FI of `O_do`.
    OneDw,
    /// Two-wall block amplitudes on a whole chain.
    TwoDw,
    /// Partitioned domino FI from per-group string tables.
    PartitionedDomino,
    /// Collective-basis noisy FI of the squeezed `Y` readout.
    Squeezing,
    /// Closed-form QFI of GHZ blocks.
    Parity,
    /// Heisenberg-picture Pauli duals of one channel round.
    PauliDual,
}

impl OracleKind {
    pub const ALL: [OracleKind; 6] = [
        OracleKind::OneDw,
        OracleKind::TwoDw,
        OracleKind::PartitionedDomino,
        OracleKind::Squeezing,
        OracleKind::Parity,
        OracleKind::PauliDual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::OneDw => "one-dw",
            OracleKind::TwoDw => "two-dw",
            OracleKind::PartitionedDomino => "partitioned-domino",
            OracleKind::Squeezing => "squeezing",
            OracleKind::Parity => "parity",
            OracleKind::PauliDual => "pauli-dual",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub seed: u64,
    /// Cases drawn for each kind.
    pub per_kind: usize,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            per_kind: 10,
            mode: ExecMode::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub kind: OracleKind,
    pub index: usize,
    pub n: usize,
    pub description: String,
    pub fast: f64,
    pub dense: f64,
    pub rel_err: f64,
    pub passed: bool,
    /// Set when either route failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub seed: u64,
    pub tolerance: f64,
    pub cases: Vec<OracleCase>,
}

impl OracleReport {
    pub fn all_passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &OracleCase> {
        self.cases.iter().filter(|c| !c.passed)
    }

    pub fn max_rel_err(&self) -> f64 {
        self.cases.iter().map(|c| c.rel_err).fold(0.0, f64::max)
    }
}

/// Outcome of one comparison before it is labeled.
struct Comparison {
    n: usize,
    description: String,
    fast: f64,
    dense: f64,
    /// Relative error when it is not `|fast - dense| / |dense|`.
    rel_err: Option<f64>,
}

/// Runs `per_kind` cases of every kind; case `i` of kind `k` is seeded from `(seed, k, i)`.
pub fn run_oracle_suite(cfg: &OracleConfig) -> Result<OracleReport> {
    if cfg.per_kind == 0 {
        return Err(invalid("oracle suite needs at least one case per kind"));
    }
    let jobs: Vec<(usize, OracleKind, usize)> = OracleKind::ALL
        .iter()
        .enumerate()
        .flat_map(|(ki, &k)| (0..cfg.per_kind).map(move |i| (ki, k, i)))
        .collect();
    let cases = map_cells(cfg.mode, &jobs, |&(ki, kind, index)| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((ki as u64) << 32) ^ index as u64);
        match run_case(kind, &mut rng) {
            Ok(c) => {
                let rel_err = c
                    .rel_err
                    .unwrap_or_else(|| (c.fast - c.dense).abs() / c.dense.abs().max(1e-300));
                OracleCase {
                    kind,
                    index,
                    n: c.n,
                    description: c.description,
                    fast: c.fast,
                    dense: c.dense,
                    rel_err,
                    passed: rel_err <= ORACLE_TOL,
                    error: None,
                }
            }
            Err(e) => OracleCase {
                kind,
                index,
                n: 0,
                description: String::new(),
                fast: f64::NAN,
                dense: f64::NAN,
                rel_err: f64::INFINITY,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    });
    Ok(OracleReport {
        seed: cfg.seed,
        tolerance: ORACLE_TOL,
        cases,
    })
}

fn run_case(kind: OracleKind, rng: &mut ChaCha8Rng) -> Result<Comparison> {
    match kind {
        OracleKind::OneDw => one_dw_case(rng),
        OracleKind::TwoDw => two_dw_case(rng),
        OracleKind::PartitionedDomino => partitioned_case(rng),
        OracleKind::Squeezing => squeezing_case(rng),
        OracleKind::Parity => parity_case(rng),
        OracleKind::PauliDual => pauli_dual_case(rng),
    }
}

fn random_dephasing(rng: &mut ChaCha8Rng, max: f64) -> Result<PauliChannel> {
    PauliChannel::dephasing(rng.random_range(0.0..max), 0.0)
}

fn random_pauli_channel(rng: &mut ChaCha8Rng) -> Result<PauliChannel> {
    let px = rng.random_range(0.0..0.1);
    let py = rng.random_range(0.0..0.1);
    let pz = rng.random_range(0.0..0.2);
    PauliChannel::new(
        rng.random_range(-0.5..0.5),
        [1.0 - px - py - pz, px, py, pz],
    )
}

fn one_dw_case(rng: &mut ChaCha8Rng) -> Result<Comparison> {
    let n = rng.random_range(6..=10);
    let t = rng.random_range(0.2..0.15 * n as f64);
    let theta_pr = rng.random_range(-0.2..0.2);
    let theta_tilde = rng.random_range(0.0..0.05);
    let noise = random_dephasing(rng, 0.1)?;

    let st = one_dw_evolve(n, t)?;
    let dense_psi = DominoChain::new(n)?.evolve(&source_state(n, &[0])?, t)?;
    let amp_err = (st.to_pure_state()?.amplitudes() - dense_psi.amplitudes()).norm();

    let obs = build_o_do(&st, theta_pr, 0.0)?;
    let fast = one_dw_moment_fi(&st, &obs, &noise, theta_tilde)?.fi;
    let fam = SensingFamily::new(dense_psi.to_density(), noise);
    let dense = moment_fi(
        &obs.to_local_product_sum().to_observable(n)?,
        &fam,
        theta_pr + theta_tilde,
    )?
    .fi;
    let fi_err = (fast - dense).abs() / dense.abs().max(1e-300);
    Ok(Comparison {
        n,
        description: format!(
            "T={t:.3} p={:.4} strings={}",
            1.0 - noise.probs()[0],
            obs.terms().len()
        ),
        fast,
        dense,
        rel_err: Some(fi_err.max(amp_err)),
    })
}

fn two_dw_case(rng: &mut ChaCha8Rng) -> Result<Comparison> {
    let n = rng.random_range(8..=12);
    let source = rng.random_range(1..n - 1);
    let t = rng.random_range(0.2..2.5);
    let st = two_dw_evolve(n, (0, n - 1), source, t)?;
    let fast = st.to_pure_state()?;
    let dense = DominoChain::new(n)?.evolve(&source_state(n, &[source])?, t)?;
    let err = (fast.amplitudes() - dense.amplitudes()).norm();
    let overlap = fast.overlap(&dense).norm();
    Ok(Comparison {
        n,
        description: format!("source={source} T={t:.3}"),
        fast: overlap,
        dense: 1.0,
        rel_err: Some(err),
    })
}

/// Dense slope and variance of the strings of `obs` inside one group window,
/// with the window padded by one frozen site on each inner side.
fn dense_group(
    obs: &DominoObservable,
    w: GroupWindow,
    n: usize,
    t: f64,
    noise: &PauliChannel,
    theta: f64,
) -> Result<(f64, f64)> {
    let a = w.lo.saturating_sub(1);
    let b = (w.hi + 1).min(n - 1);
    let m = b - a + 1;
    let psi = DominoChain::new(m)?.evolve(&source_state(m, &[w.source - a])?, t)?;
    let mut local = LocalProductSum::new();
    for term in obs
        .terms()
        .iter()
        .filter(|s| s.first >= w.lo && s.last <= w.hi)
    {
        local.push(
            term.coeff,
            (term.first..=term.last)
                .map(|k| (k - a, obs.site_operator(k)))
                .collect(),
        );
    }
    let fam = SensingFamily::new(psi.to_density(), *noise);
    let r = moment_fi(&local.to_observable(m)?, &fam, theta)?;
    Ok((r.slope, r.variance))
}

fn partitioned_case(rng: &mut ChaCha8Rng) -> Result<Comparison> {
    let n = 12;
    let l = [4, 6, 12][rng.random_range(0..3)];
    let t = rng.random_range(0.3..1.5);
    let noise = random_dephasing(rng, 0.1)?;
    let rule = if rng.random_bool(0.5) {
        CoefficientRule::Rayleigh
    } else {
        CoefficientRule::Magnitude
    };
    let settings = PartitionSettings {
        theta_pr: rng.random_range(-0.1..0.1),
        theta_tilde: rng.random_range(0.0..0.03),
        leakage_limit: 1.0,
        ..Default::default()
    };
    let fast = partitioned_fi(n, l, t, &noise, rule, settings)?.fi.fi;
    let model = PartitionedDomino::prepare(DominoLayout::new(n, l)?, t, settings)?;
    let obs = model.observable(&noise, rule)?;
    let (mut slope, mut var) = (0.0, 0.0);
    for w in model.layout().windows() {
        let (s, v) = dense_group(
            &obs,
            w,
            n,
            t,
            &noise,
            settings.theta_pr + settings.theta_tilde,
        )?;
        slope += s;
        var += v;
    }
    Ok(Comparison {
        n,
        description: format!("L={l} T={t:.3} rule={rule:?}"),
        fast,
        dense: slope * slope / var,
        rel_err: None,
    })
}

fn squeezing_case(rng: &mut ChaCha8Rng) -> Result<Comparison> {
    let n = rng.random_range(3..=8);
    let st = if rng.random_bool(0.5) {
        align_squeezing(&oat_state(n, rng.random_range(0.0..1.0))?)?
    } else {
        let v: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        CollectiveState::from_amplitudes(n, v.iter().map(|a| a / norm).collect())?
    };
    let noise = random_pauli_channel(rng)?;
    let theta0 = rng.random_range(-0.3..0.3);
    let fast = noisy_squeeze_fi(&st, &noise, theta0)?;
    let fam = SensingFamily::new(st.to_pure_state()?.to_density(), noise);
    let dense = moment_fi(
        &WeightedPauliSum::uniform_sum(0..n, Pauli::Y, 1.0),
        &fam,
        theta0,
    )?
    .fi;
    Ok(Comparison {
        n,
        description: format!("theta0={theta0:.3} probs={:?}", noise.probs()),
        fast,
        dense,
        rel_err: None,
    })
}

fn parity_case(rng: &mut ChaCha8Rng) -> Result<Comparison> {
    let n = rng.random_range(2..=8);
    let m = rng.random_range(1..=n);
    let p = rng.random_range(0.0..0.3);
    let fast = parity_qfi(n, m, p)?;
    let fam = SensingFamily::new(
        parity_state(n, m)?.to_density(),
        PauliChannel::dephasing(p, 0.0)?,
    );
    let dense = qfi(&fam, 0.0)?;
    Ok(Comparison {
        n,
        description: format!("m={m} p={p:.4}"),
        fast,
        dense,
        rel_err: None,
    })
}

fn pauli_dual_case(rng: &mut ChaCha8Rng) -> Result<Comparison> {
    let n = rng.random_range(2..=6);
    let letters: Vec<(usize, Pauli)> = (0..n)
        .filter_map(|s| {
            [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)][rng.random_range(0..4)]
                .map(|l| (s, l))
        })
        .collect();
    let string = PauliString::from_letters(letters);
    let ch = random_pauli_channel(rng)?;
    let rho = DensityOperator::new(n, crate::random::density_matrix(1 << n, rng))?;
    let dense = string.trace_with(apply_channel(&rho, &ch).matrix()).re;
    let fast = channel_dual(&ch, &string).expectation(rho.matrix())?;
    let scale: DMatrix<Complex64> = string.to_dense(n)?;
    let norm = scale.norm() / ((1usize << n) as f64).sqrt();
    let err = (fast - dense).abs() / dense.abs().max(norm * 1e-3);
    Ok(Comparison {
        n,
        description: format!("weight={} theta={:.3}", string.weight(), ch.theta()),
        fast,
        dense,
        rel_err: Some(err),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let rep = run_oracle_suite(&OracleConfig {
            per_kind: 2,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(rep.cases.len(), 12);
        for c in &rep.cases {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let cfg = OracleConfig {
            per_kind: 1,
            mode: ExecMode::Sequential,
            ..Default::default()
        };
        let a = run_oracle_suite(&cfg).unwrap();
        let b = run_oracle_suite(&OracleConfig {
            mode: ExecMode::Parallel,
            ..cfg
        })
        .unwrap();
        assert_eq!(a, b);
    }
}
