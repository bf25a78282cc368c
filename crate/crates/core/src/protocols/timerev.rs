use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LocalCircuit;
use crate::channels::PauliChannel;
use crate::error::{invalid, Error, Result};
use crate::smallsys::{
    moment_fi, qfi, rotate_z_in_place, FiReport, GroupPartition, Observable, SensingFamily,
};

/// `sum_I U_rev^dagger P_{I~} U_rev`, with `U_rev = U^dagger exp(i theta_pr Z)`.
///
/// `P_{I~}` projects the sites of the extended group `I~` (all sites within
/// the circuit's entangling depth of group `I`) onto `|0>`. The observable
/// is read out by undoing `exp(-i theta_pr Z)` and `U`, measuring every
/// qubit in the computational basis, and counting the groups whose extended
/// region came back all zero; see [`TimeReversalObservable::outcome_value`].
#[derive(Clone, Debug)]
pub struct TimeReversalObservable {
    circuit: LocalCircuit,
    theta_pr: f64,
    extended: Vec<usize>,
    overlap_warning: bool,
}

impl TimeReversalObservable {
    pub fn new(circuit: &LocalCircuit, partition: &GroupPartition, theta_pr: f64) -> Result<Self> {
        let n = circuit.n_qubits();
        if partition.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: partition.n_qubits(),
            });
        }
        if n >= usize::BITS as usize {
            return Err(Error::TooLarge(n));
        }
        let depth = circuit.entangling_depth();
        let extended = partition
            .groups()
            .iter()
            .map(|g| {
                (0..n)
                    .filter(|&s| g.iter().any(|&i| s.abs_diff(i) <= depth))
                    .fold(0usize, |acc, s| acc | 1 << s)
            })
            .collect();
        let min_len = partition.groups().iter().map(Vec::len).min().unwrap_or(0);
        Ok(Self {
            circuit: circuit.clone(),
            theta_pr,
            extended,
            overlap_warning: min_len <= 2 * depth,
        })
    }

    pub fn theta_pr(&self) -> f64 {
        self.theta_pr
    }

    /// True when a group is no longer than twice the circuit depth, so
    /// neighboring extended regions overlap substantially.
    pub fn overlap_warning(&self) -> bool {
        self.overlap_warning
    }

    pub fn extended_regions(&self) -> Vec<Vec<usize>> {
        let n = self.circuit.n_qubits();
        self.extended
            .iter()
            .map(|m| (0..n).filter(|s| m >> s & 1 == 1).collect())
            .collect()
    }

    /// `U_rev rho U_rev^dagger`.
    pub fn readout(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut m = rho.clone();
        rotate_z_in_place(&mut m, self.circuit.n_qubits(), -self.theta_pr);
        self.circuit.conjugate_adjoint(&mut m);
        m
    }

    /// Number of groups whose extended region reads all zeros in outcome `bits`.
    pub fn outcome_value(&self, bits: usize) -> f64 {
        self.extended.iter().filter(|&&m| bits & m == 0).count() as f64
    }

    /// Whether group `g` reads all zeros in outcome `bits`.
    pub fn group_indicator(&self, g: usize, bits: usize) -> bool {
        bits & self.extended[g] == 0
    }

    pub fn n_groups(&self) -> usize {
        self.extended.len()
    }

    fn check(&self, rho: &DMatrix<Complex64>) -> Result<()> {
        let dim = 1usize << self.circuit.n_qubits();
        if rho.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.nrows(),
            });
        }
        Ok(())
    }
}

impl Observable for TimeReversalObservable {
    fn expectation(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        self.check(rho)?;
        let m = self.readout(rho);
        Ok((0..m.nrows())
            .map(|x| self.outcome_value(x) * m[(x, x)].re)
            .sum())
    }

    fn second_moment(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        self.check(rho)?;
        let m = self.readout(rho);
        Ok((0..m.nrows())
            .map(|x| self.outcome_value(x).powi(2) * m[(x, x)].re)
            .sum())
    }
}

/// Default offset `theta - theta_pr` for groups of length `group_len`.
pub fn default_offset(group_len: usize) -> f64 {
    1.0 / (2.0 * group_len as f64)
}

/// Moment estimate of the time-reversal protocol on `U|0>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeReversalReport {
    pub n: usize,
    pub group_len: usize,
    pub depth: usize,
    pub l_over_t: f64,
    pub theta_pr: f64,
    pub overlap_warning: bool,
    pub fi: FiReport,
}

/// Method-of-moments FI of `O_rev` and the QFI of the same noisy family at `theta`.
pub fn timerev_fi(
    circuit: &LocalCircuit,
    partition: &GroupPartition,
    theta_pr: f64,
    noise: &PauliChannel,
    theta: f64,
) -> Result<TimeReversalReport> {
    let obs = TimeReversalObservable::new(circuit, partition, theta_pr)?;
    let family = SensingFamily::new(circuit.prepare()?.to_density(), *noise);
    let mut fi = moment_fi(&obs, &family, theta)?;
    fi.qfi = Some(qfi(&family, theta)?);
    let group_len = partition.max_group_size();
    let depth = circuit.entangling_depth();
    if group_len == 0 {
        return Err(invalid("partition has no groups"));
    }
    Ok(TimeReversalReport {
        n: circuit.n_qubits(),
        group_len,
        depth,
        l_over_t: if depth == 0 {
            f64::INFINITY
        } else {
            group_len as f64 / depth as f64
        },
        theta_pr,
        overlap_warning: obs.overlap_warning(),
        fi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smallsys::DenseObservable;

    #[test]
    fn matches_dense_construction() {
        let n = 6;
        let c = LocalCircuit::random_brickwork(n, 1, 2).unwrap();
        let part = GroupPartition::contiguous(n, 3, 1).unwrap();
        let obs = TimeReversalObservable::new(&c, &part, 0.2).unwrap();
        assert_eq!(
            obs.extended_regions(),
            vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5]]
        );
        let u = c.to_dense().unwrap();
        let rot = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            64,
            (0..64).map(|x| Complex64::from_polar(1.0, 0.2 * crate::smallsys::total_z(n, x))),
        ));
        let u_rev = u.adjoint() * rot;
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            64,
            (0..64).map(|x| Complex64::new(obs.outcome_value(x), 0.0)),
        ));
        let dense = DenseObservable::new(u_rev.adjoint() * diag * &u_rev).unwrap();
        let rho = crate::testutil::random_density(n, &mut crate::testutil::rng(1));
        assert!((obs.expectation(&rho).unwrap() - dense.expectation(&rho).unwrap()).abs() < 1e-12);
        assert!(
            (obs.second_moment(&rho).unwrap() - dense.second_moment(&rho).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn noiseless_domino_is_efficient_and_bounded() {
        let n = 8;
        let c = LocalCircuit::domino(n, 4, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let part = GroupPartition::contiguous(n, 4, 1).unwrap();
        let rep = timerev_fi(
            &c,
            &part,
            0.0,
            &PauliChannel::dephasing(0.02, 0.0).unwrap(),
            default_offset(4),
        )
        .unwrap();
        let q = rep.fi.qfi.unwrap();
        assert!(rep.fi.fi <= q + 1e-8);
        assert!(rep.fi.fi >= 0.2 * q, "{} vs {q}", rep.fi.fi);
        assert!(rep.overlap_warning == (4 <= 2));
    }
}
