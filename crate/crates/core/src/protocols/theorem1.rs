use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{dephasing_qfi_bound, BoundSpec, PauliChannel};
use crate::error::Result;
use crate::smallsys::{
    embed_local, group_corr_max, moment_fi, qfi, sld_operator, DenseObservable, DensityOperator,
    GroupPartition, SensingFamily,
};

/// Thresholds for the three sufficient conditions of the grouped-SLD construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Thresholds {
    /// Largest allowed `m p`.
    pub c_no: f64,
    /// Each group's noiseless QFI must reach `c_qfi * 4 m^2`.
    pub c_qfi: f64,
    /// Summed correlations to non-neighbor groups must stay below `c_corr / m^2`.
    pub c_corr: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for Theorem1Thresholds {
    fn default() -> Self {
        Self {
            c_no: 0.25,
            c_qfi: 1.0,
            c_corr: 1.0,
            restarts: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub m: usize,
    pub p: f64,
    pub noise_ok: bool,
    pub qfi_ok: bool,
    pub correlation_ok: bool,
    pub group_qfi: Vec<f64>,
    pub correlation_sums: Vec<f64>,
    /// Moment FI of the summed local SLDs, computed only when all conditions hold.
    pub moment_fi: Option<f64>,
    pub bound: Option<f64>,
}

impl Theorem1Report {
    pub fn all_pass(&self) -> bool {
        self.noise_ok && self.qfi_ok && self.correlation_ok
    }
}

/// Evaluates the three conditions on `rho` and, when they all hold, the
/// moment FI of `sum_I L_I` where `L_I` is the SLD of the noisy group state at `theta = 0`.
pub fn theorem1_check(
    rho: &DensityOperator,
    partition: &GroupPartition,
    p: f64,
    th: &Theorem1Thresholds,
) -> Result<Theorem1Report> {
    let n = rho.n_qubits();
    let m = partition.max_group_size();
    let groups = partition.groups();
    let noise = PauliChannel::dephasing(p, 0.0)?;

    let mut group_qfi = Vec::with_capacity(groups.len());
    for g in groups {
        let fam = SensingFamily::new(rho.reduced(g)?, PauliChannel::noiseless(0.0));
        group_qfi.push(qfi(&fam, 0.0)?);
    }

    let mut correlation_sums = Vec::with_capacity(groups.len());
    for (i, gi) in groups.iter().enumerate() {
        let mut sum = 0.0;
        for (j, gj) in groups.iter().enumerate() {
            if partition.neighbors(i).contains(&j) {
                continue;
            }
            sum += group_corr_max(rho, gi, gj, th.restarts, th.seed)?.value;
        }
        correlation_sums.push(sum);
    }

    let m2 = (m * m) as f64;
    let noise_ok = m as f64 * p <= th.c_no;
    let qfi_ok = group_qfi
        .iter()
        .all(|&q| q >= th.c_qfi * 4.0 * m2 * (1.0 - 1e-9));
    let correlation_ok = correlation_sums.iter().all(|&c| c <= th.c_corr / m2);

    let moment = if noise_ok && qfi_ok && correlation_ok {
        let mut op = DMatrix::<Complex64>::zeros(1 << n, 1 << n);
        for g in groups {
            let fam = SensingFamily::new(rho.reduced(g)?, noise);
            let l = sld_operator(fam.state(0.0).matrix(), &fam.derivative(0.0))?;
            op += embed_local(n, g, &l)?;
        }
        let obs = DenseObservable::new(op)?;
        let fam = SensingFamily::new(rho.clone(), noise);
        Some(moment_fi(&obs, &fam, 0.0)?.fi)
    } else {
        None
    };
    let bound = (p > 0.0 && p < 0.5)
        .then(|| dephasing_qfi_bound(&BoundSpec { n_qubits: n, p }))
        .transpose()?;
    Ok(Theorem1Report {
        m,
        p,
        noise_ok,
        qfi_ok,
        correlation_ok,
        group_qfi,
        correlation_sums,
        moment_fi: moment,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parity::{parity_qfi, parity_state};
    use crate::smallsys::PureState;

    #[test]
    fn parity_state_passes_and_saturates() {
        let n = 8;
        let m = 4;
        let p = 0.05;
        let rho = parity_state(n, m).unwrap().to_density();
        let part = GroupPartition::contiguous(n, m, 0).unwrap();
        let rep = theorem1_check(&rho, &part, p, &Theorem1Thresholds::default()).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        let f = rep.moment_fi.unwrap();
        let q = parity_qfi(n, m, p).unwrap();
        assert!((f - q).abs() < 1e-8 * q, "{f} vs {q}");
    }

    #[test]
    fn product_state_fails_qfi_condition() {
        let rho = PureState::plus(8).unwrap().to_density();
        let part = GroupPartition::contiguous(8, 4, 0).unwrap();
        let rep = theorem1_check(&rho, &part, 0.01, &Theorem1Thresholds::default()).unwrap();
        assert!(!rep.qfi_ok);
        assert!(rep.correlation_ok && rep.noise_ok);
        assert!(rep.moment_fi.is_none());
    }
}
