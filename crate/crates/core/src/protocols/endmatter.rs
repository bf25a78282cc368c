use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LocalCircuit, TimeReversalObservable};
use crate::channels::PauliChannel;
use crate::error::{Error, Result};
use crate::smallsys::{GroupPartition, PureState, SensingFamily};

/// Small-angle structure of one group's time-reversal projector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupExpansion {
    /// `i <0|[Z_I(T), P_I~]|0>` for the full generator `Z(T)`.
    pub first_order: f64,
    /// `<0|[Z_I(T), [Z_I(T), P_I~]]|0>` evaluated in the Heisenberg frame.
    pub second_order_self: f64,
    /// `2 Var(Z_I)` evaluated directly on `U|0>`.
    pub twice_variance: f64,
}

/// Checks of the expansion of `<P_I~>` around `theta = theta_pr`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub groups: Vec<GroupExpansion>,
    pub max_first_order: f64,
    pub max_second_order_error: f64,
    /// Largest `|Cov(P_I~, P_J~)|` over groups more than one apart.
    pub max_distant_covariance: f64,
    /// `|Var(O_rev) - sum over |I - J| <= 1 of Cov(P_I~, P_J~)|`.
    pub neighbor_truncation_error: f64,
}

/// Runs the expansion checks for `circuit` and the contiguous `partition`;
/// the covariance checks use offset `theta_tilde` and dephasing `p`.
pub fn endmatter_expansion_check(
    circuit: &LocalCircuit,
    partition: &GroupPartition,
    theta_tilde: f64,
    p: f64,
) -> Result<ExpansionReport> {
    let n = circuit.n_qubits();
    let obs = TimeReversalObservable::new(circuit, partition, 0.0)?;
    let psi = circuit.prepare()?;
    let dim = 1usize << n;
    let zero = PureState::zero(n)?;
    let regions = obs.extended_regions();

    // Heisenberg-frame generator applied to |0>: Z_S(T)|0> = U^dagger Z_S U |0>.
    let heisenberg = |sites: &[usize], v: &PureState| -> PureState {
        let mut w = v.clone();
        circuit.apply(&mut w);
        let scaled = w.amplitudes().iter().enumerate().map(|(x, a)| {
            a * sites
                .iter()
                .map(|&s| if x >> s & 1 == 0 { 1.0 } else { -1.0 })
                .sum::<f64>()
        });
        let mut w = PureState::unnormalized(n, DVector::from_iterator(dim, scaled));
        circuit.apply_adjoint(&mut w);
        w
    };
    let project = |v: &DVector<Complex64>, mask: usize| -> DVector<Complex64> {
        DVector::from_iterator(
            dim,
            v.iter().enumerate().map(|(x, a)| {
                if x & mask == 0 {
                    *a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        )
    };
    let all_sites: Vec<usize> = (0..n).collect();
    let e0 = zero.amplitudes();
    let a0 = heisenberg(&all_sites, &zero);

    let mut groups = Vec::new();
    for (g, sites) in partition.groups().iter().enumerate() {
        let mask = regions[g].iter().fold(0usize, |m, s| m | 1 << s);
        let p0 = project(e0, mask);
        // i (<0|A P|0> - <0|P A|0>)
        let ap = a0.amplitudes().dotc(&p0);
        let pa = p0.dotc(a0.amplitudes());
        let first_order = (Complex64::new(0.0, 1.0) * (ap - pa)).re;

        let v = heisenberg(sites, &zero);
        let av = heisenberg(sites, &v);
        let pv = project(v.amplitudes(), mask);
        // <0|A^2 P|0> + <0|P A^2|0> - 2 <0|A P A|0>
        let a2p = av.amplitudes().dotc(&p0);
        let pa2 = p0.dotc(av.amplitudes());
        let apa = v.amplitudes().dotc(&pv);
        let second_order_self = (a2p + pa2 - apa * 2.0).re;

        let zi = |x: usize| {
            sites
                .iter()
                .map(|&s| if x >> s & 1 == 0 { 1.0 } else { -1.0 })
                .sum::<f64>()
        };
        let mean: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(x, a)| a.norm_sqr() * zi(x))
            .sum();
        let second: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(x, a)| a.norm_sqr() * zi(x).powi(2))
            .sum();
        groups.push(GroupExpansion {
            first_order,
            second_order_self,
            twice_variance: 2.0 * (second - mean * mean),
        });
    }

    let family = SensingFamily::new(psi.to_density(), PauliChannel::dephasing(p, 0.0)?);
    let read = obs.readout(family.state(theta_tilde).matrix());
    let probs: Vec<f64> = (0..dim).map(|x| read[(x, x)].re).collect();
    let k = obs.n_groups();
    let means: Vec<f64> = (0..k)
        .map(|g| {
            (0..dim)
                .filter(|&x| obs.group_indicator(g, x))
                .map(|x| probs[x])
                .sum()
        })
        .collect();
    let mut max_distant = 0.0f64;
    let mut near_sum = 0.0;
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            let joint: f64 = (0..dim)
                .filter(|&x| obs.group_indicator(i, x) && obs.group_indicator(j, x))
                .map(|x| probs[x])
                .sum();
            let cov = joint - means[i] * means[j];
            total += cov;
            if i.abs_diff(j) <= 1 {
                near_sum += cov;
            } else {
                max_distant = max_distant.max(cov.abs());
            }
        }
    }
    if !total.is_finite() {
        return Err(Error::Numerical("non-finite covariance".into()));
    }

    Ok(ExpansionReport {
        max_first_order: groups
            .iter()
            .map(|g| g.first_order.abs())
            .fold(0.0, f64::max),
        max_second_order_error: groups
            .iter()
            .map(|g| (g.second_order_self - g.twice_variance).abs())
            .fold(0.0, f64::max),
        groups,
        max_distant_covariance: max_distant,
        neighbor_truncation_error: (total - near_sum).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_on_domino_circuit() {
        let c = LocalCircuit::domino(8, 4, 1, 1.1).unwrap();
        let part = GroupPartition::contiguous(8, 4, 1).unwrap();
        let rep = endmatter_expansion_check(&c, &part, 0.1, 0.05).unwrap();
        assert!(rep.max_first_order < 1e-12);
        assert!(rep.max_second_order_error < 1e-10);
        assert!(rep.groups.iter().all(|g| g.twice_variance > 0.1));
    }
}
