//! Quantum parity states: products of GHZ blocks.
//!
//! Under dephasing each block of `M` qubits keeps a coherence
//! `(1 - 2p)^M`, so its QFI is `4 M^2 (1 - 2p)^{2M}`. Blocks are
//! independent and their QFIs add.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::per_qubit_bound;
use crate::error::{invalid, Result};
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};
use crate::smallsys::PureState;

/// Block sizes used to cover `n` qubits with blocks of (at most) `m`.
fn blocks(n: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(invalid(format!("block size {m} must lie in 1..={n}")));
    }
    let mut out = vec![m; n / m];
    if n % m != 0 {
        out.push(n % m);
    }
    Ok(out)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(invalid(format!(
            "dephasing probability {p} outside [0, 0.5]"
        )));
    }
    Ok(())
}

/// QFI of a single dephased GHZ block of `m` qubits.
pub fn block_qfi(m: usize, p: f64) -> f64 {
    let m = m as f64;
    4.0 * m * m * (1.0 - 2.0 * p).powf(2.0 * m)
}

/// Total QFI of `n` qubits split into GHZ blocks of `m` (a shorter final
/// block covers any remainder).
pub fn parity_qfi(n: usize, m: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(blocks(n, m)?.into_iter().map(|b| block_qfi(b, p)).sum())
}

/// Block size maximizing the QFI per qubit, `4 m (1 - 2p)^{2m}`, over all integers.
pub fn optimal_block(p: f64) -> Result<usize> {
    if !(p > 0.0 && p < 0.5) {
        return Err(invalid(format!("optimal block needs 0 < p < 0.5, got {p}")));
    }
    let per_qubit = |m: usize| block_qfi(m, p) / m as f64;
    // The continuum optimum is -1 / (2 ln(1 - 2p)); the integer optimum is a neighbor.
    let cont = -1.0 / (2.0 * (1.0 - 2.0 * p).ln());
    let lo = (cont.floor() as usize).max(1);
    Ok([lo, lo + 1]
        .into_iter()
        .max_by(|a, b| per_qubit(*a).total_cmp(&per_qubit(*b)).then(b.cmp(a)))
        .unwrap())
}

/// Block size dividing `n` that maximizes the total QFI.
pub fn optimal_block_dividing(n: usize, p: f64) -> Result<usize> {
    check_p(p)?;
    (1..=n)
        .filter(|m| n % m == 0)
        .map(|m| (m, block_qfi(m, p) * (n / m) as f64))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(m, _)| m)
        .ok_or_else(|| invalid("register must be non-empty"))
}

/// One row of a parity experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub n: usize,
    pub p: f64,
    pub m: usize,
    pub qfi: f64,
    pub per_qubit: f64,
    pub bound_per_qubit: f64,
    pub ratio: f64,
}

pub fn parity_report(n: usize, p: f64, m: usize) -> Result<ParityReport> {
    let qfi = parity_qfi(n, m, p)?;
    let bound_per_qubit = per_qubit_bound(p)?;
    let per_qubit = qfi / n as f64;
    Ok(ParityReport {
        n,
        p,
        m,
        qfi,
        per_qubit,
        bound_per_qubit,
        ratio: per_qubit / bound_per_qubit,
    })
}

/// Dense state `prod_blocks (|0...0> + |1...1>) / sqrt 2`.
pub fn parity_state(n: usize, m: usize) -> Result<PureState> {
    let sizes = blocks(n, m)?;
    let dim = crate::pauli::dense_dim(n)?;
    let mut masks = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for b in sizes {
        masks.push(((1usize << b) - 1) << start);
        start += b;
    }
    let amp = Complex64::new(0.5f64.powf(masks.len() as f64 / 2.0), 0.0);
    let mut v = DVector::zeros(dim);
    for choice in 0..1usize << masks.len() {
        let x = masks
            .iter()
            .enumerate()
            .filter(|(k, _)| choice >> k & 1 == 1)
            .fold(0, |acc, (_, m)| acc | m);
        v[x] = amp;
    }
    PureState::from_amplitudes(n, v)
}

/// Sum over blocks of the block parity `X^{(x) block}`.
pub fn block_parity_observable(n: usize, m: usize) -> Result<WeightedPauliSum> {
    let mut obs = WeightedPauliSum::zero();
    let mut start = 0;
    for b in blocks(n, m)? {
        obs.add_string(
            Complex64::new(1.0, 0.0),
            &PauliString::uniform(start..start + b, Pauli::X),
        );
        start += b;
    }
    Ok(obs)
}
