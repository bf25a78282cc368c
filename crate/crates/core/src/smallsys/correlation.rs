use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DensityOperator;
use crate::error::{invalid, Result};
use crate::pauli::{Pauli, PauliString, WeightedPauliSum};

/// Largest group handled by the optimizer.
pub const MAX_GROUP_SITES: usize = 4;
const MIN_RESTARTS: usize = 8;

/// Symmetrized connected correlation `<{A,B}>/2 - <A><B>`.
///
/// Both operators are assumed Hermitian.
pub fn corr(sigma: &DensityOperator, a: &WeightedPauliSum, b: &WeightedPauliSum) -> f64 {
    let m = sigma.matrix();
    let mut anti = a.multiply(b);
    anti.add_sum(&b.multiply(a));
    0.5 * anti.trace_with(m).re - a.trace_with(m).re * b.trace_with(m).re
}

/// A partition of the register into groups, each with a neighborhood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPartition {
    n: usize,
    groups: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl GroupPartition {
    /// `neighbors[g]` lists the groups allowed to correlate with group `g`
    /// and must include `g` itself.
    pub fn new(n: usize, groups: Vec<Vec<usize>>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        if groups.len() != neighbors.len() {
            return Err(invalid("one neighbor list is required per group"));
        }
        let mut owner = vec![usize::MAX; n];
        for (g, sites) in groups.iter().enumerate() {
            if sites.is_empty() {
                return Err(invalid(format!("group {g} is empty")));
            }
            for &s in sites {
                if s >= n || owner[s] != usize::MAX {
                    return Err(invalid(format!(
                        "site {s} is out of range or in two groups"
                    )));
                }
                owner[s] = g;
            }
        }
        if owner.contains(&usize::MAX) {
            return Err(invalid("groups must cover every site"));
        }
        for (g, nb) in neighbors.iter().enumerate() {
            if !nb.contains(&g) || nb.iter().any(|&h| h >= groups.len()) {
                return Err(invalid(format!("neighbor list of group {g} is malformed")));
            }
        }
        Ok(Self {
            n,
            groups,
            neighbors,
        })
    }

    /// Consecutive blocks of `m` sites (the last may be shorter); groups
    /// within `radius` of each other count as neighbors.
    pub fn contiguous(n: usize, m: usize, radius: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(invalid("group size and register size must be positive"));
        }
        let groups: Vec<Vec<usize>> = (0..n)
            .step_by(m)
            .map(|s| (s..(s + m).min(n)).collect())
            .collect();
        let g = groups.len();
        let neighbors = (0..g)
            .map(|i| (i.saturating_sub(radius)..(i + radius + 1).min(g)).collect())
            .collect();
        Self::new(n, groups, neighbors)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn neighbors(&self, g: usize) -> &[usize] {
        &self.neighbors[g]
    }

    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Result of maximizing `|C(A_I, B_J)|` over unit-norm operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCorrelation {
    /// Best value found by alternating maximization.
    pub value: f64,
    /// Largest `|C(P, Q)|` over Pauli strings, a guaranteed lower bound.
    pub pauli_certificate: f64,
    pub iterations: usize,
}

/// `max |C(A, B)|` over `A` on `sites_i` and `B` on `sites_j` with operator norm at most one.
pub fn group_corr_max(
    sigma: &DensityOperator,
    sites_i: &[usize],
    sites_j: &[usize],
    restarts: usize,
    seed: u64,
) -> Result<GroupCorrelation> {
    if sites_i.iter().any(|s| sites_j.contains(s)) {
        return Err(invalid("groups must be disjoint"));
    }
    let all: Vec<usize> = sites_i.iter().chain(sites_j).copied().collect();
    let joint = sigma.reduced(&all)?;
    group_corr_max_reduced(joint.matrix(), sites_i.len(), sites_j.len(), restarts, seed)
}

/// Same as [`group_corr_max`] given the joint state of the two groups, with
/// group `I` on the low `ni` bits.
pub fn group_corr_max_reduced(
    joint: &DMatrix<Complex64>,
    ni: usize,
    nj: usize,
    restarts: usize,
    seed: u64,
) -> Result<GroupCorrelation> {
    if ni == 0 || nj == 0 || ni > MAX_GROUP_SITES || nj > MAX_GROUP_SITES {
        return Err(invalid(format!(
            "group sizes must be between 1 and {MAX_GROUP_SITES}"
        )));
    }
    let (di, dj) = (1usize << ni, 1usize << nj);
    if joint.nrows() != di * dj {
        return Err(crate::Error::DimensionMismatch {
            expected: di * dj,
            found: joint.nrows(),
        });
    }
    let k = connected_operator(joint, di, dj);

    let paulis_i = pauli_basis(ni);
    let paulis_j = pauli_basis(nj);
    let mut certificate = 0.0f64;
    let mut best_p = paulis_i[0].clone();
    for p in &paulis_i {
        let r = response_on_j(&k, p, di, dj);
        for q in &paulis_j {
            let c = trace_product(&r, q).abs();
            if c > certificate {
                certificate = c;
                best_p = p.clone();
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![best_p];
    for _ in 0..restarts.max(MIN_RESTARTS) {
        starts.push(matrix_sign(&crate::random::hermitian(di, &mut rng))?);
    }
    let mut best = certificate;
    let mut iterations = 0;
    for a0 in starts {
        let mut a = a0;
        let mut value = 0.0f64;
        for _ in 0..200 {
            iterations += 1;
            let b = matrix_sign(&response_on_j(&k, &a, di, dj))?;
            a = matrix_sign(&response_on_i(&k, &b, di, dj))?;
            let next = trace_product(&response_on_j(&k, &a, di, dj), &b).abs();
            let done = next - value <= 1e-13 * next.max(1e-300);
            value = value.max(next);
            if done {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(GroupCorrelation {
        value: best,
        pauli_certificate: certificate,
        iterations,
    })
}

fn connected_operator(joint: &DMatrix<Complex64>, di: usize, dj: usize) -> DMatrix<Complex64> {
    let mut rho_i = DMatrix::<Complex64>::zeros(di, di);
    let mut rho_j = DMatrix::<Complex64>::zeros(dj, dj);
    for xi in 0..di {
        for yi in 0..di {
            for xj in 0..dj {
                rho_i[(xi, yi)] += joint[(xi + xj * di, yi + xj * di)];
            }
        }
    }
    for xj in 0..dj {
        for yj in 0..dj {
            for xi in 0..di {
                rho_j[(xj, yj)] += joint[(xi + xj * di, xi + yj * di)];
            }
        }
    }
    joint - rho_j.kronecker(&rho_i)
}

/// `tr_I[K (A (x) 1)]`.
fn response_on_j(
    k: &DMatrix<Complex64>,
    a: &DMatrix<Complex64>,
    di: usize,
    dj: usize,
) -> DMatrix<Complex64> {
    let mut r = DMatrix::zeros(dj, dj);
    for xj in 0..dj {
        for yj in 0..dj {
            let mut acc = Complex64::new(0.0, 0.0);
            for xi in 0..di {
                for yi in 0..di {
                    acc += k[(xi + xj * di, yi + yj * di)] * a[(yi, xi)];
                }
            }
            r[(xj, yj)] = acc;
        }
    }
    r
}

/// `tr_J[K (1 (x) B)]`.
fn response_on_i(
    k: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    di: usize,
    dj: usize,
) -> DMatrix<Complex64> {
    let mut r = DMatrix::zeros(di, di);
    for xi in 0..di {
        for yi in 0..di {
            let mut acc = Complex64::new(0.0, 0.0);
            for xj in 0..dj {
                for yj in 0..dj {
                    acc += k[(xi + xj * di, yi + yj * di)] * b[(yj, xj)];
                }
            }
            r[(xi, yi)] = acc;
        }
    }
    r
}

fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a * b).trace().re
}

/// `sum_k sign(lambda_k) |v_k><v_k|`, with zero eigenvalues sent to `+1`.
fn matrix_sign(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = super::hermitian_eigen(&herm)?;
    let v = &eig.eigenvectors;
    let signs = eig
        .eigenvalues
        .map(|l| Complex64::new(if l < 0.0 { -1.0 } else { 1.0 }, 0.0));
    Ok(v * DMatrix::from_diagonal(&signs) * v.adjoint())
}

/// All non-identity Pauli strings on `n` sites as dense matrices.
fn pauli_basis(n: usize) -> Vec<DMatrix<Complex64>> {
    (1..1usize << (2 * n))
        .map(|code| {
            let letters = (0..n).filter_map(|s| match (code >> (2 * s)) & 3 {
                1 => Some((s, Pauli::X)),
                2 => Some((s, Pauli::Y)),
                3 => Some((s, Pauli::Z)),
                _ => None,
            });
            PauliString::from_letters(letters)
                .to_dense(n)
                .expect("group size is bounded")
        })
        .collect()
}
