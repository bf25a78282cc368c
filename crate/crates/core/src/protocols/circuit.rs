use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::smallsys::{apply_1q_strided, apply_2q_strided, conjugate_1q, conjugate_2q, PureState};

/// A gate on one site or on a nearest-neighbor pair `(first, first + 1)`.
///
/// Two-site matrices use the local index `2 q_first + q_{first+1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    One { site: usize, u: Matrix2<Complex64> },
    Two { first: usize, u: Matrix4<Complex64> },
}

impl Gate {
    fn sites(&self) -> (usize, usize) {
        match self {
            Gate::One { site, .. } => (*site, *site),
            Gate::Two { first, .. } => (*first, first + 1),
        }
    }

    fn adjoint(&self) -> Gate {
        match self {
            Gate::One { site, u } => Gate::One {
                site: *site,
                u: u.adjoint(),
            },
            Gate::Two { first, u } => Gate::Two {
                first: *first,
                u: u.adjoint(),
            },
        }
    }

    fn unitarity_defect(&self) -> f64 {
        match self {
            Gate::One { u, .. } => (u.adjoint() * u - Matrix2::identity()).norm(),
            Gate::Two { u, .. } => (u.adjoint() * u - Matrix4::identity()).norm(),
        }
    }

    fn apply_vec(&self, data: &mut [Complex64]) {
        let dim = data.len();
        match self {
            Gate::One { site, u } => apply_1q_strided(data, 0, 1, dim, *site, u),
            Gate::Two { first, u } => apply_2q_strided(data, 0, 1, dim, *first, first + 1, u),
        }
    }

    fn conjugate(&self, m: &mut DMatrix<Complex64>) {
        match self {
            Gate::One { site, u } => conjugate_1q(m, *site, u),
            Gate::Two { first, u } => conjugate_2q(m, *first, first + 1, u),
        }
    }
}

/// A finite-depth circuit of nearest-neighbor gates on an open chain.
///
/// `layers[0]` acts first. Gates within a layer act on disjoint sites.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCircuit {
    n: usize,
    layers: Vec<Vec<Gate>>,
}

impl LocalCircuit {
    pub fn new(n: usize, layers: Vec<Vec<Gate>>) -> Result<Self> {
        for (t, layer) in layers.iter().enumerate() {
            let mut used = vec![false; n];
            for g in layer {
                let (a, b) = g.sites();
                if b >= n {
                    return Err(invalid(format!(
                        "layer {t}: gate on site {b} of a {n}-site chain"
                    )));
                }
                if used[a] || used[b] {
                    return Err(invalid(format!(
                        "layer {t}: gates overlap on sites {a}..={b}"
                    )));
                }
                used[a] = true;
                used[b] = true;
                let defect = g.unitarity_defect();
                if defect > 1e-10 {
                    return Err(invalid(format!(
                        "layer {t}: gate is not unitary (defect {defect:.2e})"
                    )));
                }
            }
        }
        Ok(Self { n, layers })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            layers: Vec::new(),
        }
    }

    /// Alternating layers of Haar-random two-site gates.
    pub fn random_brickwork(n: usize, depth: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = (0..depth)
            .map(|t| {
                (t % 2..n.saturating_sub(1))
                    .step_by(2)
                    .map(|first| {
                        let u = crate::random::haar_unitary(4, &mut rng);
                        Gate::Two {
                            first,
                            u: Matrix4::from_iterator(u.iter().copied()),
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(n, layers)
    }

    /// A discrete domino cascade in each group of `group_len` sites.
    ///
    /// The source sits at the center of each group. The first layer puts it
    /// in `|+>` and entangles its right neighbor with a controlled
    /// `R_x(2 hop_angle)`; every later layer extends the excitation one site
    /// further in both directions with the same controlled rotation. Gates
    /// never cross group boundaries, so distinct groups stay unentangled.
    /// With `hop_angle = pi/2` each group grows a GHZ-like block.
    pub fn domino(n: usize, group_len: usize, depth: usize, hop_angle: f64) -> Result<Self> {
        if group_len < 2 || n % group_len != 0 {
            return Err(invalid(format!(
                "group length {group_len} must be at least 2 and divide {n}"
            )));
        }
        let (s, c) = hop_angle.sin_cos();
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let rc = Complex64::new(c, 0.0);
        let rs = Complex64::new(0.0, -s);
        // Control on the high local bit, target on the low one.
        let cr_right = Matrix4::new(one, o, o, o, o, one, o, o, o, o, rc, rs, o, o, rs, rc);
        // Control on the low local bit, target on the high one.
        let cr_left = Matrix4::new(one, o, o, o, o, rc, o, rs, o, o, one, o, o, rs, o, rc);
        let h = {
            let r = Complex64::new(0.5f64.sqrt(), 0.0);
            Matrix2::new(r, r, r, -r)
        };
        let h_first = kron2(&h, &Matrix2::identity());
        let mut layers = vec![Vec::new(); depth];
        for start in (0..n).step_by(group_len) {
            let end = start + group_len;
            let src = start + (group_len - 1) / 2;
            for (t, layer) in layers.iter_mut().enumerate() {
                if t == 0 {
                    layer.push(Gate::Two {
                        first: src,
                        u: cr_right * h_first,
                    });
                    continue;
                }
                let right = src + t;
                if right + 1 < end {
                    layer.push(Gate::Two {
                        first: right,
                        u: cr_right,
                    });
                }
                if src >= t && src - t >= start {
                    layer.push(Gate::Two {
                        first: src - t,
                        u: cr_left,
                    });
                }
            }
        }
        Self::new(n, layers)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    /// Number of layers containing a two-site gate; this bounds the light-cone radius.
    pub fn entangling_depth(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.iter().any(|g| matches!(g, Gate::Two { .. })))
            .count()
    }

    /// Support of `U^dagger O U` for an operator `O` on `sites`.
    pub fn light_cone(&self, sites: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        for &s in sites {
            inside[s] = true;
        }
        for layer in self.layers.iter().rev() {
            for g in layer {
                if let Gate::Two { first, .. } = g {
                    if inside[*first] || inside[first + 1] {
                        inside[*first] = true;
                        inside[first + 1] = true;
                    }
                }
            }
        }
        (0..self.n).filter(|&s| inside[s]).collect()
    }

    /// `U |psi>`.
    pub fn apply(&self, psi: &mut PureState) {
        for g in self.layers.iter().flatten() {
            psi.apply_gate(g);
        }
    }

    /// `U^dagger |psi>`.
    pub fn apply_adjoint(&self, psi: &mut PureState) {
        for g in self.layers.iter().flatten().rev() {
            psi.apply_gate(&g.adjoint());
        }
    }

    /// `U |0...0>`.
    pub fn prepare(&self) -> Result<PureState> {
        let mut psi = PureState::zero(self.n)?;
        self.apply(&mut psi);
        Ok(psi)
    }

    /// `m -> U^dagger m U`.
    pub fn conjugate_adjoint(&self, m: &mut DMatrix<Complex64>) {
        for g in self.layers.iter().flatten().rev() {
            g.adjoint().conjugate(m);
        }
    }

    /// Dense `2^n x 2^n` unitary, for small checks.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = crate::pauli::dense_dim(self.n)?;
        let mut u = DMatrix::<Complex64>::identity(dim, dim);
        for col in 0..dim {
            let mut c = u.column(col).into_owned();
            for g in self.layers.iter().flatten() {
                g.apply_vec(c.as_mut_slice());
            }
            u.set_column(col, &c);
        }
        Ok(u)
    }
}

impl PureState {
    pub(crate) fn apply_gate(&mut self, g: &Gate) {
        match g {
            Gate::One { site, u } => self.apply_1q(*site, u),
            Gate::Two { first, u } => self.apply_2q(*first, first + 1, u),
        }
    }
}

fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}
