use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::hermiticity_defect;
use crate::error::{Error, Result};
use crate::pauli::{dense_dim, WeightedPauliSum};

/// A Hermitian observable that can be averaged against dense states.
///
/// Both methods are linear in `rho`, so they may also be applied to
/// `d rho / d theta` to obtain the slope of the mean.
pub trait Observable {
    /// `Re tr(rho O)`.
    fn expectation(&self, rho: &DMatrix<Complex64>) -> Result<f64>;
    /// `Re tr(rho O^2)`.
    fn second_moment(&self, rho: &DMatrix<Complex64>) -> Result<f64>;
}

impl Observable for WeightedPauliSum {
    fn expectation(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        Ok(self.trace_with(rho).re)
    }

    fn second_moment(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        let o_rho = self.left_mul(rho);
        Ok(self.trace_with(&o_rho).re)
    }
}

/// An explicit Hermitian matrix together with its square.
#[derive(Clone, Debug)]
pub struct DenseObservable {
    op: DMatrix<Complex64>,
    op_sq: DMatrix<Complex64>,
}

impl DenseObservable {
    pub fn new(op: DMatrix<Complex64>) -> Result<Self> {
        if op.nrows() != op.ncols() {
            return Err(Error::DimensionMismatch {
                expected: op.nrows(),
                found: op.ncols(),
            });
        }
        let defect = hermiticity_defect(&op);
        let scale = op.norm().max(1.0);
        if defect > 1e-10 * scale {
            return Err(Error::NotHermitian(defect));
        }
        let op_sq = &op * &op;
        Ok(Self { op, op_sq })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.op
    }
}

fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: b.nrows(),
            found: a.nrows(),
        });
    }
    // tr(AB) = sum_ij A_ij B_ji; for Hermitian B that is sum_ij A_ij conj(B_ij).
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum())
}

impl Observable for DenseObservable {
    fn expectation(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        trace_product(rho, &self.op)
    }

    fn second_moment(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        trace_product(rho, &self.op_sq)
    }
}

/// An observable diagonal in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalObservable {
    values: Vec<f64>,
}

impl DiagonalObservable {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check(&self, rho: &DMatrix<Complex64>) -> Result<()> {
        if rho.nrows() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                found: rho.nrows(),
            });
        }
        Ok(())
    }
}

impl Observable for DiagonalObservable {
    fn expectation(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        self.check(rho)?;
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| v * rho[(x, x)].re)
            .sum())
    }

    fn second_moment(&self, rho: &DMatrix<Complex64>) -> Result<f64> {
        self.check(rho)?;
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| v * v * rho[(x, x)].re)
            .sum())
    }
}

/// A coefficient and its single-site factors.
type ProductTerm = (f64, Vec<(usize, Matrix2<Complex64>)>);

/// A real combination of tensor products of single-site operators.
#[derive(Clone, Debug, Default)]
pub struct LocalProductSum {
    terms: Vec<ProductTerm>,
}

impl LocalProductSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coeff * prod_k ops[k]`; each site may appear at most once.
    pub fn push(&mut self, coeff: f64, ops: Vec<(usize, Matrix2<Complex64>)>) {
        self.terms.push((coeff, ops));
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>> {
        let dim = dense_dim(n)?;
        let mut out = DMatrix::zeros(dim, dim);
        for (coeff, ops) in &self.terms {
            if let Some((s, _)) = ops.iter().find(|(s, _)| *s >= n) {
                return Err(Error::InvalidParameter(format!(
                    "site {s} outside a {n}-qubit register"
                )));
            }
            for y in 0..dim {
                for x in 0..dim {
                    let mut v = Complex64::new(*coeff, 0.0);
                    let mut free = x ^ y;
                    for (s, u) in ops {
                        v *= u[((x >> s) & 1, (y >> s) & 1)];
                        free &= !(1 << s);
                    }
                    if free == 0 {
                        out[(x, y)] += v;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_observable(&self, n: usize) -> Result<DenseObservable> {
        DenseObservable::new(self.to_dense(n)?)
    }
}
