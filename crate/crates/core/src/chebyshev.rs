//! Chebyshev propagation of `exp(-i H t)` for real symmetric sparse `H`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// A real symmetric operator given by its action on vectors.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `y = H x`; `y` is overwritten.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// An upper bound on the spectral radius.
    fn spectral_bound(&self) -> f64;
}

/// Bessel functions `J_0(x) .. J_kmax(x)` by Miller's backward recurrence.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    // Start well above both the order range and the argument.
    let start = {
        let m = kmax.max(ax.ceil() as usize);
        let s = m + 20 + (40.0 * m as f64).sqrt() as usize;
        s + (s % 2)
    };
    let mut j_next = 0.0f64;
    let mut j_cur = 1e-300f64;
    let mut norm = 0.0f64;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / ax * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if k - 1 <= kmax {
            out[k - 1] = j_cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += j_cur;
    for (k, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && k % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `exp(-i H t) psi` to near machine precision.
pub fn propagate<H: SymmetricOperator + ?Sized>(
    h: &H,
    psi: &[Complex64],
    t: f64,
) -> Result<Vec<Complex64>> {
    let dim = h.dim();
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    if !t.is_finite() {
        return Err(invalid("propagation time must be finite"));
    }
    let a = h.spectral_bound();
    if a.is_nan() || a <= 0.0 || t == 0.0 {
        return Ok(psi.to_vec());
    }
    let x = a * t;
    let kmax = (x.abs() + 30.0 + 10.0 * x.abs().cbrt()).ceil() as usize;
    let j = bessel_j_sequence(x, kmax);
    let kstop = (0..=kmax).rev().find(|&k| j[k].abs() > 1e-18).unwrap_or(0);

    let scaled = |v: &[Complex64], out: &mut [Complex64]| {
        h.apply(v, out);
        for z in out.iter_mut() {
            *z /= a;
        }
    };
    let mut out: Vec<Complex64> = psi.iter().map(|z| z * j[0]).collect();
    let mut prev = psi.to_vec();
    let mut cur = vec![Complex64::new(0.0, 0.0); dim];
    scaled(&prev, &mut cur);
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut phase = Complex64::new(0.0, -1.0);
    for (k, jk) in j.iter().enumerate().take(kstop + 1).skip(1) {
        let c = phase * (2.0 * jk);
        for (o, v) in out.iter_mut().zip(&cur) {
            *o += c * v;
        }
        if k == kstop {
            break;
        }
        scaled(&cur, &mut tmp);
        for (t_, p_) in tmp.iter_mut().zip(&prev) {
            *t_ = 2.0 * *t_ - p_;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut tmp);
        phase *= Complex64::new(0.0, -1.0);
    }
    Ok(out)
}
