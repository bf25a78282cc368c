//! Pauli strings with exact phase bookkeeping.
//!
//! A [`PauliString`] is a phase `i^k` times a tensor product of single-site
//! letters. Sites are numbered from zero and, whenever a dense matrix is
//! produced, site `s` is bit `s` of the computational-basis index, with
//! `|0>` the `+1` eigenstate of `Z`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::channels::PauliChannel;
use crate::error::{invalid, Error, Result};

/// A non-identity single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// The 2x2 matrix in the `{|0>, |1>}` basis.
    pub fn matrix(self) -> Matrix2<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => Matrix2::new(o, one, one, o),
            Pauli::Y => Matrix2::new(o, -i, i, o),
            Pauli::Z => Matrix2::new(one, o, o, -one),
        }
    }

    /// `self * other` written as a phase times a letter (`None` is the identity).
    pub fn product(self, other: Pauli) -> (Phase, Option<Pauli>) {
        use Pauli::*;
        match (self, other) {
            (a, b) if a == b => (Phase::ONE, None),
            (X, Y) => (Phase::I, Some(Z)),
            (Y, X) => (Phase::MINUS_I, Some(Z)),
            (Y, Z) => (Phase::I, Some(X)),
            (Z, Y) => (Phase::MINUS_I, Some(X)),
            (Z, X) => (Phase::I, Some(Y)),
            (X, Z) => (Phase::MINUS_I, Some(Y)),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A power of `i`, stored modulo four.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase::from_power(-(self.0 as i64))
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// A phase times a tensor product of Pauli letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    phase: Phase,
    letters: BTreeMap<usize, Pauli>,
}

impl PauliString {
    /// The identity string with unit phase.
    pub fn identity() -> Self {
        Self::default()
    }

    /// A single letter on one site.
    pub fn single(site: usize, letter: Pauli) -> Self {
        let mut letters = BTreeMap::new();
        letters.insert(site, letter);
        Self {
            phase: Phase::ONE,
            letters,
        }
    }

    /// Ordered product of single-site letters; repeated sites are multiplied out.
    pub fn from_letters(letters: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        letters.into_iter().fold(Self::identity(), |acc, (s, l)| {
            acc.multiply(&Self::single(s, l))
        })
    }

    /// The same letter on every site of `sites`.
    pub fn uniform(sites: impl IntoIterator<Item = usize>, letter: Pauli) -> Self {
        Self::from_letters(sites.into_iter().map(|s| (s, letter)))
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Letters in increasing site order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.letters.iter().map(|(&s, &l)| (s, l))
    }

    pub fn letter(&self, site: usize) -> Option<Pauli> {
        self.letters.get(&site).copied()
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    /// Number of `X` and `Y` letters.
    pub fn xy_weight(&self) -> usize {
        self.letters.values().filter(|l| **l != Pauli::Z).count()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.letters.keys().next_back().copied()
    }

    /// Hermitian exactly when the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.power() % 2 == 0
    }

    pub fn adjoint(&self) -> Self {
        Self {
            phase: self.phase.conj(),
            letters: self.letters.clone(),
        }
    }

    /// The same letters with unit phase.
    pub fn unsigned(&self) -> Self {
        Self {
            phase: Phase::ONE,
            letters: self.letters.clone(),
        }
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &PauliString) -> PauliString {
        let mut phase = self.phase * other.phase;
        let mut letters = self.letters.clone();
        for (&site, &b) in &other.letters {
            match letters.get(&site).copied() {
                None => {
                    letters.insert(site, b);
                }
                Some(a) => {
                    let (ph, l) = a.product(b);
                    phase = phase * ph;
                    match l {
                        Some(l) => {
                            letters.insert(site, l);
                        }
                        None => {
                            letters.remove(&site);
                        }
                    }
                }
            }
        }
        PauliString { phase, letters }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .filter(|(s, a)| other.letters.get(s).is_some_and(|b| b != *a))
            .count();
        anti % 2 == 0
    }

    /// Bit masks `(flip, sign, y_count)` describing the action on basis states.
    fn masks(&self) -> (usize, usize, u32) {
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut ny = 0u32;
        for (&s, &l) in &self.letters {
            assert!(
                s < usize::BITS as usize,
                "site {s} is outside the bit-mask range"
            );
            let bit = 1usize << s;
            match l {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ny += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign, ny)
    }

    /// `P|x> = c |y>`; returns `(c, y)`.
    pub fn apply_to_basis(&self, x: usize) -> (Complex64, usize) {
        let (flip, sign, ny) = self.masks();
        let base = self.phase * Phase::from_power(ny as i64);
        let mut c = base.to_complex();
        if (x & sign).count_ones() % 2 == 1 {
            c = -c;
        }
        (c, x ^ flip)
    }

    fn check_fits(&self, n: usize) -> Result<()> {
        match self.max_site() {
            Some(s) if s >= n => Err(invalid(format!(
                "string acts on site {s} of a {n}-qubit register"
            ))),
            _ => Ok(()),
        }
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>> {
        self.check_fits(n)?;
        let dim = dense_dim(n)?;
        let (flip, sign, ny) = self.masks();
        let base = (self.phase * Phase::from_power(ny as i64)).to_complex();
        let mut m = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            let c = if (x & sign).count_ones() % 2 == 1 {
                -base
            } else {
                base
            };
            m[(x ^ flip, x)] = c;
        }
        Ok(m)
    }

    /// `tr(P rho)` without forming `P`.
    pub fn trace_with(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        let dim = rho.nrows();
        let (flip, sign, ny) = self.masks();
        let base = (self.phase * Phase::from_power(ny as i64)).to_complex();
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..dim {
            let v = rho[(y, y ^ flip)];
            if (y & sign).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc * base
    }

    /// Adds `coeff * P * m` into `out`.
    pub fn left_mul_acc(
        &self,
        coeff: Complex64,
        m: &DMatrix<Complex64>,
        out: &mut DMatrix<Complex64>,
    ) {
        let dim = m.nrows();
        let (flip, sign, ny) = self.masks();
        let base = coeff * (self.phase * Phase::from_power(ny as i64)).to_complex();
        for x in 0..dim {
            let c = if (x & sign).count_ones() % 2 == 1 {
                -base
            } else {
                base
            };
            let y = x ^ flip;
            for col in 0..m.ncols() {
                out[(y, col)] += c * m[(x, col)];
            }
        }
    }
}

impl Mul for &PauliString {
    type Output = PauliString;
    fn mul(self, rhs: &PauliString) -> PauliString {
        self.multiply(rhs)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase.power() as usize];
        write!(f, "{prefix}")?;
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for (s, l) in self.letters() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{}", l.symbol(), s)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses space-separated tokens such as `"X0 Y3 Z4"`; `"I"` is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = PauliString::identity();
        for tok in s.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(invalid(format!("bad Pauli token {tok:?}"))),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| invalid(format!("bad site in token {tok:?}")))?;
            out = out.multiply(&PauliString::single(site, letter));
        }
        Ok(out)
    }
}

pub(crate) fn dense_dim(n: usize) -> Result<usize> {
    if n > crate::MAX_DENSE_QUBITS {
        return Err(Error::TooLarge(n));
    }
    Ok(1usize << n)
}

/// A complex linear combination of Pauli strings.
///
/// Terms are keyed by their unit-phase string, so equal strings are merged
/// and exact zeros are dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedPauliSum {
    terms: BTreeMap<PauliString, Complex64>,
}

impl WeightedPauliSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_string(coeff: Complex64, p: &PauliString) -> Self {
        let mut s = Self::zero();
        s.add_string(coeff, p);
        s
    }

    /// `sum_s coeff * letter_s` over the given sites.
    pub fn uniform_sum(sites: impl IntoIterator<Item = usize>, letter: Pauli, coeff: f64) -> Self {
        let mut s = Self::zero();
        for site in sites {
            s.add_string(
                Complex64::new(coeff, 0.0),
                &PauliString::single(site, letter),
            );
        }
        s
    }

    /// Adds `coeff * p`, folding the phase of `p` into the coefficient.
    pub fn add_string(&mut self, coeff: Complex64, p: &PauliString) {
        let c = coeff * p.phase().to_complex();
        let key = p.unsigned();
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            let key = p.unsigned();
            self.terms.remove(&key);
        }
    }

    pub fn add_sum(&mut self, other: &WeightedPauliSum) {
        for (p, c) in other.terms() {
            self.add_string(c, p);
        }
    }

    /// Terms as `(unit-phase string, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, Complex64)> + '_ {
        self.terms.iter().map(|(p, c)| (p, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        let c = self.terms.get(&p.unsigned()).copied().unwrap_or_default();
        c * p.phase().conj().to_complex()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = Self::zero();
        for (p, c) in self.terms() {
            out.add_string(c * factor, p);
        }
        out
    }

    pub fn multiply(&self, other: &WeightedPauliSum) -> WeightedPauliSum {
        let mut out = Self::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_string(ca * cb, &a.multiply(b));
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (p, c) in self.terms() {
            out.add_string(c.conj(), p);
        }
        out
    }

    /// Largest imaginary part of any coefficient.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Removes terms with `|c| <= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
        }
    }

    pub fn max_site(&self) -> Option<usize> {
        self.terms.keys().filter_map(|p| p.max_site()).max()
    }

    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>> {
        let dim = dense_dim(n)?;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in self.terms() {
            p.check_fits(n)?;
            m += p.to_dense(n)? * c;
        }
        Ok(m)
    }

    /// `tr(rho O)`.
    pub fn trace_with(&self, rho: &DMatrix<Complex64>) -> Complex64 {
        self.terms().map(|(p, c)| c * p.trace_with(rho)).sum()
    }

    /// `O m`.
    pub fn left_mul(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for (p, c) in self.terms() {
            p.left_mul_acc(c, m, &mut out);
        }
        out
    }

    /// Heisenberg-picture image under the single-round channel of `ch`.
    pub fn channel_dual(&self, ch: &PauliChannel) -> WeightedPauliSum {
        let mut out = Self::zero();
        for (p, c) in self.terms() {
            out.add_sum(&channel_dual(ch, p).scaled(c));
        }
        out
    }
}

/// `U^dagger P U` for `U = exp(-i theta Z)` on every site.
///
/// Each `X` becomes `cos(2 theta) X - sin(2 theta) Y` and each `Y` becomes
/// `cos(2 theta) Y + sin(2 theta) X`; `Z` letters are untouched.
pub fn rotate_z_conjugate(p: &PauliString, theta: f64) -> WeightedPauliSum {
    let (s, c) = (2.0 * theta).sin_cos();
    let mut partial: Vec<(Complex64, PauliString)> =
        vec![(p.phase().to_complex(), PauliString::identity())];
    for (site, letter) in p.letters() {
        let images: [(f64, Pauli); 2] = match letter {
            Pauli::X => [(c, Pauli::X), (-s, Pauli::Y)],
            Pauli::Y => [(c, Pauli::Y), (s, Pauli::X)],
            Pauli::Z => [(1.0, Pauli::Z), (0.0, Pauli::Z)],
        };
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (coeff, acc) in &partial {
            for &(w, l) in images.iter().filter(|(w, _)| *w != 0.0) {
                let mut grown = acc.clone();
                grown.letters.insert(site, l);
                next.push((*coeff * w, grown));
            }
        }
        partial = next;
    }
    let mut out = WeightedPauliSum::zero();
    for (coeff, string) in partial {
        out.add_string(coeff, &string);
    }
    out
}

/// Heisenberg image `R^dagger(N^dagger(P))` of a string under one channel round.
///
/// The noise part scales each letter by its Pauli eigenvalue; the rotation
/// is then undone with [`rotate_z_conjugate`].
pub fn channel_dual(ch: &PauliChannel, p: &PauliString) -> WeightedPauliSum {
    let scale: f64 = p.letters().map(|(_, l)| ch.letter_eigenvalue(l)).product();
    if scale == 0.0 {
        return WeightedPauliSum::zero();
    }
    rotate_z_conjugate(p, ch.theta()).scaled(Complex64::new(scale, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{embed_site_op, random_density, rng};
    use proptest::prelude::*;

    fn dense_letters(n: usize, p: &PauliString) -> DMatrix<Complex64> {
        let dim = 1 << n;
        let mut m = DMatrix::<Complex64>::identity(dim, dim) * p.phase().to_complex();
        for (s, l) in p.letters() {
            m = embed_site_op(n, s, &l.matrix()) * m;
        }
        m
    }

    fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(codes, ph)| {
            let letters = codes.iter().enumerate().filter_map(|(s, &c)| match c {
                1 => Some((s, Pauli::X)),
                2 => Some((s, Pauli::Y)),
                3 => Some((s, Pauli::Z)),
                _ => None,
            });
            PauliString::from_letters(letters).with_phase(Phase(ph))
        })
    }

    #[test]
    fn letter_products_match_matrices() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (ph, l) = a.product(b);
                let expect = a.matrix() * b.matrix();
                let got = l.map_or(Matrix2::identity(), |l| l.matrix()) * ph.to_complex();
                assert!((expect - got).norm() < 1e-15, "{a:?}{b:?}");
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        let p: PauliString = "X0 Y3 Z5".parse().unwrap();
        assert_eq!(p.to_string(), "X0 Y3 Z5");
        let q: PauliString = "X0 X0".parse().unwrap();
        assert_eq!(q, PauliString::identity());
        assert!("Q1".parse::<PauliString>().is_err());
    }

    #[test]
    fn rotated_single_letters() {
        let y = PauliString::single(0, Pauli::Y);
        let r = rotate_z_conjugate(&y, std::f64::consts::FRAC_PI_4);
        let x = PauliString::single(0, Pauli::X);
        assert!((r.coefficient(&x) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(r.coefficient(&y).norm() < 1e-15);
    }

    #[test]
    fn dephasing_dual_scales_transverse_letters() {
        let ch = PauliChannel::dephasing(0.1, 0.0).unwrap();
        let p: PauliString = "X0 Y1 Z2".parse().unwrap();
        let d = channel_dual(&ch, &p);
        assert_eq!(d.len(), 1);
        assert!((d.coefficient(&p).re - 0.64).abs() < 1e-15);
    }

    #[test]
    fn dual_matches_kraus_oracle() {
        let mut r = rng(7);
        let n = 3;
        let ch = PauliChannel::new(0.37, [0.7, 0.1, 0.05, 0.15]).unwrap();
        let rho = random_density(n, &mut r);
        let kraus = ch.kraus();
        let mut out = rho.clone();
        for s in 0..n {
            let mut acc = DMatrix::zeros(8, 8);
            for k in &kraus {
                let e = embed_site_op(n, s, k);
                acc += &e * &out * e.adjoint();
            }
            out = acc;
        }
        let p: PauliString = "X0 Y1 Z2".parse().unwrap();
        let lhs = p.trace_with(&out);
        let rhs = channel_dual(&ch, &p).trace_with(&rho);
        assert!((lhs - rhs).norm() < 1e-13, "{lhs} vs {rhs}");
    }

    proptest! {
        #[test]
        fn product_matches_dense(a in arb_string(4), b in arb_string(4)) {
            let lhs = a.multiply(&b).to_dense(4).unwrap();
            let rhs = dense_letters(4, &a) * dense_letters(4, &b);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn commutation_matches_dense(a in arb_string(3), b in arb_string(3)) {
            let da = a.to_dense(3).unwrap();
            let db = b.to_dense(3).unwrap();
            let comm = (&da * &db - &db * &da).norm();
            prop_assert_eq!(a.commutes_with(&b), comm < 1e-12);
        }

        #[test]
        fn rotation_matches_dense(p in arb_string(3), theta in -3.0f64..3.0) {
            let u1 = Matrix2::new(
                Complex64::from_polar(1.0, -theta), Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, theta),
            );
            let mut u = DMatrix::<Complex64>::identity(8, 8);
            for s in 0..3 {
                u = embed_site_op(3, s, &u1) * u;
            }
            let expect = u.adjoint() * p.to_dense(3).unwrap() * &u;
            let got = rotate_z_conjugate(&p, theta).to_dense(3).unwrap();
            prop_assert!((expect - got).norm() < 1e-12);
        }

        #[test]
        fn trace_and_left_mul_match_dense(p in arb_string(3), seed in 0u64..1000) {
            let mut r = rng(seed);
            let rho = random_density(3, &mut r);
            let d = p.to_dense(3).unwrap();
            prop_assert!(((&d * &rho).trace() - p.trace_with(&rho)).norm() < 1e-12);
            let sum = WeightedPauliSum::from_string(Complex64::new(0.3, -0.2), &p);
            prop_assert!((d * Complex64::new(0.3, -0.2) * &rho - sum.left_mul(&rho)).norm() < 1e-12);
        }
    }
}
