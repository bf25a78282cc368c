//! Expectation values of rotated-`Y` strings on block states.
//!
//! A string `prod_{k in S} Y^{phi_k}` with `Y^phi = cos(phi) Y + sin(phi) X`
//! flips the sites of `S`. On a block state only the vacuum and single blocks
//! carry weight, so an expectation reduces to the few pairs `(x, x xor S)`
//! that are both blocks. Sets of sites are stored by their boundary points:
//! the interval `a ..= b` is `{a, b + 1}`, and the symmetric difference of two
//! site sets is the symmetric difference of their boundaries.

use num_complex::Complex64;

use super::sector::TwoDwState;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Up to two disjoint intervals, as sorted boundary points in window-local coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Boundary {
    pts: [usize; 4],
    len: usize,
}

impl Boundary {
    pub(crate) fn interval(first: usize, last: usize) -> Self {
        Self {
            pts: [first, last + 1, 0, 0],
            len: 2,
        }
    }

    fn points(&self) -> &[usize] {
        &self.pts[..self.len]
    }

    /// Boundary of the symmetric difference, or `None` when it has more than four points.
    pub(crate) fn xor(&self, other: &Self) -> Option<Self> {
        let (a, b) = (self.points(), other.points());
        let mut out = Self {
            pts: [0; 4],
            len: 0,
        };
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = if j == b.len() || (i < a.len() && a[i] < b[j]) {
                i += 1;
                a[i - 1]
            } else if i == a.len() || b[j] < a[i] {
                j += 1;
                b[j - 1]
            } else {
                i += 1;
                j += 1;
                continue;
            };
            if out.len == 4 {
                return None;
            }
            out.pts[out.len] = next;
            out.len += 1;
        }
        Some(out)
    }

    /// Number of sites covered.
    pub(crate) fn weight(&self) -> usize {
        self.points().chunks(2).map(|c| c[1] - c[0]).sum()
    }
}

/// Evaluates string expectations on one window at a fixed `theta`.
pub(crate) struct StringEngine<'a> {
    state: &'a TwoDwState,
    /// `prefix[k] = phi_0 + ... + phi_{k-1}` over window-local sites.
    prefix: Vec<f64>,
    /// `exp(2 i theta len) / sqrt(2)` for block lengths `0 ..= w`.
    rot: Vec<Complex64>,
}

impl<'a> StringEngine<'a> {
    /// `phases` are the window-local measurement angles.
    pub(crate) fn new(state: &'a TwoDwState, phases: &[f64], theta: f64) -> Self {
        let w = state.width();
        debug_assert_eq!(phases.len(), w);
        let mut prefix = Vec::with_capacity(w + 1);
        prefix.push(0.0);
        for p in phases {
            prefix.push(prefix.last().unwrap() + p);
        }
        let rot = (0..=w)
            .map(|l| Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, 2.0 * theta * l as f64))
            .collect();
        Self { state, prefix, rot }
    }

    /// Coefficient of the basis state with boundary `{a, b}` (the vacuum when empty).
    fn coeff(&self, x: Option<(usize, usize)>) -> Complex64 {
        match x {
            None => self.rot[0],
            Some((a, b)) => self.state.local(a, b - 1) * self.rot[b - a],
        }
    }

    /// `<y| S |x>` for `y = x xor S`.
    fn element(&self, s: &Boundary, x: Option<(usize, usize)>) -> Complex64 {
        let mut n1 = 0usize;
        let mut phi1 = 0.0;
        let mut n_all = 0usize;
        let mut phi_all = 0.0;
        for c in s.points().chunks(2) {
            n_all += c[1] - c[0];
            phi_all += self.prefix[c[1]] - self.prefix[c[0]];
            if let Some((a, b)) = x {
                let lo = a.max(c[0]);
                let hi = b.min(c[1]);
                if lo < hi {
                    n1 += hi - lo;
                    phi1 += self.prefix[hi] - self.prefix[lo];
                }
            }
        }
        let n0 = n_all - n1;
        let phi0 = phi_all - phi1;
        // i^{n0} (-i)^{n1} = i^{n0 - n1}
        let quarter = (n0 + 3 * n1) % 4;
        let ipow = [Complex64::new(1.0, 0.0), I, Complex64::new(-1.0, 0.0), -I][quarter];
        ipow * Complex64::from_polar(1.0, phi1 - phi0)
    }

    fn pair(
        &self,
        s: &Boundary,
        x: Option<(usize, usize)>,
        y: Option<(usize, usize)>,
        acc: &mut (Complex64, Complex64),
    ) {
        let cx = self.coeff(x);
        let cy = self.coeff(y);
        if cx == Complex64::new(0.0, 0.0) || cy == Complex64::new(0.0, 0.0) {
            return;
        }
        let len = |z: Option<(usize, usize)>| z.map_or(0.0, |(a, b)| (b - a) as f64);
        let term = cy.conj() * cx * self.element(s, x);
        acc.0 += term;
        acc.1 += term * I * (2.0 * (len(x) - len(y)));
    }

    /// Noiseless `<S>` and `d<S>/d theta`.
    pub(crate) fn expectation(&self, s: &Boundary) -> (f64, f64) {
        let p = s.points();
        let w = self.state.width();
        let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        match p.len() {
            0 => return (1.0, 0.0),
            2 => {
                let (a, c) = (p[0], p[1]);
                let block = Some((a, c));
                self.pair(s, None, block, &mut acc);
                self.pair(s, block, None, &mut acc);
                for q in (0..=w).filter(|&q| q != a && q != c) {
                    let xa = Some((a.min(q), a.max(q)));
                    let xc = Some((c.min(q), c.max(q)));
                    self.pair(s, xa, xc, &mut acc);
                    self.pair(s, xc, xa, &mut acc);
                }
            }
            4 => {
                const SPLITS: [((usize, usize), (usize, usize)); 6] = [
                    ((0, 1), (2, 3)),
                    ((2, 3), (0, 1)),
                    ((0, 2), (1, 3)),
                    ((1, 3), (0, 2)),
                    ((0, 3), (1, 2)),
                    ((1, 2), (0, 3)),
                ];
                for ((xa, xb), (ya, yb)) in SPLITS {
                    self.pair(s, Some((p[xa], p[xb])), Some((p[ya], p[yb])), &mut acc);
                }
            }
            _ => unreachable!("strings have at most two intervals"),
        }
        (acc.0.re, acc.1.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domino::sector::two_dw_evolve;
    use crate::smallsys::LocalProductSum;
    use nalgebra::Matrix2;
    use rand::Rng;

    fn rotated_y(phi: f64) -> Matrix2<Complex64> {
        let (s, c) = phi.sin_cos();
        Matrix2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(s, -c),
            Complex64::new(s, c),
            Complex64::new(0.0, 0.0),
        )
    }

    #[test]
    fn xor_of_boundaries() {
        let a = Boundary::interval(2, 5);
        let b = Boundary::interval(4, 8);
        let d = a.xor(&b).unwrap();
        assert_eq!(d.points(), &[2, 4, 6, 9]);
        assert_eq!(d.weight(), 5);
        assert_eq!(a.xor(&a).unwrap().points(), &[] as &[usize]);
        assert_eq!(
            Boundary::interval(0, 3)
                .xor(&Boundary::interval(4, 6))
                .unwrap()
                .points(),
            &[0, 7]
        );
        assert!(d.xor(&Boundary::interval(12, 13)).is_none());
    }

    #[test]
    fn matches_dense_strings() {
        let n = 9;
        let st = two_dw_evolve(n, (1, 7), 4, 0.9).unwrap();
        let psi = st.to_pure_state().unwrap();
        let mut r = crate::testutil::rng(8);
        let phases: Vec<f64> = (0..st.width()).map(|_| r.random_range(-3.0..3.0)).collect();
        let theta = 0.37;
        let engine = StringEngine::new(&st, &phases, theta);
        let mut rotated = psi.amplitudes().clone();
        for (x, a) in rotated.iter_mut().enumerate() {
            *a *= Complex64::from_polar(1.0, -theta * crate::smallsys::total_z(n, x));
        }
        let expect = |sites: &[usize]| {
            let mut op = LocalProductSum::new();
            op.push(
                1.0,
                sites
                    .iter()
                    .map(|&k| (k + 1, rotated_y(phases[k])))
                    .collect(),
            );
            let m = op.to_dense(n).unwrap();
            rotated.dotc(&(m * &rotated)).re
        };
        let cases: Vec<Vec<usize>> = vec![
            vec![3],
            (2..6).collect(),
            (0..7).collect(),
            vec![1, 2, 5, 6],
            vec![0, 4, 5, 6],
            vec![3, 4, 6],
        ];
        for sites in cases {
            let mut b = Boundary {
                pts: [0; 4],
                len: 0,
            };
            for &k in &sites {
                b = b.xor(&Boundary::interval(k, k)).unwrap();
            }
            let (e, _) = engine.expectation(&b);
            let want = expect(&sites);
            assert!((e - want).abs() < 1e-12, "{sites:?}: {e} vs {want}");
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let st = two_dw_evolve(30, (5, 20), 12, 2.0).unwrap();
        let phases: Vec<f64> = (0..st.width()).map(|k| 0.3 * k as f64).collect();
        let h = 1e-6;
        for s in [
            Boundary::interval(10, 14),
            Boundary::interval(9, 12)
                .xor(&Boundary::interval(14, 15))
                .unwrap(),
        ] {
            let (_, d) = StringEngine::new(&st, &phases, 0.2).expectation(&s);
            let (ep, _) = StringEngine::new(&st, &phases, 0.2 + h).expectation(&s);
            let (em, _) = StringEngine::new(&st, &phases, 0.2 - h).expectation(&s);
            assert!((d - (ep - em) / (2.0 * h)).abs() < 1e-7);
        }
    }
}
