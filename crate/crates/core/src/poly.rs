//! Dense univariate polynomials over [`Scalar`].

use crate::scalar::Scalar;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial as a dense coefficient list, index = degree.
///
/// The zero polynomial is the empty list; otherwise the highest-degree
/// coefficient is nonzero.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Scalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Poly { coeffs: vec![c] }.normalized()
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly::from_coeffs(vec![Scalar::zero(), Scalar::one()])
    }

    /// `c * x^n`.
    pub fn monomial(c: Scalar, n: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); n + 1];
        coeffs[n] = c;
        Poly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        Poly { coeffs }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last().is_some_and(Scalar::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of `x^n` (zero beyond the stored degree).
    pub fn coeff(&self, n: usize) -> Scalar {
        self.coeffs.get(n).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    /// Horner evaluation, exact.
    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Composition `self(inner(x))` by Horner over polynomials.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Poly::constant(c.clone());
        }
        acc
    }

    /// Composition with the affine map `x -> offset + scale*x`.
    pub fn compose_affine(&self, offset: &Scalar, scale: &Scalar) -> Poly {
        self.compose(&Poly::from_coeffs(vec![offset.clone(), scale.clone()]))
    }

    /// Largest `m` with `(x - root)^m` dividing `self`; usize::MAX-free,
    /// returns 0 when `root` is not a root, and `None` for the zero polynomial
    /// (every multiplicity).
    pub fn root_multiplicity(&self, root: &Scalar) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let mut m = 0;
        let mut cur = self.clone();
        while !cur.is_zero() && cur.eval(root).is_zero() {
            cur = cur.deflate(root);
            m += 1;
        }
        Some(m)
    }

    /// Synthetic division by `(x - root)`; requires `root` to be a root.
    pub fn deflate(&self, root: &Scalar) -> Poly {
        debug_assert!(self.eval(root).is_zero());
        let n = self.coeffs.len();
        if n <= 1 {
            return Poly::zero();
        }
        let mut out = vec![Scalar::zero(); n - 1];
        let mut carry = Scalar::zero();
        for k in (0..n - 1).rev() {
            carry = &self.coeffs[k + 1] + &(&carry * root);
            out[k] = carry.clone();
        }
        Poly::from_coeffs(out)
    }

    /// Divide by leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            None => Poly::zero(),
            Some(lc) => {
                let inv = lc.inverse().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
        }
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(&self.coeff(k) + &rhs.coeff(k));
        }
        Poly::from_coeffs(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(&self.coeff(k) - &rhs.coeff(k));
        }
        Poly::from_coeffs(out)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Scalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Binomial coefficient as an exact scalar.
pub fn binomial(n: usize, k: usize) -> Scalar {
    if k > n {
        return Scalar::zero();
    }
    let k = k.min(n - k);
    let mut acc = Scalar::one();
    for i in 0..k {
        acc = &acc * &Scalar::from_int((n - i) as i64);
        acc = &acc / &Scalar::from_int((i + 1) as i64);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        // root of x - 1/2
        let p = Poly::from_coeffs(vec![Scalar::ratio(-1, 2), Scalar::one()]);
        assert_eq!(p.eval(&Scalar::ratio(1, 2)), Scalar::zero());
        // x^2 at 1/3
        let q = Poly::monomial(Scalar::one(), 2);
        assert_eq!(q.eval(&Scalar::ratio(1, 3)), Scalar::ratio(1, 9));
        // x^2 - x + 1/6 at 0
        let b2 = Poly::from_coeffs(vec![Scalar::ratio(1, 6), Scalar::from_int(-1), Scalar::one()]);
        assert_eq!(b2.eval(&Scalar::zero()), Scalar::ratio(1, 6));
    }

    #[test]
    fn compose_affine_degree_preserved() {
        let p = Poly::monomial(Scalar::one(), 3);
        let q = p.compose_affine(&Scalar::ratio(1, 2), &Scalar::ratio(1, 2));
        // ((1 + x)/2)^3 = 1/8 + 3/8 x + 3/8 x^2 + 1/8 x^3
        assert_eq!(
            q.coeffs(),
            &[
                Scalar::ratio(1, 8),
                Scalar::ratio(3, 8),
                Scalar::ratio(3, 8),
                Scalar::ratio(1, 8)
            ]
        );
    }

    #[test]
    fn deflate_and_multiplicity() {
        // (x - 1/2)^2 (x + 1)
        let root = Scalar::ratio(1, 2);
        let f1 = Poly::from_coeffs(vec![-&root, Scalar::one()]);
        let f2 = Poly::from_coeffs(vec![Scalar::one(), Scalar::one()]);
        let p = &(&f1 * &f1) * &f2;
        assert_eq!(p.root_multiplicity(&root), Some(2));
        assert_eq!(p.root_multiplicity(&Scalar::from_int(-1)), Some(1));
        assert_eq!(p.root_multiplicity(&Scalar::zero()), Some(0));
        let d = p.deflate(&root);
        assert_eq!(d, &f1 * &f2);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(6, 3), Scalar::from_int(20));
        assert_eq!(binomial(5, 0), Scalar::one());
        assert_eq!(binomial(4, 5), Scalar::zero());
    }
}
