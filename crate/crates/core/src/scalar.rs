//! Exact scalar arithmetic: arbitrary-precision rationals and the real
//! quadratic extension `Q(sqrt(d))`.
//!
//! Every computation in this crate runs over [`Scalar`], a tagged union of a
//! rational and a quadratic-field element. Mixed arithmetic promotes the
//! rational side losslessly, so the golden-ratio systems (over `Q(sqrt(5))`)
//! and the Bernoulli systems (over `Q`) share one code path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Arbitrary-precision rational, always reduced, denominator positive.
pub type Rational = BigRational;

/// Errors from exact arithmetic and parsing.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mixed quadratic fields: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u32, u32),
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// Element `a + b*sqrt(d)` of a real quadratic field, `d` square-free.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub a: Rational,
    pub b: Rational,
    pub d: u32,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational, d: u32) -> Self {
        QuadExt { a, b, d }
    }

    /// Field norm `a^2 - d*b^2`; zero exactly when the element is zero.
    pub fn norm(&self) -> Rational {
        let d = Rational::from_integer(BigInt::from(self.d));
        &self.a * &self.a - d * &self.b * &self.b
    }

    pub fn conjugate(&self) -> Self {
        QuadExt::new(self.a.clone(), -self.b.clone(), self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Sign of `a + b*sqrt(d)` decided by exact case analysis on the signs of
    /// `a`, `b` and of the norm `a^2 - d b^2`; no floating point.
    pub fn sign(&self) -> Ordering {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            // a and b*sqrt(d) compete: compare a^2 against d*b^2.
            (Ordering::Greater, Ordering::Less) => rational_sign(&self.norm()),
            (Ordering::Less, Ordering::Greater) => rational_sign(&self.norm()).reverse(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap() + self.b.to_f64().unwrap() * (self.d as f64).sqrt()
    }
}

fn rational_sign(r: &Rational) -> Ordering {
    if r.is_zero() {
        Ordering::Equal
    } else if r.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Exact scalar: a rational or an element of `Q(sqrt(d))`.
///
/// Quadratic values with `b = 0` are canonicalized back to `Rat`, so equality
/// is well defined across promotion.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(Rational),
    Quad(QuadExt),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rat(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Rat(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::Rat(r)
    }

    /// `a + b*sqrt(d)`, canonicalized to `Rat` when `b = 0`.
    pub fn quad(a: Rational, b: Rational, d: u32) -> Self {
        if b.is_zero() {
            Scalar::Rat(a)
        } else {
            Scalar::Quad(QuadExt::new(a, b, d))
        }
    }

    /// The golden ratio `(1 + sqrt(5))/2`.
    pub fn golden() -> Self {
        Scalar::quad(Rational::new(1.into(), 2.into()), Rational::new(1.into(), 2.into()), 5)
    }

    /// `sqrt(5)` as an exact scalar.
    pub fn sqrt5() -> Self {
        Scalar::quad(Rational::zero(), Rational::one(), 5)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Quad(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Quad(_) => false,
        }
    }

    /// Exact sign: `Less`, `Equal` or `Greater` against zero.
    pub fn sign(&self) -> Ordering {
        match self {
            Scalar::Rat(r) => rational_sign(r),
            Scalar::Quad(q) => q.sign(),
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.sign() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Complex conjugation; the identity on this real field. Call sites that
    /// pair dual elements keep the conjugation explicit.
    pub fn conj(&self) -> Scalar {
        self.clone()
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(self * &rhs.inverse_unchecked())
    }

    pub fn inverse(&self) -> Result<Scalar, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(self.inverse_unchecked())
    }

    fn inverse_unchecked(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.recip()),
            Scalar::Quad(q) => {
                // (a + b sqrt d)^{-1} = (a - b sqrt d) / (a^2 - d b^2)
                let n = q.norm();
                Scalar::quad(&q.a / &n, -&q.b / &n, q.d)
            }
        }
    }

    /// Integer power, negative exponents via exact inversion.
    pub fn pow(&self, e: i64) -> Scalar {
        if e == 0 {
            return Scalar::one();
        }
        let base = if e < 0 {
            self.inverse().expect("zero base with negative exponent")
        } else {
            self.clone()
        };
        let mut acc = Scalar::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap(),
            Scalar::Quad(q) => q.to_f64(),
        }
    }

    /// Exact square root of a nonnegative rational, when one exists in `Q`.
    pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
        if r.is_negative() {
            return None;
        }
        let ns = r.numer().sqrt();
        let ds = r.denom().sqrt();
        if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
            Some(Rational::new(ns, ds))
        } else {
            None
        }
    }

    /// Square root inside the scalar's own field: `Q` or `Q(sqrt(d))`.
    ///
    /// For a rational input `r`, tries `sqrt(r)` in `Q` and then `y*sqrt(d)`
    /// with `y = sqrt(r/d)` (using `d = 5`). For a quadratic input, solves
    /// `(x + y sqrt(d))^2 = a + b sqrt(d)` exactly. Returns the nonnegative
    /// root, or `None` if no root lies in the field.
    pub fn sqrt_in_field(&self) -> Option<Scalar> {
        if self.sign() == Ordering::Less {
            return None;
        }
        match self {
            Scalar::Rat(r) => {
                if let Some(s) = Scalar::rational_sqrt(r) {
                    return Some(Scalar::Rat(s));
                }
                let d = Rational::from_integer(BigInt::from(5));
                Scalar::rational_sqrt(&(r / &d)).map(|y| Scalar::quad(Rational::zero(), y, 5))
            }
            Scalar::Quad(q) => {
                // x^2 + d y^2 = a and 2 x y = b: x^2 is a root of
                // t^2 - a t + d b^2 / 4 = 0, so t = (a +/- sqrt(a^2 - d b^2))/2.
                let n = Scalar::rational_sqrt(&q.norm())?;
                let two = Rational::from_integer(BigInt::from(2));
                for t in [(&q.a + &n) / &two, (&q.a - &n) / &two] {
                    if let Some(x) = Scalar::rational_sqrt(&t) {
                        if x.is_zero() {
                            continue;
                        }
                        let y = &q.b / (&two * &x);
                        let cand = Scalar::quad(x, y, q.d);
                        if &(&cand * &cand) == self && cand.sign() != Ordering::Less {
                            return Some(cand);
                        }
                        let neg = -&cand;
                        if &(&neg * &neg) == self && neg.sign() != Ordering::Less {
                            return Some(neg);
                        }
                    }
                }
                None
            }
        }
    }

    /// Exact rational part view; `None` for genuine quadratic values.
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Quad(_) => None,
        }
    }

    fn promote_pair(lhs: &Scalar, rhs: &Scalar) -> (QuadExt, QuadExt) {
        match (lhs, rhs) {
            (Scalar::Quad(p), Scalar::Quad(q)) => {
                assert_eq!(p.d, q.d, "mixed quadratic fields sqrt({}) vs sqrt({})", p.d, q.d);
                (p.clone(), q.clone())
            }
            (Scalar::Quad(p), Scalar::Rat(r)) => {
                (p.clone(), QuadExt::new(r.clone(), Rational::zero(), p.d))
            }
            (Scalar::Rat(r), Scalar::Quad(q)) => {
                (QuadExt::new(r.clone(), Rational::zero(), q.d), q.clone())
            }
            (Scalar::Rat(_), Scalar::Rat(_)) => unreachable!(),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => {
                let (p, q) = Scalar::promote_pair(self, rhs);
                Scalar::quad(&p.a + &q.a, &p.b + &q.b, p.d)
            }
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            _ => {
                let (p, q) = Scalar::promote_pair(self, rhs);
                Scalar::quad(&p.a - &q.a, &p.b - &q.b, p.d)
            }
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => {
                let (p, q) = Scalar::promote_pair(self, rhs);
                let d = Rational::from_integer(BigInt::from(p.d));
                // (a + b s)(c + e s) = (ac + d be) + (ae + bc) s
                let a = &p.a * &q.a + d * &p.b * &q.b;
                let b = &p.a * &q.b + &p.b * &q.a;
                Scalar::quad(a, b, p.d)
            }
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self.checked_div(rhs).expect("scalar division by zero")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Quad(q) => Scalar::Quad(QuadExt::new(-q.a.clone(), -q.b.clone(), q.d)),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Scalar) -> Ordering {
        (self - other).sign()
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}/{}", r.numer(), r.denom())
}

impl fmt::Display for Scalar {
    /// `num/den` for rationals, `a/b+c/e√d` (sign folded) for quadratics.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => fmt_rational(r, f),
            Scalar::Quad(q) => {
                fmt_rational(&q.a, f)?;
                if q.b.is_negative() {
                    write!(f, "-")?;
                    fmt_rational(&-&q.b, f)?;
                } else {
                    write!(f, "+")?;
                    fmt_rational(&q.b, f)?;
                }
                write!(f, "\u{221a}{}", q.d)
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let err = || ArithError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let num = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let den = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(num, den))
        }
        None => {
            let num = BigInt::from_str(s.trim()).map_err(|_| err())?;
            Ok(Rational::from_integer(num))
        }
    }
}

impl FromStr for Scalar {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, ArithError> {
        let s = s.trim();
        if let Some(pos) = s.find('\u{221a}') {
            let d: u32 = s[pos + '\u{221a}'.len_utf8()..]
                .parse()
                .map_err(|_| ArithError::Parse(s.to_string()))?;
            let head = &s[..pos];
            // Split "a/b+c/e" or "a/b-c/e" at the sign separating the parts
            // (skip a leading sign on `a`).
            let mut split = None;
            for (i, ch) in head.char_indices().skip(1) {
                if (ch == '+' || ch == '-') && !head[..i].ends_with('/') {
                    split = Some((i, ch));
                }
            }
            let (i, sign) = split.ok_or_else(|| ArithError::Parse(s.to_string()))?;
            let a = parse_rational(&head[..i])?;
            let mut b = parse_rational(&head[i + 1..])?;
            if sign == '-' {
                b = -b;
            }
            Ok(Scalar::quad(a, b, d))
        } else {
            Ok(Scalar::Rat(parse_rational(s)?))
        }
    }
}

/// Complex number with exact real and imaginary parts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ComplexScalar {
    pub re: Scalar,
    pub im: Scalar,
}

impl ComplexScalar {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        ComplexScalar { re, im }
    }

    pub fn zero() -> Self {
        ComplexScalar::new(Scalar::zero(), Scalar::zero())
    }

    pub fn from_real(re: Scalar) -> Self {
        ComplexScalar::new(re, Scalar::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexScalar::new(self.re.clone(), -&self.im)
    }

    /// `|z|^2 = re^2 + im^2`, exact.
    pub fn norm_sq(&self) -> Scalar {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn mul(&self, rhs: &ComplexScalar) -> Self {
        ComplexScalar::new(
            &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        )
    }

    pub fn add(&self, rhs: &ComplexScalar) -> Self {
        ComplexScalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }

    pub fn sub(&self, rhs: &ComplexScalar) -> Self {
        ComplexScalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        ComplexScalar::new(&self.re * s, &self.im * s)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = ComplexScalar::from_real(Scalar::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(txt: &str) -> Scalar {
        txt.parse().unwrap()
    }

    #[test]
    fn rational_arithmetic_examples() {
        assert_eq!(&s("1/2") + &s("1/3"), s("5/6"));
        assert_eq!(&s("1/2") * &Scalar::zero(), s("0/1"));
        assert_eq!(s("3/4").checked_div(&s("3/4")).unwrap(), s("1/1"));
        assert_eq!(
            Scalar::one().checked_div(&Scalar::zero()),
            Err(ArithError::DivisionByZero)
        );
    }

    #[test]
    fn golden_ratio_identities() {
        let phi = Scalar::golden();
        // phi^2 = phi + 1
        assert_eq!(&phi * &phi, &phi + &Scalar::one());
        assert_eq!(&phi * &phi, Scalar::quad(Rational::new(3.into(), 2.into()), Rational::new(1.into(), 2.into()), 5));
        // 1/phi = phi - 1
        assert_eq!(phi.inverse().unwrap(), &phi - &Scalar::one());
        // identity division
        assert_eq!(&Scalar::one() / &Scalar::one(), Scalar::one());
    }

    #[test]
    fn quad_powers_cancel() {
        let phi = Scalar::golden();
        for n in 0..=50 {
            assert_eq!(&phi.pow(n) * &phi.pow(-n), Scalar::one());
        }
    }

    #[test]
    fn exact_ordering() {
        let phi = Scalar::golden();
        assert!(phi > Scalar::one());
        assert!(phi.pow(-1) < Scalar::one());
        assert!(phi.pow(-2) < phi.pow(-1));
        assert!(-&phi < Scalar::zero());
        // |−φ^{-2}| vs φ^{-1}
        assert!((-&phi.pow(-2)).abs() < phi.pow(-1));
        // sign cases with competing terms: 2 - sqrt(5) < 0 < 3 - sqrt(5)
        let m = Scalar::quad(Rational::from_integer(2.into()), Rational::from_integer((-1).into()), 5);
        assert_eq!(m.sign(), Ordering::Less);
        let p = Scalar::quad(Rational::from_integer(3.into()), Rational::from_integer((-1).into()), 5);
        assert_eq!(p.sign(), Ordering::Greater);
    }

    #[test]
    fn display_round_trip() {
        let vals = [
            Scalar::ratio(5, 6),
            Scalar::ratio(-7, 3),
            Scalar::zero(),
            Scalar::golden(),
            Scalar::golden().pow(-2),
            -&Scalar::golden().pow(3),
        ];
        for v in &vals {
            let txt = v.to_string();
            let back: Scalar = txt.parse().unwrap();
            assert_eq!(&back, v, "round-trip through {txt:?}");
        }
        assert_eq!(Scalar::zero().to_string(), "0/1");
        assert_eq!(Scalar::golden().to_string(), "1/2+1/2\u{221a}5");
        assert_eq!(Scalar::golden().pow(-2).to_string(), "3/2-1/2\u{221a}5");
    }

    #[test]
    fn complex_norms() {
        let i = ComplexScalar::new(Scalar::zero(), Scalar::one());
        assert_eq!(i.norm_sq(), Scalar::one());
        assert_eq!(i.pow(2), ComplexScalar::from_real(Scalar::from_int(-1)));
        let z = ComplexScalar::new(Scalar::ratio(3, 5), Scalar::ratio(4, 5));
        assert_eq!(z.norm_sq(), Scalar::one());
        assert_eq!(z.mul(&z.conj()), ComplexScalar::from_real(Scalar::one()));
    }
}
