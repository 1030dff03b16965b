//! Rational functions of one variable, stored as a polynomial numerator over
//! a factored denominator `prod (x - pole)^order`.
//!
//! Normalization cancels numerator roots against poles, so the recorded pole
//! orders are genuine: evaluation at a listed pole really diverges. This is
//! what makes exact "pole of order k+1" and "regular at lambda" claims
//! decidable.

use crate::poly::Poly;
use crate::scalar::{ComplexScalar, Scalar};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatFunError {
    #[error("evaluation at a pole of order {order}")]
    PoleHit { order: usize },
    #[error("partial fractions require a proper rational function")]
    Improper,
}

/// One term `residue / (x - pole)^order` of a partial-fraction expansion.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PartialFractionTerm {
    pub pole: Scalar,
    pub order: usize,
    pub residue: Scalar,
}

/// `numerator(x) / prod_i (x - poles[i].0)^{poles[i].1}` with distinct pole
/// locations, fully cancelled.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    numerator: Poly,
    poles: Vec<(Scalar, usize)>,
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction { numerator: Poly::zero(), poles: vec![] }
    }

    pub fn from_poly(p: Poly) -> Self {
        RationalFunction { numerator: p, poles: vec![] }
    }

    pub fn constant(c: Scalar) -> Self {
        RationalFunction::from_poly(Poly::constant(c))
    }

    /// `numerator / prod (x - pole)^order`. Repeated locations are merged,
    /// then common factors with the numerator cancelled.
    pub fn new(numerator: Poly, poles: Vec<(Scalar, usize)>) -> Self {
        let mut merged: Vec<(Scalar, usize)> = Vec::new();
        for (loc, ord) in poles {
            if ord == 0 {
                continue;
            }
            match merged.iter_mut().find(|(l, _)| *l == loc) {
                Some((_, o)) => *o += ord,
                None => merged.push((loc, ord)),
            }
        }
        merged.sort_by(|a, b| b.0.cmp(&a.0));
        RationalFunction { numerator, poles: merged }.cancelled()
    }

    /// `c / (x - pole)^order`.
    pub fn simple(c: Scalar, pole: Scalar, order: usize) -> Self {
        RationalFunction::new(Poly::constant(c), vec![(pole, order)])
    }

    fn cancelled(mut self) -> Self {
        if self.numerator.is_zero() {
            self.poles.clear();
            return self;
        }
        let mut out = Vec::with_capacity(self.poles.len());
        for (loc, ord) in std::mem::take(&mut self.poles) {
            let mult = self.numerator.root_multiplicity(&loc).unwrap_or(0);
            let cancel = mult.min(ord);
            for _ in 0..cancel {
                self.numerator = self.numerator.deflate(&loc);
            }
            if ord > cancel {
                out.push((loc, ord - cancel));
            }
        }
        self.poles = out;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    /// Distinct pole locations with orders, descending by location.
    pub fn poles(&self) -> &[(Scalar, usize)] {
        &self.poles
    }

    /// Exact order of the pole at `x0`; zero when regular there.
    pub fn pole_order(&self, x0: &Scalar) -> usize {
        self.poles
            .iter()
            .find(|(loc, _)| loc == x0)
            .map_or(0, |(_, ord)| *ord)
    }

    fn denominator(&self) -> Poly {
        let mut den = Poly::one();
        for (loc, ord) in &self.poles {
            let factor = Poly::from_coeffs(vec![-loc, Scalar::one()]);
            den = &den * &factor.pow(*ord);
        }
        den
    }

    /// Exact evaluation; hitting a pole reports its order.
    pub fn eval(&self, x: &Scalar) -> Result<Scalar, RatFunError> {
        let order = self.pole_order(x);
        if order > 0 {
            return Err(RatFunError::PoleHit { order });
        }
        Ok(&self.numerator.eval(x) / &self.denominator().eval(x))
    }

    /// Exact evaluation at a complex point with scalar components; real
    /// points on a pole report the pole's order.
    pub fn eval_complex(&self, z: &ComplexScalar) -> Result<ComplexScalar, RatFunError> {
        if z.im.is_zero() {
            let order = self.pole_order(&z.re);
            if order > 0 {
                return Err(RatFunError::PoleHit { order });
            }
        }
        let horner = |p: &Poly| {
            let mut acc = ComplexScalar::zero();
            for c in p.coeffs().iter().rev() {
                acc = acc.mul(z).add(&ComplexScalar::from_real(c.clone()));
            }
            acc
        };
        let num = horner(&self.numerator);
        let den = horner(&self.denominator());
        // (a+bi)/(c+di) = (a+bi)(c-di) / (c^2+d^2), exactly
        let n2 = den.norm_sq();
        let prod = num.mul(&den.conj());
        Ok(ComplexScalar::new(&prod.re / &n2, &prod.im / &n2))
    }

    /// Float evaluation at a complex point `re + i*im` (plot/grid output).
    pub fn eval_f64(&self, re: f64, im: f64) -> (f64, f64) {
        let ceval = |p: &Poly| {
            let (mut ar, mut ai) = (0.0_f64, 0.0_f64);
            for c in p.coeffs().iter().rev() {
                let (nr, ni) = (ar * re - ai * im, ar * im + ai * re);
                ar = nr + c.to_f64();
                ai = ni;
            }
            (ar, ai)
        };
        let (nr, ni) = ceval(&self.numerator);
        let (dr, di) = ceval(&self.denominator());
        let d2 = dr * dr + di * di;
        ((nr * dr + ni * di) / d2, (ni * dr - nr * di) / d2)
    }

    pub fn add(&self, rhs: &RationalFunction) -> RationalFunction {
        // Common denominator: union of poles at max order.
        let mut union: Vec<(Scalar, usize)> = self.poles.clone();
        for (loc, ord) in &rhs.poles {
            match union.iter_mut().find(|(l, _)| l == loc) {
                Some((_, o)) => *o = (*o).max(*ord),
                None => union.push((loc.clone(), *ord)),
            }
        }
        let lift = |rf: &RationalFunction| {
            let mut num = rf.numerator.clone();
            for (loc, ord) in &union {
                let have = rf.pole_order(loc);
                let factor = Poly::from_coeffs(vec![-loc, Scalar::one()]);
                num = &num * &factor.pow(ord - have);
            }
            num
        };
        RationalFunction::new(&lift(self) + &lift(rhs), union)
    }

    pub fn sub(&self, rhs: &RationalFunction) -> RationalFunction {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction { numerator: -&self.numerator, poles: self.poles.clone() }
    }

    pub fn scale(&self, s: &Scalar) -> RationalFunction {
        if s.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction { numerator: self.numerator.scale(s), poles: self.poles.clone() }
    }

    /// Multiply by `1 / (x - pole)`.
    pub fn div_linear(&self, pole: &Scalar) -> RationalFunction {
        if self.is_zero() {
            return RationalFunction::zero();
        }
        let mut poles = self.poles.clone();
        poles.push((pole.clone(), 1));
        RationalFunction::new(self.numerator.clone(), poles)
    }

    /// Partial-fraction expansion; requires deg(num) < deg(den).
    ///
    /// Terms are grouped per pole with orders `1..=order`, zero residues
    /// dropped, and the expansion re-sums to `self` exactly.
    pub fn partial_fractions(&self) -> Result<Vec<PartialFractionTerm>, RatFunError> {
        if self.is_zero() {
            return Ok(vec![]);
        }
        let den_deg: usize = self.poles.iter().map(|(_, o)| o).sum();
        let num_deg = self.numerator.degree().unwrap_or(0);
        if self.poles.is_empty() || num_deg >= den_deg {
            return Err(RatFunError::Improper);
        }
        let mut terms = Vec::new();
        for (loc, ord) in &self.poles {
            // Taylor-expand numerator / (denominator without this pole's
            // factor) around the pole; coefficient j gives the residue of
            // order (ord - j).
            let mut rest = Poly::one();
            for (other, o) in &self.poles {
                if other != loc {
                    let f = Poly::from_coeffs(vec![-other, Scalar::one()]);
                    rest = &rest * &f.pow(*o);
                }
            }
            let num_shift = taylor_shift(&self.numerator, loc);
            let den_shift = taylor_shift(&rest, loc);
            let series = series_divide(&num_shift, &den_shift, *ord);
            for (j, g) in series.iter().enumerate() {
                if !g.is_zero() {
                    terms.push(PartialFractionTerm {
                        pole: loc.clone(),
                        order: ord - j,
                        residue: g.clone(),
                    });
                }
            }
        }
        Ok(terms)
    }

    /// Re-sum a partial-fraction expansion.
    pub fn from_partial_fractions(terms: &[PartialFractionTerm]) -> RationalFunction {
        let mut acc = RationalFunction::zero();
        for t in terms {
            acc = acc.add(&RationalFunction::simple(t.residue.clone(), t.pole.clone(), t.order));
        }
        acc
    }
}

/// Coefficients of `p(x0 + t)` as a polynomial in `t`.
fn taylor_shift(p: &Poly, x0: &Scalar) -> Poly {
    p.compose_affine(x0, &Scalar::one())
}

/// First `n` coefficients of the power series `num/den` (den(0) != 0).
fn series_divide(num: &Poly, den: &Poly, n: usize) -> Vec<Scalar> {
    let d0 = den.coeff(0);
    assert!(!d0.is_zero(), "series division needs den(0) != 0");
    let inv = d0.inverse().unwrap();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = num.coeff(k);
        for j in 0..k {
            acc = &acc - &(&den.coeff(k - j) * &out[j]);
        }
        out.push(&acc * &inv);
    }
    out
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.numerator)?;
        for (loc, ord) in &self.poles {
            write!(f, " / (x - ({loc}))^{ord}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(txt: &str) -> Scalar {
        txt.parse().unwrap()
    }

    #[test]
    fn eval_examples() {
        let r = RationalFunction::simple(Scalar::one(), Scalar::one(), 1);
        assert_eq!(r.eval(&Scalar::from_int(2)).unwrap(), Scalar::one());

        let r2 = RationalFunction::simple(Scalar::one(), s("1/2"), 2);
        assert_eq!(r2.eval(&Scalar::one()).unwrap(), Scalar::from_int(4));

        let r3 = RationalFunction::simple(Scalar::one(), Scalar::one(), 1)
            .add(&RationalFunction::simple(Scalar::one(), s("1/2"), 1));
        assert_eq!(
            r3.eval(&s("1/2")),
            Err(RatFunError::PoleHit { order: 1 })
        );
    }

    #[test]
    fn cancellation_removes_phantom_poles() {
        // (x - 1/2) / (x - 1/2)^2 = 1 / (x - 1/2)
        let num = Poly::from_coeffs(vec![s("-1/2"), Scalar::one()]);
        let r = RationalFunction::new(num, vec![(s("1/2"), 2)]);
        assert_eq!(r.pole_order(&s("1/2")), 1);
        // 1/(x-1) - 1/(x-1) = 0
        let a = RationalFunction::simple(Scalar::one(), Scalar::one(), 1);
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.sub(&a).poles().len(), 0);
    }

    #[test]
    fn partial_fraction_round_trip() {
        // (3x^2 + 1) / ((x-1)^2 (x+2))
        let num = Poly::from_coeffs(vec![Scalar::one(), Scalar::zero(), Scalar::from_int(3)]);
        let r = RationalFunction::new(num, vec![(Scalar::one(), 2), (Scalar::from_int(-2), 1)]);
        let terms = r.partial_fractions().unwrap();
        let back = RationalFunction::from_partial_fractions(&terms);
        assert_eq!(back, r);
        // residue of order 2 at 1 is (3 + 1)/(1 + 2) = 4/3
        let t = terms.iter().find(|t| t.pole == Scalar::one() && t.order == 2).unwrap();
        assert_eq!(t.residue, s("4/3"));
    }

    #[test]
    fn float_eval_matches_exact() {
        let r = RationalFunction::simple(Scalar::from_int(3), s("1/4"), 1);
        let (re, im) = r.eval_f64(2.0, 0.0);
        let exact = r.eval(&Scalar::from_int(2)).unwrap().to_f64();
        assert!((re - exact).abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn exact_complex_evaluation() {
        // 1/(x - 1) at x = i: 1/(i - 1) = (-1 - i)/2
        let r = RationalFunction::simple(Scalar::one(), Scalar::one(), 1);
        let i = ComplexScalar::new(Scalar::zero(), Scalar::one());
        let v = r.eval_complex(&i).unwrap();
        assert_eq!(v, ComplexScalar::new(s("-1/2"), s("-1/2")));
        // real pole still detected through the complex path
        let at_pole = r.eval_complex(&ComplexScalar::from_real(Scalar::one()));
        assert_eq!(at_pole, Err(RatFunError::PoleHit { order: 1 }));
        // agrees with the real evaluator on the real line
        let x = s("7/3");
        let via_complex = r.eval_complex(&ComplexScalar::from_real(x.clone())).unwrap();
        assert_eq!(via_complex.re, r.eval(&x).unwrap());
        assert!(via_complex.im.is_zero());
    }
}
