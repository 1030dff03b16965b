//! One-sided generalized spectral engine: representation matrices of the
//! transfer operator on polynomial test spaces, eigenpolynomials and their
//! dual functionals, spectral decompositions, analytically continued
//! resolvents, Riesz projections, and iteration asymptotics.

use crate::matrix::Matrix;
use crate::observable::{BlockObservable, Observable, ObservableError};
use crate::poly::{binomial, Poly};
use crate::scalar::Scalar;
use crate::shift::ShiftSystem;
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectraError {
    #[error("observable degree {got} exceeds the truncation degree {max}")]
    DegreeOverflow { got: usize, max: usize },
    #[error("repeated eigenvalue {0}: degenerate systems are unsupported here")]
    Degenerate(String),
    #[error("block eigenvalues do not lie in the scalar field")]
    IrrationalEigenvalue,
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("evaluation at the generalized eigenvalue {0}")]
    PoleHit(String),
}

/// Basis of the truncated test space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BasisTag {
    /// `1, h, ..., h^n`.
    Monomial,
    /// `1_{C[0]}, 1_{C[1]}, 1_{C[0]}h, 1_{C[1]}h, ...`.
    Block,
}

/// Exact matrix of the transfer operator restricted to the degree-`n` space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RepMatrix {
    pub matrix: Matrix,
    pub basis: BasisTag,
    pub degree: usize,
}

impl RepMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Diagonal entries (monomial basis) or the 2x2 diagonal blocks flattened
    /// (block basis).
    pub fn diagonal(&self) -> Vec<Scalar> {
        (0..self.size()).map(|i| self.matrix.at(i, i).clone()).collect()
    }
}

/// Matrix of the transfer operator on the degree-`n` test space, exact, with
/// the triangular shape asserted.
pub fn rep_matrix(sys: &ShiftSystem, n: usize) -> Result<RepMatrix, SpectraError> {
    if sys.is_golden_mean() {
        let dim = 2 * (n + 1);
        let mut m = Matrix::zeros(dim, dim);
        for k in 0..=n {
            for part in 0..2usize {
                let mut b = BlockObservable::new(Poly::zero(), Poly::zero());
                b.parts[part] = Poly::monomial(Scalar::one(), k);
                let out = crate::observable::pf_apply(sys, &Observable::Block(b))?;
                let Observable::Block(out) = out else { unreachable!() };
                for j in 0..=n {
                    for p in 0..2usize {
                        *m.at_mut(2 * j + p, 2 * k + part) = out.parts[p].coeff(j);
                    }
                }
            }
        }
        // block upper triangular with 2x2 blocks on the diagonal
        for col in 0..dim {
            for row in 0..dim {
                if row / 2 > col / 2 {
                    assert!(m.at(row, col).is_zero(), "block triangularity violated");
                }
            }
        }
        Ok(RepMatrix { matrix: m, basis: BasisTag::Block, degree: n })
    } else {
        let dim = n + 1;
        let mut m = Matrix::zeros(dim, dim);
        for k in 0..=n {
            let f = Observable::poly(Poly::monomial(Scalar::one(), k));
            let out = crate::observable::pf_apply(sys, &f)?;
            let Observable::Poly(out) = out else { unreachable!() };
            for j in 0..=n {
                *m.at_mut(j, k) = out.poly.coeff(j);
            }
        }
        for col in 0..dim {
            for row in col + 1..dim {
                assert!(m.at(row, col).is_zero(), "upper triangularity violated");
            }
        }
        Ok(RepMatrix { matrix: m, basis: BasisTag::Monomial, degree: n })
    }
}

/// One generalized eigenvalue with its eigenvector in basis coordinates.
#[derive(Clone, Debug)]
struct EigenPair {
    value: Scalar,
    vector: Vec<Scalar>,
}

/// Generalized eigensystem of the transfer operator on the degree-`n` space:
/// eigenvalues (descending modulus, positive first on ties), eigenvectors as
/// exact coefficient columns, and the dual functionals as rows of the exact
/// inverse change-of-basis matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    system: ShiftSystem,
    rep: RepMatrix,
    eigenvalues: Vec<Scalar>,
    /// columns = eigenvector coordinates in the representation basis
    change_of_basis: Matrix,
    dual: Matrix,
}

/// Spectral expansion of one observable: `(eigenvalue, coefficient)` pairs
/// with zero coefficients dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralDecomposition {
    pub terms: Vec<(Scalar, Scalar)>,
}

/// Exact result of iterating the transfer operator `k` times.
#[derive(Clone, Debug)]
pub struct IterateReport {
    pub result: Observable,
    /// coefficient of the constant eigenfunction = the invariant average
    pub limit: Scalar,
    /// modulus of the largest non-leading eigenvalue present in `f`
    pub rate: Option<Scalar>,
    /// `V^k f` minus the limit term, exact
    pub residual: Observable,
}

/// Vector-valued rational function: simple poles at generalized eigenvalues,
/// one residue observable per pole.
#[derive(Clone, Debug)]
pub struct ObservableResolvent {
    pub terms: Vec<(Scalar, Observable)>,
}

impl EigenSystem {
    /// Build the eigensystem for the degree-`n` truncation.
    pub fn new(sys: &ShiftSystem, n: usize) -> Result<Self, SpectraError> {
        let rep = rep_matrix(sys, n)?;
        let mut pairs = Vec::new();
        match rep.basis {
            BasisTag::Monomial => {
                for k in 0..rep.size() {
                    pairs.push(rep.matrix.at(k, k).clone());
                }
            }
            BasisTag::Block => {
                for k in 0..=n {
                    // eigenvalues of the 2x2 diagonal block via the quadratic
                    // formula, with the square root taken inside the field
                    let a = rep.matrix.at(2 * k, 2 * k).clone();
                    let d = rep.matrix.at(2 * k + 1, 2 * k + 1).clone();
                    let b = rep.matrix.at(2 * k, 2 * k + 1).clone();
                    let c = rep.matrix.at(2 * k + 1, 2 * k).clone();
                    let tr = &a + &d;
                    let det = &(&a * &d) - &(&b * &c);
                    let disc = &(&tr * &tr) - &(&Scalar::from_int(4) * &det);
                    let root = disc
                        .sqrt_in_field()
                        .ok_or(SpectraError::IrrationalEigenvalue)?;
                    let two = Scalar::from_int(2);
                    pairs.push(&(&tr + &root) / &two);
                    pairs.push(&(&tr - &root) / &two);
                }
            }
        }
        // distinctness is a precondition for the dual basis
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                if pairs[i] == pairs[j] {
                    return Err(SpectraError::Degenerate(pairs[i].to_string()));
                }
            }
        }
        let mut eigen: Vec<EigenPair> = Vec::with_capacity(pairs.len());
        for value in pairs {
            let shifted = rep.matrix.sub_scaled_identity(&value);
            let ns = shifted.nullspace();
            assert_eq!(ns.len(), 1, "eigenspace of {value} must be one-dimensional");
            let mut vector = ns.into_iter().next().unwrap();
            // normalization: leading coordinate one. Monomial basis: the
            // highest nonzero coordinate (monic polynomial). Block basis: the
            // block-0 coordinate of the top degree present.
            let lead = match rep.basis {
                BasisTag::Monomial => vector.iter().rposition(|c| !c.is_zero()).unwrap(),
                BasisTag::Block => {
                    let top = vector.iter().rposition(|c| !c.is_zero()).unwrap();
                    let idx = 2 * (top / 2);
                    assert!(
                        !vector[idx].is_zero(),
                        "block-leading coefficient vanishes for {value}"
                    );
                    idx
                }
            };
            let inv = vector[lead].inverse().unwrap();
            for c in vector.iter_mut() {
                *c = &*c * &inv;
            }
            eigen.push(EigenPair { value, vector });
        }
        // descending modulus, positive sign first on ties
        eigen.sort_by(|x, y| {
            let ax = x.value.abs();
            let ay = y.value.abs();
            match ay.cmp(&ax) {
                Ordering::Equal => y.value.cmp(&x.value),
                ord => ord,
            }
        });
        let size = rep.size();
        let mut change = Matrix::zeros(size, size);
        for (col, p) in eigen.iter().enumerate() {
            for (row, c) in p.vector.iter().enumerate() {
                *change.at_mut(row, col) = c.clone();
            }
        }
        let dual = change.inverse().expect("eigenvector basis is invertible");
        Ok(EigenSystem {
            system: sys.clone(),
            rep,
            eigenvalues: eigen.into_iter().map(|p| p.value).collect(),
            change_of_basis: change,
            dual,
        })
    }

    pub fn system(&self) -> &ShiftSystem {
        &self.system
    }

    pub fn degree(&self) -> usize {
        self.rep.degree
    }

    pub fn size(&self) -> usize {
        self.rep.size()
    }

    pub fn basis(&self) -> BasisTag {
        self.rep.basis
    }

    pub fn rep_matrix(&self) -> &RepMatrix {
        &self.rep
    }

    pub fn eigenvalues(&self) -> &[Scalar] {
        &self.eigenvalues
    }

    /// Change-of-basis matrix whose columns are eigenvector coordinates.
    pub fn change_of_basis(&self) -> &Matrix {
        &self.change_of_basis
    }

    /// Exact inverse of the change of basis; row `i` realizes the `i`-th dual
    /// functional on basis coordinates.
    pub fn dual_matrix(&self) -> &Matrix {
        &self.dual
    }

    /// The `i`-th eigenfunction as an observable.
    pub fn eigenfunction(&self, i: usize) -> Observable {
        self.observable_from_coords(&self.change_of_basis.column(i))
    }

    /// Basis coordinates of an observable in the truncated test space.
    pub fn coords(&self, f: &Observable) -> Result<Vec<Scalar>, SpectraError> {
        let n = self.rep.degree;
        match (self.rep.basis, f) {
            (BasisTag::Monomial, Observable::Poly(p)) => {
                let deg = p.poly.degree().unwrap_or(0);
                if !p.poly.is_zero() && deg > n {
                    return Err(SpectraError::DegreeOverflow { got: deg, max: n });
                }
                Ok((0..=n).map(|k| p.poly.coeff(k)).collect())
            }
            (BasisTag::Block, Observable::Poly(p)) => self.coords(&Observable::Block(
                BlockObservable::from_poly(&p.poly),
            )),
            (BasisTag::Block, Observable::Block(b)) => {
                let deg = b.parts.iter().filter_map(Poly::degree).max().unwrap_or(0);
                if !b.is_zero() && deg > n {
                    return Err(SpectraError::DegreeOverflow { got: deg, max: n });
                }
                let mut v = Vec::with_capacity(2 * (n + 1));
                for k in 0..=n {
                    v.push(b.parts[0].coeff(k));
                    v.push(b.parts[1].coeff(k));
                }
                Ok(v)
            }
            _ => Err(ObservableError::MixedKinds.into()),
        }
    }

    /// Observable from basis coordinates.
    pub fn observable_from_coords(&self, v: &[Scalar]) -> Observable {
        match self.rep.basis {
            BasisTag::Monomial => Observable::poly(Poly::from_coeffs(v.to_vec())),
            BasisTag::Block => {
                let q0 = Poly::from_coeffs(v.iter().step_by(2).cloned().collect());
                let q1 = Poly::from_coeffs(v.iter().skip(1).step_by(2).cloned().collect());
                Observable::Block(BlockObservable::new(q0, q1))
            }
        }
    }

    /// Expand `f` over the eigenfunctions; exact, zero terms dropped.
    pub fn decompose(&self, f: &Observable) -> Result<SpectralDecomposition, SpectraError> {
        let x = self.coords(f)?;
        let c = self.dual.mul_vec(&x);
        Ok(SpectralDecomposition {
            terms: self
                .eigenvalues
                .iter()
                .zip(c)
                .filter(|(_, c)| !c.is_zero())
                .map(|(l, c)| (l.clone(), c))
                .collect(),
        })
    }

    /// Rebuild the observable from a decomposition (exact reconstruction).
    pub fn reconstruct(&self, d: &SpectralDecomposition) -> Observable {
        let size = self.size();
        let mut coords = vec![Scalar::zero(); size];
        for (value, coeff) in &d.terms {
            let i = self
                .eigenvalues
                .iter()
                .position(|l| l == value)
                .expect("decomposition eigenvalue belongs to this system");
            let col = self.change_of_basis.column(i);
            for (row, c) in col.iter().enumerate() {
                coords[row] = &coords[row] + &(coeff * c);
            }
        }
        self.observable_from_coords(&coords)
    }

    /// `V^k f` exactly, with the invariant-average limit and mixing rate.
    pub fn iterate(&self, f: &Observable, k: u64) -> Result<IterateReport, SpectraError> {
        let d = self.decompose(f)?;
        let mut coords = vec![Scalar::zero(); self.size()];
        let mut limit = Scalar::zero();
        let mut rate: Option<Scalar> = None;
        for (value, coeff) in &d.terms {
            let i = self.eigenvalues.iter().position(|l| l == value).unwrap();
            let scaled = coeff * &value.pow(k as i64);
            let col = self.change_of_basis.column(i);
            for (row, c) in col.iter().enumerate() {
                coords[row] = &coords[row] + &(&scaled * c);
            }
            if i == 0 {
                limit = coeff.clone();
            } else {
                let a = value.abs();
                if rate.as_ref().is_none_or(|r| &a > r) {
                    rate = Some(a);
                }
            }
        }
        let result = self.observable_from_coords(&coords);
        // residual = V^k f - limit * (leading eigenfunction)
        let lead = self.change_of_basis.column(0);
        let mut res = coords;
        for (row, c) in lead.iter().enumerate() {
            res[row] = &res[row] - &(&limit * c);
        }
        Ok(IterateReport {
            result,
            limit,
            rate,
            residual: self.observable_from_coords(&res),
        })
    }

    /// The generalized resolvent of `f`: simple poles at the eigenvalues
    /// present in `f`'s expansion, carrying residue observables.
    pub fn resolvent(&self, f: &Observable) -> Result<ObservableResolvent, SpectraError> {
        let d = self.decompose(f)?;
        let mut terms = Vec::new();
        for (value, coeff) in &d.terms {
            let i = self.eigenvalues.iter().position(|l| l == value).unwrap();
            let residue = self
                .observable_from_coords(&scale_vec(&self.change_of_basis.column(i), coeff));
            terms.push((value.clone(), residue));
        }
        Ok(ObservableResolvent { terms })
    }

    /// Riesz projection of `f` at `lambda`: the resolvent residue there. The
    /// flag reports whether `lambda` is actually a generalized eigenvalue of
    /// the truncation; otherwise the projection is zero.
    pub fn riesz_projection(
        &self,
        f: &Observable,
        lambda: &Scalar,
    ) -> Result<(Observable, bool), SpectraError> {
        let in_spectrum = self.eigenvalues.contains(lambda);
        let r = self.resolvent(f)?;
        let proj = r
            .terms
            .into_iter()
            .find(|(pole, _)| pole == lambda)
            .map(|(_, res)| res)
            .unwrap_or_else(|| self.observable_from_coords(&vec![Scalar::zero(); self.size()]));
        Ok((proj, in_spectrum))
    }
}

fn scale_vec(v: &[Scalar], s: &Scalar) -> Vec<Scalar> {
    v.iter().map(|c| c * s).collect()
}

impl ObservableResolvent {
    /// Pole locations with orders (all simple).
    pub fn pole_table(&self) -> Vec<(Scalar, usize)> {
        self.terms.iter().map(|(p, _)| (p.clone(), 1)).collect()
    }

    /// Evaluate at an exact non-pole point; hitting a pole reports it.
    pub fn eval(
        &self,
        es: &EigenSystem,
        lambda: &Scalar,
    ) -> Result<Observable, SpectraError> {
        if let Some((pole, _)) = self.terms.iter().find(|(p, _)| p == lambda) {
            return Err(SpectraError::PoleHit(pole.to_string()));
        }
        let mut coords = vec![Scalar::zero(); es.size()];
        for (pole, residue) in &self.terms {
            let factor = Scalar::one().checked_div(&(lambda - pole)).unwrap();
            let rc = es.coords(residue)?;
            for (row, c) in rc.iter().enumerate() {
                coords[row] = &coords[row] + &(&factor * c);
            }
        }
        Ok(es.observable_from_coords(&coords))
    }
}

/// The `n`-th Bernoulli polynomial, exact, from the number recurrence
/// `sum_{k<=n} C(n+1,k) B_k = 0` with `B_0 = 1`.
pub fn bernoulli_poly(n: usize) -> Poly {
    let mut numbers: Vec<Scalar> = Vec::with_capacity(n + 1);
    numbers.push(Scalar::one());
    for m in 1..=n {
        let mut acc = Scalar::zero();
        for (k, b) in numbers.iter().enumerate() {
            acc = &acc + &(&binomial(m + 1, k) * b);
        }
        numbers.push(-&(&acc / &Scalar::from_int(m as i64 + 1)));
    }
    let mut coeffs = vec![Scalar::zero(); n + 1];
    for (k, b) in numbers.iter().enumerate() {
        // B_n(x) = sum_k C(n,k) B_k x^{n-k}
        coeffs[n - k] = &binomial(n, k) * b;
    }
    Poly::from_coeffs(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observable::inner_product;

    fn s(t: &str) -> Scalar {
        t.parse().unwrap()
    }

    #[test]
    fn rep_matrix_full2() {
        let sys = ShiftSystem::full2_uniform();
        let rm = rep_matrix(&sys, 1).unwrap();
        assert_eq!(rm.matrix.row(0), &[Scalar::one(), s("1/4")]);
        assert_eq!(rm.matrix.row(1), &[Scalar::zero(), s("1/2")]);
    }

    #[test]
    fn rep_matrix_weighted_diagonal() {
        let sys = ShiftSystem::bernoulli(vec![s("1/3"), s("2/3")]).unwrap();
        let rm = rep_matrix(&sys, 1).unwrap();
        assert_eq!(rm.matrix.at(0, 0), &Scalar::one());
        assert_eq!(rm.matrix.at(1, 1), &s("5/9"));
    }

    #[test]
    fn rep_matrix_golden_block0() {
        let sys = ShiftSystem::golden_mean();
        let rm = rep_matrix(&sys, 0).unwrap();
        let phi = Scalar::golden();
        assert_eq!(rm.matrix.row(0), &[phi.pow(-1), phi.pow(-2)]);
        assert_eq!(rm.matrix.row(1), &[Scalar::one(), Scalar::zero()]);
    }

    #[test]
    fn eigenpolys_are_bernoulli() {
        let sys = ShiftSystem::full2_uniform();
        let es = EigenSystem::new(&sys, 10).unwrap();
        // eigenvalues 2^{-k} descending
        for (k, l) in es.eigenvalues().iter().enumerate() {
            assert_eq!(l, &Scalar::ratio(1, 1 << k));
        }
        for k in 0..=10usize {
            let Observable::Poly(p) = es.eigenfunction(k) else { panic!() };
            assert_eq!(p.poly, bernoulli_poly(k), "Phi_{k}");
        }
    }

    #[test]
    fn eigen_equation_holds() {
        for (name, degree) in [
            ("full2-uniform", 16),
            ("fullbeta-uniform", 8),
            ("fullbeta-weighted", 8),
            ("golden-mean", 16),
        ] {
            let sys = ShiftSystem::preset(name).unwrap();
            let es = EigenSystem::new(&sys, degree).unwrap();
            for i in 0..es.size() {
                let phi = es.eigenfunction(i);
                let v = crate::observable::pf_apply(&sys, &phi).unwrap();
                let expect = match &phi {
                    Observable::Poly(p) => {
                        Observable::poly(p.poly.scale(&es.eigenvalues()[i]))
                    }
                    Observable::Block(b) => {
                        Observable::Block(b.scale(&es.eigenvalues()[i]))
                    }
                    _ => unreachable!(),
                };
                assert_eq!(v, expect, "{name} eigenfunction {i}");
            }
        }
    }

    #[test]
    fn golden_eigenvalues_two_families() {
        let sys = ShiftSystem::golden_mean();
        let es = EigenSystem::new(&sys, 8).unwrap();
        let phi = Scalar::golden();
        let mut expected: Vec<Scalar> = (0..=8).map(|k| phi.pow(-k)).collect();
        expected.extend((0..=8).map(|k| -&phi.pow(-k - 2)));
        let mut got = es.eigenvalues().to_vec();
        expected.sort();
        got.sort();
        assert_eq!(got, expected);
        // interleaved order: 1, phi^-1, phi^-2, -phi^-2, ...
        assert_eq!(es.eigenvalues()[0], Scalar::one());
        assert_eq!(es.eigenvalues()[1], phi.pow(-1));
        assert_eq!(es.eigenvalues()[2], phi.pow(-2));
        assert_eq!(es.eigenvalues()[3], -&phi.pow(-2));
        // leading eigenfunction is the constant 1
        let Observable::Block(b) = es.eigenfunction(0) else { panic!() };
        assert_eq!(b.parts[0], Poly::one());
        assert_eq!(b.parts[1], Poly::one());
    }

    #[test]
    fn biorthogonality() {
        for name in ["full2-uniform", "golden-mean"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let es = EigenSystem::new(&sys, 16).unwrap();
            let prod = es.dual_matrix().mul(es.change_of_basis());
            assert_eq!(prod, Matrix::identity(es.size()), "{name}");
            // dual rows applied to eigenfunction coordinates realize the
            // delta pairing
            for i in 0..es.size() {
                for j in 0..es.size() {
                    let mut acc = Scalar::zero();
                    for (a, b) in es
                        .dual_matrix()
                        .row(i)
                        .iter()
                        .zip(es.change_of_basis().column(j))
                    {
                        acc = &acc + &(a * &b);
                    }
                    let expect = if i == j { Scalar::one() } else { Scalar::zero() };
                    assert_eq!(acc, expect, "{name} pairing ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn raabe_identity() {
        // (1/2) B_n(x) + (1/2) B_n(x + 1/2) - 2^{-n} B_n(2x) = 0
        for n in 0..=10usize {
            let b = bernoulli_poly(n);
            let half = s("1/2");
            let lhs = &b.scale(&half) + &b.compose_affine(&half, &Scalar::one()).scale(&half);
            let rhs = b
                .compose_affine(&Scalar::zero(), &Scalar::from_int(2))
                .scale(&Scalar::ratio(1, 1 << n));
            assert_eq!(&lhs - &rhs, Poly::zero(), "n = {n}");
        }
    }

    #[test]
    fn bernoulli_poly_matches_generating_function() {
        // Independent oracle: Taylor coefficients of t e^{xt} / (e^t - 1).
        // c = series of t/(e^t - 1); B_n(x)/n! = sum_{j+m=n} c_j x^m / m!.
        let nmax = 10usize;
        // invert sum_{k>=0} t^k/(k+1)!
        let mut inv_fact = vec![Scalar::one()];
        for k in 1..=nmax + 1 {
            inv_fact.push(&inv_fact[k - 1] / &Scalar::from_int(k as i64));
        }
        let den: Vec<Scalar> = (0..=nmax).map(|k| inv_fact[k + 1].clone()).collect();
        let mut c = vec![den[0].inverse().unwrap()];
        for k in 1..=nmax {
            let mut acc = Scalar::zero();
            for j in 0..k {
                acc = &acc - &(&den[k - j] * &c[j]);
            }
            c.push(&acc / &den[0]);
        }
        for n in 0..=nmax {
            let mut coeffs = vec![Scalar::zero(); n + 1];
            for m in 0..=n {
                // n! / m! * c_{n-m}
                let mut f = Scalar::one();
                for t in m + 1..=n {
                    f = &f * &Scalar::from_int(t as i64);
                }
                coeffs[m] = &f * &c[n - m];
            }
            assert_eq!(Poly::from_coeffs(coeffs), bernoulli_poly(n), "B_{n}");
        }
        assert_eq!(bernoulli_poly(0), Poly::one());
        assert_eq!(
            bernoulli_poly(1).coeffs(),
            &[s("-1/2"), Scalar::one()]
        );
        assert_eq!(bernoulli_poly(4).eval(&Scalar::zero()), s("-1/30"));
    }

    #[test]
    fn decompose_reconstruct_and_examples() {
        let sys = ShiftSystem::full2_uniform();
        let es = EigenSystem::new(&sys, 6).unwrap();
        // h = Phi_1 + 1/2 Phi_0
        let d = es.decompose(&Observable::poly(Poly::x())).unwrap();
        assert_eq!(
            d.terms,
            vec![(Scalar::one(), s("1/2")), (s("1/2"), Scalar::one())]
        );
        // basis element
        let phi3 = es.eigenfunction(3);
        let d3 = es.decompose(&phi3).unwrap();
        assert_eq!(d3.terms, vec![(s("1/8"), Scalar::one())]);
        // zero observable: empty decomposition
        let z = es.decompose(&Observable::poly(Poly::zero())).unwrap();
        assert!(z.terms.is_empty());
        // exact reconstruction
        let f = Observable::poly(Poly::from_coeffs(vec![
            s("3/7"),
            s("-2"),
            Scalar::zero(),
            s("5/3"),
        ]));
        let back = es.reconstruct(&es.decompose(&f).unwrap());
        assert_eq!(back, f);
        // degree overflow
        let too_big = Observable::poly(Poly::monomial(Scalar::one(), 7));
        assert!(matches!(
            es.decompose(&too_big),
            Err(SpectraError::DegreeOverflow { got: 7, max: 6 })
        ));
    }

    #[test]
    fn zero_mean_of_nonleading_eigenfunctions() {
        let one = Observable::constant(Scalar::one());
        for name in ["full2-uniform", "fullbeta-weighted"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let es = EigenSystem::new(&sys, 10).unwrap();
            for i in 1..es.size() {
                let ip = inner_product(&sys, &es.eigenfunction(i), &one).unwrap();
                assert!(ip.is_zero(), "{name} Phi_{i}");
            }
        }
        let sys = ShiftSystem::golden_mean();
        let es = EigenSystem::new(&sys, 8).unwrap();
        for i in 1..es.size() {
            let ip = inner_product(&sys, &es.eigenfunction(i), &one).unwrap();
            assert!(ip.is_zero(), "golden eigenfunction {i}");
        }
        let ip0 = inner_product(&sys, &es.eigenfunction(0), &one).unwrap();
        assert_eq!(ip0, Scalar::one());
    }

    #[test]
    fn iterate_examples() {
        let sys = ShiftSystem::full2_uniform();
        let es = EigenSystem::new(&sys, 6).unwrap();
        // f = Phi_0 + Phi_1, k = 2 -> Phi_0 + (1/4) Phi_1
        let f = match (es.eigenfunction(0), es.eigenfunction(1)) {
            (Observable::Poly(a), Observable::Poly(b)) => Observable::poly(&a.poly + &b.poly),
            _ => panic!(),
        };
        let r = es.iterate(&f, 2).unwrap();
        let d = es.decompose(&r.result).unwrap();
        assert_eq!(d.terms, vec![(Scalar::one(), Scalar::one()), (s("1/2"), s("1/4"))]);
        // f = h: limit 1/2 (= int h), rate 1/2
        let rh = es.iterate(&Observable::poly(Poly::x()), 10).unwrap();
        assert_eq!(rh.limit, s("1/2"));
        assert_eq!(rh.rate, Some(s("1/2")));
        assert_eq!(
            rh.limit,
            inner_product(&sys, &Observable::poly(Poly::x()), &Observable::constant(Scalar::one()))
                .unwrap()
        );
        // f = Phi_2 alone: limit 0, rate 1/4
        let r2 = es.iterate(&es.eigenfunction(2), 3).unwrap();
        assert_eq!(r2.limit, Scalar::zero());
        assert_eq!(r2.rate, Some(s("1/4")));
        let d2 = es.decompose(&r2.result).unwrap();
        assert_eq!(d2.terms, vec![(s("1/4"), s("1/64"))]);
        // golden-mean rate is 1/phi
        let golden = ShiftSystem::golden_mean();
        let esg = EigenSystem::new(&golden, 4).unwrap();
        let fh = Observable::poly(Poly::x());
        let rg = esg.iterate(&fh, 5).unwrap();
        assert_eq!(rg.rate, Some(Scalar::golden().pow(-1)));
    }

    #[test]
    fn resolvent_and_riesz() {
        let sys = ShiftSystem::full2_uniform();
        let es = EigenSystem::new(&sys, 6).unwrap();
        let h = Observable::poly(Poly::x());
        let r = es.resolvent(&h).unwrap();
        assert_eq!(
            r.pole_table(),
            vec![(Scalar::one(), 1), (s("1/2"), 1)]
        );
        // f = Phi_0 at lambda = 2 evaluates to Phi_0
        let r0 = es.resolvent(&es.eigenfunction(0)).unwrap();
        assert_eq!(
            r0.eval(&es, &Scalar::from_int(2)).unwrap(),
            es.eigenfunction(0)
        );
        // f = Phi_1: single pole at 1/2, holomorphic at 1
        let r1 = es.resolvent(&es.eigenfunction(1)).unwrap();
        assert_eq!(r1.pole_table(), vec![(s("1/2"), 1)]);
        assert!(r1.eval(&es, &Scalar::one()).is_ok());
        // pole hit
        assert!(matches!(
            r.eval(&es, &s("1/2")),
            Err(SpectraError::PoleHit(_))
        ));
        // resolvent consistency: (lambda - V) res = f at lambda = 3/4
        let lambda = s("3/4");
        let at = r.eval(&es, &lambda).unwrap();
        let v_at = crate::observable::pf_apply(&sys, &at).unwrap();
        let Observable::Poly(p) = at else { panic!() };
        let Observable::Poly(vp) = v_at else { panic!() };
        let recovered = &p.poly.scale(&lambda) - &vp.poly;
        assert_eq!(Observable::poly(recovered), h);
        // riesz projections
        let (p_half, flag) = es.riesz_projection(&h, &s("1/2")).unwrap();
        assert!(flag);
        assert_eq!(p_half, es.eigenfunction(1));
        let (p_one, _) = es.riesz_projection(&h, &Scalar::one()).unwrap();
        let Observable::Poly(p1) = p_one else { panic!() };
        assert_eq!(p1.poly, Poly::constant(s("1/2")));
        // off-spectrum: zero with flag false
        let (p_off, in_spec) = es.riesz_projection(&h, &s("1/3")).unwrap();
        assert!(!in_spec);
        let Observable::Poly(po) = p_off else { panic!() };
        assert!(po.poly.is_zero());
        // orthogonal mode: Phi_0 projected at 1/2 is zero
        let (pz, _) = es.riesz_projection(&es.eigenfunction(0), &s("1/2")).unwrap();
        let Observable::Poly(pz) = pz else { panic!() };
        assert!(pz.poly.is_zero());
    }
}
