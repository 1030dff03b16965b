//! Finite-rank observables on shift spaces and the operator actions on them:
//! locally constant (cylinder) functions, Walsh-type orthogonal systems,
//! polynomial observables in the coding variable, block observables for the
//! golden-mean subshift, and exact inner products.

use crate::poly::{binomial, Poly};
use crate::scalar::{ComplexScalar, Scalar};
use crate::shift::{MeasureSpec, ShiftSystem};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ObservableError {
    #[error("block observables require the golden-mean system")]
    BlockOnNonGolden,
    #[error("cylinder word {0:?} is not admissible")]
    BadWord(Vec<u8>),
    #[error("inner product of incompatible observable kinds")]
    MixedKinds,
    #[error("operation requires a Bernoulli system")]
    NotBernoulli,
    #[error("{0}")]
    Precondition(String),
}

/// Function of the first `depth` coordinates: one exact value per admissible
/// word of that length.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CylFun {
    depth: usize,
    values: BTreeMap<Vec<u8>, Scalar>,
}

impl CylFun {
    pub fn new(
        sys: &ShiftSystem,
        depth: usize,
        values: BTreeMap<Vec<u8>, Scalar>,
    ) -> Result<Self, ObservableError> {
        let words = sys.admissible_words(depth);
        if values.len() != words.len() {
            return Err(ObservableError::Precondition(format!(
                "expected {} words of length {depth}, got {}",
                words.len(),
                values.len()
            )));
        }
        for w in &words {
            if !values.contains_key(w) {
                return Err(ObservableError::BadWord(w.clone()));
            }
        }
        Ok(CylFun { depth, values })
    }

    pub fn from_fn(sys: &ShiftSystem, depth: usize, f: impl Fn(&[u8]) -> Scalar) -> Self {
        let values = sys
            .admissible_words(depth)
            .into_iter()
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        CylFun { depth, values }
    }

    pub fn constant(c: Scalar) -> Self {
        let mut values = BTreeMap::new();
        values.insert(vec![], c);
        CylFun { depth: 0, values }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &BTreeMap<Vec<u8>, Scalar> {
        &self.values
    }

    pub fn value(&self, word: &[u8]) -> &Scalar {
        &self.values[&word[..self.depth.min(word.len())]]
    }

    /// Same function on a finer partition.
    pub fn refine(&self, sys: &ShiftSystem, depth: usize) -> CylFun {
        assert!(depth >= self.depth);
        CylFun::from_fn(sys, depth, |w| self.values[&w[..self.depth]].clone())
    }

    /// Canonical equality: compare after refining to common depth.
    pub fn eq_in(&self, sys: &ShiftSystem, other: &CylFun) -> bool {
        let d = self.depth.max(other.depth);
        self.refine(sys, d).values == other.refine(sys, d).values
    }

    pub fn scale(&self, s: &Scalar) -> CylFun {
        CylFun {
            depth: self.depth,
            values: self.values.iter().map(|(w, v)| (w.clone(), v * s)).collect(),
        }
    }

    pub fn add(&self, sys: &ShiftSystem, other: &CylFun) -> CylFun {
        let d = self.depth.max(other.depth);
        let a = self.refine(sys, d);
        let b = other.refine(sys, d);
        CylFun {
            depth: d,
            values: a
                .values
                .iter()
                .map(|(w, v)| (w.clone(), v + &b.values[w]))
                .collect(),
        }
    }

    pub fn mul(&self, sys: &ShiftSystem, other: &CylFun) -> CylFun {
        let d = self.depth.max(other.depth);
        let a = self.refine(sys, d);
        let b = other.refine(sys, d);
        CylFun {
            depth: d,
            values: a
                .values
                .iter()
                .map(|(w, v)| (w.clone(), v * &b.values[w]))
                .collect(),
        }
    }
}

/// Polynomial observable `omega -> poly(h(omega))`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyObservable {
    pub poly: Poly,
}

impl PolyObservable {
    pub fn new(poly: Poly) -> Self {
        PolyObservable { poly }
    }

    pub fn coordinate() -> Self {
        PolyObservable::new(Poly::x())
    }
}

/// `1_{C[0]} q0(h) + 1_{C[1]} q1(h)` on the golden-mean system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockObservable {
    pub parts: [Poly; 2],
}

impl BlockObservable {
    pub fn new(q0: Poly, q1: Poly) -> Self {
        BlockObservable { parts: [q0, q1] }
    }

    pub fn from_poly(p: &Poly) -> Self {
        BlockObservable::new(p.clone(), p.clone())
    }

    pub fn constant(c: Scalar) -> Self {
        BlockObservable::new(Poly::constant(c.clone()), Poly::constant(c))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(Poly::is_zero)
    }

    pub fn add(&self, other: &BlockObservable) -> BlockObservable {
        BlockObservable::new(&self.parts[0] + &other.parts[0], &self.parts[1] + &other.parts[1])
    }

    pub fn scale(&self, s: &Scalar) -> BlockObservable {
        BlockObservable::new(self.parts[0].scale(s), self.parts[1].scale(s))
    }
}

/// Any element of the test spaces handled by the engine.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Observable {
    Poly(PolyObservable),
    Block(BlockObservable),
    Cyl(CylFun),
}

impl Observable {
    pub fn poly(p: Poly) -> Self {
        Observable::Poly(PolyObservable::new(p))
    }

    pub fn constant(c: Scalar) -> Self {
        Observable::poly(Poly::constant(c))
    }
}

/// Index of a generalized Walsh function: the base-`beta` digits of `n`
/// select one-letter factors per coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WalshIndex {
    pub n: u64,
    pub beta: usize,
}

impl WalshIndex {
    pub fn digits(&self) -> Vec<u8> {
        let mut digits = Vec::new();
        let mut n = self.n;
        while n > 0 {
            digits.push((n % self.beta as u64) as u8);
            n /= self.beta as u64;
        }
        digits
    }

    /// Number of coordinates the Walsh function depends on.
    pub fn depth(&self) -> usize {
        self.digits().len()
    }
}

/// Image of a Walsh function under the Perron-Frobenius operator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WalshImage {
    Walsh(WalshIndex),
    Zero,
}

/// `V W_n = W_{n/beta}` when `beta | n`, zero otherwise.
pub fn walsh_pf_rule(sys: &ShiftSystem, idx: WalshIndex) -> WalshImage {
    let beta = sys.beta() as u64;
    if idx.n.is_multiple_of(beta) {
        WalshImage::Walsh(WalshIndex { n: idx.n / beta, beta: idx.beta })
    } else {
        WalshImage::Zero
    }
}

/// `U W_n = W_{beta n}`.
pub fn walsh_koopman_rule(sys: &ShiftSystem, idx: WalshIndex) -> WalshIndex {
    WalshIndex { n: idx.n * sys.beta() as u64, beta: idx.beta }
}

/// The one-letter orthogonal system `psi_0 = 1, psi_1, ...` obtained by exact
/// Gram-Schmidt on indicator functions under the symbol measure. Each vector
/// is rescaled to norm one whenever its squared norm is the square of a
/// rational (always the case for the uniform 2-shift, matching the classical
/// `(-1)^omega`); otherwise it is left un-normalized and its exact squared
/// norm is reported alongside.
pub fn letter_system(sys: &ShiftSystem) -> Result<Vec<(Vec<Scalar>, Scalar)>, ObservableError> {
    let probs = sys
        .bernoulli_probabilities()
        .map_err(|_| ObservableError::NotBernoulli)?;
    let beta = sys.beta();
    let dot = |u: &[Scalar], v: &[Scalar]| {
        let mut acc = Scalar::zero();
        for i in 0..beta {
            acc = &acc + &(&(&u[i] * &v[i]) * &probs[i]);
        }
        acc
    };
    let mut system: Vec<Vec<Scalar>> = Vec::with_capacity(beta);
    system.push(vec![Scalar::one(); beta]);
    for s in 1..beta {
        // indicator of symbol s, orthogonalized against the previous vectors
        let mut v: Vec<Scalar> = (0..beta)
            .map(|i| if i == s { Scalar::one() } else { Scalar::zero() })
            .collect();
        for prev in &system {
            let coeff = &dot(&v, prev) / &dot(prev, prev);
            for i in 0..beta {
                v[i] = &v[i] - &(&coeff * &prev[i]);
            }
        }
        if let Some(r) = rational_sqrt(&dot(&v, &v)) {
            let mut scale = r.inverse().unwrap();
            if (&v[0] * &scale).sign() == std::cmp::Ordering::Less {
                scale = -&scale;
            }
            for x in v.iter_mut() {
                *x = &*x * &scale;
            }
        }
        system.push(v);
    }
    Ok(system
        .into_iter()
        .map(|v| {
            let n = dot(&v, &v);
            (v, n)
        })
        .collect())
}

/// Exact square root of a nonnegative rational scalar, when it exists.
fn rational_sqrt(s: &Scalar) -> Option<Scalar> {
    Scalar::rational_sqrt(s.as_rational()?).map(Scalar::from_rational)
}

/// The `n`-th generalized Walsh function as a cylinder function.
pub fn walsh_fun(sys: &ShiftSystem, idx: WalshIndex) -> Result<CylFun, ObservableError> {
    let letters = letter_system(sys)?;
    let digits = idx.digits();
    Ok(CylFun::from_fn(sys, digits.len(), |w| {
        let mut acc = Scalar::one();
        for (k, &d) in digits.iter().enumerate() {
            acc = &acc * &letters[d as usize].0[w[k] as usize];
        }
        acc
    }))
}

/// Perron-Frobenius image of an observable, exact.
pub fn pf_apply(sys: &ShiftSystem, f: &Observable) -> Result<Observable, ObservableError> {
    match f {
        Observable::Poly(p) => {
            if sys.is_golden_mean() {
                return pf_apply(sys, &Observable::Block(BlockObservable::from_poly(&p.poly)));
            }
            let probs = sys
                .bernoulli_probabilities()
                .map_err(|_| ObservableError::NotBernoulli)?;
            let coding = sys.coding();
            let mut acc = Poly::zero();
            for (i, p_i) in probs.iter().enumerate() {
                let composed = p.poly.compose_affine(&coding.offsets[i], &coding.scales[i]);
                acc = &acc + &composed.scale(p_i);
            }
            Ok(Observable::poly(acc))
        }
        Observable::Block(b) => {
            if !sys.is_golden_mean() {
                return Err(ObservableError::BlockOnNonGolden);
            }
            let coding = sys.coding();
            // f(i * omega) composes the part selected by i with the coding map
            let comp =
                |i: usize| b.parts[i].compose_affine(&coding.offsets[i], &coding.scales[i]);
            let f0 = comp(0);
            let f1 = comp(1);
            let q0 = &f0.scale(&sys.pf_weight(0, 0)) + &f1.scale(&sys.pf_weight(1, 0));
            let q1 = &f0.scale(&sys.pf_weight(0, 1)) + &f1.scale(&sys.pf_weight(1, 1));
            Ok(Observable::Block(BlockObservable::new(q0, q1)))
        }
        Observable::Cyl(c) => Ok(Observable::Cyl(pf_apply_cyl(sys, c))),
    }
}

/// Perron-Frobenius on a cylinder function: depth drops by one (at least one
/// remains on Markov systems, whose weights depend on the leading symbol).
pub fn pf_apply_cyl(sys: &ShiftSystem, f: &CylFun) -> CylFun {
    let markov = matches!(sys.measure(), MeasureSpec::Markov { .. });
    let min_depth = if markov { 1 } else { 0 };
    let new_depth = f.depth().saturating_sub(1).max(min_depth);
    let f = if f.depth() < new_depth + 1 { f.refine(sys, new_depth + 1) } else { f.clone() };
    CylFun::from_fn(sys, new_depth, |w| {
        let mut acc = Scalar::zero();
        for i in sys.successors(None) {
            let j = w.first().copied().unwrap_or(0);
            if !w.is_empty() && sys.adjacency()[i as usize][j as usize] == 0 {
                continue;
            }
            let mut ext = Vec::with_capacity(w.len() + 1);
            ext.push(i);
            ext.extend_from_slice(w);
            ext.truncate(f.depth());
            if !sys.is_admissible(&ext) {
                continue;
            }
            let weight = if w.is_empty() {
                // Bernoulli only: weight independent of the following symbol
                sys.pf_weight(i, 0)
            } else {
                sys.pf_weight(i, j)
            };
            acc = &acc + &(&weight * &f.values()[&ext]);
        }
        acc
    })
}

/// Koopman image `(U f)(omega) = f(S omega)`: depth grows by one.
pub fn koopman_apply(sys: &ShiftSystem, f: &CylFun) -> CylFun {
    CylFun::from_fn(sys, f.depth() + 1, |w| f.values()[&w[1..]].clone())
}

/// Mixed moments `int 1_{C[i]} h^n dmu` on the golden-mean system, by the
/// two-block self-similarity recurrence; `(u, v)` hold the block-0 and
/// block-1 moments.
pub fn block_moments(
    sys: &ShiftSystem,
    nmax: usize,
) -> Result<(Vec<Scalar>, Vec<Scalar>), ObservableError> {
    if !sys.is_golden_mean() {
        return Err(ObservableError::BlockOnNonGolden);
    }
    let MeasureSpec::Markov { stationary, .. } = sys.measure() else { unreachable!() };
    let coding = sys.coding();
    let (c0, s0) = (&coding.offsets[0], &coding.scales[0]);
    let (c1, s1) = (&coding.offsets[1], &coding.scales[1]);
    let w = |i: u8, j: u8| sys.pf_weight(i, j);
    let mut u = vec![stationary[0].clone()];
    let mut v = vec![stationary[1].clone()];
    for n in 1..=nmax {
        // strictly lower-order contributions
        let mut a = Scalar::zero();
        let mut b = Scalar::zero();
        for k in 0..n {
            let bin = binomial(n, k);
            let t0 = &(&bin * &c0.pow((n - k) as i64)) * &s0.pow(k as i64);
            let t1 = &(&bin * &c1.pow((n - k) as i64)) * &s1.pow(k as i64);
            a = &a + &(&t0 * &(&(&w(0, 0) * &u[k]) + &(&w(0, 1) * &v[k])));
            b = &b + &(&t1 * &(&(&w(1, 0) * &u[k]) + &(&w(1, 1) * &v[k])));
        }
        // solve the remaining 2x2 system in (u_n, v_n)
        let s0n = s0.pow(n as i64);
        let s1n = s1.pow(n as i64);
        let m00 = &Scalar::one() - &(&s0n * &w(0, 0));
        let m01 = -&(&s0n * &w(0, 1));
        let m10 = -&(&s1n * &w(1, 0));
        let m11 = &Scalar::one() - &(&s1n * &w(1, 1));
        let det = &(&m00 * &m11) - &(&m01 * &m10);
        assert!(!det.is_zero(), "degenerate block-moment system at n={n}");
        u.push(&(&(&m11 * &a) - &(&m01 * &b)) / &det);
        v.push(&(&(&m00 * &b) - &(&m10 * &a)) / &det);
    }
    Ok((u, v))
}

/// Exact pairing `int f conj(g) dmu`. All scalars here are real, so the
/// conjugation is the identity; it stays explicit at the call sites that pair
/// dual elements.
pub fn inner_product(
    sys: &ShiftSystem,
    f: &Observable,
    g: &Observable,
) -> Result<Scalar, ObservableError> {
    match (f, g) {
        (Observable::Cyl(a), Observable::Cyl(b)) => {
            let d = a.depth().max(b.depth());
            let fa = a.refine(sys, d);
            let fb = b.refine(sys, d);
            let mut acc = Scalar::zero();
            for (w, va) in fa.values() {
                let c = sys.cylinder(w).expect("refined words admissible");
                let m = sys.cylinder_measure(&c);
                acc = &acc + &(&(va * &fb.values()[w].conj()) * &m);
            }
            Ok(acc)
        }
        (Observable::Poly(a), Observable::Poly(b)) => {
            if sys.is_golden_mean() {
                return inner_product(
                    sys,
                    &Observable::Block(BlockObservable::from_poly(&a.poly)),
                    &Observable::Block(BlockObservable::from_poly(&b.poly)),
                );
            }
            let prod = &a.poly * &b.poly;
            let moments = sys
                .h_moments(prod.degree().unwrap_or(0))
                .map_err(|_| ObservableError::NotBernoulli)?;
            let mut acc = Scalar::zero();
            for (k, c) in prod.coeffs().iter().enumerate() {
                acc = &acc + &(c * &moments[k]);
            }
            Ok(acc)
        }
        (Observable::Block(a), Observable::Block(b)) => {
            if !sys.is_golden_mean() {
                return Err(ObservableError::BlockOnNonGolden);
            }
            let p0 = &a.parts[0] * &b.parts[0];
            let p1 = &a.parts[1] * &b.parts[1];
            let deg = p0.degree().unwrap_or(0).max(p1.degree().unwrap_or(0));
            let (u, v) = block_moments(sys, deg)?;
            let mut acc = Scalar::zero();
            for (k, c) in p0.coeffs().iter().enumerate() {
                acc = &acc + &(c * &u[k]);
            }
            for (k, c) in p1.coeffs().iter().enumerate() {
                acc = &acc + &(c * &v[k]);
            }
            Ok(acc)
        }
        (Observable::Poly(a), Observable::Block(_)) => inner_product(
            sys,
            &Observable::Block(BlockObservable::from_poly(&a.poly)),
            g,
        ),
        (Observable::Block(_), Observable::Poly(b)) => inner_product(
            sys,
            f,
            &Observable::Block(BlockObservable::from_poly(&b.poly)),
        ),
        _ => Err(ObservableError::MixedKinds),
    }
}

/// Squared defect `||(z - V) f_n||^2` of the approximate eigenfunction
/// `f_n = n^{-1/2} sum_k z^k W_{2^k}` on the uniform 2-shift, computed from
/// the Walsh-coefficient representation of `(z - V) f_n` (exactly `1/n` for
/// every unit-modulus `z != 1`).
pub fn approx_eigenfunction_defect(
    sys: &ShiftSystem,
    z: &ComplexScalar,
    n: usize,
) -> Result<Scalar, ObservableError> {
    if sys.beta() != 2
        || sys.is_golden_mean()
        || sys.bernoulli_probabilities().map_err(|_| ObservableError::NotBernoulli)?
            != [Scalar::ratio(1, 2), Scalar::ratio(1, 2)]
    {
        return Err(ObservableError::Precondition(
            "defect is defined on the uniform 2-shift".into(),
        ));
    }
    if !z.norm_sq().is_one() {
        return Err(ObservableError::Precondition("z must lie on the unit circle".into()));
    }
    if z.im.is_zero() && z.re.is_one() {
        return Err(ObservableError::Precondition("z = 1 is excluded".into()));
    }
    if n == 0 {
        return Err(ObservableError::Precondition("n must be positive".into()));
    }
    // un-normalized g = sum_{k<n} z^k W_{2^k}, coefficients over Walsh indices
    let mut g: BTreeMap<u64, ComplexScalar> = BTreeMap::new();
    for k in 0..n {
        g.insert(1u64 << k, z.pow(k as u32));
    }
    // (z g)_m - (V g)_m with (V g)_m = g_{2m}
    let mut image: BTreeMap<u64, ComplexScalar> = BTreeMap::new();
    for (&m, c) in &g {
        let e = image.entry(m).or_insert_with(ComplexScalar::zero);
        *e = e.add(&z.mul(c));
        if m % 2 == 0 {
            // V maps W_m to W_{m/2}: contributes to index m/2
            let e = image.entry(m / 2).or_insert_with(ComplexScalar::zero);
            *e = e.sub(c);
        }
    }
    let mut defect = Scalar::zero();
    for c in image.values() {
        defect = &defect + &c.norm_sq();
    }
    // normalize by ||g||^2 = n (|z| = 1, Walsh functions orthonormal)
    Ok(&defect / &Scalar::from_int(n as i64))
}
