//! Two-sided full 2-shift machinery on the tensor basis indexed by pairs
//! `(i, j)`: the factorized operator `D + epsilon * B` (diagonal part plus
//! signed coupling), truncated with exact entries, Jordan analysis of the
//! generalized eigenvalues `2^{-k}`, the diagonal resolvent, and the
//! perturbation-series coefficients `A_k(lambda)` with exact pole orders.
//!
//! The coupling matrix `B` strictly lowers the first index and strictly
//! raises the second, so the truncated spectrum is the diagonal multiset
//! `{2^{-(i+j)}}` independently of `epsilon`, and truncating the second index
//! at the support of the pairing functional is exact (entries that leave the
//! window can never come back).

use crate::matrix::Matrix;
use crate::observable::{koopman_apply, pf_apply_cyl, CylFun};
use crate::poly::Poly;
use crate::ratfun::RationalFunction;
use crate::scalar::Scalar;
use crate::shift::ShiftSystem;
use crate::spectral::{EigenSystem, SpectraError};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwoSidedError {
    #[error("truncation (M={m}, N={n}) too small for eigenvalue index k={k}")]
    TruncationTooSmall { m: usize, n: usize, k: usize },
    #[error("index k={0} beyond the supported desk bound {1}")]
    DeskBound(usize, usize),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("evaluation at the pole {0}")]
    PoleHit(String),
}

/// Position in the tensor basis; total degree `i + j` sets the eigenvalue
/// `2^{-(i+j)}` of the diagonal part.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TensorIndex {
    pub i: usize,
    pub j: usize,
}

impl TensorIndex {
    pub fn total(&self) -> usize {
        self.i + self.j
    }
}

/// Finitely supported coefficient matrix over the tensor basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TensorCoeffs {
    pub i_bound: usize,
    pub j_bound: usize,
    c: Vec<Vec<Scalar>>,
}

impl TensorCoeffs {
    pub fn zeros(i_bound: usize, j_bound: usize) -> Self {
        TensorCoeffs {
            i_bound,
            j_bound,
            c: vec![vec![Scalar::zero(); j_bound + 1]; i_bound + 1],
        }
    }

    /// Basis delta at `(i, j)`.
    pub fn delta(idx: TensorIndex) -> Self {
        let mut t = TensorCoeffs::zeros(idx.i, idx.j);
        t.c[idx.i][idx.j] = Scalar::one();
        t
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.c
            .get(i)
            .and_then(|row| row.get(j))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert!(i <= self.i_bound && j <= self.j_bound);
        self.c[i][j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|row| row.iter().all(Scalar::is_zero))
    }

    pub fn support(&self) -> Vec<(TensorIndex, Scalar)> {
        let mut out = Vec::new();
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.push((TensorIndex { i, j }, v.clone()));
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> TensorCoeffs {
        let mut out = self.clone();
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v = &*v * s;
            }
        }
        out
    }

    pub fn add(&self, other: &TensorCoeffs) -> TensorCoeffs {
        let mut out = TensorCoeffs::zeros(
            self.i_bound.max(other.i_bound),
            self.j_bound.max(other.j_bound),
        );
        for i in 0..=out.i_bound {
            for j in 0..=out.j_bound {
                out.c[i][j] = &self.get(i, j) + &other.get(i, j);
            }
        }
        out
    }

    pub fn sub(&self, other: &TensorCoeffs) -> TensorCoeffs {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    /// Action of the diagonal part: entry `(i, j)` scales by `2^{-(i+j)}`.
    pub fn apply_diagonal(&self) -> TensorCoeffs {
        let mut out = self.clone();
        for (i, row) in out.c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = &*v * &Scalar::ratio(1, 1i64 << (i + j));
            }
        }
        out
    }

    /// Slice of total degree `k` (the residue of the diagonal resolvent).
    pub fn degree_slice(&self, k: usize) -> TensorCoeffs {
        let mut out = TensorCoeffs::zeros(self.i_bound, self.j_bound);
        for (idx, v) in self.support() {
            if idx.total() == k {
                out.c[idx.i][idx.j] = v;
            }
        }
        out
    }
}

/// Signed one-sided brackets: `table(out, in)` is the coefficient of the
/// `out`-th eigenpolynomial in the image of the `in`-th one under the
/// sign-twisted transfer operator `f -> V[(-1)^{omega_1} f]`. Strictly lower
/// triangular: zero unless `out < in`.
pub struct BracketTable {
    es: EigenSystem,
    table: Vec<Vec<Scalar>>,
}

impl BracketTable {
    pub fn new(max_degree: usize) -> Self {
        let sys = ShiftSystem::full2_uniform();
        let es = EigenSystem::new(&sys, max_degree).expect("uniform 2-shift eigensystem");
        let half = Scalar::ratio(1, 2);
        let mut table = Vec::with_capacity(max_degree + 1);
        for m in 0..=max_degree {
            let phi_m = match es.eigenfunction(m) {
                crate::observable::Observable::Poly(p) => p.poly,
                _ => unreachable!(),
            };
            // V[(-1)^{omega_1} Phi_m] = (Phi_m(h/2) - Phi_m((1+h)/2)) / 2,
            // a polynomial of degree m - 1
            let low = phi_m.compose_affine(&Scalar::zero(), &half);
            let high = phi_m.compose_affine(&half, &half);
            let image = (&low - &high).scale(&half);
            if m > 0 {
                assert_eq!(image.degree(), Some(m - 1), "signed image drops degree by one");
            }
            let coords: Vec<Scalar> = (0..=max_degree).map(|k| image.coeff(k)).collect();
            table.push(es.dual_matrix().mul_vec(&coords));
        }
        BracketTable { es, table }
    }

    pub fn max_degree(&self) -> usize {
        self.table.len() - 1
    }

    pub fn eigen_system(&self) -> &EigenSystem {
        &self.es
    }

    /// `<Phi'_out | V (-1)^{omega_1} Phi_in>`; zero unless `out < in`.
    pub fn bracket(&self, out: usize, input: usize) -> Scalar {
        if out >= input || input > self.max_degree() {
            return Scalar::zero();
        }
        self.table[input][out].clone()
    }
}

/// The matrix element of the coupling operator: column `(m, n)` feeds row
/// `(m_out, n_out)` with the product of a second-index bracket and a
/// conjugated first-index bracket; zero unless `m_out < m` and `n_out > n`.
pub fn coupling_element(
    table: &BracketTable,
    m: usize,
    n: usize,
    m_out: usize,
    n_out: usize,
) -> Scalar {
    &table.bracket(n, n_out) * &table.bracket(m_out, m).conj()
}

/// Truncated two-sided operator `D + epsilon B` on the basis
/// `{(i, j) : i <= M, j <= N}`.
#[derive(Clone, Debug)]
pub struct TwoSidedOperator {
    pub epsilon: Scalar,
    pub m_bound: usize,
    pub n_bound: usize,
    matrix: Matrix,
}

/// Jordan data of one generalized eigenvalue of the truncated operator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JordanReport {
    pub k: usize,
    pub eigenvalue: Scalar,
    pub algebraic: usize,
    pub geometric: usize,
    /// block sizes, descending
    pub blocks: Vec<usize>,
    pub truncation: (usize, usize),
    /// unchanged when the second truncation bound grows by two
    pub stable: bool,
}

/// `sum_k residue_k / (lambda - 2^{-k})`: the analytically continued
/// resolvent of the diagonal part applied to a finitely supported element.
#[derive(Clone, Debug)]
pub struct TensorResolvent {
    pub terms: Vec<(usize, Scalar, TensorCoeffs)>,
}

impl TensorResolvent {
    pub fn eval(&self, lambda: &Scalar) -> Result<TensorCoeffs, TwoSidedError> {
        if let Some((_, pole, _)) = self.terms.iter().find(|(_, p, _)| p == lambda) {
            return Err(TwoSidedError::PoleHit(pole.to_string()));
        }
        let mut acc: Option<TensorCoeffs> = None;
        for (_, pole, slice) in &self.terms {
            let factor = Scalar::one().checked_div(&(lambda - pole)).unwrap();
            let part = slice.scale(&factor);
            acc = Some(match acc {
                None => part,
                Some(a) => a.add(&part),
            });
        }
        Ok(acc.unwrap_or_else(|| TensorCoeffs::zeros(0, 0)))
    }
}

impl TwoSidedOperator {
    fn flat(&self, i: usize, j: usize) -> usize {
        i * (self.n_bound + 1) + j
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        (self.m_bound + 1) * (self.n_bound + 1)
    }

    /// Diagonal eigenvalue multiset `{2^{-(i+j)}}`, sorted descending.
    pub fn eigenvalue_multiset(&self) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..=self.m_bound {
            for j in 0..=self.n_bound {
                out.push(Scalar::ratio(1, 1i64 << (i + j)));
            }
        }
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    /// Nonzero entries as `(row index, column index, value)`.
    pub fn entries(&self) -> Vec<(TensorIndex, TensorIndex, Scalar)> {
        let mut out = Vec::new();
        for i in 0..=self.m_bound {
            for j in 0..=self.n_bound {
                for m in 0..=self.m_bound {
                    for n in 0..=self.n_bound {
                        let v = self.matrix.at(self.flat(i, j), self.flat(m, n));
                        if !v.is_zero() {
                            out.push((TensorIndex { i, j }, TensorIndex { i: m, j: n }, v.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// Jordan analysis of the generalized eigenvalue `2^{-k}`, with the
    /// stability flag computed by re-running at the enlarged truncation.
    pub fn jordan_analysis(&self, k: usize) -> Result<JordanReport, TwoSidedError> {
        let mut report = self.jordan_core(k)?;
        let bigger = build_operator(self.epsilon.clone(), self.m_bound, self.n_bound + 2);
        let wider = bigger.jordan_core(k)?;
        report.stable = report.algebraic == wider.algebraic
            && report.geometric == wider.geometric
            && report.blocks == wider.blocks;
        Ok(report)
    }

    fn jordan_core(&self, k: usize) -> Result<JordanReport, TwoSidedError> {
        if self.m_bound < k || self.n_bound < k {
            return Err(TwoSidedError::TruncationTooSmall {
                m: self.m_bound,
                n: self.n_bound,
                k,
            });
        }
        let lambda = Scalar::ratio(1, 1i64 << k);
        let shifted = self.matrix.sub_scaled_identity(&lambda);
        let dim = self.dim();
        // ranks of successive powers until they stabilize
        let mut ranks = vec![dim];
        let mut power = shifted.clone();
        loop {
            let r = power.rank();
            let prev = *ranks.last().unwrap();
            ranks.push(r);
            if r == prev {
                break;
            }
            power = power.mul(&shifted);
        }
        let stable_rank = *ranks.last().unwrap();
        let algebraic = dim - stable_rank;
        let geometric = dim - ranks[1];
        // number of blocks of size >= t is ranks[t-1] - ranks[t]
        let mut blocks = Vec::new();
        for t in 1..ranks.len() {
            let ge_t = ranks[t - 1] - ranks[t];
            let ge_t1 = if t + 1 < ranks.len() { ranks[t] - ranks[t + 1] } else { 0 };
            for _ in 0..ge_t.saturating_sub(ge_t1) {
                blocks.push(t);
            }
        }
        blocks.sort_unstable_by(|a, b| b.cmp(a));
        debug_assert_eq!(blocks.iter().sum::<usize>(), algebraic);
        debug_assert_eq!(blocks.len(), geometric);
        Ok(JordanReport {
            k,
            eigenvalue: lambda,
            algebraic,
            geometric,
            blocks,
            truncation: (self.m_bound, self.n_bound),
            stable: false,
        })
    }
}

/// Build the truncated operator, asserting the strict-triangularity pattern
/// of the coupling part.
pub fn build_operator(epsilon: Scalar, m_bound: usize, n_bound: usize) -> TwoSidedOperator {
    let table = BracketTable::new(m_bound.max(n_bound));
    let dim = (m_bound + 1) * (n_bound + 1);
    let mut matrix = Matrix::zeros(dim, dim);
    let flat = |i: usize, j: usize| i * (n_bound + 1) + j;
    for m in 0..=m_bound {
        for n in 0..=n_bound {
            *matrix.at_mut(flat(m, n), flat(m, n)) = Scalar::ratio(1, 1i64 << (m + n));
            if epsilon.is_zero() {
                continue;
            }
            for i in 0..=m_bound {
                for j in 0..=n_bound {
                    let v = coupling_element(&table, m, n, i, j);
                    if v.is_zero() {
                        continue;
                    }
                    assert!(i < m && j > n, "coupling entry escapes the strict triangle");
                    *matrix.at_mut(flat(i, j), flat(m, n)) = &epsilon * &v;
                }
            }
        }
    }
    TwoSidedOperator { epsilon, m_bound, n_bound, matrix }
}

/// Analytic continuation of the diagonal resolvent applied to `f`: one simple
/// pole per total degree present in the support, the residue being that
/// degree slice.
pub fn resolvent_q0(f: &TensorCoeffs) -> TensorResolvent {
    let mut degrees: Vec<usize> = f.support().iter().map(|(idx, _)| idx.total()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    TensorResolvent {
        terms: degrees
            .into_iter()
            .map(|k| (k, Scalar::ratio(1, 1i64 << k), f.degree_slice(k)))
            .collect(),
    }
}

/// The coefficient of `epsilon^k` in the perturbation series of the
/// resolvent pairing, as an exact rational function of `lambda`.
///
/// Computed along two independent routes and asserted equal:
/// chain enumeration over the strictly ordered index set, and alternating
/// applications of the diagonal resolvent and the coupling matrix on the
/// truncated basis. The result is regular at `1, 2^{-1}, ..., 2^{-(k-1)}`,
/// which is asserted, and may carry a pole of order up to `k+1` at `2^{-k}`.
pub fn perturbation_coefficient(
    k: usize,
    f: &TensorCoeffs,
    g: &TensorCoeffs,
) -> RationalFunction {
    let i_bound = f.i_bound.max(g.i_bound);
    let j_bound = f.j_bound.max(g.j_bound);
    let table = BracketTable::new(i_bound.max(j_bound));

    let direct = ak_direct(k, f, g, &table, j_bound);
    let matrixed = ak_matrix(k, f, g, &table, i_bound, j_bound);
    assert!(
        direct.sub(&matrixed).is_zero(),
        "chain and matrix evaluations of the order-{k} coefficient disagree"
    );
    for t in 0..k {
        assert_eq!(
            direct.pole_order(&Scalar::ratio(1, 1i64 << t)),
            0,
            "unexpected singularity at 2^-{t}"
        );
    }
    direct
}

/// Chain-sum evaluation over `i_1 > ... > i_k` (below `m`) and
/// `n < j_1 < ... < j_k` (up to the pairing support).
fn ak_direct(
    k: usize,
    f: &TensorCoeffs,
    g: &TensorCoeffs,
    table: &BracketTable,
    j_bound: usize,
) -> RationalFunction {
    let mut acc = RationalFunction::zero();
    for (start, c) in f.support() {
        if k == 0 {
            let d = g.get(start.i, start.j);
            if d.is_zero() {
                continue;
            }
            let coeff = &c * &d.conj();
            acc = acc.add(&RationalFunction::simple(
                coeff,
                Scalar::ratio(1, 1i64 << start.total()),
                1,
            ));
            continue;
        }
        // recursive chain walk carrying the accumulated bracket weight and
        // the pole exponents collected so far
        fn walk(
            table: &BracketTable,
            g: &TensorCoeffs,
            j_bound: usize,
            remaining: usize,
            cur: TensorIndex,
            weight: &Scalar,
            exponents: &mut Vec<usize>,
            acc: &mut RationalFunction,
            scale: &Scalar,
        ) {
            if remaining == 0 {
                let d = g.get(cur.i, cur.j);
                if d.is_zero() {
                    return;
                }
                let coeff = &(scale * weight) * &d.conj();
                let poles: Vec<(Scalar, usize)> = exponents
                    .iter()
                    .map(|e| (Scalar::ratio(1, 1i64 << *e), 1))
                    .collect();
                *acc = acc.add(&RationalFunction::new(Poly::constant(coeff), poles));
                return;
            }
            for i_next in 0..cur.i {
                let b_i = table.bracket(i_next, cur.i);
                if b_i.is_zero() {
                    continue;
                }
                for j_next in cur.j + 1..=j_bound {
                    let b_j = table.bracket(cur.j, j_next);
                    if b_j.is_zero() {
                        continue;
                    }
                    let w = &(weight * &b_j) * &b_i.conj();
                    let nxt = TensorIndex { i: i_next, j: j_next };
                    exponents.push(nxt.total());
                    walk(table, g, j_bound, remaining - 1, nxt, &w, exponents, acc, scale);
                    exponents.pop();
                }
            }
        }
        let mut exponents = vec![start.total()];
        walk(
            table,
            g,
            j_bound,
            k,
            start,
            &Scalar::one(),
            &mut exponents,
            &mut acc,
            &c,
        );
    }
    acc
}

/// Matrix evaluation: alternate the diagonal resolvent (symbolic in lambda)
/// with the coupling matrix on the truncated basis, then pair with `g`.
fn ak_matrix(
    k: usize,
    f: &TensorCoeffs,
    g: &TensorCoeffs,
    table: &BracketTable,
    i_bound: usize,
    j_bound: usize,
) -> RationalFunction {
    let mut vec: BTreeMap<(usize, usize), RationalFunction> = BTreeMap::new();
    for (idx, c) in f.support() {
        vec.insert((idx.i, idx.j), RationalFunction::constant(c));
    }
    let resolve = |v: BTreeMap<(usize, usize), RationalFunction>| {
        v.into_iter()
            .map(|((i, j), rf)| ((i, j), rf.div_linear(&Scalar::ratio(1, 1i64 << (i + j)))))
            .collect::<BTreeMap<_, _>>()
    };
    vec = resolve(vec);
    for _ in 0..k {
        let mut next: BTreeMap<(usize, usize), RationalFunction> = BTreeMap::new();
        for (&(m, n), rf) in &vec {
            if rf.is_zero() {
                continue;
            }
            for i in 0..m {
                let b_i = table.bracket(i, m);
                if b_i.is_zero() {
                    continue;
                }
                for j in n + 1..=j_bound.min(table.max_degree()) {
                    let b_j = table.bracket(n, j);
                    if b_j.is_zero() {
                        continue;
                    }
                    let contrib = rf.scale(&(&b_j * &b_i.conj()));
                    next.entry((i, j))
                        .and_modify(|e| *e = e.add(&contrib))
                        .or_insert(contrib);
                }
            }
        }
        vec = resolve(next);
    }
    let mut acc = RationalFunction::zero();
    for ((i, j), rf) in vec {
        if i > i_bound || j > j_bound {
            continue;
        }
        let d = g.get(i, j);
        if !d.is_zero() {
            acc = acc.add(&rf.scale(&d.conj()));
        }
    }
    acc
}

/// Outcome of the pole-order search at `2^{-k}`.
#[derive(Clone, Debug)]
pub struct PoleOrderReport {
    pub k: usize,
    pub order: usize,
    pub witness_f: TensorIndex,
    pub witness_g: TensorIndex,
}

/// Search small-support pairs for the deepest pole of the order-`k`
/// coefficient at `2^{-k}`; the expected maximum `k+1` is reached by the
/// anti-diagonal chain.
pub fn pole_order_check(k: usize) -> Result<PoleOrderReport, TwoSidedError> {
    const DESK_BOUND: usize = 6;
    if k > DESK_BOUND {
        return Err(TwoSidedError::DeskBound(k, DESK_BOUND));
    }
    let target = Scalar::ratio(1, 1i64 << k);
    let mut best = PoleOrderReport {
        k,
        order: 0,
        witness_f: TensorIndex { i: 0, j: 0 },
        witness_g: TensorIndex { i: 0, j: 0 },
    };
    // supports of total degree k, then k+1; high first-index first so the
    // witnessing chain appears early
    let mut candidates: Vec<TensorIndex> = Vec::new();
    for total in [k, k + 1] {
        for i in (0..=total).rev() {
            candidates.push(TensorIndex { i, j: total - i });
        }
    }
    for fs in &candidates {
        for gs in &candidates {
            let f = TensorCoeffs::delta(*fs);
            let g = TensorCoeffs::delta(*gs);
            let ak = perturbation_coefficient(k, &f, &g);
            let order = ak.pole_order(&target);
            if order > best.order {
                best.order = order;
                best.witness_f = *fs;
                best.witness_g = *gs;
            }
            if best.order == k + 1 {
                return Ok(best);
            }
        }
    }
    Ok(best)
}

/// Two-sided locally constant function: depends on `depth_minus` coordinates
/// at indices `0, -1, -2, ...` and `depth_plus` coordinates at `1, 2, ...`.
/// Keys are (minus word read outward from index 0, plus word).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwoSidedCylFun {
    pub depth_minus: usize,
    pub depth_plus: usize,
    values: BTreeMap<(Vec<u8>, Vec<u8>), Scalar>,
}

fn all_words(len: usize) -> Vec<Vec<u8>> {
    let mut words = vec![vec![]];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                [0u8, 1u8].into_iter().map(move |s| {
                    let mut e = w.clone();
                    e.push(s);
                    e
                })
            })
            .collect();
    }
    words
}

impl TwoSidedCylFun {
    pub fn from_fn(
        depth_minus: usize,
        depth_plus: usize,
        f: impl Fn(&[u8], &[u8]) -> Scalar,
    ) -> Self {
        let mut values = BTreeMap::new();
        for mw in all_words(depth_minus) {
            for pw in all_words(depth_plus) {
                values.insert((mw.clone(), pw.clone()), f(&mw, &pw));
            }
        }
        TwoSidedCylFun { depth_minus, depth_plus, values }
    }

    pub fn value(&self, mw: &[u8], pw: &[u8]) -> &Scalar {
        &self.values[&(mw[..self.depth_minus].to_vec(), pw[..self.depth_plus].to_vec())]
    }

    pub fn refine(&self, depth_minus: usize, depth_plus: usize) -> TwoSidedCylFun {
        assert!(depth_minus >= self.depth_minus && depth_plus >= self.depth_plus);
        TwoSidedCylFun::from_fn(depth_minus, depth_plus, |mw, pw| self.value(mw, pw).clone())
    }

    pub fn eq_two_sided(&self, other: &TwoSidedCylFun) -> bool {
        let dm = self.depth_minus.max(other.depth_minus);
        let dp = self.depth_plus.max(other.depth_plus);
        self.refine(dm, dp).values == other.refine(dm, dp).values
    }

    /// Pointwise diagonal part: average the resampled symbol inserted by the
    /// right shift.
    pub fn q0_pointwise(&self) -> TwoSidedCylFun {
        self.resample(false)
    }

    /// Pointwise coupling part: signed difference of the two resamplings.
    pub fn q1_pointwise(&self) -> TwoSidedCylFun {
        self.resample(true)
    }

    fn resample(&self, signed: bool) -> TwoSidedCylFun {
        let l = self.depth_minus;
        let r = self.depth_plus;
        let half = Scalar::ratio(1, 2);
        TwoSidedCylFun::from_fn(l + 1, r.saturating_sub(1), |mw, pw| {
            let rest = &mw[1..];
            let eval = |x: u8| {
                let mut plus = Vec::with_capacity(pw.len() + 1);
                plus.push(x);
                plus.extend_from_slice(pw);
                self.value(rest, &plus).clone()
            };
            let (a, b) = (eval(0), eval(1));
            let base = if signed { &a - &b } else { &a + &b };
            let scaled = &base * &half;
            if signed && mw[0] == 1 {
                -&scaled
            } else {
                scaled
            }
        })
    }

    /// Pointwise right shift (the full two-sided transfer operator).
    pub fn shift_pointwise(&self) -> TwoSidedCylFun {
        let l = self.depth_minus;
        let r = self.depth_plus;
        TwoSidedCylFun::from_fn(l + 1, r.saturating_sub(1), |mw, pw| {
            let mut plus = Vec::with_capacity(pw.len() + 1);
            plus.push(mw[0]);
            plus.extend_from_slice(pw);
            self.value(&mw[1..], &plus).clone()
        })
    }

    /// Factorized coupling route: decompose over minus words, apply the
    /// sign-twisted one-sided transfer operator to the plus factors and the
    /// sign-twisted Koopman lift to the minus indicators, and reassemble the
    /// tensor products. Agrees with `q1_pointwise` exactly.
    pub fn q1_tensor_route(&self, sys: &ShiftSystem) -> TwoSidedCylFun {
        let l = self.depth_minus;
        let r = self.depth_plus;
        let sign = CylFun::from_fn(sys, 1, |w| {
            if w[0] == 0 {
                Scalar::one()
            } else {
                Scalar::from_int(-1)
            }
        });
        let mut acc = TwoSidedCylFun::from_fn(l + 1, r.saturating_sub(1), |_, _| Scalar::zero());
        for mw in all_words(l) {
            // plus factor: V[(-1)^{omega_1} f_+^{(mw)}]
            let f_plus = CylFun::from_fn(sys, r, |pw| self.value(&mw, pw).clone());
            let plus_img = pf_apply_cyl(sys, &f_plus.mul(sys, &sign));
            // minus factor: (-1)^{omega_0} U[f_-], the lifted indicator of mw
            let indicator = CylFun::from_fn(sys, l, |w| {
                if w == mw {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            });
            let minus_img = koopman_apply(sys, &indicator).mul(sys, &sign);
            for ((amw, apw), v) in acc.values.iter_mut() {
                let m = minus_img.values()[&amw[..minus_img.depth()].to_vec()].clone();
                if m.is_zero() {
                    continue;
                }
                let p = plus_img.values()[&apw[..plus_img.depth()].to_vec()].clone();
                *v = &*v + &(&m * &p);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> Scalar {
        t.parse().unwrap()
    }

    fn hashed_scalar(seed: u64, a: usize, b: usize) -> Scalar {
        let mut x = seed ^ ((a as u64) << 32) ^ b as u64;
        x = x.wrapping_mul(0x9e3779b97f4a7c15);
        x ^= x >> 29;
        x = x.wrapping_mul(0xbf58476d1ce4e5b9);
        x ^= x >> 32;
        Scalar::from_int((x % 9) as i64 - 4)
    }

    #[test]
    fn bracket_example() {
        let table = BracketTable::new(4);
        // <Phi'_0 | V (-1)^{omega_1} Phi_1> = -1/4
        assert_eq!(table.bracket(0, 1), s("-1/4"));
        assert_eq!(table.bracket(1, 2), s("-1/4"));
        assert_eq!(table.bracket(0, 2), Scalar::zero());
        // strictly lower: zero when out >= in
        for m in 0..=4usize {
            for out in m..=4usize {
                assert_eq!(table.bracket(out, m), Scalar::zero());
            }
        }
        // the adjacent bracket never vanishes (drives the deepest pole)
        for m in 1..=4usize {
            assert!(!table.bracket(m - 1, m).is_zero());
        }
    }

    #[test]
    fn coupling_vanishing_pattern() {
        let table = BracketTable::new(3);
        for m in 0..=3usize {
            for n in 0..=3usize {
                for i in 0..=3usize {
                    for j in 0..=3usize {
                        let v = coupling_element(&table, m, n, i, j);
                        if i >= m || j <= n {
                            assert!(v.is_zero(), "({m},{n}) -> ({i},{j})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn operator_at_zero_coupling_is_diagonal() {
        let op = build_operator(Scalar::zero(), 3, 3);
        for (row, col, v) in op.entries() {
            assert_eq!(row, col);
            assert_eq!(v, Scalar::ratio(1, 1 << row.total()));
        }
    }

    #[test]
    fn spectrum_independent_of_coupling_strength() {
        // characteristic polynomial oracle: det(xI - A) equals the product
        // of (x - 2^{-(i+j)}) for every epsilon
        let mut expected = Poly::one();
        for i in 0..=3usize {
            for j in 0..=3usize {
                let factor = Poly::from_coeffs(vec![-&Scalar::ratio(1, 1 << (i + j)), Scalar::one()]);
                expected = &expected * &factor;
            }
        }
        for eps in [Scalar::zero(), s("1/2"), Scalar::one()] {
            let op = build_operator(eps.clone(), 3, 3);
            assert_eq!(op.matrix().char_poly(), expected, "epsilon = {eps}");
            assert_eq!(
                op.eigenvalue_multiset(),
                build_operator(Scalar::zero(), 3, 3).eigenvalue_multiset()
            );
        }
    }

    #[test]
    fn jordan_reports() {
        let op1 = build_operator(Scalar::one(), 6, 6);
        // k = 0: simple leading eigenvalue
        let r0 = op1.jordan_analysis(0).unwrap();
        assert_eq!((r0.algebraic, r0.geometric), (1, 1));
        assert_eq!(r0.blocks, vec![1]);
        assert!(r0.stable);
        // k = 2 at full coupling: a single block of size 3
        let r2 = op1.jordan_analysis(2).unwrap();
        assert_eq!((r2.algebraic, r2.geometric), (3, 1));
        assert_eq!(r2.blocks, vec![3]);
        assert!(r2.stable);
        assert_eq!(r2.eigenvalue, s("1/4"));
        // k = 2 at zero coupling: diagonal, three trivial blocks
        let op0 = build_operator(Scalar::zero(), 6, 6);
        let d2 = op0.jordan_analysis(2).unwrap();
        assert_eq!((d2.algebraic, d2.geometric), (3, 3));
        assert_eq!(d2.blocks, vec![1, 1, 1]);
        assert!(d2.stable);
        // truncation guard
        assert!(matches!(
            op1.jordan_analysis(7),
            Err(TwoSidedError::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn diagonal_resolvent_examples() {
        // single basis element: one pole at 2^{-(i+j)} with that residue
        let f = TensorCoeffs::delta(TensorIndex { i: 1, j: 1 });
        let r = resolvent_q0(&f);
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms[0].1, s("1/4"));
        assert_eq!(r.terms[0].2, f);

        let f0 = TensorCoeffs::delta(TensorIndex { i: 0, j: 0 });
        let at2 = resolvent_q0(&f0).eval(&Scalar::from_int(2)).unwrap();
        assert_eq!(at2, f0);

        // two elements of equal total degree share one pole
        let mixed = TensorCoeffs::delta(TensorIndex { i: 1, j: 0 })
            .add(&TensorCoeffs::delta(TensorIndex { i: 0, j: 1 }));
        let rm = resolvent_q0(&mixed);
        assert_eq!(rm.terms.len(), 1);
        assert_eq!(rm.terms[0].1, s("1/2"));
        assert_eq!(rm.terms[0].2, mixed);

        // pole hit carries the location
        assert!(matches!(
            rm.eval(&s("1/2")),
            Err(TwoSidedError::PoleHit(_))
        ));

        // resolvent identity: (lambda - D) R(lambda) f = f
        let lambda = Scalar::from_int(3);
        let f = TensorCoeffs::delta(TensorIndex { i: 2, j: 1 })
            .add(&TensorCoeffs::delta(TensorIndex { i: 0, j: 1 }).scale(&s("5/7")));
        let at = resolvent_q0(&f).eval(&lambda).unwrap();
        let back = at.scale(&lambda).sub(&at.apply_diagonal());
        assert_eq!(back, f);
    }

    #[test]
    fn perturbation_coefficient_order_zero_and_empty() {
        let f = TensorCoeffs::delta(TensorIndex { i: 1, j: 1 });
        let a0 = perturbation_coefficient(0, &f, &f);
        assert_eq!(a0, RationalFunction::simple(Scalar::one(), s("1/4"), 1));

        // no chain can start below the first index: order >= 1 vanishes
        let low = TensorCoeffs::delta(TensorIndex { i: 0, j: 2 });
        let g = TensorCoeffs::delta(TensorIndex { i: 0, j: 3 });
        let a1 = perturbation_coefficient(1, &low, &g);
        assert!(a1.is_zero());
    }

    #[test]
    fn perturbation_coefficient_antidiagonal_pole() {
        // the anti-diagonal chain gives the full-order pole at 2^{-k}
        let k = 2;
        let f = TensorCoeffs::delta(TensorIndex { i: k, j: 0 });
        let g = TensorCoeffs::delta(TensorIndex { i: 0, j: k });
        let ak = perturbation_coefficient(k, &f, &g);
        assert_eq!(ak.pole_order(&s("1/4")), k + 1);
        // regular at 1 and 1/2
        assert_eq!(ak.pole_order(&Scalar::one()), 0);
        assert_eq!(ak.pole_order(&s("1/2")), 0);
    }

    #[test]
    fn perturbation_cross_validation_random_supports() {
        // the two routes are asserted equal inside perturbation_coefficient;
        // exercise them on random small supports
        for case in 0..6u64 {
            let k = (case % 3) as usize + 1;
            let mut f = TensorCoeffs::zeros(3, 2);
            let mut g = TensorCoeffs::zeros(3, 4);
            for i in 0..=3usize {
                for j in 0..=2usize {
                    f.set(i, j, hashed_scalar(case, i, j));
                }
            }
            for i in 0..=3usize {
                for j in 0..=4usize {
                    g.set(i, j, hashed_scalar(case ^ 0xffff, i, j));
                }
            }
            let ak = perturbation_coefficient(k, &f, &g);
            for t in 0..k {
                assert_eq!(ak.pole_order(&Scalar::ratio(1, 1 << t)), 0);
            }
        }
    }

    #[test]
    fn pole_order_search() {
        for k in 0..=3usize {
            let report = pole_order_check(k).unwrap();
            assert_eq!(report.order, k + 1, "k = {k}");
        }
        assert!(matches!(pole_order_check(9), Err(TwoSidedError::DeskBound(9, _))));
    }

    #[test]
    fn pointwise_vs_tensor_route() {
        let sys = ShiftSystem::full2_uniform();
        for case in 0..8u64 {
            let l = (case % 3) as usize;
            let r = ((case / 3) % 3) as usize;
            let f = TwoSidedCylFun::from_fn(l, r, |mw, pw| {
                let mut key = 0usize;
                for &b in mw {
                    key = key * 2 + b as usize;
                }
                let mut key2 = 0usize;
                for &b in pw {
                    key2 = key2 * 2 + b as usize;
                }
                hashed_scalar(case ^ 0xabcd, key, key2)
            });
            let tensor = f.q1_tensor_route(&sys);
            let pointwise = f.q1_pointwise();
            assert!(tensor.eq_two_sided(&pointwise), "case {case} depths ({l},{r})");
            // the two parts together are the right shift
            let united = f.q0_pointwise();
            let q1 = f.q1_pointwise();
            let shift = f.shift_pointwise();
            let sum = TwoSidedCylFun::from_fn(
                united.depth_minus,
                united.depth_plus,
                |mw, pw| united.value(mw, pw) + q1.value(mw, pw),
            );
            assert!(sum.eq_two_sided(&shift), "case {case} shift identity");
        }
    }
}
