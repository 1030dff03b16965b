//! Shift spaces: alphabets, adjacency, Bernoulli and Markov measures,
//! cylinder sets, and the coding map onto `[0,1]`.
//!
//! Words are the computational objects. The only infinite tails ever needed
//! (all-zeros and the lexicographically largest admissible tail) are summed in
//! closed form in the scalar field, so every measure and interval endpoint is
//! exact.

use crate::scalar::Scalar;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShiftError {
    #[error("word {0:?} is not admissible for this system")]
    Inadmissible(Vec<u8>),
    #[error("symbol {0} out of range for alphabet of size {1}")]
    SymbolRange(u8, usize),
    #[error("invalid system configuration: {0}")]
    Config(String),
    #[error("operation requires a Bernoulli measure")]
    NotBernoulli,
    #[error("operation requires the golden-mean system")]
    NotGoldenMean,
}

/// Invariant measure data: i.i.d. symbol weights or a stationary Markov chain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MeasureSpec {
    Bernoulli { probabilities: Vec<Scalar> },
    Markov { transition: Vec<Vec<Scalar>>, stationary: Vec<Scalar> },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

/// Per-symbol affine data of the coding map: `h(i * w) = offset[i] + scale[i] * h(w)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodingMap {
    pub offsets: Vec<Scalar>,
    pub scales: Vec<Scalar>,
}

/// A subshift of finite type with an invariant measure and coding map.
#[derive(Clone, PartialEq, Eq)]
pub struct ShiftSystem {
    beta: usize,
    adjacency: Vec<Vec<u8>>,
    measure: MeasureSpec,
    sidedness: Sidedness,
    coding: CodingMap,
}

/// An admissible finite word, validated at construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cylinder {
    word: Vec<u8>,
}

impl Cylinder {
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

fn half() -> Scalar {
    Scalar::ratio(1, 2)
}

impl ShiftSystem {
    /// Full `beta`-shift with a Bernoulli measure.
    pub fn bernoulli(probabilities: Vec<Scalar>) -> Result<Self, ShiftError> {
        let beta = probabilities.len();
        if beta < 2 {
            return Err(ShiftError::Config("alphabet size must be at least 2".into()));
        }
        let mut sum = Scalar::zero();
        for p in &probabilities {
            if p.sign() != std::cmp::Ordering::Greater {
                return Err(ShiftError::Config("probabilities must be positive".into()));
            }
            sum = &sum + p;
        }
        if !sum.is_one() {
            return Err(ShiftError::Config("probabilities must sum to 1".into()));
        }
        let adjacency = vec![vec![1u8; beta]; beta];
        // offsets are the cumulative sums p_0 + ... + p_{i-1}
        let mut offsets = Vec::with_capacity(beta);
        let mut acc = Scalar::zero();
        for p in &probabilities {
            offsets.push(acc.clone());
            acc = &acc + p;
        }
        Ok(ShiftSystem {
            beta,
            adjacency,
            coding: CodingMap { offsets, scales: probabilities.clone() },
            measure: MeasureSpec::Bernoulli { probabilities },
            sidedness: Sidedness::OneSided,
        })
    }

    /// The golden-mean subshift: adjacency `[[1,1],[1,0]]`, the stationary
    /// Markov measure with transition rows `(1/phi, 1/phi^2)` and `(1, 0)`,
    /// and coding map `h(w) = sum w_k phi^{-k}`.
    pub fn golden_mean() -> Self {
        let phi = Scalar::golden();
        let phi2p1 = &(&phi * &phi) + &Scalar::one();
        let transition = vec![
            vec![phi.pow(-1), phi.pow(-2)],
            vec![Scalar::one(), Scalar::zero()],
        ];
        let stationary = vec![
            &(&phi * &phi) / &phi2p1,
            Scalar::one().checked_div(&phi2p1).unwrap(),
        ];
        let sys = ShiftSystem {
            beta: 2,
            adjacency: vec![vec![1, 1], vec![1, 0]],
            measure: MeasureSpec::Markov { transition, stationary },
            sidedness: Sidedness::OneSided,
            coding: CodingMap {
                offsets: vec![Scalar::zero(), phi.pow(-1)],
                scales: vec![phi.pow(-1), phi.pow(-1)],
            },
        };
        sys.validate().expect("golden-mean system is consistent");
        sys
    }

    /// Uniform full 2-shift.
    pub fn full2_uniform() -> Self {
        ShiftSystem::bernoulli(vec![half(), half()]).unwrap()
    }

    /// Uniform full 2-shift tagged as a two-sided system.
    pub fn twosided_full2() -> Self {
        let mut sys = ShiftSystem::full2_uniform();
        sys.sidedness = Sidedness::TwoSided;
        sys
    }

    /// Built-in presets by name.
    pub fn preset(name: &str) -> Result<Self, ShiftError> {
        match name {
            "full2-uniform" => Ok(ShiftSystem::full2_uniform()),
            "fullbeta-uniform" => ShiftSystem::bernoulli(vec![
                Scalar::ratio(1, 3),
                Scalar::ratio(1, 3),
                Scalar::ratio(1, 3),
            ]),
            "fullbeta-weighted" => {
                ShiftSystem::bernoulli(vec![Scalar::ratio(1, 3), Scalar::ratio(2, 3)])
            }
            "golden-mean" => Ok(ShiftSystem::golden_mean()),
            "twosided-full2" => Ok(ShiftSystem::twosided_full2()),
            other => Err(ShiftError::Config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["full2-uniform", "fullbeta-uniform", "fullbeta-weighted", "golden-mean", "twosided-full2"]
    }

    /// General constructor used by config ingestion.
    pub fn new(
        beta: usize,
        adjacency: Vec<Vec<u8>>,
        measure: MeasureSpec,
        sidedness: Sidedness,
    ) -> Result<Self, ShiftError> {
        let full = adjacency.iter().all(|row| row.iter().all(|&a| a == 1));
        match &measure {
            MeasureSpec::Bernoulli { probabilities } => {
                if !full {
                    return Err(ShiftError::Config(
                        "Bernoulli measures require the full shift (all-ones adjacency)".into(),
                    ));
                }
                if probabilities.len() != beta {
                    return Err(ShiftError::Config("probability vector length != beta".into()));
                }
                let mut sys = ShiftSystem::bernoulli(probabilities.clone())?;
                sys.sidedness = sidedness;
                if sidedness == Sidedness::TwoSided
                    && (beta != 2 || probabilities.iter().any(|p| p != &half()))
                {
                    return Err(ShiftError::Config(
                        "two-sided systems are supported for the uniform 2-shift only".into(),
                    ));
                }
                Ok(sys)
            }
            MeasureSpec::Markov { .. } => {
                let golden = ShiftSystem::golden_mean();
                let candidate = ShiftSystem {
                    beta,
                    adjacency,
                    measure,
                    sidedness,
                    coding: golden.coding.clone(),
                };
                if candidate.beta != 2 || candidate.adjacency != golden.adjacency {
                    return Err(ShiftError::Config(
                        "Markov measures are supported for the golden-mean adjacency only".into(),
                    ));
                }
                if sidedness == Sidedness::TwoSided {
                    return Err(ShiftError::Config(
                        "two-sided systems are supported for the uniform 2-shift only".into(),
                    ));
                }
                candidate.validate()?;
                Ok(candidate)
            }
        }
    }

    fn validate(&self) -> Result<(), ShiftError> {
        if self.adjacency.len() != self.beta
            || self.adjacency.iter().any(|row| row.len() != self.beta)
        {
            return Err(ShiftError::Config("adjacency must be beta x beta".into()));
        }
        for (i, row) in self.adjacency.iter().enumerate() {
            if row.iter().all(|&a| a == 0) {
                return Err(ShiftError::Config(format!("dead state {i}: row of zeros")));
            }
        }
        if let MeasureSpec::Markov { transition, stationary } = &self.measure {
            if transition.len() != self.beta || stationary.len() != self.beta {
                return Err(ShiftError::Config("Markov data must match beta".into()));
            }
            let mut total = Scalar::zero();
            for pi in stationary {
                total = &total + pi;
            }
            if !total.is_one() {
                return Err(ShiftError::Config("stationary vector must sum to 1".into()));
            }
            for (i, row) in transition.iter().enumerate() {
                let mut sum = Scalar::zero();
                for (j, p) in row.iter().enumerate() {
                    if self.adjacency[i][j] == 0 && !p.is_zero() {
                        return Err(ShiftError::Config(format!(
                            "transition ({i},{j}) must vanish where adjacency is 0"
                        )));
                    }
                    sum = &sum + p;
                }
                if !sum.is_one() {
                    return Err(ShiftError::Config(format!("transition row {i} must sum to 1")));
                }
            }
            // stationarity: pi P = pi
            for j in 0..self.beta {
                let mut acc = Scalar::zero();
                for i in 0..self.beta {
                    acc = &acc + &(&stationary[i] * &transition[i][j]);
                }
                if acc != stationary[j] {
                    return Err(ShiftError::Config("stationary vector is not invariant".into()));
                }
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    pub fn coding(&self) -> &CodingMap {
        &self.coding
    }

    pub fn is_full_shift(&self) -> bool {
        self.adjacency.iter().all(|row| row.iter().all(|&a| a == 1))
    }

    pub fn is_golden_mean(&self) -> bool {
        matches!(self.measure, MeasureSpec::Markov { .. })
    }

    pub fn bernoulli_probabilities(&self) -> Result<&[Scalar], ShiftError> {
        match &self.measure {
            MeasureSpec::Bernoulli { probabilities } => Ok(probabilities),
            MeasureSpec::Markov { .. } => Err(ShiftError::NotBernoulli),
        }
    }

    /// Weight of `f(i * w)` in the Perron-Frobenius sum, conditioned on the
    /// image starting with symbol `j`: `pi_i p_{ij} / pi_j` (Markov) or `p_i`
    /// (Bernoulli).
    pub fn pf_weight(&self, i: u8, j: u8) -> Scalar {
        match &self.measure {
            MeasureSpec::Bernoulli { probabilities } => probabilities[i as usize].clone(),
            MeasureSpec::Markov { transition, stationary } => {
                let num = &stationary[i as usize] * &transition[i as usize][j as usize];
                &num / &stationary[j as usize]
            }
        }
    }

    pub fn is_admissible(&self, word: &[u8]) -> bool {
        if word.iter().any(|&s| s as usize >= self.beta) {
            return false;
        }
        word.windows(2).all(|w| self.adjacency[w[0] as usize][w[1] as usize] == 1)
    }

    /// Symbols that may follow `last` (any symbol for the empty prefix).
    pub fn successors(&self, last: Option<u8>) -> Vec<u8> {
        match last {
            None => (0..self.beta as u8).collect(),
            Some(i) => (0..self.beta as u8)
                .filter(|&j| self.adjacency[i as usize][j as usize] == 1)
                .collect(),
        }
    }

    /// All admissible words of exactly this length.
    pub fn admissible_words(&self, len: usize) -> Vec<Vec<u8>> {
        let mut words = vec![vec![]];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &words {
                for s in self.successors(w.last().copied()) {
                    let mut ext = w.clone();
                    ext.push(s);
                    next.push(ext);
                }
            }
            words = next;
        }
        words
    }

    pub fn cylinder(&self, word: &[u8]) -> Result<Cylinder, ShiftError> {
        if let Some(&s) = word.iter().find(|&&s| s as usize >= self.beta) {
            return Err(ShiftError::SymbolRange(s, self.beta));
        }
        if !self.is_admissible(word) {
            return Err(ShiftError::Inadmissible(word.to_vec()));
        }
        Ok(Cylinder { word: word.to_vec() })
    }

    /// Exact measure of a cylinder set: product of symbol probabilities
    /// (Bernoulli) or `pi_{i_1} p_{i_1 i_2} ... p_{i_{r-1} i_r}` (Markov).
    pub fn cylinder_measure(&self, c: &Cylinder) -> Scalar {
        if c.word.is_empty() {
            return Scalar::one();
        }
        match &self.measure {
            MeasureSpec::Bernoulli { probabilities } => {
                let mut acc = Scalar::one();
                for &s in &c.word {
                    acc = &acc * &probabilities[s as usize];
                }
                acc
            }
            MeasureSpec::Markov { transition, stationary } => {
                let mut acc = stationary[c.word[0] as usize].clone();
                for pair in c.word.windows(2) {
                    acc = &acc * &transition[pair[0] as usize][pair[1] as usize];
                }
                acc
            }
        }
    }

    /// `h` of the infinite word `prefix . tail tail tail ...` with a periodic
    /// tail, as a closed-form geometric sum.
    pub fn h_of_periodic(&self, prefix: &[u8], tail: &[u8]) -> Scalar {
        assert!(!tail.is_empty());
        // fold the affine maps of one tail period: x -> c + s x
        let fold = |word: &[u8]| {
            let mut offset = Scalar::zero();
            let mut scale = Scalar::one();
            for &sym in word {
                // compose h(w . rest): offset + scale * (c_sym + s_sym * h(rest))
                offset = &offset + &(&scale * &self.coding.offsets[sym as usize]);
                scale = &scale * &self.coding.scales[sym as usize];
            }
            (offset, scale)
        };
        let (tc, ts) = fold(tail);
        // fixed point of x = tc + ts x
        let tail_value = &tc / &(&Scalar::one() - &ts);
        let (pc, ps) = fold(prefix);
        &pc + &(&ps * &tail_value)
    }

    /// The lexicographically largest admissible infinite tail after `last`.
    /// The greedy choice is a deterministic walk on symbols, so the tail is
    /// eventually periodic; returned as (pre-period, period).
    fn sup_tail(&self, last: Option<u8>) -> (Vec<u8>, Vec<u8>) {
        let mut seq: Vec<u8> = Vec::new();
        let mut seen: Vec<Option<usize>> = vec![None; self.beta];
        let mut cur = last;
        loop {
            let next = *self.successors(cur).iter().max().expect("no dead states");
            if let Some(pos) = seen[next as usize] {
                let period = seq[pos..].to_vec();
                seq.truncate(pos);
                return (seq, period);
            }
            seen[next as usize] = Some(seq.len());
            seq.push(next);
            cur = Some(next);
        }
    }

    /// Exact endpoints `(a, b)` of `h(C[word])`: `a` uses the all-zeros tail,
    /// `b` the largest admissible tail after the last symbol.
    pub fn coding_interval(&self, c: &Cylinder) -> (Scalar, Scalar) {
        let a = self.h_of_periodic(&c.word, &[0]);
        let (pre, period) = self.sup_tail(c.word.last().copied());
        let mut prefix = c.word.clone();
        prefix.extend_from_slice(&pre);
        let b = self.h_of_periodic(&prefix, &period);
        (a, b)
    }

    /// `h` of the largest admissible tail following `last` (of the whole
    /// space supremum when `last` is `None`).
    pub fn sup_tail_value(&self, last: Option<u8>) -> Scalar {
        let (pre, period) = self.sup_tail(last);
        self.h_of_periodic(&pre, &period)
    }

    /// Exact moments `m_n = int h^n dmu` for `n = 0..=nmax` (Bernoulli only),
    /// from the self-similarity recurrence
    /// `m_n (1 - sum_i p_i^{n+1}) = sum_{k<n} C(n,k) (sum_i p_i^{k+1} c_i^{n-k}) m_k`.
    pub fn h_moments(&self, nmax: usize) -> Result<Vec<Scalar>, ShiftError> {
        let probs = self.bernoulli_probabilities()?.to_vec();
        let offsets = self.coding.offsets.clone();
        let mut moments = vec![Scalar::one()];
        for n in 1..=nmax {
            let mut rhs = Scalar::zero();
            for (k, m_k) in moments.iter().enumerate() {
                let mut inner = Scalar::zero();
                for (p, c) in probs.iter().zip(&offsets) {
                    inner = &inner + &(&p.pow(k as i64 + 1) * &c.pow((n - k) as i64));
                }
                rhs = &rhs + &(&(&crate::poly::binomial(n, k) * &inner) * m_k);
            }
            let mut psum = Scalar::zero();
            for p in &probs {
                psum = &psum + &p.pow(n as i64 + 1);
            }
            moments.push(&rhs / &(&Scalar::one() - &psum));
        }
        Ok(moments)
    }
}

impl fmt::Debug for ShiftSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ShiftSystem(beta={}, {:?}, {})",
            self.beta,
            self.sidedness,
            match &self.measure {
                MeasureSpec::Bernoulli { .. } => "Bernoulli",
                MeasureSpec::Markov { .. } => "Markov",
            }
        )
    }
}

/// Parse a scalar out of a config string, wrapping the error.
pub fn scalar_from_config(s: &str) -> Result<Scalar, ShiftError> {
    s.parse::<Scalar>()
        .map_err(|e| ShiftError::Config(format!("bad scalar {s:?}: {e}")))
}
