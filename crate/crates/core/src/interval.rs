//! Interval-map side of the coding semi-conjugacies: expanding piecewise
//! linear maps on `[0,1]`, their exact invariant densities, endpointwise
//! conjugacy checks against the shift systems, and a floating-point
//! histogram simulation (the one inexact component of the crate).

use crate::scalar::Scalar;
use crate::shift::{MeasureSpec, ShiftSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("system and map are not a conjugate pair: {0}")]
    MismatchedPair(String),
    #[error("simulation requires at least 10^4 samples, got {0}")]
    TooFewSamples(u64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// One affine branch `x -> slope * x + offset` on `[lo, hi]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Branch {
    pub lo: Scalar,
    pub hi: Scalar,
    pub slope: Scalar,
    pub offset: Scalar,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IntervalMapKind {
    /// `x -> beta x mod 1` with integer `beta`.
    Renyi(u32),
    /// `x -> phi x mod 1`, two branches with breakpoint `1/phi`.
    GoldenMult,
}

/// Expanding piecewise linear map on `[0,1]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntervalMap {
    pub kind: IntervalMapKind,
    pub branches: Vec<Branch>,
}

impl IntervalMap {
    pub fn renyi(beta: u32) -> Result<Self, IntervalError> {
        if beta < 2 {
            return Err(IntervalError::Parameter("Renyi maps need beta >= 2".into()));
        }
        let b = Scalar::from_int(beta as i64);
        let branches = (0..beta)
            .map(|c| Branch {
                lo: Scalar::ratio(c as i64, beta as i64),
                hi: Scalar::ratio(c as i64 + 1, beta as i64),
                slope: b.clone(),
                offset: Scalar::from_int(-(c as i64)),
            })
            .collect();
        Ok(IntervalMap { kind: IntervalMapKind::Renyi(beta), branches })
    }

    pub fn golden_mult() -> Self {
        let phi = Scalar::golden();
        let branches = vec![
            Branch {
                lo: Scalar::zero(),
                hi: phi.pow(-1),
                slope: phi.clone(),
                offset: Scalar::zero(),
            },
            Branch {
                lo: phi.pow(-1),
                hi: Scalar::one(),
                slope: phi,
                offset: Scalar::from_int(-1),
            },
        ];
        IntervalMap { kind: IntervalMapKind::GoldenMult, branches }
    }

    pub fn by_name(name: &str) -> Result<Self, IntervalError> {
        match name {
            "golden" | "golden-mult" => Ok(IntervalMap::golden_mult()),
            _ => {
                if let Some(rest) = name.strip_prefix("renyi") {
                    let beta: u32 = rest
                        .parse()
                        .map_err(|_| IntervalError::Parameter(format!("unknown map {name:?}")))?;
                    IntervalMap::renyi(beta)
                } else {
                    Err(IntervalError::Parameter(format!("unknown map {name:?}")))
                }
            }
        }
    }

    /// Exact image under the branch containing `x`; ties at breakpoints go to
    /// the left branch.
    pub fn apply_exact(&self, x: &Scalar) -> Scalar {
        for b in &self.branches {
            if *x >= b.lo && *x <= b.hi {
                return &(&b.slope * x) + &b.offset;
            }
        }
        panic!("point {x} outside [0,1]");
    }

    /// Image under an explicitly selected branch (symbolic points on a
    /// breakpoint take the branch dictated by their symbol).
    pub fn apply_branch(&self, branch: usize, x: &Scalar) -> Scalar {
        let b = &self.branches[branch];
        &(&b.slope * x) + &b.offset
    }

    /// Float iteration with the ties-to-left convention.
    pub fn apply_f64(&self, x: f64) -> f64 {
        match self.kind {
            IntervalMapKind::Renyi(beta) => {
                let y = beta as f64 * x;
                let c = if y > 0.0 && y == y.floor() { y - 1.0 } else { y.floor() };
                (y - c).clamp(0.0, 1.0)
            }
            IntervalMapKind::GoldenMult => {
                let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
                let inv = 1.0 / phi;
                if x <= inv {
                    (phi * x).clamp(0.0, 1.0)
                } else {
                    (phi * x - 1.0).clamp(0.0, 1.0)
                }
            }
        }
    }
}

/// Piecewise-constant probability density on `[0,1]`, exact.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DensitySpec {
    /// `(lo, hi, value)` pieces covering `[0,1]` in order
    pub pieces: Vec<(Scalar, Scalar, Scalar)>,
}

impl DensitySpec {
    pub fn value_at(&self, x: &Scalar) -> Scalar {
        for (lo, hi, v) in &self.pieces {
            if x >= lo && x <= hi {
                return v.clone();
            }
        }
        Scalar::zero()
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for (lo, hi, v) in &self.pieces {
            let left = if a > lo { a } else { lo };
            let right = if b < hi { b } else { hi };
            if right > left {
                acc = &acc + &(v * &(right - left));
            }
        }
        acc
    }

    pub fn total_mass(&self) -> Scalar {
        self.integral(&Scalar::zero(), &Scalar::one())
    }

    /// Canonical piece list over a refined breakpoint set.
    fn refined(&self, cuts: &[Scalar]) -> Vec<(Scalar, Scalar, Scalar)> {
        let mut points: Vec<Scalar> = cuts.to_vec();
        for (lo, hi, _) in &self.pieces {
            points.push(lo.clone());
            points.push(hi.clone());
        }
        points.sort();
        points.dedup();
        let mut out = Vec::new();
        for w in points.windows(2) {
            let mid = &(&w[0] + &w[1]) / &Scalar::from_int(2);
            out.push((w[0].clone(), w[1].clone(), self.value_at(&mid)));
        }
        out
    }

    /// Equality as functions (up to breakpoint refinement).
    pub fn same_density(&self, other: &DensitySpec) -> bool {
        let mut cuts: Vec<Scalar> = Vec::new();
        for (lo, hi, _) in self.pieces.iter().chain(&other.pieces) {
            cuts.push(lo.clone());
            cuts.push(hi.clone());
        }
        self.refined(&cuts) == other.refined(&cuts)
    }
}

/// Exact transfer-operator image of a piecewise-constant density under a
/// piecewise-linear map: `(L rho)(x) = sum_b rho(y_b(x)) / |T'(y_b)|` over
/// branches whose image contains `x`.
pub fn transfer_density(map: &IntervalMap, rho: &DensitySpec) -> DensitySpec {
    // breakpoints: branch images of rho's cuts and of the branch endpoints
    let mut cuts: Vec<Scalar> = vec![Scalar::zero(), Scalar::one()];
    for b in &map.branches {
        for point in [&b.lo, &b.hi] {
            cuts.push(&(&b.slope * point) + &b.offset);
        }
        for (lo, hi, _) in &rho.pieces {
            for point in [lo, hi] {
                if point >= &b.lo && point <= &b.hi {
                    cuts.push(&(&b.slope * point) + &b.offset);
                }
            }
        }
    }
    cuts.retain(|c| *c >= Scalar::zero() && *c <= Scalar::one());
    cuts.sort();
    cuts.dedup();
    let mut pieces = Vec::new();
    for w in cuts.windows(2) {
        let mid = &(&w[0] + &w[1]) / &Scalar::from_int(2);
        let mut v = Scalar::zero();
        for b in &map.branches {
            // preimage of mid under this branch, if it lands in the domain
            let y = &(&mid - &b.offset) / &b.slope;
            if y >= b.lo && y <= b.hi {
                v = &v + &(&rho.value_at(&y) / &b.slope);
            }
        }
        pieces.push((w[0].clone(), w[1].clone(), v));
    }
    DensitySpec { pieces }
}

/// The exact invariant density of the map, with invariance under the
/// transfer operator asserted piece by piece.
pub fn invariant_density(map: &IntervalMap) -> DensitySpec {
    let rho = match map.kind {
        IntervalMapKind::Renyi(_) => DensitySpec {
            pieces: vec![(Scalar::zero(), Scalar::one(), Scalar::one())],
        },
        IntervalMapKind::GoldenMult => {
            let phi = Scalar::golden();
            let denom = &Scalar::one() + &phi.pow(2);
            DensitySpec {
                pieces: vec![
                    (Scalar::zero(), phi.pow(-1), &phi.pow(3) / &denom),
                    (phi.pow(-1), Scalar::one(), &phi.pow(2) / &denom),
                ],
            }
        }
    };
    assert_eq!(rho.total_mass(), Scalar::one(), "density must integrate to 1");
    let image = transfer_density(map, &rho);
    assert!(image.same_density(&rho), "density must be invariant");
    rho
}

/// The interval map conjugate to a shift system, if one is built in.
pub fn matching_map(sys: &ShiftSystem) -> Result<IntervalMap, IntervalError> {
    match sys.measure() {
        MeasureSpec::Markov { .. } => Ok(IntervalMap::golden_mult()),
        MeasureSpec::Bernoulli { probabilities } => {
            let beta = sys.beta();
            let uniform = Scalar::ratio(1, beta as i64);
            if probabilities.iter().all(|p| p == &uniform) {
                IntervalMap::renyi(beta as u32)
            } else {
                Err(IntervalError::MismatchedPair(
                    "weighted Bernoulli systems have no built-in conjugate map".into(),
                ))
            }
        }
    }
}

/// Result of the endpointwise conjugacy check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyReport {
    pub words_checked: usize,
    pub endpoints_checked: usize,
}

/// Verify `T(h(w . tail)) = h(shift(w) . tail)` exactly at both cylinder
/// endpoint tails, for every admissible word up to `depth`. The branch of `T`
/// is the one selected by the word's first symbol, so breakpoints are handled
/// symbolically.
pub fn semiconjugacy_check(
    sys: &ShiftSystem,
    map: &IntervalMap,
    depth: usize,
) -> Result<ConjugacyReport, IntervalError> {
    let expected = matching_map(sys)?;
    if expected != *map {
        return Err(IntervalError::MismatchedPair(format!(
            "system pairs with {:?}, got {:?}",
            expected.kind, map.kind
        )));
    }
    let mut words_checked = 0usize;
    let mut endpoints = 0usize;
    for len in 1..=depth {
        for w in sys.admissible_words(len) {
            let branch = w[0] as usize;
            let shifted = &w[1..];
            // lower endpoint: all-zeros tail on both sides
            let a = sys.h_of_periodic(&w, &[0]);
            let a_shift = sys.h_of_periodic(shifted, &[0]);
            assert_eq!(
                map.apply_branch(branch, &a),
                a_shift,
                "lower endpoint of {w:?}"
            );
            // upper endpoint: the largest admissible tail after the last
            // symbol, identical for the word and its shift
            let c = sys.cylinder(&w).expect("admissible");
            let (_, b) = sys.coding_interval(&c);
            let b_shift = if shifted.is_empty() {
                // shift of (w_1 . tail) is the tail itself
                sys.sup_tail_value(Some(w[0]))
            } else {
                sys.coding_interval(&sys.cylinder(shifted).unwrap()).1
            };
            assert_eq!(map.apply_branch(branch, &b), b_shift, "upper endpoint of {w:?}");
            words_checked += 1;
            endpoints += 2;
        }
    }
    Ok(ConjugacyReport { words_checked, endpoints_checked: endpoints })
}

/// One bin of the simulated histogram.
#[derive(Clone, Debug)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub empirical_density: f64,
    pub exact_density: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct HistogramReport {
    pub bins: Vec<HistogramBin>,
    pub samples: u64,
    pub burn_in: u32,
    pub seed: u64,
    pub max_rel_error: f64,
}

fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Monte-Carlo histogram of the invariant density: independent seeded
/// uniform starts, a short burn-in each, final positions binned.
///
/// Per-sample seeds are derived from (seed, sample index), so the output is
/// byte-identical for any thread count. The burn-in stays short on purpose:
/// binary-arithmetic maps collapse long float orbits onto dyadic points.
pub fn histogram_simulation(
    map: &IntervalMap,
    samples: u64,
    bins: usize,
    seed: u64,
    burn_in: u32,
    threads: usize,
) -> Result<HistogramReport, IntervalError> {
    if samples < 10_000 {
        return Err(IntervalError::TooFewSamples(samples));
    }
    if bins == 0 {
        return Err(IntervalError::Parameter("bins must be positive".into()));
    }
    let run_range = |lo: u64, hi: u64| -> Vec<u64> {
        let mut counts = vec![0u64; bins];
        for idx in lo..hi {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, idx));
            let mut x: f64 = rng.gen::<f64>();
            for _ in 0..burn_in {
                x = map.apply_f64(x);
            }
            let mut b = (x * bins as f64) as usize;
            if b >= bins {
                b = bins - 1;
            }
            counts[b] += 1;
        }
        counts
    };
    let threads = threads.clamp(1, 32);
    let counts: Vec<u64> = if threads == 1 {
        run_range(0, samples)
    } else {
        let chunk = samples.div_ceil(threads as u64);
        let mut totals = vec![0u64; bins];
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads as u64 {
                let lo = t * chunk;
                let hi = ((t + 1) * chunk).min(samples);
                let runner = &run_range;
                handles.push(scope.spawn(move || runner(lo, hi)));
            }
            for h in handles {
                for (acc, c) in totals.iter_mut().zip(h.join().expect("simulation thread")) {
                    *acc += c;
                }
            }
        });
        totals
    };
    let rho = invariant_density(map);
    let mut out = Vec::with_capacity(bins);
    let mut max_rel = 0.0_f64;
    for (b, &count) in counts.iter().enumerate() {
        let lo = b as f64 / bins as f64;
        let hi = (b + 1) as f64 / bins as f64;
        // exact per-bin average density (the breakpoint may fall inside a bin)
        let mass = rho.integral(
            &Scalar::ratio(b as i64, bins as i64),
            &Scalar::ratio(b as i64 + 1, bins as i64),
        );
        let exact = (&mass * &Scalar::from_int(bins as i64)).to_f64();
        let empirical = count as f64 * bins as f64 / samples as f64;
        let rel = if exact > 0.0 { (empirical - exact).abs() / exact } else { empirical };
        max_rel = max_rel.max(rel);
        out.push(HistogramBin {
            lo,
            hi,
            count,
            empirical_density: empirical,
            exact_density: exact,
            rel_error: rel,
        });
    }
    Ok(HistogramReport {
        bins: out,
        samples,
        burn_in,
        seed,
        max_rel_error: max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn densities_exact() {
        let renyi = IntervalMap::renyi(2).unwrap();
        let rho = invariant_density(&renyi);
        assert_eq!(rho.pieces.len(), 1);
        assert_eq!(rho.pieces[0].2, Scalar::one());

        let golden = IntervalMap::golden_mult();
        let rho_g = invariant_density(&golden);
        let phi = Scalar::golden();
        let denom = &Scalar::one() + &phi.pow(2);
        assert_eq!(rho_g.value_at(&Scalar::ratio(1, 3)), &phi.pow(3) / &denom);
        assert_eq!(rho_g.value_at(&Scalar::ratio(9, 10)), &phi.pow(2) / &denom);
        // integral identity phi^3 phi^{-1}/(1+phi^2) + phi^2 (1-phi^{-1})/(1+phi^2) = 1
        assert_eq!(rho_g.total_mass(), Scalar::one());
        // the published step values
        assert!((rho_g.pieces[0].2.to_f64() - 1.1708).abs() < 1e-3);
        assert!((rho_g.pieces[1].2.to_f64() - 0.7236).abs() < 1e-3);
    }

    #[test]
    fn transfer_detects_non_invariant() {
        let golden = IntervalMap::golden_mult();
        let wrong = DensitySpec {
            pieces: vec![(Scalar::zero(), Scalar::one(), Scalar::one())],
        };
        let image = transfer_density(&golden, &wrong);
        assert!(!image.same_density(&wrong));
        // mass is preserved by the transfer operator
        assert_eq!(image.total_mass(), Scalar::one());
    }

    #[test]
    fn conjugacy_endpoint_checks() {
        let full2 = ShiftSystem::full2_uniform();
        let renyi2 = IntervalMap::renyi(2).unwrap();
        let report = semiconjugacy_check(&full2, &renyi2, 6).unwrap();
        assert_eq!(report.words_checked, 2 + 4 + 8 + 16 + 32 + 64);

        let golden_sys = ShiftSystem::golden_mean();
        let golden_map = IntervalMap::golden_mult();
        let rg = semiconjugacy_check(&golden_sys, &golden_map, 8).unwrap();
        assert!(rg.words_checked > 0);

        // mismatched pair rejected
        assert!(matches!(
            semiconjugacy_check(&full2, &golden_map, 3),
            Err(IntervalError::MismatchedPair(_))
        ));
        let weighted = ShiftSystem::preset("fullbeta-weighted").unwrap();
        assert!(matches!(
            semiconjugacy_check(&weighted, &renyi2, 3),
            Err(IntervalError::MismatchedPair(_))
        ));
    }

    #[test]
    fn doubling_example_interval_maps_onto_next() {
        // T maps h(C[0,1]) = (1/4, 1/2) onto h(C[1]) = (1/2, 1)
        let full2 = ShiftSystem::full2_uniform();
        let map = IntervalMap::renyi(2).unwrap();
        let c01 = full2.cylinder(&[0, 1]).unwrap();
        let (a, b) = full2.coding_interval(&c01);
        let c1 = full2.cylinder(&[1]).unwrap();
        let (ta, tb) = full2.coding_interval(&c1);
        assert_eq!(map.apply_branch(0, &a), ta);
        assert_eq!(map.apply_branch(0, &b), tb);
    }

    #[test]
    fn golden_interval_measure_agreement() {
        // int_a^b rho dx = mu(C[w]) for all admissible words (length <= 8)
        let sys = ShiftSystem::golden_mean();
        let rho = invariant_density(&IntervalMap::golden_mult());
        for len in 0..=8usize {
            for w in sys.admissible_words(len) {
                let c = sys.cylinder(&w).unwrap();
                let (a, b) = sys.coding_interval(&c);
                assert_eq!(
                    rho.integral(&a, &b),
                    sys.cylinder_measure(&c),
                    "word {w:?}"
                );
            }
        }
    }

    #[test]
    fn simulation_uniform_without_dynamics() {
        let map = IntervalMap::renyi(2).unwrap();
        let report = histogram_simulation(&map, 100_000, 20, 7, 0, 1).unwrap();
        assert!(report.max_rel_error < 0.05, "max rel {}", report.max_rel_error);
        // deterministic across thread counts
        let threaded = histogram_simulation(&map, 100_000, 20, 7, 0, 4).unwrap();
        let counts: Vec<u64> = report.bins.iter().map(|b| b.count).collect();
        let counts_t: Vec<u64> = threaded.bins.iter().map(|b| b.count).collect();
        assert_eq!(counts, counts_t);
    }

    #[test]
    fn simulation_matches_densities() {
        let map = IntervalMap::renyi(2).unwrap();
        let report = histogram_simulation(&map, 200_000, 20, 11, 24, 2).unwrap();
        assert!(report.max_rel_error < 0.03, "doubling {}", report.max_rel_error);

        let golden = IntervalMap::golden_mult();
        let rg = histogram_simulation(&golden, 200_000, 20, 11, 64, 2).unwrap();
        assert!(rg.max_rel_error < 0.03, "golden {}", rg.max_rel_error);

        // binary digit frequency of the doubling map stays near 1/2
        let above: u64 = report
            .bins
            .iter()
            .filter(|b| b.lo >= 0.5)
            .map(|b| b.count)
            .sum();
        let freq = above as f64 / report.samples as f64;
        assert!((freq - 0.5).abs() < 3.0 / (report.samples as f64).sqrt() + 0.01);
    }

    #[test]
    fn simulation_guards() {
        let map = IntervalMap::renyi(2).unwrap();
        assert!(matches!(
            histogram_simulation(&map, 100, 20, 1, 10, 1),
            Err(IntervalError::TooFewSamples(100))
        ));
        assert!(IntervalMap::renyi(1).is_err());
        assert!(IntervalMap::by_name("renyi3").is_ok());
        assert!(IntervalMap::by_name("golden").is_ok());
        assert!(IntervalMap::by_name("logistic").is_err());
    }
}
