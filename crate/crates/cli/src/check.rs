//! The `check` subcommand: a fast battery of the engine's exact invariants,
//! one line per check.

use pfspectra_core::observable::{
    approx_eigenfunction_defect, inner_product, koopman_apply, pf_apply_cyl, walsh_fun,
    CylFun, WalshIndex,
};
use pfspectra_core::poly::Poly;
use pfspectra_core::scalar::{ComplexScalar, Scalar};
use pfspectra_core::shift::ShiftSystem;
use pfspectra_core::spectral::{bernoulli_poly, EigenSystem};
use pfspectra_core::twosided::{build_operator, perturbation_coefficient, pole_order_check, TensorCoeffs, TensorIndex};
use pfspectra_core::{histogram_simulation, invariant_density, semiconjugacy_check, IntervalMap, Observable};

fn s(t: &str) -> Scalar {
    t.parse().unwrap()
}

fn run_check(name: &str, body: impl FnOnce() -> Result<(), String> + std::panic::UnwindSafe) -> bool {
    let outcome = std::panic::catch_unwind(body);
    match outcome {
        Ok(Ok(())) => {
            println!("check {name:<42} ok");
            true
        }
        Ok(Err(msg)) => {
            println!("check {name:<42} FAILED: {msg}");
            false
        }
        Err(_) => {
            println!("check {name:<42} FAILED: panic");
            false
        }
    }
}

/// Run every invariant; returns the number of failures.
pub fn run_all() -> usize {
    let mut failures = 0usize;
    let mut check = |name: &str, body: fn() -> Result<(), String>| {
        if !run_check(name, body) {
            failures += 1;
        }
    };

    check("scalar field axioms and round-trip", || {
        let phi = Scalar::golden();
        for n in 0..=50i64 {
            if &phi.pow(n) * &phi.pow(-n) != Scalar::one() {
                return Err(format!("power cancellation failed at {n}"));
            }
        }
        for v in [s("5/6"), s("-7/3"), phi.pow(-3), -&phi.pow(2)] {
            let back: Scalar = v.to_string().parse().map_err(|_| "parse".to_string())?;
            if back != v {
                return Err(format!("round-trip failed for {v}"));
            }
        }
        Ok(())
    });

    check("uniform 2-shift spectrum and eigenpolynomials", || {
        let es = EigenSystem::new(&ShiftSystem::full2_uniform(), 8).map_err(|e| e.to_string())?;
        for (k, l) in es.eigenvalues().iter().enumerate() {
            if l != &Scalar::ratio(1, 1 << k) {
                return Err(format!("eigenvalue {k} is {l}"));
            }
            let Observable::Poly(p) = es.eigenfunction(k) else { unreachable!() };
            if p.poly != bernoulli_poly(k) {
                return Err(format!("eigenpolynomial {k} mismatch"));
            }
        }
        Ok(())
    });

    check("weighted diagonals are power sums", || {
        let sys = ShiftSystem::bernoulli(vec![s("1/3"), s("2/3")]).map_err(|e| e.to_string())?;
        let rm = pfspectra_core::rep_matrix(&sys, 8).map_err(|e| e.to_string())?;
        for n in 0..=8usize {
            let expect = &s("1/3").pow(n as i64 + 1) + &s("2/3").pow(n as i64 + 1);
            if rm.matrix.at(n, n) != &expect {
                return Err(format!("diagonal {n}"));
            }
        }
        Ok(())
    });

    check("golden-mean eigenvalue families", || {
        let es = EigenSystem::new(&ShiftSystem::golden_mean(), 6).map_err(|e| e.to_string())?;
        let phi = Scalar::golden();
        let mut got = es.eigenvalues().to_vec();
        let mut expected: Vec<Scalar> = (0..=6).map(|k| phi.pow(-k)).collect();
        expected.extend((0..=6).map(|k| -&phi.pow(-k - 2)));
        got.sort();
        expected.sort();
        if got != expected {
            return Err("families mismatch".into());
        }
        Ok(())
    });

    check("golden-mean measures vs density integrals", || {
        let sys = ShiftSystem::golden_mean();
        let rho = invariant_density(&IntervalMap::golden_mult());
        for len in 0..=6usize {
            for w in sys.admissible_words(len) {
                let c = sys.cylinder(&w).map_err(|e| e.to_string())?;
                let (a, b) = sys.coding_interval(&c);
                if rho.integral(&a, &b) != sys.cylinder_measure(&c) {
                    return Err(format!("word {w:?}"));
                }
            }
        }
        Ok(())
    });

    check("semi-conjugacy endpoints (doubling and golden)", || {
        semiconjugacy_check(
            &ShiftSystem::full2_uniform(),
            &IntervalMap::renyi(2).map_err(|e| e.to_string())?,
            6,
        )
        .map_err(|e| e.to_string())?;
        semiconjugacy_check(&ShiftSystem::golden_mean(), &IntervalMap::golden_mult(), 6)
            .map_err(|e| e.to_string())?;
        Ok(())
    });

    check("Walsh orthonormality (n, m <= 32)", || {
        let sys = ShiftSystem::full2_uniform();
        let funs: Vec<CylFun> = (0..=32u64)
            .map(|n| walsh_fun(&sys, WalshIndex { n, beta: 2 }).unwrap())
            .collect();
        for (i, fi) in funs.iter().enumerate() {
            for (j, fj) in funs.iter().enumerate().skip(i) {
                let ip = inner_product(
                    &sys,
                    &Observable::Cyl(fi.clone()),
                    &Observable::Cyl(fj.clone()),
                )
                .map_err(|e| e.to_string())?;
                let expect = if i == j { Scalar::one() } else { Scalar::zero() };
                if ip != expect {
                    return Err(format!("<W_{i}, W_{j}> = {ip}"));
                }
            }
        }
        Ok(())
    });

    check("adjointness of transfer and composition operators", || {
        for name in ["full2-uniform", "golden-mean"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let f = CylFun::from_fn(&sys, 3, |w| {
                Scalar::from_int(w.iter().map(|&b| b as i64 + 1).product::<i64>())
            });
            let g = CylFun::from_fn(&sys, 2, |w| {
                Scalar::from_int(w.iter().map(|&b| 2 * b as i64 - 1).sum::<i64>())
            });
            let lhs = inner_product(
                &sys,
                &Observable::Cyl(pf_apply_cyl(&sys, &f)),
                &Observable::Cyl(g.clone()),
            )
            .map_err(|e| e.to_string())?;
            let rhs = inner_product(
                &sys,
                &Observable::Cyl(f),
                &Observable::Cyl(koopman_apply(&sys, &g)),
            )
            .map_err(|e| e.to_string())?;
            if lhs != rhs {
                return Err(name.to_string());
            }
        }
        Ok(())
    });

    check("unit-circle defect identity (n <= 16)", || {
        let sys = ShiftSystem::full2_uniform();
        let z = ComplexScalar::new(Scalar::zero(), Scalar::one());
        for n in 1..=16usize {
            let d = approx_eigenfunction_defect(&sys, &z, n).map_err(|e| e.to_string())?;
            if d != Scalar::ratio(1, n as i64) {
                return Err(format!("defect at n = {n} is {d}"));
            }
        }
        Ok(())
    });

    check("two-sided spectrum oracle and Jordan data", || {
        let mut expected = Poly::one();
        for i in 0..=3usize {
            for j in 0..=3usize {
                expected = &expected
                    * &Poly::from_coeffs(vec![-&Scalar::ratio(1, 1 << (i + j)), Scalar::one()]);
            }
        }
        for eps in [Scalar::zero(), Scalar::one()] {
            if build_operator(eps, 3, 3).matrix().char_poly() != expected {
                return Err("characteristic polynomial".into());
            }
        }
        let op = build_operator(Scalar::one(), 6, 6);
        for k in 0..=2usize {
            let r = op.jordan_analysis(k).map_err(|e| e.to_string())?;
            if r.algebraic != k + 1 || r.geometric != 1 || !r.stable {
                return Err(format!("Jordan data at k = {k}"));
            }
        }
        Ok(())
    });

    check("perturbation pole orders (k <= 2)", || {
        for k in 0..=2usize {
            let r = pole_order_check(k).map_err(|e| e.to_string())?;
            if r.order != k + 1 {
                return Err(format!("order {} at k = {k}", r.order));
            }
        }
        // chain and matrix routes agree (asserted internally)
        let f = TensorCoeffs::delta(TensorIndex { i: 2, j: 0 });
        let g = TensorCoeffs::delta(TensorIndex { i: 0, j: 2 });
        let _ = perturbation_coefficient(2, &f, &g);
        Ok(())
    });

    check("histogram simulation sanity", || {
        let map = IntervalMap::renyi(2).map_err(|e| e.to_string())?;
        let r = histogram_simulation(&map, 100_000, 20, 13, 24, 2).map_err(|e| e.to_string())?;
        if r.max_rel_error > 0.04 {
            return Err(format!("doubling-map histogram off by {}", r.max_rel_error));
        }
        let golden = IntervalMap::golden_mult();
        let rg = histogram_simulation(&golden, 100_000, 20, 13, 64, 2).map_err(|e| e.to_string())?;
        if rg.max_rel_error > 0.04 {
            return Err(format!("golden-map histogram off by {}", rg.max_rel_error));
        }
        Ok(())
    });

    if failures == 0 {
        println!("all checks passed");
    }
    failures
}
