//! Property-based invariants over the exact kernel and the operator actions.

use pfspectra_core::observable::{inner_product, koopman_apply, pf_apply, pf_apply_cyl, CylFun};
use pfspectra_core::poly::Poly;
use pfspectra_core::ratfun::RationalFunction;
use pfspectra_core::scalar::Scalar;
use pfspectra_core::shift::ShiftSystem;
use pfspectra_core::spectral::EigenSystem;
use pfspectra_core::Observable;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Scalar> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| Scalar::ratio(n, d))
}

fn small_quad() -> impl Strategy<Value = Scalar> {
    (small_rational(), small_rational()).prop_map(|(a, b)| {
        let ar = a.as_rational().unwrap().clone();
        let br = b.as_rational().unwrap().clone();
        Scalar::quad(ar, br, 5)
    })
}

fn any_scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![small_rational(), small_quad()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in any_scalar(), b in any_scalar(), c in any_scalar()) {
        // associativity
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        // commutativity
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        // distributivity
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        // inverses
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inverse().unwrap(), Scalar::one());
        }
        prop_assert_eq!(&a - &a, Scalar::zero());
    }

    #[test]
    fn scalar_string_round_trip(a in any_scalar()) {
        let text = a.to_string();
        let back: Scalar = text.parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn ordering_consistent_with_floats(a in any_scalar(), b in any_scalar()) {
        // exact comparison must agree with the float shadow whenever the
        // floats are clearly separated
        let (fa, fb) = (a.to_f64(), b.to_f64());
        if (fa - fb).abs() > 1e-6 {
            prop_assert_eq!(a > b, fa > fb);
        }
    }

    #[test]
    fn partial_fraction_round_trip(
        locs in proptest::collection::vec((-6i64..=6, 1i64..=4), 1..=3),
        orders in proptest::collection::vec(1usize..=3, 3),
        coeffs in proptest::collection::vec((-9i64..=9, 1i64..=5), 1..=4),
    ) {
        // distinct pole locations
        let mut poles: Vec<(Scalar, usize)> = Vec::new();
        for (k, (n, d)) in locs.iter().enumerate() {
            let loc = Scalar::ratio(*n, *d);
            if poles.iter().all(|(l, _)| l != &loc) {
                poles.push((loc, orders[k.min(orders.len() - 1)]));
            }
        }
        let den_deg: usize = poles.iter().map(|(_, o)| o).sum();
        // proper numerator
        let num = Poly::from_coeffs(
            coeffs
                .iter()
                .take(den_deg.max(1))
                .map(|(n, d)| Scalar::ratio(*n, *d))
                .collect(),
        );
        let num_deg = num.degree().unwrap_or(0);
        prop_assume!(!num.is_zero() && num_deg < den_deg);
        let rf = RationalFunction::new(num, poles);
        prop_assume!(!rf.is_zero());
        if let Ok(terms) = rf.partial_fractions() {
            let back = RationalFunction::from_partial_fractions(&terms);
            prop_assert_eq!(back, rf);
        }
    }

    #[test]
    fn golden_powers_cancel(n in 0i64..=50) {
        let phi = Scalar::golden();
        prop_assert_eq!(&phi.pow(n) * &phi.pow(-n), Scalar::one());
    }

    #[test]
    fn transfer_preserves_degree_and_mean(coeffs in proptest::collection::vec(-20i64..=20, 1..=7)) {
        for name in ["full2-uniform", "fullbeta-uniform", "fullbeta-weighted"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let p = Poly::from_coeffs(coeffs.iter().map(|&c| Scalar::from_int(c)).collect());
            let f = Observable::poly(p.clone());
            let out = pf_apply(&sys, &f).unwrap();
            let Observable::Poly(q) = &out else { panic!() };
            prop_assert!(q.poly.degree() <= p.degree());
            // the invariant measure is preserved: int V f = int f
            let one = Observable::constant(Scalar::one());
            prop_assert_eq!(
                inner_product(&sys, &out, &one).unwrap(),
                inner_product(&sys, &f, &one).unwrap()
            );
        }
    }

    #[test]
    fn adjointness_random_cylinders(seed in 0u64..1000) {
        let val = |s: u64, w: &[u8]| {
            let mut x = s;
            for &b in w {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(b as u64 + 1);
            }
            Scalar::from_int(((x >> 33) % 13) as i64 - 6)
        };
        for name in ["full2-uniform", "golden-mean"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let f = CylFun::from_fn(&sys, 3, |w| val(seed, w));
            let g = CylFun::from_fn(&sys, 2, |w| val(seed ^ 0xdead, w));
            let lhs = inner_product(
                &sys,
                &Observable::Cyl(pf_apply_cyl(&sys, &f)),
                &Observable::Cyl(g.clone()),
            )
            .unwrap();
            let rhs = inner_product(
                &sys,
                &Observable::Cyl(f),
                &Observable::Cyl(koopman_apply(&sys, &g)),
            )
            .unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn resolvent_inverts_shifted_operator(coeffs in proptest::collection::vec(-9i64..=9, 1..=6)) {
        // (lambda - V) applied to the evaluated resolvent returns f, on both
        // basis kinds
        let lambda = Scalar::ratio(7, 5);
        for name in ["full2-uniform", "golden-mean"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let es = EigenSystem::new(&sys, 5).unwrap();
            let p = Poly::from_coeffs(coeffs.iter().map(|&c| Scalar::from_int(c)).collect());
            let f = Observable::poly(p);
            let r = es.resolvent(&f).unwrap();
            let at = r.eval(&es, &lambda).unwrap();
            let v_at = pf_apply(&sys, &at).unwrap();
            let lhs_coords: Vec<Scalar> = es
                .coords(&at)
                .unwrap()
                .iter()
                .zip(es.coords(&v_at).unwrap().iter())
                .map(|(x, vx)| &(&lambda * x) - vx)
                .collect();
            prop_assert_eq!(lhs_coords, es.coords(&f).unwrap());
        }
    }

    #[test]
    fn decomposition_reconstructs(coeffs in proptest::collection::vec(-9i64..=9, 1..=8)) {
        for name in ["full2-uniform", "fullbeta-weighted", "golden-mean"] {
            let sys = ShiftSystem::preset(name).unwrap();
            let es = EigenSystem::new(&sys, 7).unwrap();
            let p = Poly::from_coeffs(coeffs.iter().map(|&c| Scalar::from_int(c)).collect());
            let f = Observable::poly(p);
            let d = es.decompose(&f).unwrap();
            let back = es.reconstruct(&d);
            let want = match (es.basis(), f.clone()) {
                (pfspectra_core::BasisTag::Block, Observable::Poly(p)) => Observable::Block(
                    pfspectra_core::BlockObservable::from_poly(&p.poly),
                ),
                (_, other) => other,
            };
            prop_assert_eq!(back, want);
        }
    }
}
