//! Property-based invariants for the exact-arithmetic primitives, digit
//! expansions, and topology decision procedures.

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use badic::{
    circle_norm, in_tm, in_v, reduce_mod_z, separate, DSeq, DigitStream, Interval, Rational,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1i64..=1000).prop_map(|(p, q)| Rational::of(p, q))
}

/// A rational in the canonical fundamental domain (-1/2, 1/2].
fn domain_rational() -> impl Strategy<Value = Rational> {
    (2i64..=1000, 1i64..=1000).prop_map(|(q, p)| {
        let x = Rational::of(p % q, q); // in [0, 1)
        if x > Rational::of(1, 2) {
            x - Rational::one()
        } else {
            x
        }
    })
}

fn family() -> impl Strategy<Value = DSeq> {
    prop_oneof![
        (2u64..=5).prop_map(|a| DSeq::geometric(a).unwrap()),
        Just(DSeq::factorial()),
        (2u64..=3).prop_map(|a| DSeq::squared_exp(a).unwrap()),
        (2u64..=3).prop_map(|a| DSeq::triangular_pow(a).unwrap()),
    ]
}

proptest! {
    /// reduce_mod_z differs from its input by an exact integer and lands
    /// in (-1/2, 1/2].
    #[test]
    fn reduction_is_integer_translation(q in rational()) {
        let c = reduce_mod_z(&q);
        let diff = &q - c.rep();
        prop_assert!(diff.is_integer());
        prop_assert!(c.rep() > &Rational::of(-1, 2));
        prop_assert!(c.rep() <= &Rational::of(1, 2));
    }

    /// The circle norm is subadditive and symmetric under negation.
    #[test]
    fn norm_subadditive_and_symmetric(a in rational(), b in rational()) {
        let ca = reduce_mod_z(&a);
        let cb = reduce_mod_z(&b);
        let sum = reduce_mod_z(&(&a + &b));
        prop_assert!(circle_norm(&sum) <= circle_norm(&ca) + circle_norm(&cb));
        let neg = reduce_mod_z(&(-&a));
        prop_assert_eq!(circle_norm(&neg), circle_norm(&ca));
    }

    /// T_{m'} is contained in T_m whenever m <= m'.
    #[test]
    fn arcs_nest(q in rational(), m in 1u64..=20, extra in 0u64..=20) {
        let c = reduce_mod_z(&q);
        if in_tm(&c, m + extra) {
            prop_assert!(in_tm(&c, m));
        }
    }

    /// Interval addition and scaling preserve containment of points.
    #[test]
    fn interval_arithmetic_contains(
        a in rational(), b in rational(), ra in 0i64..=50, rb in 0i64..=50, s in rational()
    ) {
        let ia = Interval::point(a.clone()).add(&Interval::symmetric(Rational::of(ra, 100)));
        let ib = Interval::point(b.clone()).add(&Interval::symmetric(Rational::of(rb, 100)));
        prop_assert!(ia.add(&ib).contains(&(&a + &b)));
        prop_assert!(ia.scale(&s).contains(&(&a * &s)));
    }

    /// Every built-in family passes validation-grade growth:
    /// b_{n+k} >= 2^k b_n over a finite window.
    #[test]
    fn builtin_growth(b in family()) {
        prop_assert!(b.growth_check(8).unwrap());
    }

    /// Tail-sum certificates hold and the partial sum never exceeds the bound.
    #[test]
    fn tail_sums_certify(b in family(), j in 0usize..=6, depth in 1usize..=8) {
        let t = b.tail_sum_bound(j, depth).unwrap();
        prop_assert!(t.certified);
        prop_assert!(t.partial <= t.bound);
    }

    /// Extraction yields a valid D-sequence, a subsequence of the input,
    /// with strictly increasing consecutive ratios.
    #[test]
    fn extraction_invariants(b in family(), len in 2usize..=7) {
        let c = b.extract_dinfty(len).unwrap();
        let mut prev_ratio: Option<Rational> = None;
        let mut search_from = 0usize;
        for n in 0..len {
            let cn = c.term(n).unwrap();
            // subsequence: each c_n occurs in b at or after the previous hit
            let mut found = false;
            for j in search_from..search_from + 64 {
                if b.term(j).unwrap() == cn {
                    search_from = j;
                    found = true;
                    break;
                }
            }
            prop_assert!(found, "c_{} = {} not found in base", n, cn);
            if n >= 1 {
                let r = Rational::new(c.term(n).unwrap(), c.term(n - 1).unwrap());
                if let Some(p) = prev_ratio {
                    prop_assert!(r > p);
                }
                prev_ratio = Some(r);
            }
        }
    }

    /// Rational digit expansions satisfy the balanced digit and remainder
    /// bounds and reconstruct the input within the remainder radius.
    #[test]
    fn expansion_bounds_and_reconstruction(x in domain_rational(), b in family(), upto in 1usize..=8) {
        let stream = DigitStream::expand_rational(x.clone(), b.clone()).unwrap();
        prop_assert!(stream.first_bound_violation(upto).unwrap().is_none());
        let partial = stream.partial_sum(upto).unwrap();
        let radius = Rational::new(BigInt::from(1), BigInt::from(2) * b.term(upto).unwrap());
        prop_assert!((&x - &partial).abs() <= radius);
    }

    /// Membership in V is symmetric in k and monotone downward in m.
    #[test]
    fn v_membership_symmetry_and_monotonicity(
        b in family(), m in 1u64..=6, k in -3000i64..=3000
    ) {
        let k = BigInt::from(k);
        let fwd = in_v(&b, m, &k).unwrap().is_member();
        let bwd = in_v(&b, m, &(-&k)).unwrap().is_member();
        prop_assert_eq!(fwd, bwd);
        if fwd && m > 1 {
            prop_assert!(in_v(&b, m - 1, &k).unwrap().is_member());
        }
    }

    /// Separation certificates check out: c <= m and the moved point
    /// really leaves the arc at the reported index.
    #[test]
    fn separation_certificates_check(b in family(), m in 1u64..=4, k in 1i64..=2000) {
        let k = BigInt::from(k);
        if !in_v(&b, m, &k).unwrap().is_member() {
            let s = separate(&b, m, &k).unwrap();
            prop_assert!(s.c >= 1 && s.c <= m);
            let point = reduce_mod_z(&Rational::new(
                BigInt::from(s.c) * &k,
                b.term(s.n).unwrap(),
            ));
            prop_assert!(point.norm() > Rational::of(1, 4));
            prop_assert_eq!(point.norm(), s.moved_norm);
        }
    }

    /// Synthetic streams stay admissible and seeded streams are
    /// reproducible from the seed.
    #[test]
    fn seeded_streams_admissible_and_reproducible(seed in 0u64..=500, b in family()) {
        let s1 = DigitStream::seeded_random(b.clone(), seed);
        let s2 = DigitStream::seeded_random(b, seed);
        prop_assert!(s1.first_bound_violation(20).unwrap().is_none());
        for n in 1..=20 {
            prop_assert_eq!(s1.digit(n).unwrap(), s2.digit(n).unwrap());
        }
        // infinitely many nonzero digits: power-of-two indices are forced
        for n in [1usize, 2, 4, 8, 16] {
            prop_assert!(!s1.digit(n).unwrap().is_zero());
        }
    }
}
