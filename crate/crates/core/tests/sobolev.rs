mod common;

use common::*;
use dmap_regularity::constraints::CoefficientSpace;
use dmap_regularity::poly2::Poly2;
use dmap_regularity::rational::{frac, int, Rational};
use dmap_regularity::sobolev::{
    classify, leading_part, p_range, quotient_first, quotient_second, quotient_second_truncated,
    BoundedVerdict, CaseLabel, Order, PBound,
};
use dmap_regularity::{standardize, Error};
use proptest::prelude::*;

fn canonical_record() -> dmap_regularity::DMapRecord {
    standardize(&canonical()).unwrap()
}

#[test]
fn first_order_quotient_of_u() {
    let rec = canonical_record();
    let q = quotient_first(&rec, &Poly2::u()).unwrap();
    assert_eq!(q.ell, 1);
    let expect = map2(scalar(&[((0, 1), 2), ((2, 0), 1)]), scalar(&[((1, 1), -2)]));
    assert_eq!(q.p, expect);
    assert_eq!(
        leading_part(&q.p, 1),
        map2(scalar(&[((0, 1), 2)]), Poly2::zero(1))
    );
}

#[test]
fn first_order_quotient_trivial_cases() {
    let rec = canonical_record();
    assert!(quotient_first(&rec, &Poly2::constant(int(7)))
        .unwrap()
        .p
        .is_zero());
    let z = scalar(&[((2, 0), 1), ((1, 2), 1)]);
    let q = quotient_first(&rec, &z).unwrap();
    assert!(leading_part(&q.p, 2).is_zero());
    assert!(!q.p.is_zero());
}

#[test]
fn first_order_leading_parts_match_closed_forms() {
    // Lambda_1 P = [2 z10 v, 2 z01 u] and, when those vanish, Lambda_2 P = [2 z11 v^2, 2 z11 u^2].
    let rec = canonical_record();
    let z = scalar(&[((1, 0), 3), ((0, 1), -5), ((1, 1), 7), ((3, 2), 1)]);
    let q = quotient_first(&rec, &z).unwrap();
    assert_eq!(
        leading_part(&q.p, 1),
        map2(scalar(&[((0, 1), 6)]), scalar(&[((1, 0), -10)]))
    );
    let z = scalar(&[((1, 1), 7), ((3, 2), 1)]);
    let q = quotient_first(&rec, &z).unwrap();
    assert_eq!(
        leading_part(&q.p, 2),
        map2(scalar(&[((0, 2), 14)]), scalar(&[((2, 0), 14)]))
    );
}

#[test]
fn second_order_quotient_examples() {
    let rec = canonical_record();
    let q = quotient_second(&rec, &Poly2::zero(1)).unwrap();
    assert!(q.p.is_zero());
    assert_eq!(q.ell, 3);

    let q = quotient_second(&rec, &Poly2::u()).unwrap();
    let l3 = leading_part(&q.p, 3);
    assert_eq!(l3.component(0), scalar(&[((0, 3), -16)]));
    for c in 1..4 {
        assert!(l3.component(c).is_zero(), "component {c}");
    }

    let q = quotient_second(&rec, &scalar(&[((1, 2), 1)])).unwrap();
    let l5 = leading_part(&q.p, 5);
    assert_eq!(l5.component(0), scalar(&[((0, 5), -16)]));
    assert!(l5.component(3).is_zero());

    assert_eq!(
        quotient_second(&rec, &scalar(&[((2, 0), 1)])),
        Err(Error::NotReduced)
    );
}

#[test]
fn truncated_quotient_agrees_with_full() {
    let mut r = rng(11);
    for _ in 0..5 {
        let rec = standardize(&random_standard_map(&mut r)).unwrap();
        let w = rec.reduce_field(&random_field(&mut r, 4, 4)).unwrap();
        let full = quotient_second(&rec, &w).unwrap();
        let trunc = quotient_second_truncated(&rec, &w, Some(8)).unwrap();
        assert_eq!(full.p.truncate_total_degree(8), trunc.p);
    }
}

#[test]
fn classify_examples_on_canonical_map() {
    let rec = canonical_record();
    let z = scalar(&[((2, 0), 1), ((1, 2), 1)]);
    let r = classify(&rec, &z, Order::Second).unwrap();
    assert_eq!(r.case, CaseLabel::F);
    assert_eq!(r.p_sup, PBound::Infinite);
    assert!(r.conjectured_bounded);
    assert_eq!(r.bounded(), BoundedVerdict::ConjecturedBounded);
    assert!(r.failed_conditions.is_empty());

    let r = classify(&rec, &scalar(&[((2, 0), 1)]), Order::Second).unwrap();
    assert_eq!(r.case, CaseLabel::B);
    assert_eq!(r.p_interval().to_string(), "[1, 3/2)");
    assert_eq!(r.failed_conditions.len(), 1);
    assert_eq!(r.failed_conditions[0].label, "case c: w12 = 0");
    assert_eq!(r.failed_conditions[0].residual, int(-1));
    assert!(r.contains(&int(1)).unwrap());
    assert!(!r.contains(&frac(3, 2)).unwrap());
    assert_eq!(r.bounded(), BoundedVerdict::NotBounded);

    let r = classify(&rec, &Poly2::u(), Order::Second).unwrap();
    assert_eq!(r.case, CaseLabel::None);
    assert!(r.p_interval().is_empty());
    assert!(!r.contains(&int(1)).unwrap());
    let r = classify(&rec, &Poly2::u(), Order::First).unwrap();
    assert_eq!(r.case, CaseLabel::A);
    assert_eq!(r.p_interval().to_string(), "[1, 3)");
    assert_eq!(r.failed_conditions[0].label, "case b: z10 = 0");
}

#[test]
fn c1_field_with_generic_higher_terms_is_case_c() {
    let rec = canonical_record();
    // z21 = z02 and z12 = z20 (alpha = delta = 0, beta = gamma = 1), plus z31 != 0.
    let z = scalar(&[
        ((2, 0), 2),
        ((0, 2), 3),
        ((2, 1), 3),
        ((1, 2), 2),
        ((3, 1), 1),
        ((2, 2), 5),
    ]);
    assert!(rec.satisfies_c1(&z));
    let r = classify(&rec, &z, Order::Second).unwrap();
    assert_eq!(r.case, CaseLabel::C);
    assert_eq!(r.p_sup, PBound::Finite(int(2)));
}

#[test]
fn first_order_case_a_always_holds() {
    let mut r = rng(3);
    for _ in 0..20 {
        let rec = standardize(&random_standard_map(&mut r)).unwrap();
        let z = random_field(&mut r, 3, 3);
        let rep = classify(&rec, &z, Order::First).unwrap();
        assert!(rep.case >= CaseLabel::A);
        assert!(rep.p_sup != PBound::Finite(int(1)));
    }
}

#[test]
fn classify_rejects_vector_fields() {
    let rec = canonical_record();
    assert_eq!(
        classify(&rec, &canonical(), Order::First),
        Err(Error::FieldDimension(2))
    );
}

#[test]
fn cascade_matches_leading_parts_on_random_instances() {
    let mut r = rng(2024);
    let space = CoefficientSpace::new(5, 5);
    for i in 0..30 {
        let rec = standardize(&random_standard_map(&mut r)).unwrap();
        for order in [Order::First, Order::Second] {
            let depth = dmap_regularity::sobolev::cascade(&rec, order).len();
            let levels = i % (depth + 1);
            let z = random_field_in_case(&mut r, &rec, order, levels, space);
            let rep = classify(&rec, &z, order).unwrap();
            assert!(
                rep.case >= case_at(order, levels),
                "instance {i}: {:?}",
                rep.case
            );
        }
    }
}

fn case_at(order: Order, levels: usize) -> CaseLabel {
    let cases = match order {
        Order::First => [CaseLabel::A, CaseLabel::A, CaseLabel::B, CaseLabel::C].to_vec(),
        Order::Second => [
            CaseLabel::None,
            CaseLabel::A,
            CaseLabel::B,
            CaseLabel::C,
            CaseLabel::D,
            CaseLabel::E,
            CaseLabel::F,
        ]
        .to_vec(),
    };
    cases[levels]
}

#[test]
fn p_range_lower_end_is_minimal_exponent() {
    for ell in 1..=3u32 {
        for r in 0..3 * ell {
            let iv = p_range(r, ell).unwrap();
            assert_eq!(iv.lower, frac(6, (3 * ell - r) as i64));
            assert!(iv.contains(&iv.lower));
        }
    }
}

fn arb_field() -> impl Strategy<Value = Poly2> {
    prop::collection::vec(((0u32..5, 0u32..5), -6i64..=6, 1i64..=4), 0..10)
        .prop_map(|t| Poly2::scalar(t.into_iter().map(|(e, n, d)| (e, frac(n, d)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leading_part_is_monotone(z in arb_field(), r1 in 0u32..10, r2 in 0u32..10) {
        let rec = canonical_record();
        let w = rec.reduce_field(&z).unwrap();
        let p = quotient_second(&rec, &w).unwrap().p;
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        prop_assert_eq!(leading_part(&p, lo), leading_part(&leading_part(&p, hi), lo));
    }

    #[test]
    fn reduced_field_has_no_square_terms(z in arb_field()) {
        let rec = canonical_record();
        let w = rec.reduce_field(&z).unwrap();
        prop_assert!(w.coeff(2, 0).is_none() && w.coeff(0, 2).is_none());
    }

    #[test]
    fn classification_ignores_linear_functions_of_the_map(
        z in arb_field(),
        c1 in -5i64..=5,
        c2 in -5i64..=5,
        seed in 0u64..1000,
    ) {
        let mut r = rng(seed);
        let y = random_standard_map(&mut r);
        let (a, b) = random_affine(&mut r);
        let rec = standardize(&y).unwrap();
        let rec_x = standardize(&apply_affine(&y, &a, &b)).unwrap();
        let shift = &rec.y().component(0).scale(&int(c1)) + &rec.y().component(1).scale(&int(c2));
        let z2 = &z + &shift;
        for order in [Order::First, Order::Second] {
            let base = classify(&rec, &z, order).unwrap();
            prop_assert_eq!(&base, &classify(&rec, &z2, order).unwrap());
            prop_assert_eq!(&base, &classify(&rec_x, &z, order).unwrap());
        }
    }
}

#[test]
fn exponent_checks() {
    let rec = canonical_record();
    let r = classify(&rec, &Poly2::zero(1), Order::Second).unwrap();
    assert!(matches!(
        r.contains(&frac(1, 2)),
        Err(Error::InvalidExponent(_))
    ));
    let _: Rational = r.p_interval().lower;
}
