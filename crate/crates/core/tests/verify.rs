mod common;

use common::*;
use dmap_regularity::constraints::CoefficientSpace;
use dmap_regularity::poly2::Poly2;
use dmap_regularity::rational::{frac, int, to_f64, Rational};
use dmap_regularity::sobolev::{
    cascade, classify, monomial_in_lp, p_range, quotient_first, quotient_second, CaseLabel, Order,
    PBound,
};
use dmap_regularity::verify::{
    footnote_fixture, footnote_integral, gradient_limit_check, integrate_log_endpoint,
    monomial_oracle, substituted_norm, truncated_norm, truncated_norm_with, DivergenceDiagnostic,
    QuadratureOptions, SubstitutedBound, Verdict,
};
use dmap_regularity::{standardize, DMapRecord, Error};
use rand::Rng;

fn canonical_record() -> DMapRecord {
    standardize(&canonical()).unwrap()
}

/// Slope diagnosis only needs a few digits per annulus.
const LOOSE: QuadratureOptions = QuadratureOptions {
    rel_tol: 1e-6,
    max_boxes: 6000,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

#[test]
fn constant_quotient_at_the_equality_exponent_diverges_logarithmically() {
    let rec = canonical_record();
    let d = truncated_norm(&rec, &Poly2::constant(int(1)), 1, &int(2), 20).unwrap();
    assert_eq!(d.verdict, Verdict::DivergentLog);
    // Bulk and cusps tie here, so increments grow like j and the slope is about 1.44 / j.
    assert!(
        d.rate_estimate > 0.0 && d.rate_estimate < 0.1,
        "{}",
        d.rate_estimate
    );
    assert_eq!(d.epsilons.len(), 19);
    assert_eq!(d.epsilons[0], 0.25);
}

#[test]
fn zero_quotient_is_convergent_with_zero_values() {
    let rec = canonical_record();
    let q = quotient_second(&rec, &Poly2::zero(1)).unwrap();
    let d = truncated_norm(&rec, &q.p, q.ell, &int(2), 10).unwrap();
    assert_eq!(d.verdict, Verdict::Convergent);
    assert!(d.values.iter().all(|&v| v == 0.0));
}

#[test]
fn vector_quotient_with_positive_weight_converges() {
    let rec = canonical_record();
    let p = map2(scalar(&[((1, 1), 1)]), Poly2::zero(1));
    let d = truncated_norm(&rec, &p, 1, &int(2), 20).unwrap();
    assert_eq!(d.verdict, Verdict::Convergent);
    // The bulk of each annulus dominates, with increments decaying like 2^(-4j).
    assert!((d.rate_estimate + 4.0).abs() < 0.05, "{}", d.rate_estimate);
    let n = d.values.len();
    assert!(d.values[n - 1] - d.values[n - 2] < 1e-9 * d.values[n - 1]);
}

#[test]
fn monomial_oracle_examples() {
    let rec = canonical_record();
    for (m, n, ell, expect) in [
        (1, 1, 1, Verdict::Convergent),
        (0, 0, 1, Verdict::DivergentLog),
        (2, 1, 3, Verdict::DivergentPower),
    ] {
        let d = monomial_oracle(m, n, ell, &int(2), &rec, 20).unwrap();
        assert_eq!(d.verdict, expect, "({m}, {n}, {ell})");
        assert_eq!(
            monomial_in_lp(m, n, ell, &int(2)).unwrap(),
            expect == Verdict::Convergent
        );
    }
}

#[test]
fn monomial_rates_match_the_dominant_regime() {
    // An annulus at scale e splits into a bulk part (u ~ v ~ e) contributing
    // e^(p(m + n - 2 ell) + 4) and cusps (v ~ u^2 or u ~ v^2) contributing
    // e^(p(w - 3 ell) + 6); the smaller exponent sets the log2 slope.
    let rec = canonical_record();
    for (m, n, ell, p) in [
        (2u32, 1u32, 3u32, int(2)),
        (1, 1, 1, frac(3, 2)),
        (0, 0, 3, int(1)),
        (1, 0, 2, int(2)),
    ] {
        let d = monomial_oracle(m, n, ell, &p, &rec, 16).unwrap();
        let w = (m + n + m.min(n)) as f64;
        let (m, n, ell, p) = (m as f64, n as f64, ell as f64, to_f64(&p));
        let expect = -(p * (m + n - 2.0 * ell) + 4.0).min(p * (w - 3.0 * ell) + 6.0);
        assert!(
            (d.rate_estimate - expect).abs() < 0.05,
            "({m}, {n}, {ell}): {}",
            d.rate_estimate
        );
    }
}

#[test]
fn substituted_norm_examples() {
    // (1,1,1,2): int s^5 ds = 1/6 and int t^3 (1-t)^2 dt = B(4, 3) = 1/60.
    match substituted_norm(1, 1, 1, &int(2)).unwrap() {
        SubstitutedBound::Finite { lower, upper } => {
            assert!(close(lower, 1.0 / 360.0, 1e-12));
            assert!(close(upper, 64.0 / 360.0, 1e-12));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(
        substituted_norm(0, 0, 1, &int(2)).unwrap(),
        SubstitutedBound::Divergent
    );
    // (3,0,1,1): int s^5 ds * int t^4 dt = 1/30.
    match substituted_norm(3, 0, 1, &int(1)).unwrap() {
        SubstitutedBound::Finite { lower, .. } => assert!(close(lower, 1.0 / 30.0, 1e-12)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn substituted_norm_divergence_matches_the_weight_criterion() {
    // The substitution is adapted to n <= m; there the divergence flag is exact.
    let ps = [int(1), frac(6, 5), frac(3, 2), int(2), int(3), int(6)];
    for m in 0..=4 {
        for n in 0..=m {
            for ell in 1..=3 {
                for p in &ps {
                    let div =
                        substituted_norm(m, n, ell, p).unwrap() == SubstitutedBound::Divergent;
                    assert_eq!(
                        div,
                        !monomial_in_lp(m, n, ell, p).unwrap(),
                        "({m}, {n}, {ell}, {p})"
                    );
                }
            }
        }
    }
}

#[test]
fn gradient_limit_fixtures() {
    let rec = canonical_record();
    let y = rec.y();
    let sum = &y.component(0) + &y.component(1);
    let tilted = &(&y.component(0).scale(&int(2)) + &y.component(1).scale(&int(3)))
        + &scalar(&[((2, 2), 1), ((3, 1), 1), ((4, 0), -2)]);
    for (z, limit) in [(sum, [1, 1]), (y.component(0), [1, 0]), (tilted, [2, 3])] {
        let rep = gradient_limit_check(&rec, &z, 20).unwrap();
        assert_eq!(rep.limit_exact, [int(limit[0]), int(limit[1])]);
        assert!(rep.max_deviation < 1e-6, "{}", rep.max_deviation);
        assert_eq!(rep.observations.len(), 19 * 3);
    }
}

#[test]
fn gradient_deviation_shrinks_for_generic_c1_fields() {
    let mut r = rng(21);
    for _ in 0..5 {
        let rec = standardize(&random_standard_map(&mut r)).unwrap();
        let cs = rec.c1_conditions_in(CoefficientSpace::new(4, 4));
        let z = random_field_in_case_for(&mut r, &cs);
        let rep = gradient_limit_check(&rec, &z, 20).unwrap();
        let at = |j: u32| {
            rep.observations
                .iter()
                .filter(|o| o.j == j)
                .fold(0.0f64, |m, o| m.max(o.deviation))
        };
        assert!(at(20) < at(10) || at(10) < 1e-12);
        assert!(rep.max_deviation < 1e-4, "{}", rep.max_deviation);
    }
}

fn random_field_in_case_for(r: &mut impl Rng, cs: &dmap_regularity::ConstraintSystem) -> Poly2 {
    let mut z = Poly2::zero(1);
    for b in dmap_regularity::admissible_basis(cs) {
        z = &z + &b.scale(&small_rational(r, 2, 2));
    }
    z
}

#[test]
fn gradient_check_requires_c1_fields() {
    let rec = canonical_record();
    assert!(matches!(
        gradient_limit_check(&rec, &Poly2::u(), 10),
        Err(Error::C1Violated(_))
    ));
}

#[test]
fn footnote_values() {
    let v = footnote_fixture().unwrap();
    assert!((v - 1.0 / std::f64::consts::LN_2).abs() < 1e-8);
    let v = footnote_integral(0.25).unwrap();
    assert!((v - 1.0 / 4f64.ln()).abs() < 1e-8);
    assert_eq!(integrate_log_endpoint(0.5, |_| 0.0, 1e-12).unwrap(), 0.0);
}

#[test]
fn argument_checks() {
    let rec = canonical_record();
    let one = Poly2::constant(int(1));
    assert!(matches!(
        truncated_norm(&rec, &one, 1, &frac(1, 2), 10),
        Err(Error::InvalidExponent(_))
    ));
    assert!(matches!(
        truncated_norm(&rec, &one, 1, &int(2), 3),
        Err(Error::TruncationDepth(3, _))
    ));
}

fn assert_monotone(d: &DivergenceDiagnostic) {
    for w in d.values.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-10), "{} < {}", w[1], w[0]);
    }
}

#[test]
fn truncation_is_monotone_and_deterministic() {
    let mut r = rng(31);
    for _ in 0..3 {
        let rec = standardize(&random_standard_map(&mut r)).unwrap();
        let z = random_field(&mut r, 3, 3);
        let q = quotient_second(&rec, &rec.reduce_field(&z).unwrap()).unwrap();
        let p = frac(r.gen_range(10..=30), 10);
        let a = truncated_norm_with(&rec, &q.p, q.ell, &p, 10, &LOOSE).unwrap();
        let b = truncated_norm_with(&rec, &q.p, q.ell, &p, 10, &LOOSE).unwrap();
        assert_monotone(&a);
        let bits = |d: &DivergenceDiagnostic| -> Vec<u64> {
            d.values
                .iter()
                .chain(&d.ln_values)
                .chain(&d.log2_increments)
                .chain([&d.rate_estimate])
                .map(|x| x.to_bits())
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.verdict, b.verdict);
    }
}

/// The oracle confirms each classification at the lower end of the reached case's range
/// (convergent), at `p_sup` (divergent) and at `p_sup + 1/10` (divergent).
#[test]
fn oracle_agrees_with_classification() {
    let mut r = rng(99);
    for i in 0..20 {
        let rec = standardize(&random_standard_map(&mut r)).unwrap();
        for order in [Order::First, Order::Second] {
            let levels = cascade(&rec, order);
            let z = random_field_in_case(
                &mut r,
                &rec,
                order,
                i % (levels.len() + 1),
                CoefficientSpace::new(4, 4),
            );
            let rep = classify(&rec, &z, order).unwrap();
            let q = match order {
                Order::First => quotient_first(&rec, &z).unwrap(),
                Order::Second => quotient_second(&rec, &rec.reduce_field(&z).unwrap()).unwrap(),
            };
            let mut points: Vec<(Rational, bool)> = Vec::new();
            if rep.case != CaseLabel::None {
                let level = levels.iter().find(|l| l.case == rep.case).unwrap();
                points.push((p_range(level.r, order.ell()).unwrap().lower, true));
            }
            if let PBound::Finite(s) = &rep.p_sup {
                points.push((s.clone(), false));
                points.push((s + frac(1, 10), false));
            }
            for (p, inside) in points {
                assert_eq!(rep.contains(&p).unwrap(), inside);
                let d = truncated_norm_with(&rec, &q.p, q.ell, &p, 20, &LOOSE).unwrap();
                let ok = if inside {
                    d.verdict == Verdict::Convergent
                } else {
                    d.verdict.is_divergent()
                };
                assert!(
                    ok,
                    "instance {i}, order {order}, case {}, p = {p}: {}",
                    rep.case, d.verdict
                );
            }
        }
    }
}
