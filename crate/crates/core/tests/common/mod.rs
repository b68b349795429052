#![allow(dead_code)]

use dmap_regularity::constraints::{
    admissible_basis, CoefficientSpace, ConstraintSystem, LinearCondition,
};
use dmap_regularity::dmap::{validate, JacobianStatus};
use dmap_regularity::poly2::Poly2;
use dmap_regularity::rational::{frac, int, Rational};
use dmap_regularity::sobolev::{cascade, Order};
use dmap_regularity::DMapRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar(terms: &[((u32, u32), i64)]) -> Poly2 {
    Poly2::scalar(terms.iter().map(|&(e, c)| (e, int(c))))
}

pub fn map2(a: Poly2, b: Poly2) -> Poly2 {
    Poly2::stack(&[a, b]).unwrap()
}

/// `y* = (u^2 + u v^2, v^2 + u^2 v)`.
pub fn canonical() -> Poly2 {
    map2(
        scalar(&[((2, 0), 1), ((1, 2), 1)]),
        scalar(&[((0, 2), 1), ((2, 1), 1)]),
    )
}

/// Rational `n/d` with `|n/d| <= bound` and `1 <= d <= max_den`.
pub fn small_rational(rng: &mut impl Rng, bound: i64, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    frac(rng.gen_range(-bound * d..=bound * d), d)
}

const EXTRA: [(u32, u32); 12] = [
    (3, 0),
    (0, 3),
    (3, 1),
    (2, 2),
    (1, 3),
    (3, 2),
    (2, 3),
    (3, 3),
    (4, 0),
    (0, 4),
    (4, 1),
    (1, 4),
];

/// Random standard-form map with `beta, gamma` in `[1/4, 1]`, `alpha, delta` in
/// `[-1/4, 1/4]` and small higher-order terms; resampled until positivity is certified.
pub fn random_standard_map(rng: &mut impl Rng) -> Poly2 {
    loop {
        let alpha = frac(rng.gen_range(-2..=2), 8);
        let beta = frac(rng.gen_range(2..=8), 8);
        let gamma = frac(rng.gen_range(2..=8), 8);
        let delta = frac(rng.gen_range(-2..=2), 8);
        let mut c0 = vec![((2, 0), int(1)), ((2, 1), alpha), ((1, 2), gamma)];
        let mut c1 = vec![((0, 2), int(1)), ((2, 1), beta), ((1, 2), delta)];
        let count = rng.gen_range(0..=5);
        for &e in EXTRA.choose_multiple(rng, count) {
            c0.push((e, frac(rng.gen_range(-2..=2), 16)));
            c1.push((e, frac(rng.gen_range(-2..=2), 16)));
        }
        let y = map2(Poly2::scalar(c0), Poly2::scalar(c1));
        if validate(&y).unwrap().jacobian_positive == Some(JacobianStatus::Certified) {
            return y;
        }
    }
}

/// Random invertible integer matrix and shift.
pub fn random_affine(rng: &mut impl Rng) -> ([[Rational; 2]; 2], [Rational; 2]) {
    loop {
        let a: [[i64; 2]; 2] = [
            [rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
            [rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
        ];
        if a[0][0] * a[1][1] - a[0][1] * a[1][0] != 0 {
            let b = [small_rational(rng, 4, 3), small_rational(rng, 4, 3)];
            return (a.map(|r| r.map(int)), b);
        }
    }
}

pub fn apply_affine(y: &Poly2, a: &[[Rational; 2]; 2], b: &[Rational; 2]) -> Poly2 {
    let lin = y.map_coeffs(&[a[0].to_vec(), a[1].to_vec()]).unwrap();
    lin.try_add(&Poly2::from_terms(2, [((0, 0), b.to_vec())]).unwrap())
        .unwrap()
}

/// Random scalar polynomial of bidegree at most `(du, dv)`, about half the terms nonzero.
pub fn random_field(rng: &mut impl Rng, du: u32, dv: u32) -> Poly2 {
    let mut terms = Vec::new();
    for j in 0..=du {
        for k in 0..=dv {
            if rng.gen_bool(0.5) {
                terms.push(((j, k), small_rational(rng, 3, 4)));
            }
        }
    }
    Poly2::scalar(terms)
}

/// The conditions of the first `levels` cascade levels, as conditions on `z`.
pub fn conditions_on_z(rec: &DMapRecord, order: Order, levels: usize) -> Vec<LinearCondition> {
    cascade(rec, order)[..levels]
        .iter()
        .flat_map(|l| l.conditions.iter())
        .map(|c| match order {
            Order::First => c.clone(),
            Order::Second => c.pull_back(rec.y()),
        })
        .collect()
}

/// Random field in `space` satisfying the first `levels` cascade levels.
pub fn random_field_in_case(
    rng: &mut impl Rng,
    rec: &DMapRecord,
    order: Order,
    levels: usize,
    space: CoefficientSpace,
) -> Poly2 {
    let cs = ConstraintSystem::from_conditions(space, conditions_on_z(rec, order, levels), None);
    let mut z = Poly2::zero(1);
    for b in admissible_basis(&cs) {
        if rng.gen_bool(0.7) {
            z = &z + &b.scale(&small_rational(rng, 3, 3));
        }
    }
    z
}
