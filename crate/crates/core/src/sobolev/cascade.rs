//! The ordered coefficient conditions defining each regularity case.

use num_traits::One;

use crate::constraints::LinearCondition;
use crate::dmap::DMapRecord;
use crate::poly2::Exp;
use crate::rational::{frac, int, Rational};

use super::{CaseLabel, Order};

/// One case of the cascade: its conditions (over `z` for first order, over
/// `w` for second order) and the leading-part order `r` that detects them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeLevel {
    pub case: CaseLabel,
    pub r: u32,
    pub conditions: Vec<LinearCondition>,
}

fn cond(case: CaseLabel, var: &str, terms: Vec<(Exp, Rational)>) -> LinearCondition {
    let mut c = LinearCondition::new("", terms);
    c.label = format!("case {case}: {} = 0", c.describe(var));
    c
}

fn level(case: CaseLabel, r: u32, var: &str, conds: Vec<Vec<(Exp, Rational)>>) -> CascadeLevel {
    CascadeLevel {
        case,
        r,
        conditions: conds.into_iter().map(|t| cond(case, var, t)).collect(),
    }
}

pub fn cascade(rec: &DMapRecord, order: Order) -> Vec<CascadeLevel> {
    match order {
        Order::First => first_order(),
        Order::Second => second_order(rec),
    }
}

fn first_order() -> Vec<CascadeLevel> {
    use CaseLabel::*;
    let one = Rational::one;
    vec![
        level(A, 0, "z", vec![]),
        level(
            B,
            1,
            "z",
            vec![vec![((1, 0), one())], vec![((0, 1), one())]],
        ),
        level(C, 2, "z", vec![vec![((1, 1), one())]]),
    ]
}

fn second_order(rec: &DMapRecord) -> Vec<CascadeLevel> {
    use CaseLabel::*;
    let p = rec.params();
    let (al, be, ga, de) = (&p.alpha, &p.beta, &p.gamma, &p.delta);
    let y = rec.y();
    let one = Rational::one;
    let half = || frac(1, 2);

    // 2 y31 - 3 alpha y30 - 2 beta y12, and its mirror 2 y13 - 3 delta y03 - 2 gamma y21.
    let (y31, y30, y13, y03) = (
        y.coeff_vec(3, 1),
        y.coeff_vec(3, 0),
        y.coeff_vec(1, 3),
        y.coeff_vec(0, 3),
    );
    let lead_u: Vec<Rational> = (0..2)
        .map(|i| int(2) * &y31[i] - int(3) * al * &y30[i] - int(2) * be * [ga, de][i])
        .collect();
    let lead_v: Vec<Rational> = (0..2)
        .map(|i| int(2) * &y13[i] - int(3) * de * &y03[i] - int(2) * ga * [al, be][i])
        .collect();

    vec![
        level(
            A,
            3,
            "w",
            vec![vec![((1, 0), one())], vec![((0, 1), one())]],
        ),
        level(B, 4, "w", vec![vec![((1, 1), one())]]),
        level(
            C,
            5,
            "w",
            vec![vec![((2, 1), one())], vec![((1, 2), one())]],
        ),
        level(
            D,
            6,
            "w",
            vec![
                vec![((3, 1), one()), ((3, 0), -frac(3, 2) * al)],
                vec![((1, 3), one()), ((0, 3), -frac(3, 2) * de)],
            ],
        ),
        level(
            E,
            7,
            "w",
            vec![
                vec![((3, 0), one())],
                vec![((3, 1), one())],
                vec![((0, 3), one())],
                vec![((1, 3), one())],
                vec![
                    ((4, 1), one()),
                    ((4, 0), -int(2) * al),
                    ((2, 2), -be.clone()),
                ],
                vec![
                    ((1, 4), one()),
                    ((0, 4), -int(2) * de),
                    ((2, 2), -ga.clone()),
                ],
            ],
        ),
        level(
            F,
            8,
            "w",
            vec![
                // w51 = [w40, w22/2] . lead_u + beta w32 + 5 alpha w50 / 2
                vec![
                    ((5, 1), one()),
                    ((4, 0), -lead_u[0].clone()),
                    ((2, 2), -(half() * &lead_u[1])),
                    ((3, 2), -be.clone()),
                    ((5, 0), -frac(5, 2) * al),
                ],
                // w15 = [w22/2, w04] . lead_v + gamma w23 + 5 delta w05 / 2
                vec![
                    ((1, 5), one()),
                    ((2, 2), -(half() * &lead_v[0])),
                    ((0, 4), -lead_v[1].clone()),
                    ((2, 3), -ga.clone()),
                    ((0, 5), -frac(5, 2) * de),
                ],
            ],
        ),
    ]
}
