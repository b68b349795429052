//! Sobolev regularity of `f = z o x^-1` over a degenerate geometry map.
//!
//! Integrability near the degenerate corner is governed by a weight on
//! monomials: `u^m v^n / mu^ell` lies in `L^p` of the square (with the Jacobian
//! as measure) iff `m + n + min(m, n) > 3 ell - 6/p`. The regularity class is
//! decided by an ordered cascade of linear coefficient conditions, and each
//! verdict is cross-checked against the vanishing of the leading part of the
//! matching quotient polynomial.

mod cascade;
mod quotient;

use std::fmt;

use num_traits::{One, Zero};

use crate::dmap::DMapRecord;
use crate::error::{Error, Result};
use crate::poly2::Poly2;
use crate::rational::{format_rational, frac, int, Rational};

pub use cascade::{cascade, CascadeLevel};
pub use quotient::{
    quotient_first, quotient_first_truncated, quotient_second, quotient_second_truncated,
    QuotientData,
};

/// Derivative order `k` of the Sobolev space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_k(k: u32) -> Option<Order> {
        match k {
            1 => Some(Order::First),
            2 => Some(Order::Second),
            _ => None,
        }
    }

    pub fn k(self) -> u32 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }

    /// Power of `mu` in the denominator of the quotient.
    pub fn ell(self) -> u32 {
        match self {
            Order::First => 1,
            Order::Second => 3,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.k())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    None,
    A,
    B,
    C,
    D,
    E,
    F,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::None => "none",
            CaseLabel::A => "a",
            CaseLabel::B => "b",
            CaseLabel::C => "c",
            CaseLabel::D => "d",
            CaseLabel::E => "e",
            CaseLabel::F => "f",
        }
    }

    pub fn parse(s: &str) -> Option<CaseLabel> {
        [
            CaseLabel::None,
            CaseLabel::A,
            CaseLabel::B,
            CaseLabel::C,
            CaseLabel::D,
            CaseLabel::E,
            CaseLabel::F,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper end of an exponent interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PBound {
    Finite(Rational),
    Infinite,
}

impl PBound {
    /// Half-open semantics: `p` is admitted iff `p < self`.
    pub fn admits(&self, p: &Rational) -> bool {
        match self {
            PBound::Finite(b) => p < b,
            PBound::Infinite => true,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PBound::Infinite)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            PBound::Finite(b) => Some(b),
            PBound::Infinite => None,
        }
    }
}

impl fmt::Display for PBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PBound::Finite(b) => f.write_str(&format_rational(b)),
            PBound::Infinite => f.write_str("inf"),
        }
    }
}

/// The half-open interval `[lower, upper)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PInterval {
    pub lower: Rational,
    pub upper: PBound,
}

impl PInterval {
    pub fn contains(&self, p: &Rational) -> bool {
        p >= &self.lower && self.upper.admits(p)
    }

    pub fn is_empty(&self) -> bool {
        !self.upper.admits(&self.lower)
    }
}

impl fmt::Display for PInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", format_rational(&self.lower), self.upper)
    }
}

pub fn weight(m: u32, n: u32) -> u32 {
    m + n + m.min(n)
}

pub fn check_exponent(p: &Rational) -> Result<()> {
    if p < &Rational::one() {
        return Err(Error::InvalidExponent(format_rational(p)));
    }
    Ok(())
}

/// Whether `u^m v^n / mu^ell` is p-integrable on the square with the Jacobian as measure.
pub fn monomial_in_lp(m: u32, n: u32, ell: u32, p: &Rational) -> Result<bool> {
    check_exponent(p)?;
    let lhs = int(weight(m, n) as i64);
    let rhs = int(3 * ell as i64) - int(6) / p;
    Ok(lhs > rhs)
}

/// Exponents `p` for which a quotient whose leading part of order `r` is the
/// first nonvanishing one lies in `L^p`: `[6/(3 ell - r), 6/(3 ell - 1 - r))`.
pub fn p_range(r: u32, ell: u32) -> Result<PInterval> {
    let top = 3 * ell as i64;
    let r = r as i64;
    if r >= top {
        return Err(Error::UndefinedRange { r: r as u32, ell });
    }
    let upper = if top - 1 - r <= 0 {
        PBound::Infinite
    } else {
        PBound::Finite(frac(6, top - 1 - r))
    };
    Ok(PInterval {
        lower: frac(6, top - r),
        upper,
    })
}

/// Terms of `p` with `weight(j, k) <= r`.
pub fn leading_part(p: &Poly2, r: u32) -> Poly2 {
    p.filter_terms(|j, k| weight(j, k) <= r)
}

/// Supremum of admissible `p` for a case of the given order.
pub fn p_sup(order: Order, case: CaseLabel) -> PBound {
    use CaseLabel::*;
    let f = |n, d| PBound::Finite(frac(n, d));
    match (order, case) {
        (_, None) => f(1, 1),
        (Order::First, A) => f(3, 1),
        (Order::First, B) => f(6, 1),
        (Order::First, _) => PBound::Infinite,
        (Order::Second, A) => f(6, 5),
        (Order::Second, B) => f(3, 2),
        (Order::Second, C) => f(2, 1),
        (Order::Second, D) => f(3, 1),
        (Order::Second, E) => f(6, 1),
        (Order::Second, F) => PBound::Infinite,
    }
}

pub fn terminal_case(order: Order) -> CaseLabel {
    match order {
        Order::First => CaseLabel::C,
        Order::Second => CaseLabel::F,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailedCondition {
    pub label: String,
    /// Value of the condition's linear form; nonzero by construction.
    pub residual: Rational,
}

/// Answer to the question whether the `k`-th derivatives are bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundedVerdict {
    /// Expected but without proof.
    ConjecturedBounded,
    NotBounded,
}

impl fmt::Display for BoundedVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundedVerdict::ConjecturedBounded => f.write_str("conjectured bounded (unproved)"),
            BoundedVerdict::NotBounded => f.write_str("not bounded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityReport {
    pub order: Order,
    pub case: CaseLabel,
    pub p_sup: PBound,
    pub conjectured_bounded: bool,
    /// The conditions of the first failing case that do not hold.
    pub failed_conditions: Vec<FailedCondition>,
}

impl RegularityReport {
    pub fn p_interval(&self) -> PInterval {
        PInterval {
            lower: Rational::one(),
            upper: self.p_sup.clone(),
        }
    }

    /// Membership in `W^{k,p}` for finite `p >= 1`.
    pub fn contains(&self, p: &Rational) -> Result<bool> {
        check_exponent(p)?;
        Ok(self.p_sup.admits(p))
    }

    pub fn bounded(&self) -> BoundedVerdict {
        if self.conjectured_bounded {
            BoundedVerdict::ConjecturedBounded
        } else {
            BoundedVerdict::NotBounded
        }
    }
}

/// Index of the deepest satisfied level and the failures of the next one.
fn run_cascade(levels: &[CascadeLevel], field: &Poly2) -> (Option<usize>, Vec<FailedCondition>) {
    let mut deepest = None;
    for (i, l) in levels.iter().enumerate() {
        let failed: Vec<FailedCondition> = l
            .conditions
            .iter()
            .filter_map(|c| {
                let v = c.eval(field);
                (!v.is_zero()).then(|| FailedCondition {
                    label: c.label.clone(),
                    residual: v,
                })
            })
            .collect();
        if !failed.is_empty() {
            return (deepest, failed);
        }
        deepest = Some(i);
    }
    (deepest, Vec::new())
}

/// Classifies `z o x^-1` in `W^{k,p}`.
///
/// The coefficient cascade decides the case. Each level is then re-derived from
/// the leading parts of the quotient polynomial; for second order the two
/// middle components must also vanish wherever the preceding case holds. Any
/// disagreement is reported as [`Error::InternalInconsistency`].
pub fn classify(rec: &DMapRecord, z: &Poly2, order: Order) -> Result<RegularityReport> {
    if z.dim() != 1 {
        return Err(Error::FieldDimension(z.dim()));
    }
    let levels = cascade(rec, order);
    let max_r = levels.last().expect("nonempty cascade").r;
    let (field, quotient) = match order {
        Order::First => (z.clone(), quotient_first_truncated(rec, z, Some(max_r))?),
        Order::Second => {
            let w = rec.reduce_field(z)?;
            let q = quotient_second_truncated(rec, &w, Some(max_r))?;
            (w, q)
        }
    };
    let (deepest, failed) = run_cascade(&levels, &field);

    let reached = |i: usize| deepest.is_some_and(|d| d >= i);
    for (i, l) in levels.iter().enumerate() {
        let lead = leading_part(&quotient.p, l.r);
        if lead.is_zero() != reached(i) {
            return Err(Error::InternalInconsistency(format!(
                "order {order}: case {} conditions {} but the leading part of order {} {}",
                l.case,
                if reached(i) { "hold" } else { "fail" },
                l.r,
                if lead.is_zero() {
                    "vanishes"
                } else {
                    "does not vanish"
                },
            )));
        }
        if order == Order::Second && (i == 0 || reached(i - 1)) {
            for c in [1, 2] {
                if !lead.component(c).is_zero() {
                    return Err(Error::InternalInconsistency(format!(
                        "component {c} of the leading part of order {} is nonzero",
                        l.r
                    )));
                }
            }
        }
    }

    let case = deepest.map_or(CaseLabel::None, |d| levels[d].case);
    Ok(RegularityReport {
        order,
        case,
        p_sup: p_sup(order, case),
        conjectured_bounded: case == terminal_case(order),
        failed_conditions: failed,
    })
}
