//! Linear constraint systems on the coefficients of a scalar field `z`.
//!
//! Regularity conditions are linear in the coefficients of the reduced field
//! `w`, and `w_jk = z_jk - z20 (y_jk)_1 - z02 (y_jk)_2` is linear in `z`, so each
//! condition pulls back to a row over a finite box of `z` coefficients.

mod linalg;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::dmap::DMapRecord;
use crate::error::{Error, Result};
use crate::poly2::{Exp, Poly2};
use crate::rational::{format_rational, Rational};
use crate::sobolev::{self, CaseLabel, Order};

pub use linalg::{nullspace, rref};

/// The span of `u^j v^k` with `j <= max_deg_u`, `k <= max_deg_v`, enumerated
/// lexicographically in `(j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoefficientSpace {
    pub max_deg_u: u32,
    pub max_deg_v: u32,
}

impl CoefficientSpace {
    pub fn new(max_deg_u: u32, max_deg_v: u32) -> Self {
        CoefficientSpace {
            max_deg_u,
            max_deg_v,
        }
    }

    pub fn bicubic() -> Self {
        Self::new(3, 3)
    }

    pub fn dim(&self) -> usize {
        (self.max_deg_u as usize + 1) * (self.max_deg_v as usize + 1)
    }

    pub fn contains(&self, j: u32, k: u32) -> bool {
        j <= self.max_deg_u && k <= self.max_deg_v
    }

    pub fn index(&self, j: u32, k: u32) -> Option<usize> {
        self.contains(j, k)
            .then(|| j as usize * (self.max_deg_v as usize + 1) + k as usize)
    }

    pub fn exponents(&self) -> Vec<Exp> {
        (0..=self.max_deg_u)
            .flat_map(|j| (0..=self.max_deg_v).map(move |k| (j, k)))
            .collect()
    }

    /// Coefficient vector of a scalar polynomial lying in the space.
    pub fn vector_of(&self, z: &Poly2) -> Result<Vec<Rational>> {
        if z.dim() != 1 {
            return Err(Error::FieldDimension(z.dim()));
        }
        let mut out = vec![Rational::zero(); self.dim()];
        for (&(j, k), c) in z.terms() {
            let i = self.index(j, k).ok_or(Error::OutsideSpace { j, k })?;
            out[i] = c[0].clone();
        }
        Ok(out)
    }

    pub fn poly_of(&self, coeffs: &[Rational]) -> Poly2 {
        Poly2::scalar(self.exponents().into_iter().zip(coeffs.iter().cloned()))
    }
}

impl fmt::Display for CoefficientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.max_deg_u, self.max_deg_v)
    }
}

/// A labeled linear form `sum c_jk * coeff_jk` over the coefficients of a scalar polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCondition {
    pub label: String,
    pub form: BTreeMap<Exp, Rational>,
}

impl LinearCondition {
    pub fn new(label: impl Into<String>, terms: impl IntoIterator<Item = (Exp, Rational)>) -> Self {
        let mut form: BTreeMap<Exp, Rational> = BTreeMap::new();
        for (e, c) in terms {
            *form.entry(e).or_insert_with(Rational::zero) += c;
        }
        form.retain(|_, c| !c.is_zero());
        LinearCondition {
            label: label.into(),
            form,
        }
    }

    pub fn eval(&self, p: &Poly2) -> Rational {
        self.form
            .iter()
            .map(|(&(j, k), c)| c * p.scalar_coeff(j, k))
            .sum()
    }

    /// Rewrites a condition on `w` as one on `z` via `w = z - z20 y1 - z02 y2`.
    pub fn pull_back(&self, y: &Poly2) -> LinearCondition {
        let mut terms = Vec::new();
        for (&(j, k), c) in &self.form {
            terms.push(((j, k), c.clone()));
            let yjk = y.coeff_vec(j, k);
            terms.push(((2, 0), -(c * &yjk[0])));
            terms.push(((0, 2), -(c * &yjk[1])));
        }
        LinearCondition::new(self.label.clone(), terms)
    }

    /// The row of this form over `space`; coefficients outside the box are dropped.
    pub fn row_in(&self, space: &CoefficientSpace) -> Vec<Rational> {
        let mut row = vec![Rational::zero(); space.dim()];
        for (&(j, k), c) in &self.form {
            if let Some(i) = space.index(j, k) {
                row[i] = c.clone();
            }
        }
        row
    }

    /// Readable form such as `z21 - 1/2*z20`.
    pub fn describe(&self, var: &str) -> String {
        if self.form.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (&(j, k), c)) in self.form.iter().enumerate() {
            let neg = c < &Rational::zero();
            let a = if neg { -c } else { c.clone() };
            match (i, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            if a != Rational::from_integer(1.into()) {
                s.push_str(&format_rational(&a));
                s.push('*');
            }
            s.push_str(&format!("{var}{j}{k}"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRow {
    pub label: String,
    pub coeffs: Vec<Rational>,
}

impl ConstraintRow {
    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Target {
    pub order: Order,
    pub case: CaseLabel,
}

/// Labeled rows over a coefficient space, together with their reduced echelon form.
///
/// Rows that vanish on the space are kept in `rows` for traceability but do not
/// appear in the reduced form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    space: CoefficientSpace,
    rows: Vec<ConstraintRow>,
    reduced: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
    target: Option<Target>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub satisfied: bool,
    pub violated: Vec<String>,
}

impl ConstraintSystem {
    pub fn from_conditions(
        space: CoefficientSpace,
        conditions: impl IntoIterator<Item = LinearCondition>,
        target: Option<Target>,
    ) -> Self {
        let rows: Vec<ConstraintRow> = conditions
            .into_iter()
            .map(|c| ConstraintRow {
                coeffs: c.row_in(&space),
                label: c.label,
            })
            .collect();
        let matrix: Vec<Vec<Rational>> = rows.iter().map(|r| r.coeffs.clone()).collect();
        let (reduced, pivots) = rref(&matrix, space.dim());
        ConstraintSystem {
            space,
            rows,
            reduced,
            pivots,
            target,
        }
    }

    pub fn space(&self) -> &CoefficientSpace {
        &self.space
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn reduced_rows(&self) -> &[Vec<Rational>] {
        &self.reduced
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn target(&self) -> Option<Target> {
        self.target
    }

    pub fn rank(&self) -> usize {
        self.reduced.len()
    }

    pub fn admissible_dim(&self) -> usize {
        self.space.dim() - self.rank()
    }

    pub fn check_membership(&self, z: &Poly2) -> Result<Membership> {
        let x = self.space.vector_of(z)?;
        let violated: Vec<String> = self
            .rows
            .iter()
            .filter(|r| {
                let v: Rational = r.coeffs.iter().zip(&x).map(|(a, b)| a * b).sum();
                !v.is_zero()
            })
            .map(|r| r.label.clone())
            .collect();
        Ok(Membership {
            satisfied: violated.is_empty(),
            violated,
        })
    }
}

/// Conditions that `z` must satisfy for `z o x^-1` to lie in `W^{k,p}`.
///
/// The target is the first case of the cascade whose interval `[1, p_sup)`
/// contains `p`; the rows are the conditions of that case and all before it.
pub fn constraints_for(
    rec: &DMapRecord,
    order: Order,
    p: &Rational,
    space: CoefficientSpace,
) -> Result<ConstraintSystem> {
    sobolev::check_exponent(p)?;
    let levels = sobolev::cascade(rec, order);
    let target = levels
        .iter()
        .position(|l| sobolev::p_sup(order, l.case).admits(p))
        .ok_or_else(|| {
            Error::InternalInconsistency(format!("no case of order {order} admits p"))
        })?;
    let conds = levels[..=target].iter().flat_map(|l| l.conditions.iter());
    let conds: Vec<LinearCondition> = match order {
        Order::First => conds.cloned().collect(),
        Order::Second => conds.map(|c| c.pull_back(rec.y())).collect(),
    };
    Ok(ConstraintSystem::from_conditions(
        space,
        conds,
        Some(Target {
            order,
            case: levels[target].case,
        }),
    ))
}

/// A nullspace basis of the system, one polynomial per free coefficient.
pub fn admissible_basis(cs: &ConstraintSystem) -> Vec<Poly2> {
    nullspace(&cs.reduced, &cs.pivots, cs.space.dim())
        .iter()
        .map(|v| cs.space.poly_of(v))
        .collect()
}
