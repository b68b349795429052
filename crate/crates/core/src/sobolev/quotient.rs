//! Quotient polynomials whose leading parts decide integrability.
//!
//! First order: `grad f o x = P / mu` with `P = Dz Gamma`.
//! Second order: the second partials of `f o x` equal `P / mu^3` with
//! `P = (mu D2w - Dw Gamma D2y)(Gamma ⊗ Gamma)`.

use crate::dmap::DMapRecord;
use crate::error::{Error, Result};
use crate::poly2::mat::row_times;
use crate::poly2::{Poly2, Var};

use super::Order;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientData {
    pub order: Order,
    pub p: Poly2,
    /// Power of `mu` in the denominator.
    pub ell: u32,
    /// Set when only terms of total degree `<= d` were computed.
    pub truncated_at: Option<u32>,
}

fn trunc(p: &Poly2, t: Option<u32>) -> Poly2 {
    match t {
        Some(d) => p.truncate_total_degree(d),
        None => p.clone(),
    }
}

fn scalar_field(z: &Poly2) -> Result<()> {
    if z.dim() != 1 {
        return Err(Error::FieldDimension(z.dim()));
    }
    Ok(())
}

pub fn quotient_first(rec: &DMapRecord, z: &Poly2) -> Result<QuotientData> {
    quotient_first_truncated(rec, z, None)
}

/// `Dz Gamma`, optionally keeping only terms of total degree `<= max_total`.
pub fn quotient_first_truncated(
    rec: &DMapRecord,
    z: &Poly2,
    max_total: Option<u32>,
) -> Result<QuotientData> {
    scalar_field(z)?;
    let dz = [
        trunc(&z.diff(Var::U), max_total),
        trunc(&z.diff(Var::V), max_total),
    ];
    let g = rec
        .gamma_adj()
        .entries()
        .clone()
        .map(|r| r.map(|e| trunc(&e, max_total)));
    let p = row_times(&dz, &g, max_total);
    Ok(QuotientData {
        order: Order::First,
        p: Poly2::stack(&p)?,
        ell: 1,
        truncated_at: max_total,
    })
}

pub fn quotient_second(rec: &DMapRecord, w: &Poly2) -> Result<QuotientData> {
    quotient_second_truncated(rec, w, None)
}

/// Second derivatives in the order `(d11, d12, d21, d22)`.
fn hessian_row(p: &Poly2, t: Option<u32>) -> [Poly2; 4] {
    let (pu, pv) = (p.diff(Var::U), p.diff(Var::V));
    [
        trunc(&pu.diff(Var::U), t),
        trunc(&pu.diff(Var::V), t),
        trunc(&pv.diff(Var::U), t),
        trunc(&pv.diff(Var::V), t),
    ]
}

/// Second-order quotient for a reduced field `w` (so `w20 = w02 = 0`).
pub fn quotient_second_truncated(
    rec: &DMapRecord,
    w: &Poly2,
    max_total: Option<u32>,
) -> Result<QuotientData> {
    scalar_field(w)?;
    if w.coeff(2, 0).is_some() || w.coeff(0, 2).is_some() {
        return Err(Error::NotReduced);
    }
    let t = max_total;
    let mu = trunc(rec.mu(), t);
    let gamma = rec.gamma_adj().truncate_total_degree(t.unwrap_or(u32::MAX));
    let d2w = hessian_row(w, t);
    let dw = [trunc(&w.diff(Var::U), t), trunc(&w.diff(Var::V), t)];
    let y = rec.y();
    let d2y = [
        hessian_row(&y.component(0), t),
        hessian_row(&y.component(1), t),
    ];

    let dw_gamma = row_times(&dw, gamma.entries(), t);
    let correction = row_times(&dw_gamma, &d2y, t);
    let q: [Poly2; 4] = std::array::from_fn(|c| {
        let m = mu.mul_truncated(&d2w[c], t).expect("scalar");
        &m - &correction[c]
    });
    let kron = gamma.kron_truncated(&gamma, t);
    let p = kron.left_mul(&q, t);
    Ok(QuotientData {
        order: Order::Second,
        p: Poly2::stack(&p)?,
        ell: 3,
        truncated_at: max_total,
    })
}
