//! Log-scaled adaptive tensor Gauss–Legendre quadrature.
//!
//! Integrands are supplied through their natural logarithm so that values far
//! outside the `f64` range (large negative powers of the Jacobian near the
//! degenerate corner) can be summed without overflow. Results are returned as
//! logarithms as well.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub(crate) struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]` by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

pub(crate) fn gl16() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

pub(crate) fn gl32() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(32))
}

/// `ln(e^a + e^b)`.
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn ln_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, ln_add)
}

/// A scalar integrand given by its logarithm; `-inf` encodes zero.
pub(crate) trait LnIntegrand: Sync {
    fn ln_value(&self, u: f64, v: f64, scratch: &mut Vec<f64>) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Target for the summed error estimate relative to the region total.
    pub rel_tol: f64,
    /// Maximum number of leaf rectangles per region.
    pub max_boxes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-10,
            max_boxes: 6000,
        }
    }
}

/// Axis-aligned rectangle `[u0, u1] x [v0, v1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

struct BoxEstimate {
    rect: Rect,
    ln_q: f64,
    ln_err: f64,
    split_u: bool,
    seq: usize,
}

impl PartialEq for BoxEstimate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BoxEstimate {}

impl PartialOrd for BoxEstimate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BoxEstimate {
    // Largest error first; earlier boxes win ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ln_err
            .total_cmp(&other.ln_err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn ln_abs_diff(m: f64, a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        f64::NEG_INFINITY
    } else {
        m + d.ln()
    }
}

fn estimate(
    f: &dyn LnIntegrand,
    rect: Rect,
    seq: usize,
    scratch: &mut Vec<f64>,
) -> Result<BoxEstimate> {
    let (g32, g16) = (gl32(), gl16());
    let (cu, hu) = ((rect.u0 + rect.u1) / 2.0, (rect.u1 - rect.u0) / 2.0);
    let (cv, hv) = ((rect.v0 + rect.v1) / 2.0, (rect.v1 - rect.v0) / 2.0);
    let mut grid = |ru: &Rule, rv: &Rule| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ru.nodes.len() * rv.nodes.len());
        for &xu in &ru.nodes {
            for &xv in &rv.nodes {
                let l = f.ln_value(cu + hu * xu, cv + hv * xv, scratch);
                if l.is_nan() || l == f64::INFINITY {
                    return Err(Error::Quadrature(format!(
                        "integrand undefined at ({}, {})",
                        cu + hu * xu,
                        cv + hv * xv
                    )));
                }
                out.push(l);
            }
        }
        Ok(out)
    };
    let full = grid(g32, g32)?;
    let coarse_u = grid(g16, g32)?;
    let coarse_v = grid(g32, g16)?;
    let m = full
        .iter()
        .chain(&coarse_u)
        .chain(&coarse_v)
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m == f64::NEG_INFINITY {
        return Ok(BoxEstimate {
            rect,
            ln_q: m,
            ln_err: m,
            split_u: hu >= hv,
            seq,
        });
    }
    let sum = |vals: &[f64], ru: &Rule, rv: &Rule| -> f64 {
        let mut s = 0.0;
        for (i, wu) in ru.weights.iter().enumerate() {
            let row = &vals[i * rv.nodes.len()..(i + 1) * rv.nodes.len()];
            let inner: f64 = row
                .iter()
                .zip(&rv.weights)
                .map(|(l, wv)| wv * (l - m).exp())
                .sum();
            s += wu * inner;
        }
        s * hu * hv
    };
    let q = sum(&full, g32, g32);
    let qu = sum(&coarse_u, g16, g32);
    let qv = sum(&coarse_v, g32, g16);
    let (eu, ev) = ((q - qu).abs(), (q - qv).abs());
    Ok(BoxEstimate {
        rect,
        ln_q: if q > 0.0 {
            m + q.ln()
        } else {
            f64::NEG_INFINITY
        },
        ln_err: ln_add(ln_abs_diff(m, q, qu), ln_abs_diff(m, q, qv)),
        split_u: eu >= ev,
        seq,
    })
}

/// Running sums kept relative to a movable reference scale.
struct Totals {
    ln_ref: f64,
    value: f64,
    err: f64,
}

impl Totals {
    fn rel(&self, ln: f64) -> f64 {
        if ln == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln - self.ln_ref).exp()
    }

    fn rebase(&mut self, ln: f64) {
        if ln == f64::NEG_INFINITY {
            return;
        }
        if ln > self.ln_ref + 300.0 || self.ln_ref == f64::NEG_INFINITY {
            let factor = if self.ln_ref == f64::NEG_INFINITY {
                0.0
            } else {
                (self.ln_ref - ln).exp()
            };
            self.value *= factor;
            self.err *= factor;
            self.ln_ref = ln;
        }
    }

    fn add(&mut self, b: &BoxEstimate) {
        self.rebase(b.ln_q.max(b.ln_err));
        self.value += self.rel(b.ln_q);
        self.err += self.rel(b.ln_err);
    }

    fn remove(&mut self, b: &BoxEstimate) {
        self.value = (self.value - self.rel(b.ln_q)).max(0.0);
        self.err = (self.err - self.rel(b.ln_err)).max(0.0);
    }
}

/// Globally adaptive integration over a union of rectangles. Returns the log of the integral.
pub(crate) fn integrate_ln(
    f: &dyn LnIntegrand,
    rects: &[Rect],
    opts: &QuadratureOptions,
) -> Result<f64> {
    let mut scratch = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut totals = Totals {
        ln_ref: f64::NEG_INFINITY,
        value: 0.0,
        err: 0.0,
    };
    let mut seq = 0;
    for &r in rects {
        let b = estimate(f, r, seq, &mut scratch)?;
        seq += 1;
        totals.add(&b);
        heap.push(b);
    }
    let mut iter = 0usize;
    while totals.err > opts.rel_tol * totals.value {
        if heap.len() >= opts.max_boxes {
            return Err(Error::Quadrature(format!(
                "relative error {:.3e} above tolerance {:.0e} after {} boxes",
                totals.err / totals.value,
                opts.rel_tol,
                heap.len()
            )));
        }
        let b = heap.pop().expect("nonempty");
        totals.remove(&b);
        let r = b.rect;
        let halves = if b.split_u {
            let mid = (r.u0 + r.u1) / 2.0;
            [Rect { u1: mid, ..r }, Rect { u0: mid, ..r }]
        } else {
            let mid = (r.v0 + r.v1) / 2.0;
            [Rect { v1: mid, ..r }, Rect { v0: mid, ..r }]
        };
        for h in halves {
            let c = estimate(f, h, seq, &mut scratch)?;
            seq += 1;
            totals.add(&c);
            heap.push(c);
        }
        iter += 1;
        if iter.is_multiple_of(64) {
            // Refresh the running sums to keep cancellation drift out of the stopping test.
            let mut fresh = Totals {
                ln_ref: totals.ln_ref,
                value: 0.0,
                err: 0.0,
            };
            let mut boxes: Vec<&BoxEstimate> = heap.iter().collect();
            boxes.sort_by_key(|b| b.seq);
            for b in boxes {
                fresh.add(b);
            }
            totals = fresh;
        }
    }
    let mut boxes: Vec<BoxEstimate> = heap.into_vec();
    boxes.sort_by_key(|b| b.seq);
    Ok(ln_sum(boxes.iter().map(|b| b.ln_q)))
}

/// Adaptive Gauss–Legendre on `[a, b]` for an ordinary (not log-scaled) integrand.
pub(crate) fn integrate_1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rule_sum(f: &dyn Fn(f64) -> f64, r: &Rule, a: f64, b: f64) -> f64 {
        let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
        r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
    // Local acceptance is relative to the subinterval's share of the total, so
    // scale-invariant endpoint singularities still terminate.
    fn go(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        density: f64,
        depth: u32,
    ) -> Result<f64> {
        let q = rule_sum(f, gl32(), a, b);
        let q16 = rule_sum(f, gl16(), a, b);
        if !q.is_finite() {
            return Err(Error::Quadrature(format!("non-finite value on [{a}, {b}]")));
        }
        let err = (q - q16).abs();
        if err <= tol * q.abs().max(density * (b - a)) || err <= f64::MIN_POSITIVE {
            return Ok(q);
        }
        if depth == 0 {
            return Err(Error::Quadrature(format!(
                "tolerance {tol:.0e} not met on [{a}, {b}]"
            )));
        }
        let m = (a + b) / 2.0;
        Ok(go(f, a, m, tol, density, depth - 1)? + go(f, m, b, tol, density, depth - 1)?)
    }
    let density = rule_sum(f, gl32(), a, b).abs() / (b - a);
    go(f, a, b, tol, density, 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [16, 32] {
            let r = gauss_legendre(n);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // x^(2n-2) integrates to 2/(2n-1)
            let d = 2 * n as i32 - 2;
            let s: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(d))
                .sum();
            assert!((s - 2.0 / (d as f64 + 1.0)).abs() < 1e-13, "n = {n}: {s}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    struct Exp2;
    impl LnIntegrand for Exp2 {
        fn ln_value(&self, u: f64, v: f64, _: &mut Vec<f64>) -> f64 {
            // exp(u + v) scaled by e^1000, far beyond f64 range.
            u + v + 1000.0
        }
    }

    #[test]
    fn log_scaled_integration() {
        let rect = Rect {
            u0: 0.0,
            u1: 1.0,
            v0: 0.0,
            v1: 1.0,
        };
        let ln = integrate_ln(&Exp2, &[rect], &QuadratureOptions::default()).unwrap();
        let expect = 1000.0 + 2.0 * (std::f64::consts::E - 1.0).ln();
        assert!((ln - expect).abs() < 1e-12);
    }

    struct Kink;
    impl LnIntegrand for Kink {
        fn ln_value(&self, u: f64, v: f64, _: &mut Vec<f64>) -> f64 {
            (u - v).abs().ln()
        }
    }

    #[test]
    fn adapts_to_kinks() {
        let rect = Rect {
            u0: 0.0,
            u1: 1.0,
            v0: 0.0,
            v1: 1.0,
        };
        let opts = QuadratureOptions {
            rel_tol: 1e-8,
            max_boxes: 20000,
        };
        let ln = integrate_ln(&Kink, &[rect], &opts).unwrap();
        assert!((ln.exp() - 1.0 / 3.0).abs() < 1e-7, "{}", ln.exp());
    }

    #[test]
    fn one_dimensional() {
        let v = integrate_1d(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        assert_eq!(integrate_1d(&|_| 0.0, 0.0, 1.0, 1e-12).unwrap(), 0.0);
    }
}
