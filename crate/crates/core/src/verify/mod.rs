//! Floating-point oracle for the exact classification.
//!
//! The `p`-th power of the `L^p` norm of `P / mu^ell` (with `mu` as measure) is
//! integrated over the square minus a shrinking corner box `[0, 2^-j]^2`. The
//! growth of the contributions of successive dyadic annuli tells convergence
//! (geometric decay) from logarithmic and power divergence.

mod quadrature;

use std::fmt;

use rayon::prelude::*;

use crate::dmap::DMapRecord;
use crate::error::{Error, Result};
use crate::poly2::{Poly2, Var};
use crate::rational::{to_f64, Rational};
use crate::sobolev::check_exponent;

pub use quadrature::QuadratureOptions;
use quadrature::{integrate_1d, integrate_ln, LnIntegrand, Rect};

/// Smallest admissible truncation depth: the verdict needs six increments.
pub const MIN_J_MAX: u32 = 7;
const TAIL: usize = 6;
const MAX_QUOTIENT_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Convergent,
    DivergentPower,
    DivergentLog,
    Inconclusive,
}

impl Verdict {
    pub fn is_divergent(self) -> bool {
        matches!(self, Verdict::DivergentPower | Verdict::DivergentLog)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Convergent => "convergent",
            Verdict::DivergentPower => "divergent_power",
            Verdict::DivergentLog => "divergent_log",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceDiagnostic {
    /// Truncation radii `2^-j`, `j = 2..=j_max`.
    pub epsilons: Vec<f64>,
    /// Truncated integrals; may be `inf` when the true value exceeds the `f64` range.
    pub values: Vec<f64>,
    /// `ln` of the truncated integrals, always finite unless the integrand vanishes.
    pub ln_values: Vec<f64>,
    /// `log2` of the annulus contributions `I(eps_j) - I(eps_{j-1})`.
    pub log2_increments: Vec<f64>,
    pub verdict: Verdict,
    /// Least-squares slope of `log2_increments` against `j` over the last six levels.
    pub rate_estimate: f64,
}

/// Sparse polynomial with `f64` coefficients for fast evaluation.
struct FloatPoly {
    dim: usize,
    terms: Vec<(u32, u32, Vec<f64>)>,
    max_u: usize,
    max_v: usize,
}

impl FloatPoly {
    fn new(p: &Poly2) -> Self {
        let terms: Vec<(u32, u32, Vec<f64>)> = p
            .terms_f64()
            .into_iter()
            .map(|((j, k), c)| (j, k, c))
            .collect();
        FloatPoly {
            dim: p.dim(),
            max_u: terms.iter().map(|t| t.0 as usize).max().unwrap_or(0),
            max_v: terms.iter().map(|t| t.1 as usize).max().unwrap_or(0),
            terms,
        }
    }

    /// Writes the components into `out[..dim]`; `scratch` holds the power tables.
    fn eval(&self, u: f64, v: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let (nu, nv) = (self.max_u + 1, self.max_v + 1);
        scratch.clear();
        scratch.resize(nu + nv, 1.0);
        for i in 1..nu {
            scratch[i] = scratch[i - 1] * u;
        }
        for i in 1..nv {
            scratch[nu + i] = scratch[nu + i - 1] * v;
        }
        out[..self.dim].iter_mut().for_each(|o| *o = 0.0);
        for (j, k, c) in &self.terms {
            let m = scratch[*j as usize] * scratch[nu + *k as usize];
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ci * m;
            }
        }
    }
}

/// `ln( |P|_inf^p * mu^(1 - p ell) )`.
struct NormIntegrand {
    quotient: FloatPoly,
    mu: FloatPoly,
    p: f64,
    ell: f64,
}

impl LnIntegrand for NormIntegrand {
    fn ln_value(&self, u: f64, v: f64, scratch: &mut Vec<f64>) -> f64 {
        let mut buf = [0.0f64; MAX_QUOTIENT_DIM];
        let vals = &mut buf[..self.quotient.dim];
        self.quotient.eval(u, v, scratch, vals);
        let norm = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut m = [0.0];
        self.mu.eval(u, v, scratch, &mut m);
        if m[0] <= 0.0 {
            return f64::NAN;
        }
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.p * norm.ln() + (1.0 - self.p * self.ell) * m[0].ln()
    }
}

fn annulus_rects(j: u32) -> Vec<Rect> {
    let e = (-(j as f64)).exp2();
    let mut rects = vec![Rect {
        u0: e,
        u1: 2.0 * e,
        v0: e,
        v1: 2.0 * e,
    }];
    // Near each axis the Jacobian changes on the scale e^2, so the edge strips
    // are graded geometrically down to well below that scale.
    let levels = j + 8;
    let mut cuts = vec![0.0];
    cuts.extend((0..=levels).rev().map(|i| e * (-(i as f64)).exp2()));
    for w in cuts.windows(2) {
        rects.push(Rect {
            u0: e,
            u1: 2.0 * e,
            v0: w[0],
            v1: w[1],
        });
        rects.push(Rect {
            u0: w[0],
            u1: w[1],
            v0: e,
            v1: 2.0 * e,
        });
    }
    rects
}

/// Classifies tail behavior from `log2` increments.
pub fn verdict_from_increments(log2_increments: &[f64]) -> (Verdict, f64) {
    let n = log2_increments.len();
    let tail = &log2_increments[n.saturating_sub(TAIL)..];
    match tail.last() {
        None => return (Verdict::Inconclusive, f64::NAN),
        Some(&l) if l == f64::NEG_INFINITY => return (Verdict::Convergent, f64::NEG_INFINITY),
        _ => {}
    }
    if tail.iter().any(|x| !x.is_finite()) {
        return (Verdict::Inconclusive, f64::NAN);
    }
    let k = tail.len() as f64;
    let xm = (k - 1.0) / 2.0;
    let ym = tail.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in tail.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let verdict = if slope < -0.5 {
        Verdict::Convergent
    } else if slope.abs() <= 0.1 {
        Verdict::DivergentLog
    } else if slope > 0.1 {
        Verdict::DivergentPower
    } else {
        Verdict::Inconclusive
    };
    (verdict, slope)
}

/// Truncated `L^p` integrals of `P / mu^ell` with divergence diagnosis.
pub fn truncated_norm(
    rec: &DMapRecord,
    quotient: &Poly2,
    ell: u32,
    p: &Rational,
    j_max: u32,
) -> Result<DivergenceDiagnostic> {
    truncated_norm_with(rec, quotient, ell, p, j_max, &QuadratureOptions::default())
}

pub fn truncated_norm_with(
    rec: &DMapRecord,
    quotient: &Poly2,
    ell: u32,
    p: &Rational,
    j_max: u32,
    opts: &QuadratureOptions,
) -> Result<DivergenceDiagnostic> {
    check_exponent(p)?;
    if j_max < MIN_J_MAX {
        return Err(Error::TruncationDepth(j_max, MIN_J_MAX));
    }
    if quotient.dim() > MAX_QUOTIENT_DIM {
        return Err(Error::DimensionMismatch(MAX_QUOTIENT_DIM, quotient.dim()));
    }
    let integrand = NormIntegrand {
        quotient: FloatPoly::new(quotient),
        mu: FloatPoly::new(rec.mu()),
        p: to_f64(p),
        ell: ell as f64,
    };
    let annuli: Vec<f64> = (1..=j_max)
        .into_par_iter()
        .map(|j| integrate_ln(&integrand, &annulus_rects(j), opts))
        .collect::<Result<_>>()?;

    let mut ln_values = Vec::new();
    let mut acc = annuli[0];
    for &a in &annuli[1..] {
        acc = quadrature::ln_add(acc, a);
        ln_values.push(acc);
    }
    let log2_increments: Vec<f64> = annuli[1..]
        .iter()
        .map(|a| a / std::f64::consts::LN_2)
        .collect();
    let (verdict, rate_estimate) = verdict_from_increments(&log2_increments);
    Ok(DivergenceDiagnostic {
        epsilons: (2..=j_max).map(|j| (-(j as f64)).exp2()).collect(),
        values: ln_values.iter().map(|l| l.exp()).collect(),
        ln_values,
        log2_increments,
        verdict,
        rate_estimate,
    })
}

/// `truncated_norm` for the single monomial `u^m v^n`.
pub fn monomial_oracle(
    m: u32,
    n: u32,
    ell: u32,
    p: &Rational,
    rec: &DMapRecord,
    j_max: u32,
) -> Result<DivergenceDiagnostic> {
    let mono = Poly2::monomial(m, n, Rational::from_integer(1.into()));
    truncated_norm(rec, &mono, ell, p, j_max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubstitutedBound {
    Finite {
        lower: f64,
        upper: f64,
    },
    /// An exponent of the product integrand is `<= -1`.
    Divergent,
}

/// Product-integral bounds under the substitution `(u, v) = (s t, s^2 t (1 - t))`:
/// `int s^a ds * int t^b (1 - t)^c dt` over `s` in `[0, 1]` (lower) and `[0, 2]` (upper),
/// with `a = p(m + 2n - 3 ell) + 5`, `b = p(m + n - 2 ell) + 3`, `c = p n`.
pub fn substituted_norm(m: u32, n: u32, ell: u32, p: &Rational) -> Result<SubstitutedBound> {
    check_exponent(p)?;
    let p = to_f64(p);
    let (m, n, ell) = (m as f64, n as f64, ell as f64);
    let a = p * (m + 2.0 * n - 3.0 * ell) + 5.0;
    let b = p * (m + n - 2.0 * ell) + 3.0;
    let c = p * n;
    if a <= -1.0 || b <= -1.0 {
        return Ok(SubstitutedBound::Divergent);
    }
    let beta = statrs::function::beta::beta(b + 1.0, c + 1.0);
    let s1 = 1.0 / (a + 1.0);
    Ok(SubstitutedBound::Finite {
        lower: s1 * beta,
        upper: (a + 1.0).exp2() * s1 * beta,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayObservation {
    pub lambda: f64,
    pub j: u32,
    pub gradient: [f64; 2],
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientLimitReport {
    /// `-(n1, n2) / n3` with `n` the normal `s20 x s02`, `s_jk = (x_jk, z_jk)`.
    pub limit_exact: [Rational; 2],
    pub limit: [f64; 2],
    pub observations: Vec<RayObservation>,
    /// Largest deviation over the rays at the deepest level.
    pub max_deviation: f64,
}

pub const RAY_SLOPES: [f64; 3] = [0.25, 1.0, 4.0];

/// Compares `grad f o x = Dz (Dx)^-1` along rays `(t, lambda t)`, `t = 2^-j`,
/// against the tangent-plane limit at the corner.
pub fn gradient_limit_check(
    rec: &DMapRecord,
    z: &Poly2,
    j_max: u32,
) -> Result<GradientLimitReport> {
    if z.dim() != 1 {
        return Err(Error::FieldDimension(z.dim()));
    }
    if !rec.satisfies_c1(z) {
        let m = rec.c1_conditions_in(crate::constraints::CoefficientSpace::new(
            z.max_degree(Var::U).max(2),
            z.max_degree(Var::V).max(2),
        ));
        let violated = m.check_membership(z)?.violated.join(", ");
        return Err(Error::C1Violated(violated));
    }
    let x = rec.x();
    let s20 = [
        x.coeff_at(2, 0, 0),
        x.coeff_at(2, 0, 1),
        z.scalar_coeff(2, 0),
    ];
    let s02 = [
        x.coeff_at(0, 2, 0),
        x.coeff_at(0, 2, 1),
        z.scalar_coeff(0, 2),
    ];
    let normal = [
        &s20[1] * &s02[2] - &s20[2] * &s02[1],
        &s20[2] * &s02[0] - &s20[0] * &s02[2],
        &s20[0] * &s02[1] - &s20[1] * &s02[0],
    ];
    if normal[2] == Rational::from_integer(0.into()) {
        return Err(Error::InternalInconsistency(
            "x20 and x02 are parallel".into(),
        ));
    }
    let limit_exact = [-&normal[0] / &normal[2], -&normal[1] / &normal[2]];
    let limit = [to_f64(&limit_exact[0]), to_f64(&limit_exact[1])];

    let partials = |q: &Poly2| {
        [
            FloatPoly::new(&q.diff(Var::U)),
            FloatPoly::new(&q.diff(Var::V)),
        ]
    };
    let [xu, xv] = partials(x);
    let [zu, zv] = partials(z);
    let mut scratch = Vec::new();
    let mut observations = Vec::new();
    for j in 2..=j_max.max(2) {
        let t = (-(j as f64)).exp2();
        for &lambda in &RAY_SLOPES {
            let (u, v) = (t, lambda * t);
            let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
            let (mut c, mut d) = ([0.0], [0.0]);
            xu.eval(u, v, &mut scratch, &mut a);
            xv.eval(u, v, &mut scratch, &mut b);
            zu.eval(u, v, &mut scratch, &mut c);
            zv.eval(u, v, &mut scratch, &mut d);
            // Dx = [[a0, b0], [a1, b1]]
            let det = a[0] * b[1] - b[0] * a[1];
            let g = [
                (c[0] * b[1] - d[0] * a[1]) / det,
                (d[0] * a[0] - c[0] * b[0]) / det,
            ];
            let deviation = (g[0] - limit[0]).abs().max((g[1] - limit[1]).abs());
            observations.push(RayObservation {
                lambda,
                j,
                gradient: g,
                deviation,
            });
        }
    }
    let deepest = observations.last().map_or(0, |o| o.j);
    let max_deviation = observations
        .iter()
        .filter(|o| o.j == deepest)
        .fold(0.0f64, |m, o| m.max(o.deviation));
    Ok(GradientLimitReport {
        limit_exact,
        limit,
        observations,
        max_deviation,
    })
}

/// `int_0^a g(x) dx` for integrands with a logarithmic singularity at `x = 0`.
///
/// The caller supplies `h(L) = x g(x)` as a function of `L = ln x`; the integral
/// is evaluated in `t = -1/L`, which maps `(0, a]` to `(0, -1/ln a]`.
pub fn integrate_log_endpoint(upper: f64, h: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    if !(upper > 0.0 && upper < 1.0) {
        return Err(Error::Quadrature(format!(
            "upper limit {upper} must lie in (0, 1)"
        )));
    }
    let t_max = -1.0 / upper.ln();
    integrate_1d(&|t: f64| h(-1.0 / t) / (t * t), 0.0, t_max, tol)
}

/// `int_0^a dx / (x ln^2 x)`, which equals `-1 / ln a`.
pub fn footnote_integral(upper: f64) -> Result<f64> {
    integrate_log_endpoint(upper, |l| 1.0 / (l * l), 1e-12)
}

/// The value `1 / ln 2` of `int_0^(1/2) dx / (x ln^2 x)`.
pub fn footnote_fixture() -> Result<f64> {
    footnote_integral(0.5)
}
