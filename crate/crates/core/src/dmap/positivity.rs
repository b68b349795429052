//! Positivity of the standard-form Jacobian determinant on the punctured square.
//!
//! Tier 1 certifies `mu > 0` on `[0,1]^2 \ {0}` by a quadtree: boxes away from
//! the origin are handled with tensor Bernstein coefficients (all positive means
//! certified, a non-positive corner value is a witness), and the box `[0,h]^2`
//! at the origin is handled by a domination bound on the remainder
//! `nu = mu - 4uv - 2 beta u^3 - 2 gamma v^3`:
//!
//! on `v <= u <= h`, every monomial of `nu` is bounded by
//! `(uv + u^3)(u + v) h^(deg - 4)` (degree-3 terms by `(uv + u^3)(u + v)`),
//! hence `mu >= (min(4, 2 beta) - 2h C(h)) (uv + u^3)`, and symmetrically above
//! the diagonal.
//!
//! Tier 2 is a bounded-effort fallback that samples a fixed rational grid.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};

use super::JacobianStatus;
use crate::poly2::{Poly2, Var};
use crate::rational::{frac, int, pow2, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivityOptions {
    /// Skip the certification tier and rely on sampling only.
    pub trust_jacobian: bool,
    /// Budget of quadtree boxes for the certification tier.
    pub max_boxes: usize,
    /// Deepest dyadic level for the box at the origin and for subdivision.
    pub max_depth: u32,
    /// Uniform grid resolution of the sampling tier.
    pub sample_grid: u32,
}

impl Default for PositivityOptions {
    fn default() -> Self {
        PositivityOptions {
            trust_jacobian: false,
            max_boxes: 20_000,
            max_depth: 64,
            sample_grid: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Outcome {
    pub status: JacobianStatus,
    pub witness: Option<(Rational, Rational)>,
}

impl Outcome {
    fn failed(u: Rational, v: Rational) -> Self {
        Outcome {
            status: JacobianStatus::Failed,
            witness: Some((u, v)),
        }
    }
}

pub(crate) fn check(
    mu: &Poly2,
    beta: &Rational,
    gamma: &Rational,
    opts: &PositivityOptions,
) -> Outcome {
    if let Some((u, v)) = sign_witness(mu, beta, gamma) {
        return Outcome::failed(u, v);
    }
    if !opts.trust_jacobian {
        match certify(mu, beta, gamma, opts) {
            Tier1::Certified => {
                return Outcome {
                    status: JacobianStatus::Certified,
                    witness: None,
                }
            }
            Tier1::Witness(u, v) => return Outcome::failed(u, v),
            Tier1::Inconclusive => {}
        }
    }
    match sample(mu, opts.sample_grid) {
        Some((u, v)) => Outcome::failed(u, v),
        None => Outcome {
            status: JacobianStatus::SampledOnly,
            witness: None,
        },
    }
}

/// For `beta <= 0` the determinant is negative along `(2t, -beta t^2)` for
/// small `t` (and mirrored for `gamma`); search that curve exactly.
fn sign_witness(mu: &Poly2, beta: &Rational, gamma: &Rational) -> Option<(Rational, Rational)> {
    let one = Rational::one();
    let probe = |coef: &Rational, swap: bool| {
        if coef.is_positive() {
            return None;
        }
        (1..=64).find_map(|i| {
            let t = pow2(-i);
            let a = &t * int(2);
            let b = -coef * &t * &t;
            if a > one || b > one {
                return None;
            }
            let (u, v) = if swap { (b, a) } else { (a, b) };
            (mu.eval_scalar(&u, &v) <= Rational::zero()).then_some((u, v))
        })
    };
    probe(beta, false).or_else(|| probe(gamma, true))
}

enum Tier1 {
    Certified,
    Witness(Rational, Rational),
    Inconclusive,
}

/// Bernstein coefficients of a box, up to a common positive factor.
struct BernsteinBox {
    level: u32,
    iu: u128,
    iv: u128,
    coeffs: Vec<BigInt>,
}

struct Bernstein {
    nu: usize,
    nv: usize,
}

impl Bernstein {
    fn idx(&self, i: usize, l: usize) -> usize {
        i * (self.nv + 1) + l
    }

    /// Power basis on `[0,1]^2` to tensor Bernstein, scaled to integers.
    fn coeffs_of(&self, p: &Poly2) -> Vec<BigInt> {
        let (n, m) = (self.nu, self.nv);
        let mut b = vec![Rational::zero(); (n + 1) * (m + 1)];
        for (&(j, k), c) in p.terms() {
            let (j, k) = (j as usize, k as usize);
            let cj = Rational::from_integer(binomial(BigInt::from(n), BigInt::from(j)));
            let ck = Rational::from_integer(binomial(BigInt::from(m), BigInt::from(k)));
            let base = &c[0] / (cj * ck);
            for i in j..=n {
                let bi = binomial(BigInt::from(i), BigInt::from(j));
                for l in k..=m {
                    let bl = binomial(BigInt::from(l), BigInt::from(k));
                    b[self.idx(i, l)] += &base * Rational::from_integer(&bi * &bl);
                }
            }
        }
        let lcm = b.iter().fold(BigInt::one(), |acc, r| {
            num_integer::lcm(acc, r.denom().clone())
        });
        b.into_iter()
            .map(|r| (r * Rational::from_integer(lcm.clone())).to_integer())
            .collect()
    }

    /// Splits at the midpoint along one direction; both halves share the scale `2^deg`.
    fn split(&self, coeffs: &[BigInt], along_u: bool) -> (Vec<BigInt>, Vec<BigInt>) {
        let (deg, lines) = if along_u {
            (self.nu, self.nv + 1)
        } else {
            (self.nv, self.nu + 1)
        };
        let mut lo = coeffs.to_vec();
        let mut hi = coeffs.to_vec();
        for line in 0..lines {
            let at = |s: usize| {
                if along_u {
                    self.idx(s, line)
                } else {
                    self.idx(line, s)
                }
            };
            let mut d: Vec<BigInt> = (0..=deg).map(|s| coeffs[at(s)].clone()).collect();
            // After round r, d[s] = 2^r * b^{(r)}_s.
            lo[at(0)] = &d[0] << deg;
            hi[at(deg)] = &d[deg] << deg;
            for r in 1..=deg {
                for s in 0..=deg - r {
                    d[s] = &d[s] + &d[s + 1];
                }
                lo[at(r)] = &d[0] << (deg - r);
                hi[at(deg - r)] = &d[deg - r] << (deg - r);
            }
        }
        (lo, hi)
    }

    fn normalize(coeffs: &mut [BigInt]) {
        let shift = coeffs
            .iter()
            .filter_map(|c| c.trailing_zeros())
            .min()
            .unwrap_or(0);
        if shift > 0 {
            for c in coeffs.iter_mut() {
                *c = &*c >> shift;
            }
        }
    }

    fn children(&self, b: &BernsteinBox) -> [BernsteinBox; 4] {
        let (left, right) = self.split(&b.coeffs, true);
        let (ll, lu) = self.split(&left, false);
        let (rl, ru) = self.split(&right, false);
        let lvl = b.level + 1;
        let mk = |mut coeffs: Vec<BigInt>, du: u128, dv: u128| {
            Self::normalize(&mut coeffs);
            BernsteinBox {
                level: lvl,
                iu: 2 * b.iu + du,
                iv: 2 * b.iv + dv,
                coeffs,
            }
        };
        [mk(ll, 0, 0), mk(rl, 1, 0), mk(lu, 0, 1), mk(ru, 1, 1)]
    }
}

fn corner(level: u32, i: u128) -> Rational {
    Rational::new(BigInt::from(i), BigInt::one() << level as usize)
}

fn certify(mu: &Poly2, beta: &Rational, gamma: &Rational, opts: &PositivityOptions) -> Tier1 {
    let bern = Bernstein {
        nu: mu.max_degree(Var::U) as usize,
        nv: mu.max_degree(Var::V) as usize,
    };
    let lemma = OriginBound::new(mu, beta, gamma);
    let root = BernsteinBox {
        level: 0,
        iu: 0,
        iv: 0,
        coeffs: bern.coeffs_of(mu),
    };
    let mut stack = vec![root];
    let mut visited = 0usize;
    let (n, m) = (bern.nu, bern.nv);
    while let Some(b) = stack.pop() {
        visited += 1;
        if visited > opts.max_boxes || b.level > opts.max_depth {
            return Tier1::Inconclusive;
        }
        let at_origin = b.iu == 0 && b.iv == 0;
        if at_origin {
            if b.level > 0 && lemma.as_ref().is_some_and(|l| l.holds(b.level)) {
                continue;
            }
        } else {
            let corners = [(0, 0, 0, 0), (n, 0, 1, 0), (0, m, 0, 1), (n, m, 1, 1)];
            for (i, l, du, dv) in corners {
                if !b.coeffs[bern.idx(i, l)].is_positive() {
                    return Tier1::Witness(corner(b.level, b.iu + du), corner(b.level, b.iv + dv));
                }
            }
            if b.coeffs.iter().all(Signed::is_positive) {
                continue;
            }
        }
        let kids = bern.children(&b);
        // Reverse push: lower-left is processed first.
        stack.extend(kids.into_iter().rev());
    }
    Tier1::Certified
}

/// Exact data for the domination bound at the origin.
struct OriginBound {
    lower: Rational,
    cubic: Rational,
    higher: Vec<(u32, Rational)>,
}

impl OriginBound {
    fn new(mu: &Poly2, beta: &Rational, gamma: &Rational) -> Option<Self> {
        if !beta.is_positive() || !gamma.is_positive() {
            return None;
        }
        let mut cubic = Rational::zero();
        let mut higher = Vec::new();
        for (&(j, k), c) in mu.terms() {
            let c = &c[0];
            let d = j + k;
            match (j, k) {
                (1, 1) if *c == int(4) => {}
                (3, 0) if *c == beta * int(2) => {}
                (0, 3) if *c == gamma * int(2) => {}
                _ if d <= 2 => return None,
                (1, 1) | (3, 0) | (0, 3) => return None,
                _ if d == 3 => cubic += c.abs(),
                _ => higher.push((d - 4, c.abs())),
            }
        }
        let lower = [int(4), beta * int(2), gamma * int(2)]
            .into_iter()
            .min()
            .expect("nonempty");
        Some(OriginBound {
            lower,
            cubic,
            higher,
        })
    }

    /// Whether the bound certifies `mu > 0` on `[0, 2^-level]^2 \ {0}`.
    fn holds(&self, level: u32) -> bool {
        let h = pow2(-(level as i32));
        let mut c = self.cubic.clone();
        for (e, a) in &self.higher {
            c += a * pow_rat(&h, *e);
        }
        self.lower > h * int(2) * c
    }
}

fn pow_rat(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// Deterministic sampling of the closed square minus the origin.
fn sample(mu: &Poly2, grid: u32) -> Option<(Rational, Rational)> {
    let n = grid.max(1) as i64;
    let mut pts: Vec<(Rational, Rational)> = Vec::new();
    for i in 0..=n {
        for k in 0..=n {
            if i != 0 || k != 0 {
                pts.push((frac(i, n), frac(k, n)));
            }
        }
    }
    let slopes = [frac(0, 1), frac(1, 16), frac(1, 4), int(1), int(4), int(16)];
    let quad = [frac(1, 4), int(1), int(4)];
    for a in 1..=40 {
        let t = pow2(-a);
        for s in &slopes {
            let st = s * &t;
            if st <= int(1) {
                pts.push((t.clone(), st.clone()));
                pts.push((st, t.clone()));
            }
        }
        for c in &quad {
            let ct = c * &t * &t;
            if ct <= int(1) {
                pts.push((t.clone(), ct.clone()));
                pts.push((ct, t.clone()));
            }
        }
    }
    pts.into_iter()
        .find(|(u, v)| mu.eval_scalar(u, v) <= Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(terms: &[((u32, u32), Rational)]) -> Poly2 {
        Poly2::scalar(terms.iter().cloned())
    }

    fn proportional(a: &[BigInt], b: &[BigInt]) -> bool {
        let (ga, gb) = a.iter().zip(b).find(|(_, y)| !y.is_zero()).unwrap();
        let r = Rational::new(ga.clone(), gb.clone());
        a.iter().zip(b).all(|(x, y)| {
            Rational::from_integer(x.clone()) == Rational::from_integer(y.clone()) * &r
        })
    }

    #[test]
    fn bernstein_split_matches_direct_conversion() {
        let p = s(&[
            ((1, 1), int(4)),
            ((3, 0), int(2)),
            ((0, 3), int(2)),
            ((2, 2), int(-3)),
            ((1, 0), frac(1, 3)),
        ]);
        let bern = Bernstein { nu: 3, nv: 3 };
        let (left, right) = bern.split(&bern.coeffs_of(&p), true);
        // p(u/2, v) and p((1+u)/2, v) converted directly.
        let substitute = |x: &Poly2| {
            let mut acc = Poly2::zero(1);
            for (&(j, k), c) in p.terms() {
                let mut t = Poly2::monomial(0, k, c[0].clone());
                for _ in 0..j {
                    t = &t * x;
                }
                acc = &acc + &t;
            }
            acc
        };
        let half = Poly2::u().scale(&frac(1, 2));
        let shifted = (&Poly2::u() + &Poly2::constant(int(1))).scale(&frac(1, 2));
        assert!(proportional(&left, &bern.coeffs_of(&substitute(&half))));
        assert!(proportional(&right, &bern.coeffs_of(&substitute(&shifted))));
    }

    #[test]
    fn canonical_determinant_is_certified() {
        let mu = s(&[
            ((1, 1), int(4)),
            ((3, 0), int(2)),
            ((0, 3), int(2)),
            ((2, 2), int(-3)),
        ]);
        let out = check(&mu, &int(1), &int(1), &PositivityOptions::default());
        assert_eq!(out.status, JacobianStatus::Certified);
    }

    #[test]
    fn origin_bound_shrinks_until_it_holds() {
        let mu = s(&[
            ((1, 1), int(4)),
            ((3, 0), int(2)),
            ((0, 3), int(2)),
            ((2, 1), int(-50)),
        ]);
        let b = OriginBound::new(&mu, &int(1), &int(1)).unwrap();
        assert!(!b.holds(1));
        assert!(b.holds(8));
    }

    #[test]
    fn negative_beta_yields_witness_on_the_curve() {
        // mu of (u^2 + u v^2, v^2 - u^2 v)
        let mu = s(&[
            ((1, 1), int(4)),
            ((3, 0), int(-2)),
            ((0, 3), int(2)),
            ((2, 2), int(3)),
        ]);
        let out = check(&mu, &int(-1), &int(1), &PositivityOptions::default());
        assert_eq!(out.status, JacobianStatus::Failed);
        let (u, v) = out.witness.unwrap();
        assert!(mu.eval_scalar(&u, &v) <= Rational::zero());
        assert_eq!(v, &u * &u / int(4));
    }

    #[test]
    fn interior_sign_change_is_found_by_subdivision() {
        // beta, gamma > 0 but mu vanishes inside the square: 4uv + 2u^3 + 2v^3 - 12 u^2 v^2.
        let mu = s(&[
            ((1, 1), int(4)),
            ((3, 0), int(2)),
            ((0, 3), int(2)),
            ((2, 2), int(-12)),
        ]);
        let out = check(&mu, &int(1), &int(1), &PositivityOptions::default());
        assert_eq!(out.status, JacobianStatus::Failed);
        let (u, v) = out.witness.unwrap();
        assert!(mu.eval_scalar(&u, &v) <= Rational::zero());
    }

    #[test]
    fn trusted_mode_samples_only() {
        let mu = s(&[
            ((1, 1), int(4)),
            ((3, 0), int(2)),
            ((0, 3), int(2)),
            ((2, 2), int(-3)),
        ]);
        let opts = PositivityOptions {
            trust_jacobian: true,
            ..Default::default()
        };
        assert_eq!(
            check(&mu, &int(1), &int(1), &opts).status,
            JacobianStatus::SampledOnly
        );
    }
}
