//! Degenerate geometry maps: validation, standard form and derived data.
//!
//! A geometry map `x: [0,1]^2 -> R^2` is accepted when its first partials and
//! mixed coefficient vanish at the origin, the three coefficient matrices
//! `[x20, x21]`, `[x02, x12]`, `[x20, x02]` are regular, and the Jacobian
//! determinant keeps one sign on the punctured square. The affine normalization
//! `y = T (x - x00)` with `T = [x20, x02]^-1` puts the map in standard form
//! `y20 = (1,0)`, `y02 = (0,1)`, and the parameters are read off as
//! `y21 = (alpha, beta)`, `y12 = (gamma, delta)`.

mod positivity;

use num_traits::{One, Zero};

use crate::constraints::{CoefficientSpace, ConstraintSystem, LinearCondition};
use crate::error::{Error, Result};
use crate::poly2::{Poly2, PolyMat2};
use crate::rational::{format_rational, Rational};

pub use positivity::PositivityOptions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JacobianStatus {
    /// Positivity proven by subdivision and the bound at the origin.
    Certified,
    /// No certificate within budget; no sign change found on the sampling grid.
    SampledOnly,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub degeneracy_ok: bool,
    pub rank_20_21_ok: bool,
    pub rank_02_12_ok: bool,
    pub rank_20_02_ok: bool,
    /// `None` when the coefficient checks already fail and no standard form exists.
    pub jacobian_positive: Option<JacobianStatus>,
    /// Parameter point where the normalized determinant is `<= 0`.
    pub failure_witness: Option<(Rational, Rational)>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.degeneracy_ok
            && self.rank_20_21_ok
            && self.rank_02_12_ok
            && self.rank_20_02_ok
            && matches!(
                self.jacobian_positive,
                Some(JacobianStatus::Certified | JacobianStatus::SampledOnly)
            )
    }

    /// Human-readable list of violated properties.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.degeneracy_ok {
            out.push("property i) violated: x10, x01, x11 not all zero".to_string());
        }
        if !self.rank_20_21_ok {
            out.push("property iii) violated: [x20, x21] singular".to_string());
        }
        if !self.rank_02_12_ok {
            out.push("property iii) violated: [x02, x12] singular".to_string());
        }
        if !self.rank_20_02_ok {
            out.push("property iii) violated: [x20, x02] singular".to_string());
        }
        if self.jacobian_positive == Some(JacobianStatus::Failed) {
            let at = self
                .failure_witness
                .as_ref()
                .map(|(u, v)| {
                    format!(
                        " at (u, v) = ({}, {})",
                        format_rational(u),
                        format_rational(v)
                    )
                })
                .unwrap_or_default();
            out.push(format!(
                "property ii) violated: Jacobian determinant not positive{at}"
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let v = self.violations();
        if v.is_empty() {
            "accepted".to_string()
        } else {
            v.join("; ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
    pub delta: Rational,
}

/// A validated D-map together with its standard form and derived quantities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DMapRecord {
    x: Poly2,
    x00: [Rational; 2],
    t: [[Rational; 2]; 2],
    y: Poly2,
    params: Params,
    dy: PolyMat2,
    mu: Poly2,
    gamma_adj: PolyMat2,
    jacobian: JacobianStatus,
}

fn det2(a: &[Rational], b: &[Rational]) -> Rational {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Standard-form data, computed whenever `[x20, x02]` is invertible.
struct Standard {
    x00: [Rational; 2],
    t: [[Rational; 2]; 2],
    y: Poly2,
    params: Params,
    dy: PolyMat2,
    mu: Poly2,
}

impl Standard {
    fn new(x: &Poly2) -> Option<Self> {
        let (c20, c02) = (x.coeff_vec(2, 0), x.coeff_vec(0, 2));
        let det = det2(&c20, &c02);
        if det.is_zero() {
            return None;
        }
        // T = [x20, x02]^-1
        let t = [
            [&c02[1] / &det, -&c02[0] / &det],
            [-&c20[1] / &det, &c20[0] / &det],
        ];
        let x00 = {
            let c = x.coeff_vec(0, 0);
            [c[0].clone(), c[1].clone()]
        };
        let y = x
            .filter_terms(|j, k| (j, k) != (0, 0))
            .map_coeffs(&[t[0].to_vec(), t[1].to_vec()])
            .expect("2x2 map");
        let (c21, c12) = (y.coeff_vec(2, 1), y.coeff_vec(1, 2));
        let params = Params {
            alpha: c21[0].clone(),
            beta: c21[1].clone(),
            gamma: c12[0].clone(),
            delta: c12[1].clone(),
        };
        let dy = PolyMat2::jacobian(&y).expect("2-dimensional");
        let mu = dy.det();
        Some(Standard {
            x00,
            t,
            y,
            params,
            dy,
            mu,
        })
    }
}

fn check_dims(x: &Poly2) -> Result<()> {
    if x.dim() != 2 {
        return Err(Error::GeometryDimension(x.dim()));
    }
    if x.is_zero() {
        return Err(Error::ZeroGeometry);
    }
    Ok(())
}

fn validate_inner(
    x: &Poly2,
    opts: &PositivityOptions,
) -> Result<(ValidationReport, Option<Standard>)> {
    check_dims(x)?;
    let c = |j, k| x.coeff_vec(j, k);
    let degeneracy_ok = [(1, 0), (0, 1), (1, 1)]
        .iter()
        .all(|&(j, k)| x.coeff(j, k).is_none());
    let regular = |a: (u32, u32), b: (u32, u32)| !det2(&c(a.0, a.1), &c(b.0, b.1)).is_zero();
    let mut report = ValidationReport {
        degeneracy_ok,
        rank_20_21_ok: regular((2, 0), (2, 1)),
        rank_02_12_ok: regular((0, 2), (1, 2)),
        rank_20_02_ok: regular((2, 0), (0, 2)),
        jacobian_positive: None,
        failure_witness: None,
    };
    let std = Standard::new(x);
    if let (true, Some(s)) = (degeneracy_ok, &std) {
        // mu = det T * det Dx, so this is the sign-normalized determinant.
        let out = positivity::check(&s.mu, &s.params.beta, &s.params.gamma, opts);
        report.jacobian_positive = Some(out.status);
        report.failure_witness = out.witness;
    }
    Ok((report, std))
}

pub fn validate(x: &Poly2) -> Result<ValidationReport> {
    validate_with(x, &PositivityOptions::default())
}

pub fn validate_with(x: &Poly2, opts: &PositivityOptions) -> Result<ValidationReport> {
    validate_inner(x, opts).map(|(r, _)| r)
}

pub fn standardize(x: &Poly2) -> Result<DMapRecord> {
    standardize_with(x, &PositivityOptions::default())
}

pub fn standardize_with(x: &Poly2, opts: &PositivityOptions) -> Result<DMapRecord> {
    let (report, std) = validate_inner(x, opts)?;
    let (true, Some(s)) = (report.accepted(), std) else {
        return Err(Error::NotDMap(Box::new(report)));
    };
    let gamma_adj = s.dy.adjugate();
    Ok(DMapRecord {
        x: x.clone(),
        x00: s.x00,
        t: s.t,
        y: s.y,
        params: s.params,
        dy: s.dy,
        mu: s.mu,
        gamma_adj,
        jacobian: report.jacobian_positive.expect("accepted maps are checked"),
    })
}

impl DMapRecord {
    pub fn x(&self) -> &Poly2 {
        &self.x
    }

    pub fn x00(&self) -> &[Rational; 2] {
        &self.x00
    }

    pub fn t(&self) -> &[[Rational; 2]; 2] {
        &self.t
    }

    /// Standard form `y = T (x - x00)`.
    pub fn y(&self) -> &Poly2 {
        &self.y
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Jacobian `Dy` of the standard form.
    pub fn dy(&self) -> &PolyMat2 {
        &self.dy
    }

    /// `mu = det Dy`.
    pub fn mu(&self) -> &Poly2 {
        &self.mu
    }

    /// Adjugate of `Dy`, so that `Dy^-1 = Gamma / mu` away from the origin.
    pub fn gamma_adj(&self) -> &PolyMat2 {
        &self.gamma_adj
    }

    pub fn jacobian_status(&self) -> JacobianStatus {
        self.jacobian
    }

    pub fn positivity_certified(&self) -> bool {
        self.jacobian == JacobianStatus::Certified
    }

    /// The remainder `mu - 4uv - 2 beta u^3 - 2 gamma v^3`.
    pub fn mu_remainder(&self) -> Poly2 {
        let lead = Poly2::scalar([
            ((1, 1), Rational::from_integer(4.into())),
            ((3, 0), &self.params.beta * Rational::from_integer(2.into())),
            (
                (0, 3),
                &self.params.gamma * Rational::from_integer(2.into()),
            ),
        ]);
        &self.mu - &lead
    }

    /// `w = z - [z20, z02] . y`; the result has `w20 = w02 = 0`.
    pub fn reduce_field(&self, z: &Poly2) -> Result<Poly2> {
        if z.dim() != 1 {
            return Err(Error::FieldDimension(z.dim()));
        }
        let (z20, z02) = (z.scalar_coeff(2, 0), z.scalar_coeff(0, 2));
        let y1 = self.y.component(0).scale(&z20);
        let y2 = self.y.component(1).scale(&z02);
        Ok(&(z - &y1) - &y2)
    }

    /// The five linear conditions on the coefficients of `z` under which the
    /// surface `(x, z)` is a D-patch and `z o x^-1` is C^1.
    pub fn c1_forms(&self) -> Vec<LinearCondition> {
        let p = &self.params;
        let one = Rational::one;
        vec![
            LinearCondition::new("C1: z10 = 0", [((1, 0), one())]),
            LinearCondition::new("C1: z01 = 0", [((0, 1), one())]),
            LinearCondition::new("C1: z11 = 0", [((1, 1), one())]),
            LinearCondition::new(
                "C1: z21 = alpha*z20 + beta*z02",
                [((2, 1), one()), ((2, 0), -&p.alpha), ((0, 2), -&p.beta)],
            ),
            LinearCondition::new(
                "C1: z12 = gamma*z20 + delta*z02",
                [((1, 2), one()), ((2, 0), -&p.gamma), ((0, 2), -&p.delta)],
            ),
        ]
    }

    /// The C^1 conditions over the smallest box holding every coefficient they mention.
    pub fn c1_conditions(&self) -> ConstraintSystem {
        self.c1_conditions_in(CoefficientSpace::new(2, 2))
    }

    pub fn c1_conditions_in(&self, space: CoefficientSpace) -> ConstraintSystem {
        ConstraintSystem::from_conditions(space, self.c1_forms(), None)
    }

    pub fn satisfies_c1(&self, z: &Poly2) -> bool {
        self.c1_forms().iter().all(|c| c.eval(z).is_zero())
    }
}
