//! Executes jobs and maps library errors to exit statuses.

use dmap_regularity::constraints::{admissible_basis, constraints_for, CoefficientSpace};
use dmap_regularity::dmap::{standardize_with, validate_with, PositivityOptions};
use dmap_regularity::rational::{format_rational, frac, int};
use dmap_regularity::sobolev::{
    cascade, classify, p_range, quotient_first, quotient_second, CaseLabel, QuotientData,
};
use dmap_regularity::verify::{footnote_fixture, gradient_limit_check, truncated_norm};
use dmap_regularity::{DMapRecord, Error, Order, PBound, Poly2, Rational, RegularityReport};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::job::{Command, JobError, JobSpec};
use crate::report;

pub const DEFAULT_J_MAX: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// A numerical step failed to meet its tolerance.
    Failure,
    /// The geometry map is not a D-map.
    Rejected,
    /// Cascade and leading-part computations disagree.
    Inconsistent,
    /// Unreadable input, a malformed job or arguments the library rejects.
    InputError,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Rejected => 2,
            ExitStatus::Inconsistent => 3,
            ExitStatus::InputError => 4,
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::NotDMap(_) => ExitStatus::Rejected,
            Error::InternalInconsistency(_) => ExitStatus::Inconsistent,
            Error::Quadrature(_) => ExitStatus::Failure,
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub status: ExitStatus,
}

type Body = Map<String, Value>;

struct Ctx<'a> {
    job: &'a JobSpec,
    opts: PositivityOptions,
    j_max: u32,
}

impl Ctx<'_> {
    fn geometry(&self) -> &Poly2 {
        self.job
            .geometry
            .as_ref()
            .expect("checked by check_requirements")
    }

    fn field(&self) -> &Poly2 {
        self.job
            .field
            .as_ref()
            .expect("checked by check_requirements")
    }

    fn record(&self) -> Result<DMapRecord, Error> {
        standardize_with(self.geometry(), &self.opts)
    }

    fn orders(&self) -> Vec<Order> {
        match self.job.order {
            Some(o) => vec![o],
            None => vec![Order::First, Order::Second],
        }
    }
}

/// Runs one parsed job.
pub fn run(job: &JobSpec) -> Outcome {
    let ctx = Ctx {
        job,
        opts: PositivityOptions {
            trust_jacobian: job.flags.trust_jacobian,
            ..PositivityOptions::default()
        },
        j_max: job.flags.j_max.unwrap_or(DEFAULT_J_MAX),
    };
    let mut body = Body::new();
    body.insert("command".into(), json!(job.command.as_str()));
    let result = match job.command {
        Command::Validate => run_validate(&ctx, &mut body),
        Command::Standardize => run_standardize(&ctx, &mut body),
        Command::Classify => run_classify(&ctx, &mut body),
        Command::Constrain => run_constrain(&ctx, &mut body),
        Command::Verify => run_verify(&ctx, &mut body),
        Command::Demo => run_demo(&ctx, &mut body),
    };
    let status = match result {
        Ok((status, summary)) => {
            body.insert("summary".into(), json!(summary));
            status
        }
        Err(e) => {
            if let Error::NotDMap(rep) = &e {
                body.insert("validation".into(), report::validation(rep));
            }
            body.insert("error".into(), json!(e.to_string()));
            ExitStatus::of_error(&e)
        }
    };
    body.insert("exit_code".into(), json!(status.code()));
    Outcome {
        report: Value::Object(body),
        status,
    }
}

/// Report for a job that failed to parse.
pub fn parse_failure(e: &JobError) -> Outcome {
    Outcome {
        report: json!({"error": e.to_string(), "exit_code": ExitStatus::InputError.code()}),
        status: ExitStatus::InputError,
    }
}

/// Runs a batch in parallel; results keep the input order.
pub fn run_batch(jobs: &[Result<JobSpec, JobError>]) -> Vec<Outcome> {
    jobs.par_iter()
        .map(|j| match j {
            Ok(job) => run(job),
            Err(e) => parse_failure(e),
        })
        .collect()
}

/// The first non-success status in input order.
pub fn batch_status(outcomes: &[Outcome]) -> ExitStatus {
    outcomes
        .iter()
        .map(|o| o.status)
        .find(|s| *s != ExitStatus::Success)
        .unwrap_or(ExitStatus::Success)
}

type Step = Result<(ExitStatus, String), Error>;

fn run_validate(ctx: &Ctx, body: &mut Body) -> Step {
    let rep = validate_with(ctx.geometry(), &ctx.opts)?;
    body.insert("validation".into(), report::validation(&rep));
    let status = if rep.accepted() {
        ExitStatus::Success
    } else {
        ExitStatus::Rejected
    };
    Ok((status, rep.summary()))
}

fn params_summary(rec: &DMapRecord) -> String {
    let p = rec.params();
    format!(
        "alpha = {}, beta = {}, gamma = {}, delta = {}",
        format_rational(&p.alpha),
        format_rational(&p.beta),
        format_rational(&p.gamma),
        format_rational(&p.delta)
    )
}

fn run_standardize(ctx: &Ctx, body: &mut Body) -> Step {
    let rec = ctx.record()?;
    body.insert("standard_form".into(), report::record(&rec));
    Ok((ExitStatus::Success, params_summary(&rec)))
}

fn quotient(rec: &DMapRecord, z: &Poly2, order: Order) -> Result<QuotientData, Error> {
    match order {
        Order::First => quotient_first(rec, z),
        Order::Second => quotient_second(rec, &rec.reduce_field(z)?),
    }
}

/// Exponents at which the oracle is consulted: the requested `p`, or else the lower
/// end of the reached case's range and `p_sup`.
fn oracle_points(
    rec: &DMapRecord,
    rep: &RegularityReport,
    p: Option<&Rational>,
) -> Result<Vec<Rational>, Error> {
    if let Some(p) = p {
        return Ok(vec![p.clone()]);
    }
    let mut points = Vec::new();
    if rep.case != CaseLabel::None {
        if let Some(level) = cascade(rec, rep.order).iter().find(|l| l.case == rep.case) {
            points.push(p_range(level.r, rep.order.ell())?.lower);
        }
    }
    if let PBound::Finite(s) = &rep.p_sup {
        points.push(s.clone());
    }
    Ok(points)
}

fn oracle(
    ctx: &Ctx,
    rec: &DMapRecord,
    z: &Poly2,
    rep: &RegularityReport,
) -> Result<(Value, Vec<String>), Error> {
    let q = quotient(rec, z, rep.order)?;
    let mut diags = Vec::new();
    let mut notes = Vec::new();
    for p in oracle_points(rec, rep, ctx.job.p.as_ref())? {
        let d = truncated_norm(rec, &q.p, q.ell, &p, ctx.j_max)?;
        notes.push(format!("p = {}: {}", format_rational(&p), d.verdict));
        diags.push(report::diagnostic(&p, &d));
    }
    Ok((Value::Array(diags), notes))
}

fn classification(
    ctx: &Ctx,
    rec: &DMapRecord,
    with_oracle: bool,
) -> Result<(Vec<Value>, Vec<String>), Error> {
    let z = ctx.field();
    let mut results = Vec::new();
    let mut summary = Vec::new();
    for order in ctx.orders() {
        let rep = classify(rec, z, order)?;
        let mut v = report::regularity(&rep);
        let mut line = format!(
            "k={}: case {}, W^{{{},p}} for p in {}",
            order.k(),
            rep.case,
            order.k(),
            rep.p_interval()
        );
        if let Some(p) = &ctx.job.p {
            let inside = rep.contains(p)?;
            v["p"] = report::rat(p);
            v["contains_p"] = json!(inside);
        }
        if with_oracle {
            let (diags, notes) = oracle(ctx, rec, z, &rep)?;
            v["oracle"] = diags;
            if !notes.is_empty() {
                line.push_str(&format!(" (oracle {})", notes.join(", ")));
            }
        }
        results.push(v);
        summary.push(line);
    }
    Ok((results, summary))
}

fn run_classify(ctx: &Ctx, body: &mut Body) -> Step {
    let rec = ctx.record()?;
    let (results, summary) = classification(ctx, &rec, ctx.job.flags.verify)?;
    body.insert("results".into(), Value::Array(results));
    Ok((ExitStatus::Success, summary.join("; ")))
}

fn run_constrain(ctx: &Ctx, body: &mut Body) -> Step {
    let rec = ctx.record()?;
    let order = ctx.job.order.expect("checked by check_requirements");
    let p = ctx.job.p.as_ref().expect("checked by check_requirements");
    let space = ctx.job.space.unwrap_or_else(CoefficientSpace::bicubic);
    let cs = constraints_for(&rec, order, p, space)?;
    let basis = admissible_basis(&cs);
    let mut v = report::constraints(&cs);
    v["k"] = json!(order.k());
    v["p"] = report::rat(p);
    v["basis"] = Value::Array(basis.iter().map(report::poly).collect());
    if let Some(z) = &ctx.job.field {
        let m = cs.check_membership(z)?;
        v["membership"] = json!({"satisfied": m.satisfied, "violated": m.violated});
    }
    body.insert("constraints".into(), v);
    let target = cs
        .target()
        .map_or("none".to_string(), |t| format!("case {}", t.case));
    Ok((
        ExitStatus::Success,
        format!(
            "target {target}: {} rows, rank {}, admissible dimension {}",
            cs.rows().len(),
            cs.rank(),
            cs.admissible_dim()
        ),
    ))
}

fn gradient_section(ctx: &Ctx, rec: &DMapRecord, z: &Poly2) -> Result<(Value, String), Error> {
    if !rec.satisfies_c1(z) {
        return Ok((
            json!({"skipped": "field does not satisfy the C1 conditions"}),
            "gradient check skipped".into(),
        ));
    }
    let g = gradient_limit_check(rec, z, ctx.j_max)?;
    let line = format!(
        "gradient limit ({}, {}), deviation {:.3e}",
        format_rational(&g.limit_exact[0]),
        format_rational(&g.limit_exact[1]),
        g.max_deviation
    );
    Ok((report::gradient(&g), line))
}

fn run_verify(ctx: &Ctx, body: &mut Body) -> Step {
    let rec = ctx.record()?;
    let (results, mut summary) = classification(ctx, &rec, true)?;
    body.insert("results".into(), Value::Array(results));
    let (g, line) = gradient_section(ctx, &rec, ctx.field())?;
    body.insert("gradient".into(), g);
    summary.push(line);
    body.insert("j_max".into(), json!(ctx.j_max));
    Ok((ExitStatus::Success, summary.join("; ")))
}

fn scalar(terms: &[((u32, u32), i64)]) -> Poly2 {
    Poly2::scalar(terms.iter().map(|&(e, c)| (e, int(c))))
}

/// `y* = (u^2 + u v^2, v^2 + u^2 v)`.
pub fn canonical_map() -> Poly2 {
    Poly2::stack(&[
        scalar(&[((2, 0), 1), ((1, 2), 1)]),
        scalar(&[((0, 2), 1), ((2, 1), 1)]),
    ])
    .expect("two scalar components")
}

/// Walkthrough on `y*`: validation, two classifications with oracle checks,
/// a constraint system, the gradient limit and the footnote integral.
fn run_demo(ctx: &Ctx, body: &mut Body) -> Step {
    let y = canonical_map();
    let mut steps = Vec::new();
    let mut lines = Vec::new();

    let val = validate_with(&y, &ctx.opts)?;
    lines.push(format!("y*: {}", val.summary()));
    steps.push(json!({"step": "validate y*", "validation": report::validation(&val)}));
    let rec = standardize_with(&y, &ctx.opts)?;

    let square = scalar(&[((2, 0), 1)]);
    let rep = classify(&rec, &square, Order::Second)?;
    lines.push(format!(
        "z = u^2: case {}, p in {}",
        rep.case,
        rep.p_interval()
    ));
    steps.push(json!({"step": "classify z = u^2, k = 2", "field": report::poly(&square), "result": report::regularity(&rep)}));

    // C1 but with w31 != 0: case c, so second derivatives are in L^p only for p < 2.
    let c1 = scalar(&[
        ((2, 0), 2),
        ((0, 2), 3),
        ((2, 1), 3),
        ((1, 2), 2),
        ((3, 1), 1),
        ((2, 2), 5),
    ]);
    let rep = classify(&rec, &c1, Order::Second)?;
    let q = quotient(&rec, &c1, Order::Second)?;
    let mut diags = Vec::new();
    for p in [frac(9, 5), int(2)] {
        let d = truncated_norm(&rec, &q.p, q.ell, &p, ctx.j_max)?;
        lines.push(format!(
            "C1 field at p = {}: {}",
            format_rational(&p),
            d.verdict
        ));
        diags.push(report::diagnostic(&p, &d));
    }
    steps.push(json!({
        "step": "C1 field outside W^{2,2}",
        "field": report::poly(&c1),
        "result": report::regularity(&rep),
        "oracle": diags,
    }));

    let cs = constraints_for(&rec, Order::Second, &int(2), CoefficientSpace::bicubic())?;
    lines.push(format!(
        "k=2, p=2 on 3x3: {} rows, dimension {}",
        cs.rows().len(),
        cs.admissible_dim()
    ));
    let mut cv = report::constraints(&cs);
    cv["basis"] = Value::Array(admissible_basis(&cs).iter().map(report::poly).collect());
    steps.push(json!({"step": "constrain k = 2, p = 2, bicubic", "constraints": cv}));

    let tilted = &(&scalar(&[((2, 0), 2), ((1, 2), 2)]) + &scalar(&[((0, 2), 3), ((2, 1), 3)]))
        + &scalar(&[((2, 2), 1), ((3, 1), 1)]);
    let (g, line) = gradient_section(ctx, &rec, &tilted)?;
    lines.push(line);
    steps.push(json!({"step": "gradient limit", "field": report::poly(&tilted), "gradient": g}));

    let f = footnote_fixture()?;
    lines.push(format!("footnote integral {f:.12}"));
    steps.push(json!({"step": "footnote integral", "value": report::float(f), "expected": report::float(1.0 / std::f64::consts::LN_2)}));

    body.insert("steps".into(), Value::Array(steps));
    Ok((ExitStatus::Success, lines.join("; ")))
}
