//! JSON renderings of library results. Exact values are strings, oracle values floats.

use dmap_regularity::constraints::ConstraintSystem;
use dmap_regularity::dmap::JacobianStatus;
use dmap_regularity::rational::format_rational;
use dmap_regularity::sobolev::RegularityReport;
use dmap_regularity::verify::{DivergenceDiagnostic, GradientLimitReport};
use dmap_regularity::{DMapRecord, Poly2, Rational, ValidationReport};
use serde_json::{json, Number, Value};

pub fn rat(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn rats(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(rat).collect())
}

/// Rounds to 12 significant digits; non-finite values become strings.
pub fn float(x: f64) -> Value {
    if x.is_nan() {
        return Value::String("nan".into());
    }
    if x.is_infinite() {
        return Value::String(if x > 0.0 { "inf" } else { "-inf" }.into());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| float(x)).collect())
}

/// Same shape as the input format.
pub fn poly(p: &Poly2) -> Value {
    let coeffs: Vec<Value> = p
        .terms()
        .map(|(&(j, k), c)| json!({"j": j, "k": k, "v": rats(c)}))
        .collect();
    json!({ "coeffs": coeffs })
}

pub fn jacobian_status(s: JacobianStatus) -> &'static str {
    match s {
        JacobianStatus::Certified => "certified",
        JacobianStatus::SampledOnly => "sampled_only",
        JacobianStatus::Failed => "failed",
    }
}

pub fn validation(rep: &ValidationReport) -> Value {
    json!({
        "accepted": rep.accepted(),
        "degeneracy_ok": rep.degeneracy_ok,
        "rank_20_21_ok": rep.rank_20_21_ok,
        "rank_02_12_ok": rep.rank_02_12_ok,
        "rank_20_02_ok": rep.rank_20_02_ok,
        "jacobian": rep.jacobian_positive.map(jacobian_status),
        "witness": rep.failure_witness.as_ref().map(|(u, v)| json!([rat(u), rat(v)])),
        "violations": rep.violations(),
    })
}

pub fn record(rec: &DMapRecord) -> Value {
    let p = rec.params();
    let g = rec.gamma_adj().entries();
    json!({
        "x00": rats(rec.x00()),
        "t": [rats(&rec.t()[0]), rats(&rec.t()[1])],
        "y": poly(rec.y()),
        "params": {
            "alpha": rat(&p.alpha),
            "beta": rat(&p.beta),
            "gamma": rat(&p.gamma),
            "delta": rat(&p.delta),
        },
        "mu": poly(rec.mu()),
        "gamma_adj": [[poly(&g[0][0]), poly(&g[0][1])], [poly(&g[1][0]), poly(&g[1][1])]],
        "jacobian": jacobian_status(rec.jacobian_status()),
    })
}

pub fn regularity(rep: &RegularityReport) -> Value {
    let failed: Vec<Value> = rep
        .failed_conditions
        .iter()
        .map(|f| json!({"label": f.label, "residual": rat(&f.residual)}))
        .collect();
    json!({
        "k": rep.order.k(),
        "case": rep.case.as_str(),
        "p_sup": rep.p_sup.to_string(),
        "p_interval": rep.p_interval().to_string(),
        "bounded": rep.bounded().to_string(),
        "failed_conditions": failed,
    })
}

pub fn diagnostic(p: &Rational, d: &DivergenceDiagnostic) -> Value {
    json!({
        "p": rat(p),
        "verdict": d.verdict.as_str(),
        "rate_estimate": float(d.rate_estimate),
        "epsilons": floats(&d.epsilons),
        "values": floats(&d.values),
        "log2_increments": floats(&d.log2_increments),
    })
}

pub fn constraints(cs: &ConstraintSystem) -> Value {
    let exps: Vec<Value> = cs
        .space()
        .exponents()
        .iter()
        .map(|&(j, k)| json!([j, k]))
        .collect();
    let rows: Vec<Value> = cs
        .rows()
        .iter()
        .map(|r| json!({"label": r.label, "coeffs": rats(&r.coeffs)}))
        .collect();
    json!({
        "space": cs.space().to_string(),
        "target_case": cs.target().map(|t| t.case.as_str()),
        "exponents": exps,
        "rows": rows,
        "rank": cs.rank(),
        "admissible_dim": cs.admissible_dim(),
    })
}

pub fn gradient(rep: &GradientLimitReport) -> Value {
    let obs: Vec<Value> = rep
        .observations
        .iter()
        .map(|o| {
            json!({
                "lambda": float(o.lambda),
                "j": o.j,
                "gradient": floats(&o.gradient),
                "deviation": float(o.deviation),
            })
        })
        .collect();
    json!({
        "limit_exact": rats(&rep.limit_exact),
        "limit": floats(&rep.limit),
        "max_deviation": float(rep.max_deviation),
        "observations": obs,
    })
}
