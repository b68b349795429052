//! Job documents: parsing, validation and printing.

use std::collections::BTreeSet;
use std::path::PathBuf;

use dmap_regularity::constraints::CoefficientSpace;
use dmap_regularity::rational::{format_rational, parse_rational};
use dmap_regularity::{Order, Poly2, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JobError {
    #[error("invalid job document: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{what}: duplicate exponent pair ({j}, {k})")]
    DuplicateExponent { what: &'static str, j: u32, k: u32 },
    #[error("{what}: {source}")]
    Polynomial {
        what: &'static str,
        source: dmap_regularity::Error,
    },
    #[error("{0}")]
    Value(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Standardize,
    Classify,
    Constrain,
    Verify,
    Demo,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Standardize => "standardize",
            Command::Classify => "classify",
            Command::Constrain => "constrain",
            Command::Verify => "verify",
            Command::Demo => "demo",
        }
    }

    pub fn needs_geometry(self) -> bool {
        self != Command::Demo
    }

    pub fn needs_field(self) -> bool {
        matches!(self, Command::Classify | Command::Verify)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub trust_jacobian: bool,
    pub verify: bool,
    pub j_max: Option<u32>,
    pub output: Option<PathBuf>,
}

/// A parsed job with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub command: Command,
    pub geometry: Option<Poly2>,
    pub field: Option<Poly2>,
    pub order: Option<Order>,
    pub p: Option<Rational>,
    pub space: Option<CoefficientSpace>,
    pub flags: Flags,
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        JobSpec {
            command,
            geometry: None,
            field: None,
            order: None,
            p: None,
            space: None,
            flags: Flags::default(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    j: u32,
    k: u32,
    v: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoly {
    coeffs: Vec<RawTerm>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawFlags {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    trust_jacobian: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    verify: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    j_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJob {
    #[serde(default = "default_command")]
    command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    geometry: Option<RawPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<RawPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space: Option<String>,
    #[serde(default)]
    flags: RawFlags,
}

fn default_command() -> Command {
    Command::Validate
}

fn rational(s: &str, what: &'static str) -> Result<Rational, JobError> {
    parse_rational(s).map_err(|source| JobError::Polynomial { what, source })
}

fn poly_from_raw(raw: &RawPoly, what: &'static str) -> Result<Poly2, JobError> {
    let mut seen = BTreeSet::new();
    let mut terms = Vec::with_capacity(raw.coeffs.len());
    let dim = raw.coeffs.first().map_or(1, |t| t.v.len());
    for t in &raw.coeffs {
        if !seen.insert((t.j, t.k)) {
            return Err(JobError::DuplicateExponent {
                what,
                j: t.j,
                k: t.k,
            });
        }
        let v =
            t.v.iter()
                .map(|s| rational(s, what))
                .collect::<Result<Vec<_>, _>>()?;
        terms.push(((t.j, t.k), v));
    }
    Poly2::from_terms(dim, terms).map_err(|source| JobError::Polynomial { what, source })
}

fn poly_to_raw(p: &Poly2) -> RawPoly {
    if p.is_zero() {
        // An explicit zero term keeps the dimension.
        return RawPoly {
            coeffs: vec![RawTerm {
                j: 0,
                k: 0,
                v: vec!["0".to_string(); p.dim()],
            }],
        };
    }
    RawPoly {
        coeffs: p
            .terms()
            .map(|(&(j, k), c)| RawTerm {
                j,
                k,
                v: c.iter().map(format_rational).collect(),
            })
            .collect(),
    }
}

/// Parses `"JxK"` into the box of bidegree at most `(J, K)`.
pub fn parse_space(s: &str) -> Result<CoefficientSpace, JobError> {
    let bad = || {
        JobError::Value(format!(
            "space {s:?}: expected \"JxK\" with nonnegative integers"
        ))
    };
    let (j, k) = s.split_once('x').ok_or_else(bad)?;
    let j: u32 = j.parse().map_err(|_| bad())?;
    let k: u32 = k.parse().map_err(|_| bad())?;
    Ok(CoefficientSpace::new(j, k))
}

pub fn parse_order(k: u32) -> Result<Order, JobError> {
    Order::from_k(k).ok_or_else(|| JobError::Value(format!("k = {k}: expected 1 or 2")))
}

/// Parses one job document.
pub fn parse_input(doc: &Value) -> Result<JobSpec, JobError> {
    let raw: RawJob = serde_json::from_value(doc.clone())?;
    let job = JobSpec {
        command: raw.command,
        geometry: raw
            .geometry
            .as_ref()
            .map(|g| poly_from_raw(g, "geometry"))
            .transpose()?,
        field: raw
            .field
            .as_ref()
            .map(|f| poly_from_raw(f, "field"))
            .transpose()?,
        order: raw.k.map(parse_order).transpose()?,
        p: raw.p.as_deref().map(|p| rational(p, "p")).transpose()?,
        space: raw.space.as_deref().map(parse_space).transpose()?,
        flags: Flags {
            trust_jacobian: raw.flags.trust_jacobian,
            verify: raw.flags.verify,
            j_max: raw.flags.j_max,
            output: raw.flags.output,
        },
    };
    check_requirements(&job)?;
    Ok(job)
}

/// Rejects jobs missing inputs their command needs.
pub fn check_requirements(job: &JobSpec) -> Result<(), JobError> {
    let cmd = job.command.as_str();
    if job.command.needs_geometry() && job.geometry.is_none() {
        return Err(JobError::Value(format!(
            "{cmd} requires a geometry polynomial"
        )));
    }
    if job.command.needs_field() && job.field.is_none() {
        return Err(JobError::Value(format!(
            "{cmd} requires a field polynomial"
        )));
    }
    if job.command == Command::Constrain && (job.order.is_none() || job.p.is_none()) {
        return Err(JobError::Value("constrain requires k and p".into()));
    }
    Ok(())
}

/// Prints a job back into document form.
pub fn print_job(job: &JobSpec) -> Value {
    let raw = RawJob {
        command: job.command,
        geometry: job.geometry.as_ref().map(poly_to_raw),
        field: job.field.as_ref().map(poly_to_raw),
        k: job.order.map(Order::k),
        p: job.p.as_ref().map(format_rational),
        space: job.space.map(|s| s.to_string()),
        flags: RawFlags {
            trust_jacobian: job.flags.trust_jacobian,
            verify: job.flags.verify,
            j_max: job.flags.j_max,
            output: job.flags.output.clone(),
        },
    };
    serde_json::to_value(raw).expect("job documents always serialize")
}

/// Splits a document into its jobs; a top-level array is a batch.
pub fn parse_document(text: &str) -> Result<(bool, Vec<Result<JobSpec, JobError>>), JobError> {
    let doc: Value = serde_json::from_str(text)?;
    Ok(match doc {
        Value::Array(items) => (true, items.iter().map(parse_input).collect()),
        single => (false, vec![parse_input(&single)]),
    })
}
