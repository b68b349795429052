//! Sobolev regularity of isogeometric functions on degenerate parameterizations.
//!
//! A geometry map `x` with vanishing first partials at the corner `(0, 0)` is
//! validated and normalized ([`dmap`]), the regularity of `f = z o x^-1` is
//! classified exactly ([`sobolev`]), linear conditions on `z` reaching a target
//! class are generated ([`constraints`]), and the verdicts can be checked
//! against numerical quadrature ([`verify`]).

pub mod constraints;
pub mod dmap;
pub mod error;
pub mod poly2;
pub mod rational;
pub mod sobolev;
pub mod verify;

pub use constraints::{admissible_basis, constraints_for, CoefficientSpace, ConstraintSystem};
pub use dmap::{standardize, validate, DMapRecord, JacobianStatus, ValidationReport};
pub use error::{Error, Result};
pub use poly2::Poly2;
pub use rational::Rational;
pub use sobolev::{classify, CaseLabel, Order, PBound, RegularityReport};
