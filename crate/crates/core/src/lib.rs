//! Exact p-adic computations around the Weil representation on triples of
//! quadratic spaces: cyclotomic character values, Schwartz functions on
//! lattice windows, Plücker norms on Sp₆, unramified local integrals and
//! finite-field orbit enumeration.

pub mod arith;
pub mod cyclotomic;
pub mod error;
pub mod linalg;
pub mod local_integral;
pub mod orbit_ff;
pub mod padic;
pub mod sampling;
pub mod schwartz;
pub mod symplectic;
pub mod verify;

pub use arith::{Rational, Valuation};
pub use cyclotomic::{CycRing, CycValue};
pub use error::{Error, Result};
pub use linalg::{Mat, Sl2};
pub use padic::{PAdicContext, QuadTriple, QuadraticSpace};
