//! Exact computation over finite projective geometries PG(n-1, q) and their
//! restrictions: colouring numbers, Gaussian binomials, random restrictions,
//! dense-flat censuses and (b,c)-decomposition checks.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod colouring;
pub mod decomp;
pub mod error;
pub mod gf;
pub mod limits;
pub mod linalg;
pub mod matroid;
pub mod projgeom;
pub mod randmodel;

pub use colouring::{colouring_number, verify_colouring, Colouring};
pub use error::{Error, Result};
pub use gf::FieldSpec;
pub use limits::Limits;
pub use matroid::{PointSet, SubMatroid};
pub use projgeom::{qbinom, Flat, GeometryCtx, Point};
pub use randmodel::{sample_pgp, TrialConfig};
