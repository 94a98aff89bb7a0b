//! Workbench for first-fit coloring lower bounds on interval graphs.
//!
//! Everything runs on exact rational arithmetic. The crate builds and
//! independently verifies the certificate objects of the worst-case
//! analysis: walls (colored interval families that force first-fit to
//! spend many colors), caps (top-down templates that expand into walls of
//! any clique size), the gap-reducing quasicap pipeline that certifies
//! ratios arbitrarily close to 5, the root analysis of the characteristic
//! cubic steering that pipeline, and a refuter showing no binary cap
//! reaches ratio 5 exactly.

pub mod binary;
pub mod boxcap;
pub mod error;
pub mod forge;
pub mod interval;
pub mod layout;
pub mod pipeline;
pub mod quasicap;
pub mod rational;
pub mod roots;
pub mod strand;
pub mod vertexcap;
pub mod wall;

pub use error::{Error, Result};
pub use rational::Rational;
