#![forbid(unsafe_code)]
//! Exact-arithmetic construction and certification of biregular Ramanujan
//! multigraphs from claw matchings.

pub mod bounds;
pub mod builder;
pub mod conv;
pub mod ensemble;
pub mod error;
pub mod interval;
pub mod matrix;
pub mod oracle;
pub mod poly;
pub mod rat;
pub mod theta;
pub mod verify;

pub use bounds::BoundParams;
pub use builder::{BigraphAdjacency, BuildOutcome, BuildState, Candidate, ClawMatching, TrailStep};
pub use conv::{ConvDims, TrivialValue};
pub use error::{Error, Result};
pub use interval::RatInterval;
pub use matrix::{IndexSet, RatMatrix};
pub use oracle::{MinorOrthReport, PermEnsemble};
pub use poly::{RatPoly, RootBracket};
pub use rat::Rat;
pub use theta::{FrameDims, ThetaTable};
pub use verify::SpectralCertificate;
