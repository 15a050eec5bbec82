//! Numerical laboratory for K-interpolation between limiting spaces on the
//! couple (L1, Linf).
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix the scalar to `f64`, which is what the checks and the
//! command line tool use.

pub mod error;
pub mod holmstedt_lab;
pub mod interp_norms;
pub mod logfn;
pub mod piecewise;
pub mod profiles;
pub mod quadrature;
pub mod real;
pub mod reiteration;
pub mod sv_algebra;
pub mod weighted_ineq;

pub use error::{Error, Result};
pub use logfn::{Asymptote, End, LogFn};
pub use real::Real;

pub type GridSpec = quadrature::GridSpec<f64>;
pub type IntegralResult = quadrature::IntegralResult<f64>;
pub type QuadOptions = quadrature::QuadOptions<f64>;
pub type Weight = sv_algebra::WeightExpr<f64>;
pub type KProfile = profiles::KProfile<f64>;
pub type Rearrangement = profiles::Rearrangement<f64>;
pub type SpaceSpec = interp_norms::SpaceSpec<f64>;
pub type Weighted = interp_norms::Weighted<f64>;
pub type InequalitySpec = weighted_ineq::InequalitySpec<f64>;
pub type ElemFn = weighted_ineq::ElemFn<f64>;
pub type StepFn = weighted_ineq::StepFn<f64>;
pub type HolmstedtCase = holmstedt_lab::HolmstedtCase<f64>;
pub type ScanReport = holmstedt_lab::ScanReport<f64>;
pub type ReiterationSpec = reiteration::ReiterationSpec<f64>;
pub type LKSpec = reiteration::LKSpec<f64>;
