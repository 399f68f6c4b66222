//! Numerical certificates for the normal approximation error of triangular
//! arrays of independent, square-integrable random variables.
//!
//! The crate measures how far a row sum of a triangular array is from the
//! standard normal law, and brackets the limiting Kolmogorov distance from
//! both sides:
//!
//! * classical and relaxed Lindeberg indices of an array ([`triangular_array`]),
//! * solutions of the Stein equation with quantitative bounds ([`stein`]),
//! * exact and Monte-Carlo Kolmogorov distances ([`kolmogorov`]),
//! * the constant pipeline feeding the lower bound ([`constants`]),
//! * two-sided bound certificates and an optimality scan ([`certify`]).
//!
//! Everything is generic over the scalar type through the [`Real`] trait;
//! `f64` is the reference precision and the `*64` aliases at the crate root
//! are what the command line tool and the tests use. All stochastic code is
//! seeded and reproducible: equal inputs produce bit-identical outputs.

pub mod certify;
pub mod constants;
pub mod distributions;
pub mod error;
pub mod kolmogorov;
pub mod numerics;
pub mod report;
pub mod stein;
pub mod triangular_array;

pub use error::{Error, Result};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, NumCast};
use std::fmt::{Debug, Display};

/// Scalar abstraction for all kernels in this crate.
///
/// Implemented for `f32` and `f64`. The numeric contracts quoted in the
/// module documentation (tolerances, tail accuracy) are stated for `f64`;
/// an `f32` instantiation degrades gracefully to its own epsilon.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Display + Debug + Send + Sync + 'static
{
    /// Lossy conversion from any numeric type, used for embedding constants.
    fn cast<U: NumCast>(u: U) -> Self {
        NumCast::from(u).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

// Concrete aliases for the reference scalar type.
pub type DiscreteDistribution64 = distributions::DiscreteDistribution<f64>;
pub type ArraySpec64 = triangular_array::ArraySpec<f64>;
pub type WeightFunction64 = triangular_array::WeightFunction<f64>;
pub type IndexReport64 = triangular_array::IndexReport<f64>;
pub type TestFunction64 = stein::TestFunction<f64>;
pub type SteinSolution64 = stein::SteinSolution<f64>;
pub type BoundSuiteReport64 = stein::BoundSuiteReport<f64>;
pub type DistanceResult64 = kolmogorov::DistanceResult<f64>;
pub type KCurve64 = kolmogorov::KCurve<f64>;
pub type ConstantsRecord64 = constants::ConstantsRecord<f64>;
pub type IdentityChecks64 = constants::IdentityChecks<f64>;
pub type BoundCertificate64 = certify::BoundCertificate<f64>;
pub type OptimalityScan64 = certify::OptimalityScan<f64>;
pub type QuadratureResult64 = numerics::QuadratureResult<f64>;
pub type RootResult64 = numerics::RootResult<f64>;
