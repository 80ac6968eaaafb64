//! Numerical toolkit for the gravitational inverse problem.
//!
//! * [`harmonics`]: real spherical harmonics and quadrature on spheres and balls.
//! * [`forward`]: exterior potential, multipoles, gradient tensor and the
//!   gradiometer observables.
//! * [`kernel`]: explicit null-space members of the potential and gradient
//!   forward maps, with a numerical verifier.
//! * [`shape`]: recovery of a star-shaped body of known radial density from
//!   its exterior multipoles by Newton iteration.
//! * [`discrete`]: the point-mass forward matrix, its conditioning and its
//!   approximate null space.
//!
//! Every routine is generic over [`Real`]; the `*F64` aliases below fix the
//! scalar to `f64`, which is what the command-line tool uses.

pub mod discrete;
pub mod error;
pub mod forward;
pub mod harmonics;
pub mod kernel;
pub mod shape;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Point3, Real};

pub type CoefficientVectorF64 = harmonics::CoefficientVector<f64>;
pub type CoefficientVectorF32 = harmonics::CoefficientVector<f32>;
pub type SphereQuadratureF64 = harmonics::SphereQuadrature<f64>;
pub type BallQuadratureF64 = harmonics::BallQuadrature<f64>;
pub type DensityModelF64 = forward::DensityModel<f64>;
pub type RadialProfileF64 = forward::RadialProfile<f64>;
pub type GravityConstantF64 = forward::GravityConstant<f64>;
pub type ForwardEvaluatorF64 = forward::ForwardEvaluator<f64>;
pub type ChiSpecF64 = kernel::ChiSpec<f64>;
pub type NewtonOptionsF64 = shape::NewtonOptions<f64>;
pub type InversionResultF64 = shape::InversionResult<f64>;
pub type PointLatticeF64 = discrete::PointLattice<f64>;
pub type ForwardMatrixF64 = discrete::ForwardMatrix<f64>;
pub type SvdReportF64 = discrete::SvdReport<f64>;
