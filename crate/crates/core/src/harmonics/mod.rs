//! Real spherical harmonics, coefficient vectors, and quadrature rules on the
//! sphere and on solid balls.

mod coefficients;
mod quadrature;
mod transform;
pub(crate) mod ylm;

pub use coefficients::{CoefficientVector, HarmonicIndex};
pub use quadrature::{gauss_legendre, BallQuadrature, SphereQuadrature};
pub use transform::{analyze, synthesize, HarmonicTable};
pub use ylm::{eval_all, eval_harmonic, real_harmonics_into, Direction};

/// Position of `(l, m)` in the canonical ordering (l ascending, then m from
/// -l to l).
#[inline]
pub fn canonical_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients for band limit `L`.
#[inline]
pub fn coefficient_count(band_limit: usize) -> usize {
    (band_limit + 1) * (band_limit + 1)
}
