//! Recovery of a star-shaped body `r <= psi(Omega)` with known radial
//! density `rho0(r)` from its exterior multipoles.
//!
//! The body's mass moments are `f_lm = int Y_lm mu_{l+2}(psi) dOmega` with
//! `mu_n(w) = int_0^w rho0 r^n dr`. The map `S -> f` from the harmonic
//! coefficients of `psi` is inverted by damped Newton iteration, seeded at
//! the sphere whose mass matches the monopole. At that sphere the
//! derivative is diagonal, which makes the seed well conditioned.

mod forward;
mod invert;
mod recenter;

#[cfg(test)]
mod tests;

pub use forward::{mu, shape_forward, shape_forward_derivative, shape_quadrature_degree, ShapeForwardMap};
pub use invert::{
    invert_shape, multipoles_to_targets, sphere_radius_for_monopole, targets_to_multipoles, InversionResult,
    NewtonOptions,
};
pub use recenter::{center_of_mass, center_of_mass_from_multipoles, centered_multipoles, recenter_model, recenter_multipoles};

use std::fmt::Write;

use crate::harmonics::{synthesize, CoefficientVector, Direction};
use crate::scalar::Real;

/// Extra angular exactness added on top of `3L`.
pub const DEFAULT_QUADRATURE_MARGIN: usize = 8;

/// `psi` on a regular latitude-longitude grid as CSV `theta,phi,psi`, with
/// `theta = pi (i + 1/2) / n_theta` and `phi = 2 pi j / n_phi`.
pub fn psi_grid_csv<T: Real>(shape: &CoefficientVector<T>, n_theta: usize, n_phi: usize) -> String {
    let mut out = String::from("theta,phi,psi\n");
    for i in 0..n_theta {
        let theta = T::pi() * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(n_theta);
        for j in 0..n_phi {
            let phi = T::two_pi() * T::from_usize_lossy(j) / T::from_usize_lossy(n_phi);
            let dir = Direction { theta, phi };
            let _ = writeln!(out, "{theta:e},{phi:e},{:e}", synthesize(shape, &dir));
        }
    }
    out
}
