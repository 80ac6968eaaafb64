use serde::{Deserialize, Serialize};

use super::{ShapeForwardMap, DEFAULT_QUADRATURE_MARGIN};
use crate::error::{Error, Result};
use crate::forward::{GravityConstant, RadialProfile};
use crate::harmonics::CoefficientVector;
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound = "T: Real")]
pub struct NewtonOptions<T> {
    pub max_iterations: usize,
    /// Stop once `|F[S] - target| / |target| <= residual_tolerance`.
    pub residual_tolerance: T,
    /// Initial step length in `(0, 1]`.
    pub damping: T,
    /// How often a step may be halved before the iteration gives up.
    pub max_halvings: usize,
    pub band_limit: usize,
    pub quadrature_margin: usize,
    pub gravity: GravityConstant<T>,
    /// Largest accepted `|f_1m| / (f_00 a0)` of the data.
    pub centering_tolerance: T,
    /// Keep every accepted iterate in the result.
    pub record_iterates: bool,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            residual_tolerance: T::lit(1e-10),
            damping: T::one(),
            max_halvings: 8,
            band_limit: 8,
            quadrature_margin: DEFAULT_QUADRATURE_MARGIN,
            gravity: GravityConstant::default(),
            centering_tolerance: T::lit(1e-2),
            record_iterates: false,
        }
    }
}

impl<T: Real> NewtonOptions<T> {
    fn validate(&self) -> Result<()> {
        if !(self.residual_tolerance > T::zero()) {
            return Err(Error::Domain("residual tolerance must be positive".into()));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::Domain("damping must lie in (0, 1]".into()));
        }
        if !(self.centering_tolerance > T::zero()) {
            return Err(Error::Domain("centering tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InversionResult<T> {
    pub shape: CoefficientVector<T>,
    /// Radius of the perfect sphere used as the starting point.
    pub seed_radius: T,
    pub iterations: usize,
    pub final_residual: T,
    pub converged: bool,
    /// Relative residual of every iterate, starting with the seed.
    pub residual_history: Vec<T>,
    /// Smallest and largest singular value of the last derivative matrix.
    pub derivative_singular_values: Option<(T, T)>,
    pub diagnostics: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub iterates: Vec<CoefficientVector<T>>,
}

/// Converts exterior multipoles `d_lm` into mass-moment targets
/// `f_lm = -d_lm (2l+1) / (4 pi G)`.
pub fn multipoles_to_targets<T: Real>(d: &CoefficientVector<T>, gravity: GravityConstant<T>) -> CoefficientVector<T> {
    let mut f = d.clone();
    let four_pi_g = T::lit(4.0) * T::pi() * gravity.value();
    for (k, (idx, v)) in d.iter().enumerate() {
        f.values_mut()[k] = -v * T::from_usize_lossy(2 * idx.l as usize + 1) / four_pi_g;
    }
    f
}

/// Inverse of [`multipoles_to_targets`].
pub fn targets_to_multipoles<T: Real>(f: &CoefficientVector<T>, gravity: GravityConstant<T>) -> CoefficientVector<T> {
    let mut d = f.clone();
    let four_pi_g = T::lit(4.0) * T::pi() * gravity.value();
    for (k, (idx, v)) in f.iter().enumerate() {
        d.values_mut()[k] = -v * four_pi_g / T::from_usize_lossy(2 * idx.l as usize + 1);
    }
    d
}

/// Radius `a` of the homogeneous-profile sphere with `mu_2(a) = target`,
/// by bisection. `mu_2` is nondecreasing, so a bracketed root is unique
/// wherever `rho0 > 0`.
pub fn sphere_radius_for_monopole<T: Real>(profile: &RadialProfile<T>, target: T) -> Result<T> {
    let outer = profile.outer_radius();
    let top = profile.moment(2, outer)?;
    if !(target > T::zero()) {
        return Err(Error::Precondition(format!(
            "monopole target {target} is not that of a positive-mass body"
        )));
    }
    if target > top {
        return Err(Error::Precondition(format!(
            "monopole target {target} exceeds mu_2 at the profile's outer radius ({top})"
        )));
    }
    let (mut lo, mut hi) = (T::zero(), outer);
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if profile.moment(2, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

fn relative_residual<T: Real>(f: &CoefficientVector<T>, target: &CoefficientVector<T>) -> T {
    f.sub(target).norm() / target.norm()
}

/// Recovers the shape coefficients of a star-shaped body with known radial
/// density `profile` from its exterior multipoles `d`, by damped Newton
/// iteration on `F[S] = f(d)` seeded at the sphere with the right mass.
///
/// Data above `opts.band_limit` are ignored. A Newton step that makes `psi`
/// nonpositive or fails to reduce the residual is halved; when halving is
/// exhausted the result is returned with `converged = false`.
pub fn invert_shape<T: Real>(
    d: &CoefficientVector<T>,
    profile: &RadialProfile<T>,
    opts: &NewtonOptions<T>,
) -> Result<InversionResult<T>> {
    opts.validate()?;
    let lmax = opts.band_limit;
    if d.band_limit() < lmax {
        return Err(Error::Precondition(format!(
            "data band limit {} is below the shape band limit {lmax}",
            d.band_limit()
        )));
    }
    let target = multipoles_to_targets(&d.with_band_limit(lmax), opts.gravity);
    let sqrt4pi = (T::lit(4.0) * T::pi()).sqrt();
    let seed_radius = sphere_radius_for_monopole(profile, target.get(0, 0) / sqrt4pi)?;
    if lmax >= 1 {
        let dipole = (-1..=1).fold(T::zero(), |acc, m| acc.max(target.get(1, m).abs()));
        let rel = dipole / (target.get(0, 0) * seed_radius);
        if rel > opts.centering_tolerance {
            return Err(Error::Precondition(format!(
                "data are not centered on the center of mass (dipole/monopole ratio {rel:e} > {:e}); recenter them first",
                opts.centering_tolerance
            )));
        }
    }

    let map = ShapeForwardMap::new(profile, lmax, opts.quadrature_margin);
    let mut shape = CoefficientVector::sphere(lmax, seed_radius);
    let mut f = map.evaluate(&shape)?;
    let mut residual = relative_residual(&f, &target);
    let mut history = vec![residual];
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(shape.clone());
    }
    let mut singular = None;
    let mut diagnostics = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        if residual <= opts.residual_tolerance {
            converged = true;
            break;
        }
        let jac = map.derivative(&shape)?;
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        singular = Some((smin, smax));
        let n = T::from_usize_lossy(svd.singular_values.len());
        if !(smin > smax * T::eps() * n) {
            return Err(Error::Singular {
                sigma_min: smin.as_f64(),
                sigma_max: smax.as_f64(),
            });
        }
        let rhs = nalgebra::DVector::from_column_slice(f.sub(&target).values());
        let step = svd
            .solve(&rhs, T::zero())
            .map_err(|e| Error::Domain(format!("Newton step solve failed: {e}")))?;
        let step = CoefficientVector::from_values(lmax, step.iter().copied().collect())?;

        let mut lambda = opts.damping;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let candidate = shape.axpy(-lambda, &step);
            if let Ok(fc) = map.evaluate(&candidate) {
                let rc = relative_residual(&fc, &target);
                if rc < residual {
                    shape = candidate;
                    f = fc;
                    residual = rc;
                    accepted = true;
                    break;
                }
            }
            lambda *= T::lit(0.5);
        }
        if !accepted {
            diagnostics = Some(format!(
                "no step length down to {lambda:e} reduced the residual {residual:e}; damping exhausted after {} halvings",
                opts.max_halvings
            ));
            break;
        }
        history.push(residual);
        if opts.record_iterates {
            iterates.push(shape.clone());
        }
    }
    if !converged && residual <= opts.residual_tolerance {
        converged = true;
    }
    if !converged && diagnostics.is_none() {
        diagnostics = Some(format!(
            "iteration limit {} reached with residual {residual:e}",
            opts.max_iterations
        ));
    }
    Ok(InversionResult {
        shape,
        seed_radius,
        iterations,
        final_residual: residual,
        converged,
        residual_history: history,
        derivative_singular_values: singular,
        diagnostics,
        iterates,
    })
}
