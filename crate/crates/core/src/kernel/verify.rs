use serde::{Deserialize, Serialize};

use super::ChiSpec;
use crate::error::{domain, Result};
use crate::forward::{DensityModel, ForwardEvaluator, GravityConstant, RadialProfile};
use crate::harmonics::{BallQuadrature, SphereQuadrature};
use crate::scalar::{scale3, Real};

/// Density `laplacian(chi)`, whose exterior potential vanishes identically.
pub fn make_potential_kernel_density<T: Real>(spec: &ChiSpec<T>) -> DensityModel<T> {
    DensityModel::LaplacianBump { chi: *spec }
}

/// Density `rho0(r) + laplacian(chi)`, whose exterior gradiometer pair
/// vanishes identically.
pub fn make_gradient_kernel_density<T: Real>(profile: &RadialProfile<T>, spec: &ChiSpec<T>) -> DensityModel<T> {
    DensityModel::Superposition {
        components: vec![
            DensityModel::SphericalLayer {
                profile: profile.clone(),
                r_inner: T::zero(),
                r_outer: profile.outer_radius(),
            },
            DensityModel::LaplacianBump { chi: *spec },
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Potential,
    GradientV,
}

/// Quadrature and sampling used by [`verify_kernel`].
#[derive(Debug, Clone)]
pub struct VerifySettings<T> {
    pub gravity: GravityConstant<T>,
    /// Angular exactness of the volume rule.
    pub angular_degree: usize,
    pub radial_points: usize,
    /// Exactness degree of the sampling grid on the test sphere.
    pub sample_degree: usize,
}

impl<T: Real> Default for VerifySettings<T> {
    fn default() -> Self {
        Self {
            gravity: GravityConstant::default(),
            angular_degree: 64,
            radial_points: 32,
            sample_degree: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KernelVerificationReport<T> {
    pub kind: ObservableKind,
    pub surface_radius: T,
    /// Largest `|observable|` over the sampled test sphere.
    pub max_abs: T,
    /// Largest `|observable|` produced by the absolute-value density.
    pub scale: T,
    pub ratio: T,
    pub tolerance: T,
    pub pass: bool,
    pub quadrature_degree: usize,
    pub radial_points: usize,
    pub sample_points: usize,
}

/// Samples the observable on a sphere of `surface_radius` and compares its
/// largest magnitude against the same observable of the non-cancelling
/// density `|rho|`. Passes when `max_abs <= tol * scale`.
///
/// A nonnegative density is its own reference and therefore never passes,
/// whatever its observable does.
pub fn verify_kernel<T: Real>(
    model: &DensityModel<T>,
    kind: ObservableKind,
    surface_radius: T,
    tol: T,
    settings: &VerifySettings<T>,
) -> Result<KernelVerificationReport<T>> {
    let support = model.support_radius();
    if !(surface_radius > support) {
        return domain(format!(
            "test sphere radius {surface_radius} must exceed the support radius {support}"
        ));
    }
    let quad = BallQuadrature::new(settings.angular_degree, settings.radial_points, support);
    let ev = ForwardEvaluator::new(model, settings.gravity, &quad)?;
    let reference = ev.absolute();
    let points: Vec<_> = SphereQuadrature::<T>::new(settings.sample_degree)
        .unit_vectors()
        .iter()
        .map(|u| scale3(u, surface_radius))
        .collect();
    let sample = |e: &ForwardEvaluator<T>| -> Result<T> {
        let values = match kind {
            ObservableKind::Potential => e.potential_batch(&points)?,
            ObservableKind::GradientV => e
                .local_observables_batch(&points)?
                .into_iter()
                .map(|(_, o)| o.v())
                .collect(),
        };
        Ok(values.into_iter().fold(T::zero(), |acc, v| acc.max(v.abs())))
    };
    let max_abs = sample(&ev)?;
    let scale = sample(&reference)?;
    let ratio = if scale > T::zero() {
        max_abs / scale
    } else if max_abs == T::zero() {
        T::zero()
    } else {
        T::max_value().unwrap()
    };
    Ok(KernelVerificationReport {
        kind,
        surface_radius,
        max_abs,
        scale,
        ratio,
        tolerance: tol,
        pass: max_abs <= tol * scale,
        quadrature_degree: settings.angular_degree,
        radial_points: settings.radial_points,
        sample_points: points.len(),
    })
}
