use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{approximate_null_space, build_forward_matrix, NoiseModel, PointLattice};
use crate::error::{Error, Result};
use crate::forward::GravityConstant;
use crate::kernel::{laplacian_chi, ChiSpec};
use crate::scalar::{norm3, sub3, Point3, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KernelProbeReport<T> {
    pub sources: usize,
    pub receivers: usize,
    /// Cube root of the cell volume.
    pub spacing: T,
    pub mass_norm: T,
    /// `max_i |(F m)_i|` for the sampled kernel masses `m`.
    pub max_abs_potential: T,
    /// `max_i (F |m|)_i`, the non-cancelling reference.
    pub scale: T,
    pub ratio: T,
    /// `|F m|_2 / |m|_2`: the noise level at which `m` would be invisible.
    pub matched_sigma: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_analysis: Option<NullAnalysis<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NullAnalysis<T> {
    /// Dimension of the approximate null space at `matched_sigma`.
    pub approximate_null_dimension: usize,
    /// Share of `|m|^2` inside that space.
    pub energy_fraction: T,
    /// Dimension of the null space at `sigma = 0`.
    pub exact_null_dimension: usize,
    /// Norm of the part of the unit vector `m/|m|` inside that space.
    pub exact_null_component: T,
}

fn potentials<T: Real>(receivers: &[Point3<T>], sources: &[Point3<T>], masses: &[T], g: T) -> Vec<T> {
    receivers
        .par_iter()
        .map(|x| {
            sources
                .iter()
                .zip(masses)
                .fold(T::zero(), |acc, (s, &m)| acc - g * m / norm3(&sub3(x, s)))
        })
        .collect()
}

/// Samples the kernel density `laplacian(chi)` at the lattice sources
/// (times the cell volume) and measures how visible the resulting point
/// masses are at the receivers. With `analyze_null` the forward matrix is
/// assembled and the mass vector is decomposed against the approximate and
/// exact null spaces.
pub fn kernel_discretization_probe<T: Real>(
    chi: &ChiSpec<T>,
    lattice: &PointLattice<T>,
    gravity: GravityConstant<T>,
    analyze_null: bool,
) -> Result<KernelProbeReport<T>> {
    chi.validate()?;
    lattice.validate()?;
    let volume = lattice
        .cell_volume
        .ok_or_else(|| Error::Precondition("kernel probe needs a lattice with a cell volume".into()))?;
    if chi.support_radius > lattice.radius {
        return Err(Error::Precondition(format!(
            "chi support radius {} exceeds the lattice radius {}",
            chi.support_radius, lattice.radius
        )));
    }
    let masses: Vec<T> = lattice.sources.iter().map(|x| laplacian_chi(chi, x) * volume).collect();
    let abs: Vec<T> = masses.iter().map(|m| m.abs()).collect();
    let g = gravity.value();
    let phi = potentials(&lattice.receivers, &lattice.sources, &masses, g);
    let reference = potentials(&lattice.receivers, &lattice.sources, &abs, g);
    let max_abs_potential = phi.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let scale = reference.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let mass_norm = masses.iter().fold(T::zero(), |a, &m| a + m * m).sqrt();
    let phi_norm = phi.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
    let matched_sigma = phi_norm / mass_norm;

    let null_analysis = if analyze_null {
        let f = build_forward_matrix(lattice, gravity)?;
        let unit = DVector::from_iterator(masses.len(), masses.iter().map(|&m| m / mass_norm));
        let approx = approximate_null_space(&f.matrix, &NoiseModel::new(matched_sigma, 0)?)?;
        let exact = approximate_null_space(&f.matrix, &NoiseModel::noiseless())?;
        let energy = (approx.transpose() * &unit).norm_squared();
        Some(NullAnalysis {
            approximate_null_dimension: approx.ncols(),
            energy_fraction: energy,
            exact_null_dimension: exact.ncols(),
            exact_null_component: (exact.transpose() * &unit).norm(),
        })
    } else {
        None
    };

    Ok(KernelProbeReport {
        sources: lattice.sources.len(),
        receivers: lattice.receivers.len(),
        spacing: volume.cbrt(),
        mass_norm,
        max_abs_potential,
        scale,
        ratio: max_abs_potential / scale,
        matched_sigma,
        null_analysis,
    })
}
