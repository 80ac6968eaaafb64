use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{DensityModel, MassElement};
use super::observables::{local_frame, GradientTensor, InlineCrossline};
use crate::error::{domain, Error, Result};
use crate::harmonics::{canonical_index, coefficient_count, eval_all, BallQuadrature, CoefficientVector, Direction};
use crate::harmonics::ylm::harmonics_at_vector;
use crate::scalar::{norm3, sub3, Point3, Real};

/// Exterior points closer than this factor times the support radius get a
/// refined quadrature.
pub const NEAR_BOUNDARY_FACTOR: f64 = 1.05;

/// Newton's constant in the caller's unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64", bound = "T: Real")]
pub struct GravityConstant<T>(T);

impl<T: Real> GravityConstant<T> {
    pub fn new(g: T) -> Result<Self> {
        if !(g > T::zero()) || !g.is_finite() {
            return domain(format!("gravity constant must be positive, got {g}"));
        }
        Ok(Self(g))
    }

    /// SI value in m^3 kg^-1 s^-2.
    pub fn si() -> Self {
        Self(T::lit(6.674e-11))
    }

    pub fn value(&self) -> T {
        self.0
    }
}

impl<T: Real> Default for GravityConstant<T> {
    fn default() -> Self {
        Self(T::one())
    }
}

impl<T: Real> TryFrom<f64> for GravityConstant<T> {
    type Error = Error;
    fn try_from(g: f64) -> Result<Self> {
        Self::new(T::lit(g))
    }
}

impl<T: Real> From<GravityConstant<T>> for f64 {
    fn from(g: GravityConstant<T>) -> f64 {
        g.0.as_f64()
    }
}

/// Forward maps of one density model, with the volume quadrature already
/// turned into point masses.
///
/// All sums run over the mass elements in a fixed order, so results do not
/// depend on how batch evaluations are split across threads.
#[derive(Debug)]
pub struct ForwardEvaluator<T> {
    model: DensityModel<T>,
    gravity: T,
    support_radius: T,
    quad: BallQuadrature<T>,
    elements: Vec<MassElement<T>>,
    refined: OnceLock<Vec<MassElement<T>>>,
    absolute: bool,
}

impl<T: Real> ForwardEvaluator<T> {
    pub fn new(model: &DensityModel<T>, gravity: GravityConstant<T>, quad: &BallQuadrature<T>) -> Result<Self> {
        let elements = model.mass_elements(quad)?;
        Ok(Self {
            model: model.clone(),
            gravity: gravity.value(),
            support_radius: model.support_radius(),
            quad: quad.clone(),
            elements,
            refined: OnceLock::new(),
            absolute: false,
        })
    }

    /// The same evaluator with every mass element replaced by its absolute
    /// value: the non-cancelling companion used to normalize null-space
    /// checks.
    pub fn absolute(&self) -> Self {
        let abs = |v: &[MassElement<T>]| -> Vec<MassElement<T>> {
            v.iter()
                .map(|e| MassElement {
                    position: e.position,
                    mass: e.mass.abs(),
                })
                .collect()
        };
        let refined = OnceLock::new();
        if let Some(r) = self.refined.get() {
            let _ = refined.set(abs(r));
        }
        Self {
            model: self.model.clone(),
            gravity: self.gravity,
            support_radius: self.support_radius,
            quad: self.quad.clone(),
            elements: abs(&self.elements),
            refined,
            absolute: true,
        }
    }

    pub fn support_radius(&self) -> T {
        self.support_radius
    }

    pub fn elements(&self) -> &[MassElement<T>] {
        &self.elements
    }

    pub fn gravity(&self) -> T {
        self.gravity
    }

    fn elements_for(&self, x: &Point3<T>) -> Result<&[MassElement<T>]> {
        let r = norm3(x);
        if !(r > self.support_radius) {
            return domain(format!(
                "evaluation point ({}, {}, {}) at radius {r} is not outside the support radius {}",
                x[0], x[1], x[2], self.support_radius
            ));
        }
        if r >= T::lit(NEAR_BOUNDARY_FACTOR) * self.support_radius || self.model_is_discrete() {
            return Ok(&self.elements);
        }
        log::warn!(
            "point at radius {r} is within {NEAR_BOUNDARY_FACTOR} x support radius {}; refining quadrature",
            self.support_radius
        );
        if self.refined.get().is_none() {
            let mut els = self.model.mass_elements(&self.quad.refined())?;
            if self.absolute {
                for e in &mut els {
                    e.mass = e.mass.abs();
                }
            }
            let _ = self.refined.set(els);
        }
        Ok(self.refined.get().expect("initialized above"))
    }

    fn model_is_discrete(&self) -> bool {
        fn discrete<T: Real>(m: &DensityModel<T>) -> bool {
            match m {
                DensityModel::PointMassSet { .. } => true,
                DensityModel::Superposition { components } => components.iter().all(discrete),
                DensityModel::Shifted { model, .. } => discrete(model),
                _ => false,
            }
        }
        discrete(&self.model)
    }

    /// `Phi(x) = -G sum m_j / |x - r_j|`.
    pub fn potential(&self, x: &Point3<T>) -> Result<T> {
        let els = self.elements_for(x)?;
        let s = els
            .iter()
            .fold(T::zero(), |acc, e| acc + e.mass / norm3(&sub3(x, &e.position)));
        Ok(-self.gravity * s)
    }

    /// `T_ij(x) = G sum m (3 d_i d_j - delta_ij |d|^2) / |d|^5`, `d = x - r_j`.
    pub fn gradient(&self, x: &Point3<T>) -> Result<GradientTensor<T>> {
        let els = self.elements_for(x)?;
        let three = T::lit(3.0);
        let mut acc = [T::zero(); 6];
        for e in els {
            let d = sub3(x, &e.position);
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            let inv5 = e.mass / (d2 * d2 * d2.sqrt());
            acc[0] += (three * d[0] * d[0] - d2) * inv5;
            acc[1] += (three * d[1] * d[1] - d2) * inv5;
            acc[2] += (three * d[2] * d[2] - d2) * inv5;
            acc[3] += three * d[0] * d[1] * inv5;
            acc[4] += three * d[0] * d[2] * inv5;
            acc[5] += three * d[1] * d[2] * inv5;
        }
        let g = self.gravity;
        Ok(GradientTensor {
            xx: g * acc[0],
            yy: g * acc[1],
            zz: g * acc[2],
            xy: g * acc[3],
            xz: g * acc[4],
            yz: g * acc[5],
        })
    }

    /// Gradient tensor in the local frame at `x` (z-axis radial) and the
    /// gradiometer pair measured there.
    pub fn local_observables(&self, x: &Point3<T>) -> Result<(GradientTensor<T>, InlineCrossline<T>)> {
        let frame = local_frame(x).ok_or_else(|| Error::Domain("local frame undefined at the origin".into()))?;
        let t = self.gradient(x)?.in_frame(&frame);
        Ok((t, t.inline_crossline()))
    }

    /// The invariant `V = M+^2 + Mx^2` at `x`.
    pub fn v(&self, x: &Point3<T>) -> Result<T> {
        Ok(self.local_observables(x)?.1.v())
    }

    /// Exterior multipole coefficients
    /// `d_lm = -G 4pi/(2l+1) sum m r^l Y_lm(Omega)`, so that
    /// `Phi = sum d_lm Y_lm / r^(l+1)` outside the support.
    pub fn multipoles(&self, band_limit: usize) -> CoefficientVector<T> {
        let n = coefficient_count(band_limit);
        let mut moments = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];
        for e in &self.elements {
            let r = harmonics_at_vector(band_limit, &e.position, &mut y);
            let mut rl = e.mass;
            for l in 0..=band_limit {
                for m in -(l as i64)..=(l as i64) {
                    let k = canonical_index(l, m);
                    moments[k] += rl * y[k];
                }
                rl *= r;
            }
        }
        for l in 0..=band_limit {
            let f = -self.gravity * T::lit(4.0) * T::pi() / T::from_usize_lossy(2 * l + 1);
            for m in -(l as i64)..=(l as i64) {
                moments[canonical_index(l, m)] *= f;
            }
        }
        CoefficientVector::from_values(band_limit, moments).expect("length matches")
    }

    pub fn potential_batch(&self, points: &[Point3<T>]) -> Result<Vec<T>> {
        points.par_iter().map(|x| self.potential(x)).collect()
    }

    pub fn gradient_batch(&self, points: &[Point3<T>]) -> Result<Vec<GradientTensor<T>>> {
        points.par_iter().map(|x| self.gradient(x)).collect()
    }

    pub fn local_observables_batch(
        &self,
        points: &[Point3<T>],
    ) -> Result<Vec<(GradientTensor<T>, InlineCrossline<T>)>> {
        points.par_iter().map(|x| self.local_observables(x)).collect()
    }
}

/// Exterior potential of `model` at `x`.
pub fn potential<T: Real>(
    model: &DensityModel<T>,
    gravity: GravityConstant<T>,
    x: &Point3<T>,
    quad: &BallQuadrature<T>,
) -> Result<T> {
    ForwardEvaluator::new(model, gravity, quad)?.potential(x)
}

/// Exterior multipole coefficients of `model` up to `band_limit`.
pub fn multipoles<T: Real>(
    model: &DensityModel<T>,
    gravity: GravityConstant<T>,
    band_limit: usize,
    quad: &BallQuadrature<T>,
) -> Result<CoefficientVector<T>> {
    Ok(ForwardEvaluator::new(model, gravity, quad)?.multipoles(band_limit))
}

/// Gravity gradient tensor (global Cartesian axes) at an exterior point.
pub fn gradient_tensor<T: Real>(
    model: &DensityModel<T>,
    gravity: GravityConstant<T>,
    x: &Point3<T>,
    quad: &BallQuadrature<T>,
) -> Result<GradientTensor<T>> {
    ForwardEvaluator::new(model, gravity, quad)?.gradient(x)
}

/// The invariant `V` at `x`, measured in the local frame whose z-axis passes
/// through the origin.
pub fn observable_v<T: Real>(
    model: &DensityModel<T>,
    gravity: GravityConstant<T>,
    x: &Point3<T>,
    quad: &BallQuadrature<T>,
) -> Result<T> {
    if norm3(x) == T::zero() {
        return domain("observable V is undefined at the origin");
    }
    ForwardEvaluator::new(model, gravity, quad)?.v(x)
}

/// Evaluates the exterior series `sum d_lm Y_lm(Omega) / r^(l+1)`.
pub fn multipole_potential<T: Real>(d: &CoefficientVector<T>, x: &Point3<T>) -> T {
    let (r, dir): (T, Direction<T>) = Direction::from_cartesian(x);
    let y = eval_all(d.band_limit(), &dir);
    let mut total = T::zero();
    let mut inv = T::one() / r;
    for l in 0..=d.band_limit() {
        let mut s = T::zero();
        for m in -(l as i64)..=(l as i64) {
            let k = canonical_index(l, m);
            s += d.values()[k] * y[k];
        }
        total += s * inv;
        inv /= r;
    }
    total
}
