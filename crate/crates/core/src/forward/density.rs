use serde::{Deserialize, Serialize};

use super::RadialProfile;
use crate::error::{domain, Result};
use crate::harmonics::{BallQuadrature, CoefficientVector, HarmonicTable, SphereQuadrature};
use crate::kernel::{laplacian_chi, ChiSpec};
use crate::scalar::{add3, norm3, scale3, Point3, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PointMass<T> {
    pub mass: T,
    pub position: Point3<T>,
}

/// Analytic mass-density primitives and their combinations. The JSON form
/// carries a `type` discriminator (see `docs/formats.md`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields, bound = "T: Real")]
pub enum DensityModel<T> {
    PointMassSet {
        masses: Vec<PointMass<T>>,
    },
    /// Constant density on the ball of `radius` about the origin.
    UniformBall {
        density: T,
        radius: T,
    },
    /// `rho0(r)` restricted to the star-shaped body `r <= psi(Omega)`, where
    /// `psi` is synthesized from `shape`.
    CarvedRadialBody {
        profile: RadialProfile<T>,
        shape: CoefficientVector<T>,
    },
    /// `laplacian(chi)`: a member of the potential forward map's kernel.
    LaplacianBump {
        chi: ChiSpec<T>,
    },
    /// `rho0(r)` on the shell `r_inner <= r <= r_outer`.
    SphericalLayer {
        profile: RadialProfile<T>,
        r_inner: T,
        r_outer: T,
    },
    Superposition {
        components: Vec<DensityModel<T>>,
    },
    /// `model` translated rigidly by `offset`.
    Shifted {
        offset: Point3<T>,
        model: Box<DensityModel<T>>,
    },
}

/// One node of a volume quadrature: the density times the volume weight,
/// placed at the node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassElement<T> {
    pub position: Point3<T>,
    pub mass: T,
}

/// Angular degree used to bound `max psi` of a carved body.
fn shape_probe_degree(band_limit: usize) -> usize {
    (4 * band_limit).max(32)
}

impl<T: Real> DensityModel<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PointMassSet { masses } => {
                if masses.iter().any(|p| !p.mass.is_finite() || p.position.iter().any(|c| !c.is_finite())) {
                    return domain("point masses must be finite");
                }
            }
            Self::UniformBall { density, radius } => {
                if !(*radius > T::zero()) || !density.is_finite() {
                    return domain("uniform ball needs a positive radius and finite density");
                }
            }
            Self::CarvedRadialBody { profile, shape } => {
                let quad = SphereQuadrature::new(shape_probe_degree(shape.band_limit()));
                let psi = HarmonicTable::new(shape.band_limit(), &quad).synthesize_nodes(shape);
                let (lo, hi) = psi.iter().fold((T::max_value().unwrap(), T::zero()), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
                if !(lo > T::zero()) {
                    return domain(format!("shape function is not positive (min {lo}): body is not star-shaped"));
                }
                if hi > profile.outer_radius() {
                    return domain(format!(
                        "shape reaches r = {hi}, beyond the radial profile domain {}",
                        profile.outer_radius()
                    ));
                }
            }
            Self::LaplacianBump { chi } => chi.validate()?,
            Self::SphericalLayer {
                profile,
                r_inner,
                r_outer,
            } => {
                if !(*r_inner >= T::zero() && r_inner < r_outer && *r_outer <= profile.outer_radius()) {
                    return domain("spherical layer needs 0 <= r_inner < r_outer <= profile outer radius");
                }
            }
            Self::Superposition { components } => {
                for c in components {
                    c.validate()?;
                }
            }
            Self::Shifted { offset, model } => {
                if offset.iter().any(|c| !c.is_finite()) {
                    return domain("shift offset must be finite");
                }
                model.validate()?;
            }
        }
        Ok(())
    }

    /// Radius of a ball about the origin containing the support. For carved
    /// bodies this is `max psi` at sample resolution.
    pub fn support_radius(&self) -> T {
        match self {
            Self::PointMassSet { masses } => masses.iter().fold(T::zero(), |acc, p| acc.max(norm3(&p.position))),
            Self::UniformBall { radius, .. } => *radius,
            Self::CarvedRadialBody { shape, .. } => {
                let quad = SphereQuadrature::new(shape_probe_degree(shape.band_limit()));
                HarmonicTable::new(shape.band_limit(), &quad)
                    .synthesize_nodes(shape)
                    .into_iter()
                    .fold(T::zero(), |a, b| a.max(b))
            }
            Self::LaplacianBump { chi } => chi.support_radius,
            Self::SphericalLayer { r_outer, .. } => *r_outer,
            Self::Superposition { components } => components.iter().fold(T::zero(), |acc, c| acc.max(c.support_radius())),
            Self::Shifted { offset, model } => model.support_radius() + norm3(offset),
        }
    }

    /// Discretizes the density into point masses using `quad` for every
    /// continuous primitive. Point-mass sets are reproduced exactly.
    pub fn mass_elements(&self, quad: &BallQuadrature<T>) -> Result<Vec<MassElement<T>>> {
        self.validate()?;
        let mut out = Vec::new();
        self.push_elements(quad, &mut out)?;
        Ok(out)
    }

    fn push_elements(&self, quad: &BallQuadrature<T>, out: &mut Vec<MassElement<T>>) -> Result<()> {
        let units = quad.sphere.unit_vectors();
        let weights = quad.sphere.weights();
        match self {
            Self::PointMassSet { masses } => out.extend(masses.iter().map(|p| MassElement {
                position: p.position,
                mass: p.mass,
            })),
            Self::UniformBall { density, radius } => {
                for (u, &wa) in units.iter().zip(weights) {
                    for (r, wr) in quad.radial_rule(T::zero(), *radius) {
                        out.push(MassElement {
                            position: scale3(u, r),
                            mass: *density * wa * wr,
                        });
                    }
                }
            }
            Self::CarvedRadialBody { profile, shape } => {
                let table = HarmonicTable::new(shape.band_limit(), &quad.sphere);
                let psi = table.synthesize_nodes(shape);
                for ((u, &wa), &rmax) in units.iter().zip(weights).zip(&psi) {
                    for (a, b) in profile.segments_within(T::zero(), rmax) {
                        for (r, wr) in quad.radial_rule(a, b) {
                            out.push(MassElement {
                                position: scale3(u, r),
                                mass: profile.value(r) * wa * wr,
                            });
                        }
                    }
                }
            }
            Self::LaplacianBump { chi } => {
                for (u, &wa) in units.iter().zip(weights) {
                    for (r, wr) in quad.radial_rule(T::zero(), chi.support_radius) {
                        let x = scale3(u, r);
                        out.push(MassElement {
                            position: x,
                            mass: laplacian_chi(chi, &x) * wa * wr,
                        });
                    }
                }
            }
            Self::SphericalLayer {
                profile,
                r_inner,
                r_outer,
            } => {
                for (u, &wa) in units.iter().zip(weights) {
                    for (a, b) in profile.segments_within(*r_inner, *r_outer) {
                        for (r, wr) in quad.radial_rule(a, b) {
                            out.push(MassElement {
                                position: scale3(u, r),
                                mass: profile.value(r) * wa * wr,
                            });
                        }
                    }
                }
            }
            Self::Superposition { components } => {
                for c in components {
                    c.push_elements(quad, out)?;
                }
            }
            Self::Shifted { offset, model } => {
                let start = out.len();
                model.push_elements(quad, out)?;
                for e in &mut out[start..] {
                    e.position = add3(&e.position, offset);
                }
            }
        }
        Ok(())
    }

    /// Total mass computed from the mass elements.
    pub fn total_mass(&self, quad: &BallQuadrature<T>) -> Result<T> {
        Ok(self
            .mass_elements(quad)?
            .iter()
            .fold(T::zero(), |acc, e| acc + e.mass))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn uniform_ball_mass() {
        let quad = BallQuadrature::new(8, 4, 1.0);
        let m = DensityModel::UniformBall { density: 2.0, radius: 1.5 }.total_mass(&quad).unwrap();
        assert_relative_eq!(m, 2.0 * 4.0 / 3.0 * PI * 1.5f64.powi(3), max_relative = 1e-13);
    }

    #[test]
    fn layer_mass_matches_profile_moments() {
        let profile = RadialProfile::piecewise_linear(vec![0.0, 0.5, 1.0], vec![3.0, 1.0, 0.25]).unwrap();
        let quad = BallQuadrature::new(4, 6, 1.0);
        let m = DensityModel::SphericalLayer {
            profile: profile.clone(),
            r_inner: 0.2,
            r_outer: 0.9,
        }
        .total_mass(&quad)
        .unwrap();
        let exact = 4.0 * PI * (profile.moment(2, 0.9).unwrap() - profile.moment(2, 0.2).unwrap());
        assert_relative_eq!(m, exact, max_relative = 1e-13);
    }

    #[test]
    fn json_discriminator() {
        let text = r#"{"type":"superposition","components":[
            {"type":"uniform_ball","density":1.0,"radius":0.5},
            {"type":"point_mass_set","masses":[{"mass":2.0,"position":[0.1,0.0,0.0]}]},
            {"type":"laplacian_bump","chi":{"amplitude":1.0,"support_radius":1.0,"smoothness":3,"l":2,"m":0}}
        ]}"#;
        let m: DensityModel<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(m.support_radius(), 1.0);
        let back: DensityModel<f64> = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<DensityModel<f64>>(r#"{"type":"blob"}"#).is_err());
        assert!(serde_json::from_str::<DensityModel<f64>>(r#"{"type":"uniform_ball","density":1,"radius":1,"extra":0}"#).is_err());
    }

    #[test]
    fn carved_body_validation() {
        let profile = RadialProfile::constant(1.0, 1.2).unwrap();
        let too_big = DensityModel::CarvedRadialBody {
            profile: profile.clone(),
            shape: CoefficientVector::sphere(2, 1.5),
        };
        assert!(too_big.validate().is_err());
        let mut neg = CoefficientVector::sphere(2, 0.1);
        neg.set(2, 0, 1.0);
        assert!(DensityModel::CarvedRadialBody { profile, shape: neg }.validate().is_err());
    }

    #[test]
    fn shifted_support() {
        let m = DensityModel::Shifted {
            offset: [0.0, 0.3, 0.4],
            model: Box::new(DensityModel::UniformBall { density: 1.0, radius: 1.0 }),
        };
        assert_relative_eq!(m.support_radius(), 1.5, max_relative = 1e-15);
    }
}
