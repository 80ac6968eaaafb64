//! Continuum forward maps: exterior potential, multipole coefficients,
//! gravity gradient tensor and the gradiometer observables.

mod density;
pub mod io;
mod maps;
mod observables;
mod profile;

pub use density::{DensityModel, MassElement, PointMass};
pub use maps::{
    gradient_tensor, multipole_potential, multipoles, observable_v, potential, ForwardEvaluator, GravityConstant,
    NEAR_BOUNDARY_FACTOR,
};
pub use observables::{
    inline_crossline, local_frame, rotate_horizontal, rotate_observables, GradientTensor, InlineCrossline,
};
pub use profile::RadialProfile;
