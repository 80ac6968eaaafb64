//! Point-mass discretization of the potential forward map: the Green's
//! matrix between lattice sources and exterior receivers, its singular
//! value spectrum, the noise-level approximate null space, regularized mass
//! recovery, and a probe showing where sampled continuum kernel densities
//! end up in that picture.

mod analysis;
mod lattice;
mod matrix;
mod probe;


pub use analysis::{approximate_null_space, solve_point_masses, svd_conditioning, NoiseModel, PointMassSolution, SvdReport};
pub use lattice::{fibonacci_sphere, PointLattice};
pub use matrix::{
    build_forward_matrix, matrix_from_bytes, matrix_from_csv, matrix_to_bytes, matrix_to_csv, ForwardMatrix,
    MATRIX_MAGIC,
};
pub use probe::{kernel_discretization_probe, KernelProbeReport, NullAnalysis};
