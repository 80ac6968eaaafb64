//! Explicit members of the null spaces of the potential and gradient forward
//! maps, and a numerical verifier for them.

mod chi;
mod verify;

pub use chi::{chi_value, laplacian_chi, ChiSpec};
pub use verify::{
    make_gradient_kernel_density, make_potential_kernel_density, verify_kernel, KernelVerificationReport,
    ObservableKind, VerifySettings,
};
