pub mod forward;
pub mod invert_shape;
pub mod kernel_verify;
pub mod probe;
pub mod svd_analyze;
