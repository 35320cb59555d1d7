//! Deformations of the circle action near an isolated maximum and the
//! Hessian of their length at the undeformed action.

pub mod block;
pub mod embed;
pub mod hessian;

pub use block::{block_coefficients, block_length, block_loop, block_slice, minimize_quadratic, single_block_generator, MinimizerResult};
pub use embed::{
    check_d_conditions, d_radius, deformation_slice, embed_deformation, measure_d_conditions, parameter_cutoff_embedding,
    unconstrained_maximum, CutoffTranslation, DReport, ParameterCutoff,
};
pub use hessian::{analytic_second_partials, fd_hessian, hessian_at_origin, length_sweep, total_length, DeformationParams, HessianReport};
