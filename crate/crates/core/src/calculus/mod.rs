//! Generator algebra and the Hofer length estimator.

pub mod algebra;
pub mod extremize;
pub mod hamiltonian;
pub mod length;
pub mod oracle;

pub use algebra::{
    circle_flow, circle_generator, circle_speeds, compose_generators, conjugate, reparametrize,
    translation_chain,
};
pub use extremize::{
    grid_max, grid_min, quadratic_max, quadratic_max_on_boundary, quadratic_min, AxisMode,
    Extremizer, Extremum, GridConfig, StandardExtremizer,
};
pub use hamiltonian::{
    fd_gradient, ChainFn, ChainMap, Hamiltonian, QuadraticAffine, QuadraticFn, ScalarField,
    TimeMapFn,
};
pub use length::{
    hofer_length, report_from_profile, verify_loop_closure, HoferReport, LengthConfig,
    LoopGenerator,
};
pub use oracle::{calculus_oracle, OracleConfig, OracleReport};
