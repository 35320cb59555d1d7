//! Shortening constructions: the Polterovich trick, the multi-summand
//! loops, weight splitting and the isolated-maximum pipeline.

pub mod loops;
pub mod split;
pub mod theorem;

pub use loops::{boundary_leakage, circle_flows, k_summand_loop, poisson_defect, polterovich_loop, two_summand_loop};
pub use split::{weight_split, SplitMatrix};
pub use theorem::{
    theorem_isolated_pipeline, Check, CloudConfig, CloudPoint, PathPoint, PipelineConfig, PipelineResult,
    ShorteningReport, ShorteningScenario, ToleranceBudget,
};
