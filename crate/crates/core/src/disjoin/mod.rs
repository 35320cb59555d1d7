//! Explicit disjoining isotopies: the mollifier, the slit-disc flow, the
//! annulus push, the disc disjoiner and its parametrized family.

pub mod cutoff;
pub mod disc;
pub mod family;
pub mod push;
pub mod slit;
pub mod verify;

pub use cutoff::SmoothCutoff;
pub use disc::{audit_flow, default_flow, measure_collar, CollarReport, DiscDisjoiner, DisjoinSpec};
pub use family::{check_theorem_containment, AffineProfile, FamilyDisjoinSpec, FamilyDisjoiner, ReducedFamily};
pub use push::{angle_action, AnnulusPush, Collars};
pub use slit::SlitDisc;
pub use verify::{verify_disc, DiscVerification};
