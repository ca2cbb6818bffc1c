//! Stacking constraints into `B p = 0` and solving with anchors fixed.

mod assembly;
mod invariance;
mod solve;

pub use assembly::{assemble, ConstraintRow, StackedConstraintSystem};
pub use invariance::{
    angle_forms_from_truth, invariance_check, AngleConstraintForm, InvarianceProbe, InvarianceReport,
};
pub use solve::{
    localizability, rmse, solve_distributed, solve_global, DistributedParams, RankDiagnostics, SolveReport,
    LOCALIZABILITY_TOL,
};
