//! Mechanism-agnostic verification in exact arithmetic: truthfulness by
//! re-running a mechanism on deviated reports, individual rationality,
//! budget classification, efficiency ratios, SDM money conservation, and
//! a brute-force oracle for the SDM welfare optimum.

mod budget;
mod controls;
mod sdm_checks;
mod truthfulness;

pub use budget::{budget_audit, ir_audit, BudgetClass, IrViolation};
pub use controls::{DeterministicExclusion, NextAskPrice};
pub use sdm_checks::{
    brute_force_sdm_optimum, conservation_audit, ConservationViolation, BRUTE_FORCE_MAX_MARKETS,
    BRUTE_FORCE_MAX_TRADERS_PER_MARKET,
};
pub use truthfulness::{
    deviation_points, deviation_set, expected_utility, mechanism_deviation_set, truthfulness_audit, utility_curve,
    DeviationReport,
};
