//! Truncated-Fock Lindblad engine.

mod banded;
mod config;
mod density;
mod evolve;
mod integrate;
mod liouvillian;
mod normal_mode;
mod observables;
mod ops;
mod steady;

pub use banded::BandedMatrix;
pub use config::{FockConfig, PumpConvention, DEFAULT_N_CUT, DEFAULT_TAIL_TOLERANCE};
pub use density::{DensityMatrix, Validity, ValidityTolerances};
pub use evolve::{
    evolve, evolve_visit, format_sig12, trajectory, Trajectory, TrajectoryPoint, TRAJECTORY_COLUMNS,
};
pub use integrate::{integrate, StepControl, StepStats};
pub use liouvillian::{build_liouvillian, build_liouvillian_with, Liouvillian, TwoModeOps};
pub use normal_mode::{
    steady_state_escalating, CutoffStep, EscalatedSteadyState, EscalationPolicy, ModeGenerator, ModeState,
    NormalModeEngine, NormalModeState,
};
pub use observables::{
    coherent_state, coherent_tail, husimi, husimi_single, mean_photon, quadrature_variance,
    required_cutoff, Quadrature, COHERENT_TAIL_TOLERANCE,
};
pub use ops::{commutator_terms, dissipator_terms, superoperator, CsrMatrix, Scalar, SparseOp, SuperTerm};
pub use steady::{
    relative_residual, steady_state, steady_state_with, SteadyMethod, SteadyOptions, SteadyReport,
};
