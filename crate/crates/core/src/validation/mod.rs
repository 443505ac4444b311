//! Cross-checks between the closed forms and the Fock engines.

mod case;
mod compare;
mod limits;
mod report;

pub use case::{
    amplitude_grid, default_matrix, Engine, Tolerances, ValidationCase, MATRIX_KAPPAS, MATRIX_RS,
    MATRIX_TIMES,
};
pub use compare::{compare_q, compare_variances, run_case, run_matrix};
pub use limits::{limit_suite, LimitFamily, LIMIT_TAGS, LIMIT_TOLERANCE};
pub use report::{CaseDiagnostics, CheckEntry, ValidationReport, Worst};
