//! Closed-form Gaussian results for symmetric damping rates.

mod propagator;
mod qfunction;
mod variance;
mod widths;

pub use propagator::{q_propagator, vacuum_q_rotated, QPropagator};
pub use qfunction::{
    amplitudes_from_rotated, q_coefficients, q_rotated, q_single_mode, q_single_mode_expanded_form,
    q_single_undamped_amplifier, q_single_vacuum_reservoir, q_two_mode, q_undamped_amplifier,
    q_vacuum_reservoir, rotated_coordinates, QCoefficients, SingleModeQ,
};
pub use variance::{
    squeezing_onset_r, threshold_v1, variance_single_mode, variance_two_mode, Horizon, ModeKind,
    Source, Variance, VarianceReport,
};
pub use widths::{gaussian_widths, steady_widths, GaussianWidths, MAX_EXPONENT, SERIES_CUTOFF};
