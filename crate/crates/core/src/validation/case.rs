use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NdpoError, Result};
use crate::fock::{ValidityTolerances, DEFAULT_N_CUT, DEFAULT_TAIL_TOLERANCE};
use crate::params::ModelParams;

/// Which Fock engine supplies the numeric side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Full two-mode Liouvillian at a fixed cutoff.
    Direct,
    /// Factorized normal modes; the cutoff escalates from `n_cut` when a
    /// steady state exists.
    NormalMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub variance: f64,
    pub q: f64,
    pub normalization: f64,
    /// Top-layer population bound; `None` records the tail without checking it.
    pub tail: Option<f64>,
    pub validity: ValidityTolerances,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            variance: 1e-3,
            q: 1e-3,
            normalization: 1e-10,
            tail: Some(DEFAULT_TAIL_TOLERANCE),
            validity: ValidityTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCase {
    pub tag: String,
    pub params: ModelParams,
    pub times: Vec<f64>,
    pub amplitude_grid: Vec<(Complex64, Complex64)>,
    pub n_cut: usize,
    pub engine: Engine,
    pub tolerances: Tolerances,
}

impl ValidationCase {
    pub fn new(params: ModelParams, times: Vec<f64>) -> Self {
        Self {
            tag: default_tag(&params),
            params,
            times,
            amplitude_grid: amplitude_grid(&[-0.6, 0.0, 0.6]),
            n_cut: DEFAULT_N_CUT,
            engine: Engine::NormalMode,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() || self.amplitude_grid.is_empty() {
            return Err(NdpoError::Config(format!(
                "case {}: time and amplitude grids must be non-empty",
                self.tag
            )));
        }
        if let Some(t) = self.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(NdpoError::Domain(format!("case {}: bad sample time {t}", self.tag)));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NdpoError::Domain(format!(
                "case {}: sample times must increase",
                self.tag
            )));
        }
        self.params.symmetric_gamma()?;
        Ok(())
    }
}

fn default_tag(p: &ModelParams) -> String {
    format!("g{}-k{}-r{}", p.gamma_a, p.kappa_gamma0, p.r)
}

/// Every pair (α, β) with α and β drawn from the square grid axis × i·axis.
pub fn amplitude_grid(axis: &[f64]) -> Vec<(Complex64, Complex64)> {
    let points: Vec<Complex64> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| Complex64::new(x, y)))
        .collect();
    points
        .iter()
        .flat_map(|&a| points.iter().map(move |&b| (a, b)))
        .collect()
}

pub const MATRIX_KAPPAS: [f64; 5] = [0.0, 0.1, 0.2, 0.4, 0.45];
pub const MATRIX_RS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
pub const MATRIX_TIMES: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];

/// γ = 1 with every combination of [`MATRIX_KAPPAS`] and [`MATRIX_RS`],
/// sampled at [`MATRIX_TIMES`].
pub fn default_matrix() -> Vec<ValidationCase> {
    MATRIX_KAPPAS
        .iter()
        .flat_map(|&k| MATRIX_RS.iter().map(move |&r| (k, r)))
        .map(|(k, r)| {
            let p = ModelParams::symmetric(1.0, k, r).expect("matrix parameters are valid");
            ValidationCase::new(p, MATRIX_TIMES.to_vec())
        })
        .collect()
}
