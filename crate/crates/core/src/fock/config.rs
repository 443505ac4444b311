use serde::{Deserialize, Serialize};

use crate::error::{NdpoError, Result};

pub const DEFAULT_N_CUT: usize = 30;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// Truncation and tolerance settings of the Fock engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockConfig {
    /// Photon-number cutoff per mode; levels 0..n_cut are kept.
    pub n_cut: usize,
    /// Largest acceptable population of the top Fock layer.
    pub tail_tolerance: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            n_cut: DEFAULT_N_CUT,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl FockConfig {
    pub fn new(n_cut: usize) -> Result<Self> {
        let cfg = Self {
            n_cut,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cut < 2 {
            return Err(NdpoError::Config(format!(
                "n_cut = {} cannot represent a single excitation; need n_cut >= 2",
                self.n_cut
            )));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.tail_tolerance > 0.0) {
            return Err(NdpoError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Hilbert-space dimension n_cut².
    pub fn hilbert_dim(&self) -> usize {
        self.n_cut * self.n_cut
    }

    pub fn with_n_cut(&self, n_cut: usize) -> Self {
        Self { n_cut, ..*self }
    }
}

/// Sign of the pump commutator.
///
/// `Hamiltonian` generates −i[H, ρ] from H = iκγ₀(ab − a†b†), which is what the
/// Q-function equation and every closed-form variance follow.
/// `PrintedMasterEquation` uses −κγ₀[ab − a†b†, ρ], the opposite sign; with it
/// the pump amplifies ĉ₁ instead of squeezing it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PumpConvention {
    #[default]
    Hamiltonian,
    PrintedMasterEquation,
}

impl PumpConvention {
    /// Coefficient s of s·κγ₀[ab − a†b†, ρ].
    pub fn sign(self) -> f64 {
        match self {
            PumpConvention::Hamiltonian => 1.0,
            PumpConvention::PrintedMasterEquation => -1.0,
        }
    }
}
