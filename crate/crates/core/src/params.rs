//! Physical parameters of the oscillator and the coefficients derived from them.
//!
//! Both engines read their constants from [`ModelParams`]. The pump enters only
//! through the product κγ₀, so that product is stored as a single field.

use serde::{Deserialize, Serialize};

use crate::error::{NdpoError, Result};

/// Relative width of the band around γ = 2κγ₀ that is classified as threshold.
pub const THRESHOLD_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Cavity damping rates, pump rate and reservoir squeezing parameter.
///
/// Rates are in inverse time units; with the CLI the time unit is 1/γ.
/// A zero damping rate is accepted so that the lossless amplifier limit can be
/// evaluated; every steady-state path rejects it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub kappa_gamma0: f64,
    pub r: f64,
}

impl ModelParams {
    pub fn new(gamma_a: f64, gamma_b: f64, kappa_gamma0: f64, r: f64) -> Result<Self> {
        check_nonneg("gamma_a", gamma_a)?;
        check_nonneg("gamma_b", gamma_b)?;
        check_nonneg("kappa_gamma0", kappa_gamma0)?;
        check_nonneg("r", r)?;
        Ok(Self {
            gamma_a,
            gamma_b,
            kappa_gamma0,
            r,
        })
    }

    /// Equal damping on both modes, the only case with closed-form results.
    pub fn symmetric(gamma: f64, kappa_gamma0: f64, r: f64) -> Result<Self> {
        Self::new(gamma, gamma, kappa_gamma0, r)
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma_a == self.gamma_b
    }

    /// The common damping rate, or an error naming the analytic-engine
    /// restriction when the rates differ.
    pub fn symmetric_gamma(&self) -> Result<f64> {
        if self.is_symmetric() {
            Ok(self.gamma_a)
        } else {
            Err(NdpoError::Unsupported(format!(
                "closed-form results require gamma_a == gamma_b (got {} and {}); \
                 asymmetric rates are only accepted by the Fock engine",
                self.gamma_a, self.gamma_b
            )))
        }
    }

    /// Geometric mean of the two damping rates. The oscillation threshold of
    /// the two-mode drift matrix sits at 2κγ₀ = sqrt(γ_A γ_B).
    pub fn effective_gamma(&self) -> f64 {
        (self.gamma_a * self.gamma_b).sqrt()
    }

    pub fn reservoir(&self) -> ReservoirStats {
        // r is validated at construction.
        ReservoirStats::from_squeezing(self.r)
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.gamma_a, self.gamma_b, self.kappa_gamma0, r)
    }

    pub fn with_kappa_gamma0(&self, kappa_gamma0: f64) -> Result<Self> {
        Self::new(self.gamma_a, self.gamma_b, kappa_gamma0, self.r)
    }

    /// Same physics with every rate multiplied by `factor` (time rescaled by 1/factor).
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(NdpoError::Domain(format!(
                "rescale factor must be positive, got {factor}"
            )));
        }
        Self::new(
            self.gamma_a * factor,
            self.gamma_b * factor,
            self.kappa_gamma0 * factor,
            self.r,
        )
    }

    pub fn lambdas(&self) -> Result<LambdaCoeffs> {
        lambda_coeffs(self)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self)
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(NdpoError::Domain(format!(
            "{name} must be finite and non-negative, got {v}"
        )))
    }
}

/// Mean photon number N and phase parameter M of a squeezed vacuum reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirStats {
    pub n: f64,
    pub m: f64,
}

impl ReservoirStats {
    fn from_squeezing(r: f64) -> Self {
        let s = r.sinh();
        Self {
            n: s * s,
            m: s * r.cosh(),
        }
    }

    /// m² − n(n+1); zero up to rounding for a pure squeezed vacuum.
    pub fn purity_defect(&self) -> f64 {
        self.m * self.m - self.n * (self.n + 1.0)
    }
}

/// N = sinh²r, M = sinh r cosh r.
pub fn reservoir_stats(r: f64) -> Result<ReservoirStats> {
    check_nonneg("r", r)?;
    Ok(ReservoirStats::from_squeezing(r))
}

/// Rate coefficients of the rotated Fokker–Planck equation for the Q-function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaCoeffs {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
    pub l6: f64,
}

pub fn lambda_coeffs(params: &ModelParams) -> Result<LambdaCoeffs> {
    let gamma = params.symmetric_gamma()?;
    let k = params.kappa_gamma0;
    let ReservoirStats { n, m } = params.reservoir();
    Ok(LambdaCoeffs {
        l1: k + gamma * (n - m + 1.0),
        l2: k + gamma * (n + m + 1.0),
        l3: k - gamma * (n - m + 1.0),
        l4: k - gamma * (n + m + 1.0),
        l5: 2.0 * k + gamma,
        l6: 2.0 * k - gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    BelowThreshold,
    AtThreshold,
    AboveThreshold,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeTag::BelowThreshold => "below-threshold",
            RegimeTag::AtThreshold => "at-threshold",
            RegimeTag::AboveThreshold => "above-threshold",
        })
    }
}

/// Operating regime with its margin γ − 2κγ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub margin: f64,
}

impl Regime {
    pub fn is_below(&self) -> bool {
        self.tag == RegimeTag::BelowThreshold
    }
}

pub fn classify_regime(params: &ModelParams) -> Regime {
    let gamma = params.effective_gamma();
    let margin = gamma - 2.0 * params.kappa_gamma0;
    let eps = THRESHOLD_RELATIVE_TOLERANCE * gamma;
    let tag = if margin > eps {
        RegimeTag::BelowThreshold
    } else if margin.abs() <= eps {
        RegimeTag::AtThreshold
    } else {
        RegimeTag::AboveThreshold
    };
    Regime { tag, margin }
}

/// JSON form of the parameters: `gamma`, `kappa_gamma0`, `r`, with optional
/// per-mode overrides `gamma_a` / `gamma_b`. Unknown keys are rejected.
///
/// Every field is optional so that partial files can be layered under
/// command-line flags; [`ParamsConfig::resolve`] enforces completeness.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_gamma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_b: Option<f64>,
}

impl ParamsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| NdpoError::Parse(e.to_string()))
    }

    /// Values set in `over` win.
    pub fn overlay(self, over: &ParamsConfig) -> Self {
        Self {
            gamma: over.gamma.or(self.gamma),
            kappa_gamma0: over.kappa_gamma0.or(self.kappa_gamma0),
            r: over.r.or(self.r),
            gamma_a: over.gamma_a.or(self.gamma_a),
            gamma_b: over.gamma_b.or(self.gamma_b),
        }
    }

    pub fn resolve(&self) -> Result<ModelParams> {
        let missing = |k: &str| NdpoError::Parse(format!("missing parameter `{k}`"));
        let gamma_a = self.gamma_a.or(self.gamma).ok_or_else(|| missing("gamma"))?;
        let gamma_b = self.gamma_b.or(self.gamma).ok_or_else(|| missing("gamma"))?;
        let k = self.kappa_gamma0.ok_or_else(|| missing("kappa_gamma0"))?;
        let r = self.r.ok_or_else(|| missing("r"))?;
        ModelParams::new(gamma_a, gamma_b, k, r)
    }
}

impl From<&ModelParams> for ParamsConfig {
    fn from(p: &ModelParams) -> Self {
        if p.is_symmetric() {
            Self {
                gamma: Some(p.gamma_a),
                kappa_gamma0: Some(p.kappa_gamma0),
                r: Some(p.r),
                ..Self::default()
            }
        } else {
            Self {
                gamma: None,
                kappa_gamma0: Some(p.kappa_gamma0),
                r: Some(p.r),
                gamma_a: Some(p.gamma_a),
                gamma_b: Some(p.gamma_b),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_reservoir() {
        let s = reservoir_stats(0.0).unwrap();
        assert_eq!((s.n, s.m), (0.0, 0.0));
    }

    #[test]
    fn reservoir_at_unit_squeezing() {
        // sinh(1) = 1.1752011936438014, cosh(1) = 1.5430806348152437
        let s = reservoir_stats(1.0).unwrap();
        assert!((s.n - 1.381_097_845_541_816_6).abs() < 1e-14);
        assert!((s.m - 1.813_430_203_923_509_4).abs() < 1e-14);
        assert!(s.purity_defect().abs() < 1e-14);
    }

    #[test]
    fn reservoir_rejects_bad_r() {
        assert!(matches!(reservoir_stats(-0.1), Err(NdpoError::Domain(_))));
        assert!(reservoir_stats(f64::NAN).is_err());
        assert!(reservoir_stats(f64::INFINITY).is_err());
    }

    #[test]
    fn lambdas_for_vacuum_reservoir() {
        let p = ModelParams::symmetric(1.0, 0.1, 0.0).unwrap();
        let l = lambda_coeffs(&p).unwrap();
        let got = [l.l1, l.l2, l.l3, l.l4, l.l5, l.l6];
        let want = [1.1, 1.1, -0.9, -0.9, 1.2, -0.8];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn lambdas_for_pure_damping() {
        let p = ModelParams::symmetric(1.0, 0.0, 0.0).unwrap();
        let l = lambda_coeffs(&p).unwrap();
        assert_eq!([l.l1, l.l2, l.l3, l.l4, l.l5, l.l6], [1.0, 1.0, -1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn lambdas_reject_asymmetric_rates() {
        let p = ModelParams::new(1.0, 2.0, 0.1, 0.3).unwrap();
        match lambda_coeffs(&p) {
            Err(NdpoError::Unsupported(msg)) => assert!(msg.contains("gamma_a == gamma_b")),
            other => panic!("expected unsupported, got {other:?}"),
        }
    }

    #[test]
    fn regimes() {
        let below = classify_regime(&ModelParams::symmetric(1.0, 0.2, 0.0).unwrap());
        assert_eq!(below.tag, RegimeTag::BelowThreshold);
        assert!((below.margin - 0.6).abs() < 1e-15);

        let at = classify_regime(&ModelParams::symmetric(1.0, 0.5, 0.0).unwrap());
        assert_eq!(at.tag, RegimeTag::AtThreshold);
        assert_eq!(at.margin, 0.0);

        let above = classify_regime(&ModelParams::symmetric(1.0, 0.6, 0.0).unwrap());
        assert_eq!(above.tag, RegimeTag::AboveThreshold);
        assert!((above.margin + 0.2).abs() < 1e-15);
    }

    #[test]
    fn threshold_band_is_relative() {
        let p = ModelParams::symmetric(1.0, 0.5 * (1.0 - 1e-14), 0.0).unwrap();
        assert_eq!(classify_regime(&p).tag, RegimeTag::AtThreshold);
        let p = ModelParams::symmetric(1.0, 0.5 * (1.0 - 1e-9), 0.0).unwrap();
        assert_eq!(classify_regime(&p).tag, RegimeTag::BelowThreshold);
    }

    #[test]
    fn config_json_round_trip_and_unknown_keys() {
        let cfg = ParamsConfig::from_json(r#"{"gamma": 1.0, "kappa_gamma0": 0.2, "r": 0.5}"#).unwrap();
        let p = cfg.resolve().unwrap();
        assert_eq!(p, ModelParams::symmetric(1.0, 0.2, 0.5).unwrap());

        let err = ParamsConfig::from_json(r#"{"gamma": 1.0, "kappa": 0.2, "r": 0.5}"#).unwrap_err();
        assert!(matches!(err, NdpoError::Parse(ref m) if m.contains("unknown field")));

        let cfg = ParamsConfig::from_json(
            r#"{"gamma": 1.0, "gamma_b": 2.0, "kappa_gamma0": 0.2, "r": 0.5}"#,
        )
        .unwrap();
        let p = cfg.resolve().unwrap();
        assert_eq!((p.gamma_a, p.gamma_b), (1.0, 2.0));
    }

    #[test]
    fn config_overlay_prefers_overrides() {
        let file = ParamsConfig::from_json(r#"{"gamma": 1.0, "kappa_gamma0": 0.2, "r": 0.5}"#).unwrap();
        let flags = ParamsConfig {
            r: Some(1.0),
            ..Default::default()
        };
        let p = file.overlay(&flags).resolve().unwrap();
        assert_eq!(p.r, 1.0);
        assert_eq!(p.kappa_gamma0, 0.2);
        assert!(ParamsConfig::default().resolve().is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::symmetric(-1.0, 0.1, 0.0).is_err());
        assert!(ModelParams::symmetric(1.0, -0.1, 0.0).is_err());
        assert!(ModelParams::symmetric(1.0, 0.1, -0.5).is_err());
        assert!(ModelParams::symmetric(f64::NAN, 0.1, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lambda_identities(g in 0.01f64..10.0, k in 0.0f64..5.0, r in 0.0f64..2.5) {
                let l = lambda_coeffs(&ModelParams::symmetric(g, k, r).unwrap()).unwrap();
                let scale = 1.0 + g * (1.0 + (2.0 * r).exp());
                prop_assert!((l.l1 + l.l3 - 2.0 * k).abs() <= 1e-13 * scale);
                prop_assert!((l.l2 + l.l4 - 2.0 * k).abs() <= 1e-13 * scale);
                prop_assert!(l.l2 >= l.l1);
                prop_assert!(l.l4 <= l.l3);
            }

            #[test]
            fn purity_relation(r in 0.0f64..4.0) {
                let s = reservoir_stats(r).unwrap();
                prop_assert!(s.purity_defect().abs() <= 1e-12 * (1.0 + s.m * s.m));
            }

            #[test]
            fn reservoir_monotone(r in 0.0f64..4.0, dr in 1e-6f64..1.0) {
                let a = reservoir_stats(r).unwrap();
                let b = reservoir_stats(r + dr).unwrap();
                prop_assert!(b.n > a.n);
                prop_assert!(b.m > a.m);
            }

            #[test]
            fn regime_scale_invariant(g in 0.01f64..10.0, ratio in 0.0f64..1.0, f in 1e-3f64..1e3) {
                let p = ModelParams::symmetric(g, ratio * g, 0.3).unwrap();
                prop_assert_eq!(classify_regime(&p).tag, classify_regime(&p.rescaled(f).unwrap()).tag);
            }
        }
    }
}
