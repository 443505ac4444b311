//! Quadrature variances in the convention where the vacuum gives 1.
//!
//! Two-mode quadratures are ĉ₁ = (â₁ + b̂₁)/√2 and ĉ₂ = (â₂ + b̂₂)/√2 with
//! â₁ = â + â†, â₂ = i(â† − â). Single-mode quadratures are â₁, â₂.

use serde::{Deserialize, Serialize};

use super::widths::{checked_exp, gaussian_widths, relaxed_fraction, steady_widths};
use crate::error::{NdpoError, Result};
use crate::params::{ModelParams, Regime};

/// A variance that is either a finite number or has no finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variance {
    Finite(f64),
    Divergent,
}

impl Variance {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Variance::Finite(v) => Some(*v),
            Variance::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Variance::Divergent)
    }

    /// Noise reduction below the vacuum level in percent, 100·(1 − v).
    pub fn squeezing_percent(&self) -> Option<f64> {
        self.finite().map(|v| 100.0 * (1.0 - v))
    }
}

impl std::fmt::Display for Variance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variance::Finite(v) => write!(f, "{v}"),
            Variance::Divergent => f.write_str("divergent"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    SingleMode,
    TwoMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Analytic,
    Numeric,
}

/// Finite time or the t → ∞ limit. The limit is a separate request because
/// the time-dependent path refuses exponents that would overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    At(f64),
    Steady,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub v1: Variance,
    pub v2: Variance,
    pub mode_kind: ModeKind,
    /// Absent for numeric reports, which see only a density matrix.
    pub regime: Option<Regime>,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl VarianceReport {
    /// v1·v2 when both are finite.
    pub fn uncertainty_product(&self) -> Option<f64> {
        Some(self.v1.finite()? * self.v2.finite()?)
    }

    pub fn squeezing_percent(&self) -> Option<f64> {
        self.v1.squeezing_percent()
    }
}

fn report(params: &ModelParams, kind: ModeKind, v1: Variance, v2: Variance) -> VarianceReport {
    let regime = params.regime();
    let mut warnings = Vec::new();
    if !regime.is_below() {
        warnings.push(format!(
            "operating {} (margin {:.3e}); closed forms are evaluated but not claimed physical",
            regime.tag, regime.margin
        ));
    }
    VarianceReport {
        v1,
        v2,
        mode_kind: kind,
        regime: Some(regime),
        source: Source::Analytic,
        warnings,
    }
}

fn require_damping(gamma: f64) -> Result<()> {
    if gamma > 0.0 {
        Ok(())
    } else {
        Err(NdpoError::Domain(
            "no steady state without cavity damping (gamma = 0)".into(),
        ))
    }
}

/// Variances of ĉ₁ and ĉ₂.
///
/// At time t: v1 = e^{−(γ+2κγ₀)t} + γe^{−2r}(1 − e^{−(γ+2κγ₀)t})/(γ+2κγ₀) and
/// v2 the same with (γ−2κγ₀, +2r). The steady state keeps v1 finite at and
/// above threshold and marks v2 divergent there.
pub fn variance_two_mode(params: &ModelParams, horizon: Horizon) -> Result<VarianceReport> {
    let gamma = params.symmetric_gamma()?;
    let k = params.kappa_gamma0;
    let r = params.r;
    let sum = gamma + 2.0 * k;
    let diff = gamma - 2.0 * k;
    let (v1, v2) = match horizon {
        Horizon::At(t) => {
            if !(t.is_finite() && t >= 0.0) {
                return Err(NdpoError::Domain(format!(
                    "time must be finite and non-negative, got {t}"
                )));
            }
            let v1 = checked_exp(-sum * t, "v1")? + gamma * (-2.0 * r).exp() * relaxed_fraction(sum, t);
            let v2 = checked_exp(-diff * t, "v2")? + gamma * (2.0 * r).exp() * relaxed_fraction(diff, t);
            (Variance::Finite(v1), Variance::Finite(v2))
        }
        Horizon::Steady => {
            require_damping(gamma)?;
            let v1 = Variance::Finite(gamma / sum * (-2.0 * r).exp());
            let v2 = if params.regime().is_below() {
                Variance::Finite(gamma / diff * (2.0 * r).exp())
            } else {
                Variance::Divergent
            };
            (v1, v2)
        }
    };
    Ok(report(params, ModeKind::TwoMode, v1, v2))
}

/// Variances of â₁ and â₂ (identical for mode b by symmetry).
///
/// At time t they are a1 + a3 − 1 and a2 + a4 − 1 in terms of the Gaussian
/// widths; the steady state is e^{∓2r}/(1 − (2κγ₀/γ)²), divergent at and
/// above threshold.
pub fn variance_single_mode(params: &ModelParams, horizon: Horizon) -> Result<VarianceReport> {
    let gamma = params.symmetric_gamma()?;
    let (v1, v2) = match horizon {
        Horizon::At(t) => {
            let w = gaussian_widths(params, t)?;
            (
                Variance::Finite(w.a1 + w.a3 - 1.0),
                Variance::Finite(w.a2 + w.a4 - 1.0),
            )
        }
        Horizon::Steady => {
            require_damping(gamma)?;
            if params.regime().is_below() {
                let w = steady_widths(params)?;
                (
                    Variance::Finite(w.a1 + w.a3 - 1.0),
                    Variance::Finite(w.a2 + w.a4 - 1.0),
                )
            } else {
                (Variance::Divergent, Variance::Divergent)
            }
        }
    };
    Ok(report(params, ModeKind::SingleMode, v1, v2))
}

/// Reservoir squeezing r* above which the steady single-mode v1 drops below 1:
/// r* = −½ ln(1 − (2κγ₀/γ)²).
pub fn squeezing_onset_r(params: &ModelParams) -> Result<f64> {
    let gamma = params.symmetric_gamma()?;
    let regime = params.regime();
    if !regime.is_below() {
        return Err(NdpoError::NoFiniteValue(format!(
            "no squeezing onset {}: the steady single-mode variance diverges",
            regime.tag
        )));
    }
    let ratio = 2.0 * params.kappa_gamma0 / gamma;
    Ok(-0.5 * (-ratio * ratio).ln_1p())
}

/// Steady two-mode v1 at threshold for reservoir squeezing r: e^{−2r}/2.
pub fn threshold_v1(r: f64) -> f64 {
    0.5 * (-2.0 * r).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, k: f64, r: f64) -> ModelParams {
        ModelParams::symmetric(g, k, r).unwrap()
    }

    fn fin(v: Variance) -> f64 {
        v.finite().expect("finite variance")
    }

    #[test]
    fn two_mode_threshold_values() {
        let rep = variance_two_mode(&p(1.0, 0.5, 0.0), Horizon::Steady).unwrap();
        assert!((fin(rep.v1) - 0.5).abs() < 1e-15);
        assert!(rep.v2.is_divergent());
        let rep = variance_two_mode(&p(1.0, 0.5, 1.0), Horizon::Steady).unwrap();
        assert!((fin(rep.v1) - 0.067_667_641_618_306_35).abs() < 1e-15);
        assert!(!rep.warnings.is_empty());
    }

    #[test]
    fn two_mode_amplifier() {
        for t in [0.0, 0.3, 1.0, 4.0] {
            let rep = variance_two_mode(&p(0.0, 0.3, 0.7), Horizon::At(t)).unwrap();
            assert!((fin(rep.v1) - (-0.6 * t).exp()).abs() < 1e-14);
            assert!((fin(rep.v2) - (0.6 * t).exp()).abs() < 1e-12 * (0.6 * t).exp());
        }
    }

    #[test]
    fn two_mode_reservoir_only() {
        for r in [0.0, 0.25, 1.0, 2.0] {
            let rep = variance_two_mode(&p(1.0, 0.0, r), Horizon::Steady).unwrap();
            assert!((fin(rep.v1) - (-2.0 * r).exp()).abs() < 1e-14);
            assert!((fin(rep.v2) - (2.0 * r).exp()).abs() < 1e-12 * (2.0 * r).exp());
        }
    }

    #[test]
    fn two_mode_matches_widths() {
        for k in [0.0, 0.1, 0.2, 0.4, 0.45] {
            for r in [0.0, 0.25, 0.5, 1.0] {
                for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
                    let params = p(1.0, k, r);
                    let w = gaussian_widths(&params, t).unwrap();
                    let rep = variance_two_mode(&params, Horizon::At(t)).unwrap();
                    let (v1, v2) = (fin(rep.v1), fin(rep.v2));
                    assert!((v1 - (2.0 * w.a1 - 1.0)).abs() <= 1e-12 * v1);
                    assert!((v2 - (2.0 * w.a4 - 1.0)).abs() <= 1e-12 * v2);
                    assert!(v1 * v2 >= 1.0 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_mode_values() {
        let rep = variance_single_mode(&p(1.0, 0.25, 0.0), Horizon::Steady).unwrap();
        assert!((fin(rep.v1) - 4.0 / 3.0).abs() < 1e-14);
        assert!((fin(rep.v2) - 4.0 / 3.0).abs() < 1e-14);
        for r in [0.0, 0.5, 1.5] {
            let rep = variance_single_mode(&p(1.0, 0.0, r), Horizon::Steady).unwrap();
            assert!((fin(rep.v1) - (-2.0 * r).exp()).abs() < 1e-14);
            assert!((fin(rep.v2) - (2.0 * r).exp()).abs() < 1e-12 * (2.0 * r).exp());
        }
        for t in [0.0, 0.5, 2.0] {
            let rep = variance_single_mode(&p(0.0, 0.4, 0.3), Horizon::At(t)).unwrap();
            let want = 2.0 * (0.4 * t).sinh().powi(2) + 1.0;
            assert!((fin(rep.v1) - want).abs() < 1e-12 * want);
            assert!((fin(rep.v2) - want).abs() < 1e-12 * want);
        }
        let rep = variance_single_mode(&p(1.0, 0.5, 0.5), Horizon::Steady).unwrap();
        assert!(rep.v1.is_divergent() && rep.v2.is_divergent());
    }

    #[test]
    fn single_mode_steady_closed_form() {
        for k in [0.0, 0.1, 0.3, 0.45] {
            for r in [0.0, 0.5, 1.0] {
                let rep = variance_single_mode(&p(1.0, k, r), Horizon::Steady).unwrap();
                let den = 1.0 - (2.0 * k).powi(2);
                assert!((fin(rep.v1) - (-2.0 * r).exp() / den).abs() < 1e-13);
                assert!((fin(rep.v2) - (2.0 * r).exp() / den).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn onset() {
        assert_eq!(squeezing_onset_r(&p(1.0, 0.0, 0.0)).unwrap(), 0.0);
        let rs = squeezing_onset_r(&p(1.0, 0.25, 0.0)).unwrap();
        assert!((rs - 0.143_841_036_225_890_45).abs() < 1e-15);
        let at = variance_single_mode(&p(1.0, 0.25, rs), Horizon::Steady).unwrap();
        assert!((fin(at.v1) - 1.0).abs() < 1e-14);
        assert!(squeezing_onset_r(&p(1.0, 0.5, 0.0)).is_err());
    }

    #[test]
    fn steady_needs_damping() {
        assert!(matches!(
            variance_two_mode(&p(0.0, 0.3, 0.0), Horizon::Steady),
            Err(NdpoError::Domain(_))
        ));
        assert!(variance_single_mode(&p(0.0, 0.0, 0.0), Horizon::Steady).is_err());
    }

    #[test]
    fn asymmetric_rejected() {
        let params = ModelParams::new(1.0, 2.0, 0.1, 0.0).unwrap();
        assert!(matches!(
            variance_two_mode(&params, Horizon::At(1.0)),
            Err(NdpoError::Unsupported(_))
        ));
        assert!(variance_single_mode(&params, Horizon::Steady).is_err());
        assert!(squeezing_onset_r(&params).is_err());
    }

    #[test]
    fn overflow_directs_to_steady() {
        let err = variance_two_mode(&p(1.0, 1.0, 0.0), Horizon::At(1e5)).unwrap_err();
        assert!(err.to_string().contains("steady"));
    }

    #[test]
    fn factorization_of_steady_v1() {
        for k in [0.1, 0.3] {
            for r in [0.2, 0.9] {
                let full = fin(variance_two_mode(&p(1.0, k, r), Horizon::Steady).unwrap().v1);
                let no_res = fin(variance_two_mode(&p(1.0, k, 0.0), Horizon::Steady).unwrap().v1);
                let no_pump = fin(variance_two_mode(&p(1.0, 0.0, r), Horizon::Steady).unwrap().v1);
                assert!((full - no_res * no_pump).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn r_zero_v1_monotone() {
        let params = p(1.0, 0.3, 0.0);
        let mut prev = 1.0;
        for i in 1..200 {
            let v = fin(variance_two_mode(&params, Horizon::At(i as f64 * 0.05)).unwrap().v1);
            assert!(v < prev);
            prev = v;
        }
        assert!((prev - 1.0 / 1.6).abs() < 1e-3);
    }
}
