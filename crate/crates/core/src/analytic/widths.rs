use serde::{Deserialize, Serialize};

use crate::error::{NdpoError, Result};
use crate::params::{LambdaCoeffs, ModelParams};

/// Below this value of |λ|·t the ratio forms are replaced by their series.
pub const SERIES_CUTOFF: f64 = 1e-8;

/// Largest exponent evaluated before the time-dependent path gives up.
pub const MAX_EXPONENT: f64 = 700.0;

/// Widths of the Gaussian Q-function in the rotated coordinates (x, y, u, v):
/// Q ∝ exp(−2x²/a1 − 2y²/a2 − 2u²/a3 − 2v²/a4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWidths {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl GaussianWidths {
    pub const VACUUM: GaussianWidths = GaussianWidths {
        a1: 1.0,
        a2: 1.0,
        a3: 1.0,
        a4: 1.0,
    };

    pub fn as_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }
}

/// (1 − e^{−μt})/μ, finite as μ → 0.
pub(crate) fn relaxed_fraction(mu: f64, t: f64) -> f64 {
    let z = mu * t;
    if z.abs() < SERIES_CUTOFF {
        t * (1.0 - z / 2.0 + z * z / 6.0)
    } else {
        -(-z).exp_m1() / mu
    }
}

pub(crate) fn checked_exp(z: f64, what: &str) -> Result<f64> {
    if z > MAX_EXPONENT {
        Err(NdpoError::Domain(format!(
            "exp({z:.1}) in {what} overflows; request the steady state instead"
        )))
    } else {
        Ok(z.exp())
    }
}

/// Widths at time `t` for an initial two-mode vacuum.
pub fn gaussian_widths(params: &ModelParams, t: f64) -> Result<GaussianWidths> {
    let l = params.lambdas()?;
    widths_from_lambdas(&l, t)
}

pub(crate) fn widths_from_lambdas(l: &LambdaCoeffs, t: f64) -> Result<GaussianWidths> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(NdpoError::Domain(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    // a_{1,2} = (λ/λ5)(1 − e^{−λ5 t}) + e^{−λ5 t}
    let f5 = relaxed_fraction(l.l5, t);
    let e5 = checked_exp(-l.l5 * t, "a1/a2")?;
    // a_{3,4} = (λ/λ6)(1 − e^{λ6 t}) + e^{λ6 t}
    let f6 = relaxed_fraction(-l.l6, t);
    let e6 = checked_exp(l.l6 * t, "a3/a4")?;
    Ok(GaussianWidths {
        a1: l.l1 * f5 + e5,
        a2: l.l2 * f5 + e5,
        a3: -l.l3 * f6 + e6,
        a4: -l.l4 * f6 + e6,
    })
}

/// t → ∞ limits λ1/λ5, λ2/λ5, λ3/λ6, λ4/λ6; below threshold only.
pub fn steady_widths(params: &ModelParams) -> Result<GaussianWidths> {
    let regime = params.regime();
    if !regime.is_below() {
        return Err(NdpoError::NoFiniteValue(format!(
            "steady-state widths diverge {} (margin {:.3e})",
            regime.tag, regime.margin
        )));
    }
    let l = params.lambdas()?;
    Ok(GaussianWidths {
        a1: l.l1 / l.l5,
        a2: l.l2 / l.l5,
        a3: l.l3 / l.l6,
        a4: l.l4 / l.l6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, k: f64, r: f64) -> ModelParams {
        ModelParams::symmetric(g, k, r).unwrap()
    }

    #[test]
    fn vacuum_at_zero_time() {
        for params in [p(1.0, 0.2, 0.5), p(1.0, 0.45, 1.0), p(0.0, 0.3, 0.0), p(2.0, 3.0, 0.7)] {
            assert_eq!(gaussian_widths(&params, 0.0).unwrap(), GaussianWidths::VACUUM);
        }
    }

    #[test]
    fn pure_damping_keeps_vacuum() {
        for t in [0.1, 1.0, 7.0, 100.0] {
            let w = gaussian_widths(&p(1.0, 0.0, 0.0), t).unwrap();
            for a in w.as_array() {
                assert!((a - 1.0).abs() < 1e-14, "{w:?}");
            }
        }
    }

    #[test]
    fn ratio_form_matches() {
        // Direct transcription of the ratio form, away from its 0/0 points.
        let params = p(1.0, 0.2, 0.5);
        let l = params.lambdas().unwrap();
        let t = 3.0;
        let e5 = (l.l5 * t).exp();
        let e6 = (-l.l6 * t).exp();
        let want = [
            (l.l1 * (e5 - 1.0) + l.l5) / (l.l5 * e5),
            (l.l2 * (e5 - 1.0) + l.l5) / (l.l5 * e5),
            (l.l3 * (e6 - 1.0) + l.l6) / (l.l6 * e6),
            (l.l4 * (e6 - 1.0) + l.l6) / (l.l6 * e6),
        ];
        let got = gaussian_widths(&params, t).unwrap().as_array();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-13 * w.abs(), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn removable_singularity_at_threshold() {
        // λ6 = 0 exactly; the limit is a3 = 1 − λ3 t.
        let params = p(1.0, 0.5, 0.3);
        let l = params.lambdas().unwrap();
        assert_eq!(l.l6, 0.0);
        let w = gaussian_widths(&params, 2.0).unwrap();
        assert!((w.a3 - (1.0 - l.l3 * 2.0)).abs() < 1e-14);
        assert!((w.a4 - (1.0 - l.l4 * 2.0)).abs() < 1e-14);
        // Continuity across the series cutoff.
        let near = p(1.0, 0.5 - 1e-7, 0.3);
        let wn = gaussian_widths(&near, 2.0).unwrap();
        assert!((wn.a3 - w.a3).abs() < 1e-6);
    }

    #[test]
    fn positive_below_threshold() {
        for k in [0.0, 0.1, 0.2, 0.4, 0.45] {
            for r in [0.0, 0.25, 0.5, 1.0] {
                for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 200.0] {
                    let w = gaussian_widths(&p(1.0, k, r), t).unwrap();
                    assert!(w.as_array().iter().all(|a| a.is_finite() && *a > 0.0));
                }
            }
        }
    }

    #[test]
    fn long_times_approach_steady() {
        let params = p(1.0, 0.2, 0.5);
        let w = gaussian_widths(&params, 200.0).unwrap();
        let s = steady_widths(&params).unwrap();
        for (a, b) in w.as_array().iter().zip(s.as_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn overflow_is_refused_above_threshold() {
        let params = p(1.0, 1.0, 0.0);
        assert!(gaussian_widths(&params, 10.0).is_ok());
        assert!(matches!(gaussian_widths(&params, 1e4), Err(NdpoError::Domain(_))));
        assert!(steady_widths(&params).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        assert!(gaussian_widths(&p(1.0, 0.1, 0.0), -1.0).is_err());
        assert!(gaussian_widths(&p(1.0, 0.1, 0.0), f64::NAN).is_err());
    }
}
