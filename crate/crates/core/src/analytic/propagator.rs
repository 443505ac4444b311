//! Transition kernel of the Q-function Fokker–Planck equation in the rotated
//! coordinates (x, y, u, v).
//!
//! The kernel factorizes into four Ornstein–Uhlenbeck transition densities.
//! The x and y coordinates relax at rate λ5/2 with diffusion λ1/8 and λ2/8;
//! u and v relax at rate −λ6/2 with diffusion −λ3/8 and −λ4/8.

use std::f64::consts::PI;

use super::widths::{checked_exp, relaxed_fraction, SERIES_CUTOFF};
use crate::error::{NdpoError, Result};
use crate::params::{LambdaCoeffs, ModelParams};

/// One factor exp[−c (x' − x e^{s/2})²] with its normalization.
#[derive(Debug, Clone, Copy)]
struct Factor {
    /// 2λ_drift / (λ_diff (e^{s} − 1)), written without the 0/0 at λ_drift = 0.
    c: f64,
    /// Growth exponent s = λ5 t for (x, y) and −λ6 t for (u, v).
    s: f64,
}

impl Factor {
    fn new(lambda_diff: f64, lambda_drift: f64, t: f64, label: &str) -> Result<Self> {
        let s = lambda_drift * t;
        // (e^{s} − 1)/λ_drift = t · expm1(s)/s
        let growth = if s.abs() < SERIES_CUTOFF {
            t * (1.0 + s / 2.0 + s * s / 6.0)
        } else {
            s.exp_m1() / lambda_drift
        };
        let c = 2.0 / (lambda_diff * growth);
        if !(c.is_finite() && c > 0.0) {
            return Err(NdpoError::NotIntegrable(format!(
                "propagator factor {label} has coefficient {c}; the kernel is only a \
                 normalizable density when the diffusion along {label} is positive"
            )));
        }
        checked_exp(s, "propagator")?;
        Ok(Self { c, s })
    }

    fn eval(&self, to: f64, from: f64) -> f64 {
        let e_half = (0.5 * self.s).exp();
        let e = self.s.exp();
        let quad = from * from - 2.0 * to * e_half * from + to * to * e;
        // Normalized over the final coordinate: sqrt(c e^{s} / π).
        (self.c * e / PI).sqrt() * (-self.c * quad).exp()
    }
}

/// Evaluated kernel Q(to, t | from, 0) for fixed parameters and time.
#[derive(Debug, Clone, Copy)]
pub struct QPropagator {
    factors: [Factor; 4],
    pub t: f64,
}

impl QPropagator {
    pub fn new(params: &ModelParams, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(NdpoError::Domain(format!(
                "propagator needs t > 0 (the t = 0 kernel is a delta distribution), got {t}"
            )));
        }
        let l = params.lambdas()?;
        Self::from_lambdas(&l, t)
    }

    fn from_lambdas(l: &LambdaCoeffs, t: f64) -> Result<Self> {
        // For (u, v) the printed combination is −2λ6/(λ3 (e^{−λ6 t} − 1)), i.e.
        // drift −λ6 with diffusion λ3 in the same form as (x, y).
        Ok(Self {
            factors: [
                Factor::new(l.l1, l.l5, t, "x")?,
                Factor::new(l.l2, l.l5, t, "y")?,
                Factor::new(-l.l3, -l.l6, t, "u")?,
                Factor::new(-l.l4, -l.l6, t, "v")?,
            ],
            t,
        })
    }

    /// Kernel value; the prefactor equals
    /// |4λ5λ6 e^{(λ5−λ6)t} / (π² sqrt(λ1λ2λ3λ4) (e^{λ5t}−1)(e^{−λ6t}−1))|.
    pub fn eval(&self, to: [f64; 4], from: [f64; 4]) -> f64 {
        self.factors
            .iter()
            .zip(to.iter().zip(from.iter()))
            .map(|(f, (x, xp))| f.eval(*x, *xp))
            .product()
    }

    /// Mean of the final coordinates for a given start: x' e^{−λ5 t/2}, u' e^{λ6 t/2}.
    pub fn mean(&self, from: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = from[i] * (-0.5 * self.factors[i].s).exp();
        }
        out
    }

    /// Variance of each final coordinate around its mean.
    pub fn variances(&self) -> [f64; 4] {
        self.factors.map(|f| 0.5 / (f.c * f.s.exp()))
    }
}

pub fn q_propagator(params: &ModelParams, t: f64, from: [f64; 4], to: [f64; 4]) -> Result<f64> {
    Ok(QPropagator::new(params, t)?.eval(to, from))
}

/// Initial two-mode vacuum in rotated coordinates: (4/π²) exp[−2(x'²+y'²+u'²+v'²)].
/// The factor 4 is the Jacobian of (x1, x2, y1, y2) → (x, y, u, v).
pub fn vacuum_q_rotated(xyuv: [f64; 4]) -> f64 {
    let r2: f64 = xyuv.iter().map(|x| x * x).sum();
    4.0 / (PI * PI) * (-2.0 * r2).exp()
}

#[allow(dead_code)]
pub(crate) fn ou_variance(lambda_diff: f64, lambda_drift: f64, t: f64) -> f64 {
    lambda_diff * relaxed_fraction(lambda_drift, t) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, k: f64, r: f64) -> ModelParams {
        ModelParams::symmetric(g, k, r).unwrap()
    }

    #[test]
    fn printed_prefactor_in_magnitude() {
        let params = p(1.0, 0.2, 0.5);
        let l = params.lambdas().unwrap();
        let t = 1.3;
        let k = QPropagator::new(&params, t).unwrap();
        let zero = [0.0; 4];
        let printed = 4.0 * l.l5 * l.l6 * ((l.l5 - l.l6) * t).exp()
            / (PI * PI * (l.l1 * l.l2 * l.l3 * l.l4).sqrt()
                * ((l.l5 * t).exp() - 1.0)
                * ((-l.l6 * t).exp() - 1.0));
        assert!(printed < 0.0, "printed prefactor carries the sign of λ6");
        assert!((k.eval(zero, zero) - printed.abs()).abs() < 1e-13 * printed.abs());
    }

    #[test]
    fn printed_exponent() {
        let params = p(1.0, 0.3, 0.8);
        let l = params.lambdas().unwrap();
        let t = 0.7;
        let k = QPropagator::new(&params, t).unwrap();
        let to = [0.3, -0.2, 0.5, 0.1];
        let from = [-0.4, 0.6, 0.2, -0.3];
        let e5 = (l.l5 * t).exp();
        let e6 = (-l.l6 * t).exp();
        let q = |xp: f64, x: f64, e: f64| xp * xp - 2.0 * x * e.sqrt() * xp + x * x * e;
        let exponent = -2.0 * l.l5 / (e5 - 1.0)
            * (q(from[0], to[0], e5) / l.l1 + q(from[1], to[1], e5) / l.l2)
            - 2.0 * l.l6 / (e6 - 1.0)
                * (q(from[2], to[2], e6) / l.l3 + q(from[3], to[3], e6) / l.l4);
        let ratio = k.eval(to, from) / k.eval([0.0; 4], [0.0; 4]);
        assert!((ratio.ln() - exponent).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_on_samples() {
        for (g, kk, r) in [(1.0, 0.0, 0.0), (1.0, 0.2, 0.5), (1.0, 0.45, 1.0), (2.0, 0.1, 0.25)] {
            let k = QPropagator::new(&p(g, kk, r), 0.9).unwrap();
            for i in 0..50 {
                let s = i as f64 * 0.37;
                let to = [s.sin(), (1.3 * s).cos(), 0.5 * s.sin(), -(0.7 * s).cos()];
                let from = [(2.1 * s).cos(), 0.2 * s.sin(), -s.cos(), (0.4 * s).sin()];
                let v = k.eval(to, from);
                assert!(v >= 0.0 && v.is_finite());
            }
        }
    }

    #[test]
    fn variances_are_ou_variances() {
        let params = p(1.0, 0.2, 0.5);
        let l = params.lambdas().unwrap();
        let t = 2.0;
        let k = QPropagator::new(&params, t).unwrap();
        let v = k.variances();
        let want = [
            ou_variance(l.l1, l.l5, t),
            ou_variance(l.l2, l.l5, t),
            ou_variance(-l.l3, -l.l6, t),
            ou_variance(-l.l4, -l.l6, t),
        ];
        for i in 0..4 {
            assert!((v[i] - want[i]).abs() < 1e-14, "{v:?} {want:?}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(q_propagator(&p(1.0, 0.2, 0.5), 0.0, [0.0; 4], [0.0; 4]), Err(NdpoError::Domain(_))));
        assert!(q_propagator(&p(1.0, 0.2, 0.5), -1.0, [0.0; 4], [0.0; 4]).is_err());
        // Undamped amplifier: anti-diffusion along u, v.
        assert!(matches!(
            q_propagator(&p(0.0, 0.3, 0.0), 1.0, [0.0; 4], [0.0; 4]),
            Err(NdpoError::NotIntegrable(_))
        ));
    }
}
