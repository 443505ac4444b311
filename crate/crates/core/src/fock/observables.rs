use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::DEFAULT_TAIL_TOLERANCE;
use super::density::DensityMatrix;
use super::liouvillian::TwoModeOps;
use super::ops::SparseOp;
use crate::analytic::{ModeKind, Source, Variance, VarianceReport};
use crate::error::{NdpoError, Result};

/// Largest tolerated coherent-state norm lost to truncation.
pub const COHERENT_TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    /// â₁ = â + â†, â₂ = i(â† − â).
    SingleModeA,
    /// b̂₁, b̂₂ defined like â₁, â₂.
    SingleModeB,
    /// ĉ₁,₂ = (â₁,₂ + b̂₁,₂)/√2.
    TwoModeC,
}

/// Quadrature pair of one ladder operator x: X = x + x†, P = i(x† − x) = iY.
pub(crate) struct QuadPair {
    x: SparseOp,
    x2: SparseOp,
    y: SparseOp,
    y2: SparseOp,
}

impl QuadPair {
    pub(crate) fn new(lower: &SparseOp) -> Self {
        let raise = lower.transpose();
        let x = lower.plus(&raise);
        let y = raise.minus(lower);
        Self {
            x2: x.matmul(&x),
            y2: y.matmul(&y),
            x,
            y,
        }
    }

    pub(crate) fn variances<T>(&self, rho: &[T]) -> (f64, f64)
    where
        T: super::ops::Scalar + Into<Complex64>,
    {
        let xm: Complex64 = self.x.expect(rho).into();
        let x2: Complex64 = self.x2.expect(rho).into();
        let pm = Complex64::i() * self.y.expect(rho).into();
        let p2 = -self.y2.expect(rho).into();
        ((x2 - xm * xm).re, (p2 - pm * pm).re)
    }
}

fn quad_pair(rho: &DensityMatrix, which: Quadrature) -> QuadPair {
    let ops = TwoModeOps::new(rho.n_cut());
    let lower = match which {
        Quadrature::SingleModeA => ops.a,
        Quadrature::SingleModeB => ops.b,
        Quadrature::TwoModeC => ops.a.plus(&ops.b).scale(FRAC_1_SQRT_2),
    };
    QuadPair::new(&lower)
}

/// ⟨Q₁²⟩ − ⟨Q₁⟩² and ⟨Q₂²⟩ − ⟨Q₂⟩² with vacuum = 1. A warning is attached when
/// the top Fock layer holds more than the default tail tolerance.
pub fn quadrature_variance(rho: &DensityMatrix, which: Quadrature) -> VarianceReport {
    let (v1, v2) = quad_pair(rho, which).variances(rho.as_slice());
    let tail = rho.top_layer_population();
    let mut warnings = Vec::new();
    if tail > DEFAULT_TAIL_TOLERANCE {
        warnings.push(format!(
            "top-layer population {tail:.2e} exceeds {DEFAULT_TAIL_TOLERANCE:.0e}; raise n_cut"
        ));
    }
    VarianceReport {
        v1: Variance::Finite(v1),
        v2: Variance::Finite(v2),
        mode_kind: match which {
            Quadrature::TwoModeC => ModeKind::TwoMode,
            _ => ModeKind::SingleMode,
        },
        regime: None,
        source: Source::Numeric,
        warnings,
    }
}

/// (⟨a†a⟩, ⟨b†b⟩).
pub fn mean_photon(rho: &DensityMatrix) -> (f64, f64) {
    let n = rho.n_cut();
    let d = rho.dim();
    let (mut na, mut nb) = (0.0, 0.0);
    for i in 0..d {
        let p = rho.as_slice()[i + d * i].re;
        na += (i / n) as f64 * p;
        nb += (i % n) as f64 * p;
    }
    (na, nb)
}

/// Norm of a coherent state lost above level n_cut − 1.
pub fn coherent_tail(norm_sqr: f64, n_cut: usize) -> f64 {
    if norm_sqr == 0.0 {
        return 0.0;
    }
    // Sum the Poisson tail directly; 1 − head would cancel catastrophically.
    let mut log_p = -norm_sqr + n_cut as f64 * norm_sqr.ln() - ln_factorial(n_cut);
    let mut tail = 0.0;
    let mut k = n_cut;
    loop {
        let p = log_p.exp();
        tail += p;
        k += 1;
        log_p += norm_sqr.ln() - (k as f64).ln();
        if (p < 1e-17 * tail.max(1e-300) && k as f64 > norm_sqr) || k > n_cut + 100_000 {
            break;
        }
    }
    tail
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Smallest cutoff whose coherent-state truncation loss is within tolerance.
pub fn required_cutoff(norm_sqr: f64) -> usize {
    let mut n = 2;
    while coherent_tail(norm_sqr, n) > COHERENT_TAIL_TOLERANCE {
        n += 1;
    }
    n
}

/// Truncated coherent state e^{−|α|²/2} Σ αⁿ/√n! |n⟩, n < n_cut.
pub fn coherent_state(n_cut: usize, alpha: Complex64, which: &'static str) -> Result<Vec<Complex64>> {
    let ns = alpha.norm_sqr();
    if coherent_tail(ns, n_cut) > COHERENT_TAIL_TOLERANCE {
        return Err(NdpoError::AmplitudeTooLarge {
            which,
            norm_sqr: ns,
            n_cut,
            required: required_cutoff(ns),
        });
    }
    let mut out = Vec::with_capacity(n_cut);
    let mut c = Complex64::new((-0.5 * ns).exp(), 0.0);
    for k in 0..n_cut {
        out.push(c);
        c = c * alpha / ((k + 1) as f64).sqrt();
    }
    Ok(out)
}

/// Q(α, β) = ⟨α, β|ρ|α, β⟩ / π².
pub fn husimi(rho: &DensityMatrix, alpha: Complex64, beta: Complex64) -> Result<f64> {
    let n = rho.n_cut();
    let ca = coherent_state(n, alpha, "alpha")?;
    let cb = coherent_state(n, beta, "beta")?;
    let d = rho.dim();
    let psi: Vec<Complex64> = (0..d).map(|i| ca[i / n] * cb[i % n]).collect();
    let data = rho.as_slice();
    let mut acc = Complex64::default();
    for j in 0..d {
        let mut col = Complex64::default();
        for i in 0..d {
            col += psi[i].conj() * data[i + d * j];
        }
        acc += col * psi[j];
    }
    Ok(acc.re / (PI * PI))
}

/// Single-mode Q(α) = ⟨α|ρ|α⟩ / π for an n × n density matrix.
pub fn husimi_single(rho: &DMatrix<Complex64>, alpha: Complex64) -> Result<f64> {
    let n = rho.nrows();
    let c = coherent_state(n, alpha, "alpha")?;
    let mut acc = Complex64::default();
    for j in 0..n {
        for i in 0..n {
            acc += c[i].conj() * rho[(i, j)] * c[j];
        }
    }
    Ok(acc.re / PI)
}
