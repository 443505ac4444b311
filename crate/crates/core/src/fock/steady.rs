use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::evolve::evolve;
use super::liouvillian::Liouvillian;
use crate::error::{NdpoError, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Required relative residual, see [`relative_residual`].
    pub tolerance: f64,
    /// Allow long-time integration when the linear solve does not converge.
    pub fallback: bool,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            restart: 60,
            max_iterations: 20_000,
            tolerance: 1e-10,
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SteadyMethod {
    Gmres,
    LongTime,
}

#[derive(Debug, Clone)]
pub struct SteadyReport {
    pub rho: DensityMatrix,
    pub residual: f64,
    pub method: SteadyMethod,
    pub iterations: usize,
}

pub(crate) fn check_steady_regime(params: &ModelParams) -> Result<()> {
    let regime = params.regime();
    if !regime.is_below() {
        return Err(NdpoError::SteadyState(format!(
            "no normalizable stationary state {} (margin {:.3e})",
            regime.tag, regime.margin
        )));
    }
    if params.gamma_a <= 0.0 || params.gamma_b <= 0.0 {
        return Err(NdpoError::SteadyState(
            "both modes need damping for a unique stationary state".into(),
        ));
    }
    Ok(())
}

/// ‖Lρ‖₂ / (‖ρ‖₂ · max|L_ii|).
pub fn relative_residual(l: &Liouvillian, rho: &[f64]) -> f64 {
    let mut out = vec![0.0; rho.len()];
    l.apply(rho, &mut out);
    let scale = l.matrix().diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    norm(&out) / (norm(rho) * scale.max(f64::MIN_POSITIVE))
}

pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    Ok(steady_state_with(l, &SteadyOptions::default())?.rho)
}

/// Solves Lρ = 0 with the row of ρ_00 replaced by the trace condition.
pub fn steady_state_with(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyReport> {
    check_steady_regime(&l.params)?;
    let n = l.dim();
    let d = l.hilbert_dim();
    // The generator is real and so is its stationary state.
    let apply = |x: &[f64], y: &mut [f64]| {
        l.apply(x, y);
        y[0] = (0..d).map(|i| x[i + d * i]).sum();
    };
    let mut diag = l.matrix().diagonal();
    diag[0] = 1.0;
    let minv: Vec<f64> = diag
        .iter()
        .map(|&v| if v.abs() > 1e-300 { 1.0 / v } else { 1.0 })
        .collect();
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    let (iterations, _) = gmres(&apply, &minv, &b, &mut x, opts.restart, opts.max_iterations, 1e-3 * opts.tolerance);
    let residual = relative_residual(l, &x);
    log::debug!("gmres: {iterations} iterations, residual {residual:.3e}");
    if residual <= opts.tolerance {
        return Ok(SteadyReport {
            rho: to_density(l, &x)?,
            residual,
            method: SteadyMethod::Gmres,
            iterations,
        });
    }
    if !opts.fallback {
        return Err(NdpoError::SteadyState(format!(
            "linear solve stalled at residual {residual:.3e} after {iterations} iterations"
        )));
    }
    log::warn!("gmres stalled at {residual:.3e}; integrating to long times");
    long_time(l, opts, iterations)
}

fn long_time(l: &Liouvillian, opts: &SteadyOptions, iterations: usize) -> Result<SteadyReport> {
    let p = &l.params;
    let slowest = p.regime().margin.min(p.gamma_a).min(p.gamma_b);
    let mut t = 40.0 / slowest;
    let mut rho = DensityMatrix::vacuum(l.cfg.n_cut);
    for _ in 0..4 {
        rho = evolve(l, &rho, &[0.0, t])?.pop().expect("two grid points");
        let re: Vec<f64> = rho.as_slice().iter().map(|z| z.re).collect();
        let residual = relative_residual(l, &re);
        if residual <= opts.tolerance {
            return Ok(SteadyReport {
                rho,
                residual,
                method: SteadyMethod::LongTime,
                iterations,
            });
        }
        t *= 2.0;
    }
    Err(NdpoError::SteadyState(
        "neither the linear solve nor long-time integration reached the residual target".into(),
    ))
}

fn to_density(l: &Liouvillian, x: &[f64]) -> Result<DensityMatrix> {
    let d = l.hilbert_dim();
    let tr: f64 = (0..d).map(|i| x[i + d * i]).sum();
    let mut rho = DensityMatrix::from_vec(
        l.cfg.n_cut,
        x.iter().map(|v| Complex64::new(v / tr, 0.0)).collect(),
    )?;
    rho.hermitize();
    Ok(rho)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES with right preconditioning by `minv` (a diagonal inverse).
/// Returns iterations used and the final estimated relative residual.
pub(crate) fn gmres<A>(
    apply: &A,
    minv: &[f64],
    b: &[f64],
    x: &mut [f64],
    restart: usize,
    max_iterations: usize,
    tol: f64,
) -> (usize, f64)
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    let mut rel = f64::INFINITY;
    while total < max_iterations {
        apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            break;
        }
        let m = restart.min(max_iterations - total);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        for j in 0..m {
            for i in 0..n {
                z[i] = minv[i] * v[j][i];
            }
            apply(&z, &mut w);
            for i in 0..=j {
                let hij = dot(&w, &v[i]);
                h[i][j] = hij;
                for (wl, vl) in w.iter_mut().zip(&v[i]) {
                    *wl -= hij * vl;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let den = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / den;
            sn[j] = h[j + 1][j] / den;
            h[j][j] = den;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k = j + 1;
            total += 1;
            rel = g[j + 1].abs() / bnorm;
            if rel <= tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= h[i][l] * y[l];
            }
            y[i] = s / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for l in 0..n {
                x[l] += minv[l] * yi * v[i][l];
            }
        }
        if rel <= tol {
            break;
        }
    }
    (total, rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::config::FockConfig;
    use crate::fock::liouvillian::build_liouvillian;

    #[test]
    fn gmres_small_system() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, 2.0, 5.0]];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..3 {
                y[i] = (0..3).map(|j| a[i][j] * x[j]).sum();
            }
        };
        let b = [1.0, 2.0, 3.0];
        let mut x = vec![0.0; 3];
        let (_, rel) = gmres(&apply, &[0.25, 1.0 / 3.0, 0.2], &b, &mut x, 2, 100, 1e-14);
        assert!(rel < 1e-13);
        let mut ax = vec![0.0; 3];
        apply(&x, &mut ax);
        for i in 0..3 {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_damping_gives_vacuum() {
        let p = ModelParams::symmetric(1.0, 0.0, 0.0).unwrap();
        let l = build_liouvillian(&p, &FockConfig::new(5).unwrap()).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn refuses_threshold_and_undamped() {
        let cfg = FockConfig::new(4).unwrap();
        for p in [
            ModelParams::symmetric(1.0, 0.5, 0.0).unwrap(),
            ModelParams::symmetric(1.0, 0.7, 0.0).unwrap(),
            ModelParams::symmetric(0.0, 0.0, 0.0).unwrap(),
        ] {
            let l = build_liouvillian(&p, &cfg).unwrap();
            assert!(matches!(steady_state(&l), Err(NdpoError::SteadyState(_))));
        }
    }
}
