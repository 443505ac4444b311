use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{hermitize_slice, DensityMatrix};
use super::integrate::{integrate, StepControl, StepStats};
use super::liouvillian::Liouvillian;
use super::observables::{mean_photon, quadrature_variance, Quadrature};
use crate::error::{NdpoError, Result};
use crate::params::ModelParams;

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => Err(NdpoError::Domain("time grid is empty".into())),
        Some(&t0) if !(t0 >= 0.0) => Err(NdpoError::Domain(format!(
            "time grid must start at t >= 0, got {t0}"
        ))),
        _ => Ok(()),
    }
}

/// Evolves `rho0` from t = 0 and calls `visit` with the state at each grid time.
/// Hermiticity is restored after every accepted step.
pub fn evolve_visit<V>(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    mut visit: V,
) -> Result<StepStats>
where
    V: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    check_grid(t_grid)?;
    if rho0.n_cut() != l.cfg.n_cut {
        return Err(NdpoError::Config(format!(
            "state has n_cut = {}, generator has {}",
            rho0.n_cut(),
            l.cfg.n_cut
        )));
    }
    let d = l.hilbert_dim();
    let n_cut = l.cfg.n_cut;
    let control = StepControl {
        rtol: l.cfg.rtol,
        atol: l.cfg.atol,
        ..StepControl::default()
    };
    // Integration always starts at t = 0.
    let mut grid = Vec::with_capacity(t_grid.len() + 1);
    let shifted = t_grid[0] > 0.0;
    if shifted {
        grid.push(0.0);
    }
    grid.extend_from_slice(t_grid);
    if rho0.as_slice().iter().all(|z| z.im == 0.0) {
        // The generator is real, so a real initial state stays real.
        let y0: Vec<f64> = rho0.as_slice().iter().map(|z| z.re).collect();
        return integrate(
            |y: &[f64], dy: &mut [f64]| l.apply(y, dy),
            y0,
            &grid,
            &control,
            |y| symmetrize_real(d, y),
            |i, t, y| {
                if shifted && i == 0 {
                    return Ok(());
                }
                let data = y.iter().map(|v| Complex64::new(*v, 0.0)).collect();
                visit(t, &DensityMatrix::from_vec(n_cut, data)?)
            },
        );
    }
    integrate(
        |y: &[Complex64], dy: &mut [Complex64]| l.apply(y, dy),
        rho0.as_slice().to_vec(),
        &grid,
        &control,
        |y| hermitize_slice(d, y),
        |i, t, y| {
            if shifted && i == 0 {
                return Ok(());
            }
            visit(t, &DensityMatrix::from_vec(n_cut, y.to_vec())?)
        },
    )
}

fn symmetrize_real(d: usize, y: &mut [f64]) {
    for j in 0..d {
        for i in 0..j {
            let avg = 0.5 * (y[i + d * j] + y[j + d * i]);
            y[i + d * j] = avg;
            y[j + d * i] = avg;
        }
    }
}

pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(t_grid.len());
    evolve_visit(l, rho0, t_grid, |_, rho| {
        out.push(rho.clone());
        Ok(())
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub trace_err: f64,
    pub tail_pop: f64,
}

impl TrajectoryPoint {
    pub fn from_state(t: f64, rho: &DensityMatrix) -> Self {
        let v = quadrature_variance(rho, Quadrature::TwoModeC);
        let (n_a, n_b) = mean_photon(rho);
        Self {
            t,
            v1: v.v1.finite().unwrap_or(f64::NAN),
            v2: v.v2.finite().unwrap_or(f64::NAN),
            n_a,
            n_b,
            trace_err: (rho.trace() - 1.0).norm(),
            tail_pop: rho.top_layer_population(),
        }
    }
}

/// Two-mode variances and diagnostics along an evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub n_cut: usize,
    pub points: Vec<TrajectoryPoint>,
}

pub const TRAJECTORY_COLUMNS: [&str; 7] = ["t", "v1", "v2", "n_a", "n_b", "trace_err", "tail_pop"];

impl Trajectory {
    pub fn max_tail(&self) -> f64 {
        self.points.iter().map(|p| p.tail_pop).fold(0.0, f64::max)
    }

    /// CSV with a `#` header comment, then the columns of [`TRAJECTORY_COLUMNS`].
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# ndpo {} gamma_a={} gamma_b={} kappa_gamma0={} r={} n_cut={}",
            crate::VERSION,
            self.params.gamma_a,
            self.params.gamma_b,
            self.params.kappa_gamma0,
            self.params.r,
            self.n_cut
        )?;
        writeln!(w, "{}", TRAJECTORY_COLUMNS.join(","))?;
        for p in &self.points {
            let row = [p.t, p.v1, p.v2, p.n_a, p.n_b, p.trace_err, p.tail_pop];
            let cells: Vec<String> = row.iter().map(|x| format_sig12(*x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trajectory(l: &Liouvillian, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Trajectory> {
    let mut points = Vec::with_capacity(t_grid.len());
    evolve_visit(l, rho0, t_grid, |t, rho| {
        points.push(TrajectoryPoint::from_state(t, rho));
        Ok(())
    })?;
    Ok(Trajectory {
        params: l.params,
        n_cut: l.cfg.n_cut,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::config::FockConfig;
    use crate::fock::liouvillian::build_liouvillian;

    #[test]
    fn damping_keeps_vacuum() {
        let p = ModelParams::symmetric(1.0, 0.0, 0.0).unwrap();
        let l = build_liouvillian(&p, &FockConfig::new(4).unwrap()).unwrap();
        let states = evolve(&l, &DensityMatrix::vacuum(4), &[0.0, 1.0, 5.0]).unwrap();
        assert_eq!(states.len(), 3);
        for s in states {
            assert!((s.get(0, 0).re - 1.0).abs() < 1e-14);
            assert!((s.trace() - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn real_and_complex_paths_agree() {
        let p = ModelParams::symmetric(1.0, 0.2, 0.3).unwrap();
        let l = build_liouvillian(&p, &FockConfig::new(4).unwrap()).unwrap();
        let real = evolve(&l, &DensityMatrix::vacuum(4), &[0.0, 0.7]).unwrap();
        // A vanishing imaginary part on an off-diagonal pair forces the complex path.
        let mut data = DensityMatrix::vacuum(4).into_vec();
        data[1] = Complex64::new(0.0, 1e-300);
        data[16] = Complex64::new(0.0, -1e-300);
        let rho0 = DensityMatrix::from_vec(4, data).unwrap();
        let cplx = evolve(&l, &rho0, &[0.0, 0.7]).unwrap();
        for (a, b) in real[1].as_slice().iter().zip(cplx[1].as_slice()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn csv_layout() {
        let p = ModelParams::symmetric(1.0, 0.1, 0.0).unwrap();
        let l = build_liouvillian(&p, &FockConfig::new(4).unwrap()).unwrap();
        let tr = trajectory(&l, &DensityMatrix::vacuum(4), &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# ndpo "));
        assert_eq!(lines[1], "t,v1,v2,n_a,n_b,trace_err,tail_pop");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0.00000000000e0,1.00000000000e0"));
    }

    #[test]
    fn grid_must_start_nonnegative() {
        let p = ModelParams::symmetric(1.0, 0.1, 0.0).unwrap();
        let l = build_liouvillian(&p, &FockConfig::new(3).unwrap()).unwrap();
        assert!(evolve(&l, &DensityMatrix::vacuum(3), &[-1.0, 0.0]).is_err());
        assert!(evolve(&l, &DensityMatrix::vacuum(3), &[]).is_err());
        assert!(evolve(&l, &DensityMatrix::vacuum(4), &[0.0]).is_err());
        assert_eq!(evolve(&l, &DensityMatrix::vacuum(3), &[0.5, 1.0]).unwrap().len(), 2);
    }
}
