//! Exact factorization for equal damping rates.
//!
//! With c = (a + b)/√2 and d = (a − b)/√2 the two-mode generator splits into
//! independent single-mode generators. Each sees the same squeezed bath, and
//! the pump becomes ±(κγ₀/2)[x² − x†², ρ] with opposite signs on c and d. Since
//! ĉ₁ = c + c† and ĉ₂ = i(c† − c), the two-mode variances are single-mode
//! variances of c, which lets the cutoff grow to a few hundred levels.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::BandedMatrix;
use super::config::{PumpConvention, DEFAULT_TAIL_TOLERANCE};
use super::integrate::{integrate, StepControl};
use super::liouvillian::squeezed_bath_terms;
use super::observables::{husimi_single, QuadPair};
use super::ops::{commutator_terms, superoperator, CsrMatrix, SparseOp};
use super::steady::check_steady_regime;
use crate::error::{NdpoError, Result};
use crate::params::ModelParams;

/// Generator of one normal mode on column-stacked n × n matrices.
#[derive(Debug, Clone)]
pub struct ModeGenerator {
    n_cut: usize,
    matrix: CsrMatrix,
}

impl ModeGenerator {
    /// γ D[cosh r·x + sinh r·x†] plus pump·[x² − x†², ρ].
    pub fn new(gamma: f64, r: f64, pump: f64, n_cut: usize) -> Result<Self> {
        if n_cut < 2 {
            return Err(NdpoError::Config(format!("n_cut = {n_cut} < 2")));
        }
        let res = crate::params::reservoir_stats(r)?;
        let x = SparseOp::destroy(n_cut);
        let xd = x.transpose();
        let sq = x.matmul(&x).minus(&xd.matmul(&xd));
        let mut terms = commutator_terms(pump, &sq);
        terms.extend(squeezed_bath_terms(gamma, res.n, res.m, &x));
        Ok(Self {
            n_cut,
            matrix: superoperator(n_cut, &terms),
        })
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Stationary state on the sector n − m even, with ρ_00 pinned and the
    /// result normalized afterwards. The pinned system stays banded, which a
    /// dense trace row would not.
    pub fn steady_state(&self) -> Result<ModeState> {
        let n = self.n_cut;
        let sector = EvenSector::new(n);
        let mut entries = Vec::new();
        for (row, &full) in sector.cells.iter().enumerate() {
            for (col, v) in self.matrix.row(full) {
                entries.push((row, sector.local(col)?, v));
            }
        }
        let mut banded = BandedMatrix::from_entries(sector.cells.len(), &entries);
        let pin = sector.index[0];
        banded.set_unit_row(pin);
        let mut x = vec![0.0; sector.cells.len()];
        x[pin] = 1.0;
        banded.solve(&mut x)?;
        let mut rho = sector.expand(&x);
        let tr: f64 = (0..n).map(|i| rho[i + n * i]).sum();
        for v in &mut rho {
            *v /= tr;
        }
        let state = ModeState { n_cut: n, rho };
        let residual = self.relative_residual(&state.rho);
        if !(residual <= 1e-10) {
            return Err(NdpoError::SteadyState(format!(
                "banded solve residual {residual:.3e} above 1e-10 at n_cut = {n}"
            )));
        }
        Ok(state)
    }

    pub fn relative_residual(&self, rho: &[f64]) -> f64 {
        let mut out = vec![0.0; rho.len()];
        self.matrix.matvec(rho, &mut out);
        let scale = self.matrix.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let nr = rho.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.iter().map(|v| v * v).sum::<f64>().sqrt() / (nr * scale.max(f64::MIN_POSITIVE))
    }

    /// States at each grid time, starting from the vacuum at t = 0. Only the
    /// even sector is integrated since the vacuum never leaves it.
    pub fn evolve(&self, t_grid: &[f64], control: &StepControl) -> Result<Vec<ModeState>> {
        let n = self.n_cut;
        let sector = EvenSector::new(n);
        for &full in &sector.cells {
            for (col, _) in self.matrix.row(full) {
                sector.local(col)?;
            }
        }
        let matrix = CsrMatrix::from_row_fn(sector.cells.len(), |row, buf| {
            for (col, v) in self.matrix.row(sector.cells[row]) {
                buf.push((sector.index[col], v));
            }
        });
        let partner: Vec<usize> = sector
            .cells
            .iter()
            .map(|&full| sector.index[(full / n) + n * (full % n)])
            .collect();
        let mut y0 = vec![0.0; sector.cells.len()];
        y0[sector.index[0]] = 1.0;
        let mut grid = vec![0.0];
        grid.extend(t_grid.iter().copied().filter(|&t| t > 0.0));
        let keep_zero = t_grid.first() == Some(&0.0);
        let mut out = Vec::with_capacity(t_grid.len());
        integrate(
            |y: &[f64], dy: &mut [f64]| matrix.matvec(y, dy),
            y0,
            &grid,
            control,
            |y| {
                for (k, &j) in partner.iter().enumerate() {
                    if j > k {
                        let avg = 0.5 * (y[k] + y[j]);
                        y[k] = avg;
                        y[j] = avg;
                    }
                }
            },
            |k, _, y| {
                if k > 0 || keep_zero {
                    out.push(ModeState {
                        n_cut: n,
                        rho: sector.expand(y),
                    });
                }
                Ok(())
            },
        )?;
        Ok(out)
    }
}

/// Matrix cells (i, j) with i + j even, ordered by p = (i + j)/2 and then i,
/// so that couplings (p ± 1, q ± 1) stay within a narrow band.
struct EvenSector {
    cells: Vec<usize>,
    /// Full column-stacked index to position in `cells`; usize::MAX when odd.
    index: Vec<usize>,
}

impl EvenSector {
    fn new(n: usize) -> Self {
        let mut index = vec![usize::MAX; n * n];
        let mut cells = Vec::new();
        for p in 0..n {
            for i in 0..n {
                let j = 2 * p as isize - i as isize;
                if (0..n as isize).contains(&j) {
                    let full = i + n * j as usize;
                    index[full] = cells.len();
                    cells.push(full);
                }
            }
        }
        Self { cells, index }
    }

    fn local(&self, full: usize) -> Result<usize> {
        match self.index[full] {
            usize::MAX => Err(NdpoError::SteadyState(
                "generator couples the even and odd coherence sectors".into(),
            )),
            k => Ok(k),
        }
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut rho = vec![0.0; self.index.len()];
        for (&full, v) in self.cells.iter().zip(x) {
            rho[full] = *v;
        }
        rho
    }
}

/// Real density matrix of one normal mode, column-stacked.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    n_cut: usize,
    rho: Vec<f64>,
}

impl ModeState {
    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        (0..self.n_cut).map(|i| self.rho[i + self.n_cut * i]).sum()
    }

    pub fn top_population(&self) -> f64 {
        let n = self.n_cut;
        self.rho[(n - 1) + n * (n - 1)]
    }

    pub fn mean_photon(&self) -> f64 {
        (0..self.n_cut)
            .map(|i| i as f64 * self.rho[i + self.n_cut * i])
            .sum()
    }

    /// ⟨x⟩.
    pub fn mean_amplitude(&self) -> f64 {
        SparseOp::destroy(self.n_cut).expect(&self.rho)
    }

    /// Variances of x + x† and i(x† − x).
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let rho: Vec<Complex64> = self.rho.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        QuadPair::new(&SparseOp::destroy(self.n_cut)).variances(&rho)
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let n = self.n_cut;
        DMatrix::from_fn(n, n, |i, j| Complex64::new(self.rho[i + n * j], 0.0))
    }

    /// ⟨γ|ρ|γ⟩ / π.
    pub fn husimi(&self, gamma: Complex64) -> Result<f64> {
        husimi_single(&self.to_dmatrix(), gamma)
    }
}

/// Product state of the two normal modes.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeState {
    pub c: ModeState,
    pub d: ModeState,
}

impl NormalModeState {
    /// Variances of ĉ₁ and ĉ₂.
    pub fn two_mode_variances(&self) -> (f64, f64) {
        self.c.quadrature_variances()
    }

    /// Variances of â₁ and â₂; the normal modes are uncorrelated so the
    /// variances add.
    pub fn single_mode_variances(&self) -> (f64, f64) {
        let (c1, c2) = self.c.quadrature_variances();
        let (d1, d2) = self.d.quadrature_variances();
        (0.5 * (c1 + d1), 0.5 * (c2 + d2))
    }

    pub fn mean_photon(&self) -> (f64, f64) {
        let sum = 0.5 * (self.c.mean_photon() + self.d.mean_photon());
        let cross = self.c.mean_amplitude() * self.d.mean_amplitude();
        (sum + cross, sum - cross)
    }

    /// Union bound on the probability that either normal mode sits in its top level.
    pub fn top_layer_population(&self) -> f64 {
        self.c.top_population() + self.d.top_population()
    }

    /// Q(α, β) = Q_c((α + β)/√2) · Q_d((α − β)/√2).
    pub fn husimi(&self, alpha: Complex64, beta: Complex64) -> Result<f64> {
        let qc = self.c.husimi((alpha + beta) * FRAC_1_SQRT_2)?;
        let qd = self.d.husimi((alpha - beta) * FRAC_1_SQRT_2)?;
        Ok(qc * qd)
    }
}

/// Normal-mode engine; requires gamma_a == gamma_b.
#[derive(Debug, Clone)]
pub struct NormalModeEngine {
    pub params: ModelParams,
    pub convention: PumpConvention,
    pub c: ModeGenerator,
    pub d: ModeGenerator,
}

impl NormalModeEngine {
    pub fn new(
        params: &ModelParams,
        n_cut_c: usize,
        n_cut_d: usize,
        convention: PumpConvention,
    ) -> Result<Self> {
        let gamma = params.symmetric_gamma()?;
        let pump = 0.5 * convention.sign() * params.kappa_gamma0;
        Ok(Self {
            params: *params,
            convention,
            c: ModeGenerator::new(gamma, params.r, pump, n_cut_c)?,
            d: ModeGenerator::new(gamma, params.r, -pump, n_cut_d)?,
        })
    }

    pub fn steady_state(&self) -> Result<NormalModeState> {
        check_steady_regime(&self.params)?;
        Ok(NormalModeState {
            c: self.c.steady_state()?,
            d: self.d.steady_state()?,
        })
    }

    /// States at each grid time, starting from the vacuum at t = 0.
    pub fn evolve(&self, t_grid: &[f64], control: &StepControl) -> Result<Vec<NormalModeState>> {
        let cs = self.c.evolve(t_grid, control)?;
        let ds = self.d.evolve(t_grid, control)?;
        Ok(cs
            .into_iter()
            .zip(ds)
            .map(|(c, d)| NormalModeState { c, d })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscalationPolicy {
    pub start: usize,
    pub factor: f64,
    pub max_n_cut: usize,
    pub tail_tolerance: f64,
    /// Largest accepted change of either quadrature variance between two
    /// successive cutoffs, relative to max(1, |v|).
    pub convergence_tolerance: f64,
}

impl Default for EscalationPolicy {
    fn default() -> Self {
        Self {
            start: super::config::DEFAULT_N_CUT,
            factor: 1.5,
            max_n_cut: 600,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            convergence_tolerance: 1e-4,
        }
    }
}

/// One rung of the cutoff ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffStep {
    pub n_cut: usize,
    pub v1: f64,
    pub v2: f64,
    pub tail: f64,
}

#[derive(Debug, Clone)]
pub struct EscalatedSteadyState {
    pub state: NormalModeState,
    pub n_cut_c: usize,
    pub n_cut_d: usize,
    pub history_c: Vec<CutoffStep>,
    pub history_d: Vec<CutoffStep>,
    /// Largest absolute variance change between the last two cutoffs of either mode.
    pub cutoff_bound: f64,
    /// The same change relative to max(1, |v|), as compared with the policy.
    pub relative_change: f64,
    /// Set when the cap stopped escalation before the variances settled.
    pub converged: bool,
}

fn step_change(a: &CutoffStep, b: &CutoffStep) -> (f64, f64) {
    let abs = (a.v1 - b.v1).abs().max((a.v2 - b.v2).abs());
    let rel = ((a.v1 - b.v1).abs() / b.v1.abs().max(1.0))
        .max((a.v2 - b.v2).abs() / b.v2.abs().max(1.0));
    (abs, rel)
}

fn escalate_mode(
    gamma: f64,
    r: f64,
    pump: f64,
    policy: &EscalationPolicy,
) -> Result<(ModeState, Vec<CutoffStep>, bool)> {
    let mut n = policy.start.max(2);
    let mut history: Vec<CutoffStep> = Vec::new();
    loop {
        let state = ModeGenerator::new(gamma, r, pump, n)?.steady_state()?;
        let (v1, v2) = state.quadrature_variances();
        let step = CutoffStep {
            n_cut: n,
            v1,
            v2,
            tail: state.top_population(),
        };
        let settled = history
            .last()
            .is_some_and(|prev| step_change(prev, &step).1 <= policy.convergence_tolerance);
        history.push(step);
        let tail_ok = step.tail <= policy.tail_tolerance;
        if tail_ok && settled {
            log::debug!("normal mode converged at n_cut = {n}, tail {:.2e}", step.tail);
            return Ok((state, history, true));
        }
        let next = (((n as f64) * policy.factor).ceil() as usize).min(policy.max_n_cut);
        if next <= n {
            if tail_ok {
                log::warn!("variances still moving at the n_cut cap {n}");
                return Ok((state, history, false));
            }
            return Err(NdpoError::SteadyState(format!(
                "top-layer population {:.2e} at n_cut = {n}; escalation capped at {}",
                step.tail, policy.max_n_cut
            )));
        }
        n = next;
    }
}

/// Steady state of both normal modes. Each cutoff grows by `factor` until
/// its top level holds at most `tail_tolerance` and the variances moved by
/// at most `convergence_tolerance` since the previous cutoff.
pub fn steady_state_escalating(
    params: &ModelParams,
    policy: &EscalationPolicy,
    convention: PumpConvention,
) -> Result<EscalatedSteadyState> {
    let gamma = params.symmetric_gamma()?;
    check_steady_regime(params)?;
    let pump = 0.5 * convention.sign() * params.kappa_gamma0;
    let (c, history_c, ok_c) = escalate_mode(gamma, params.r, pump, policy)?;
    let (d, history_d, ok_d) = escalate_mode(gamma, params.r, -pump, policy)?;
    let change = |h: &[CutoffStep]| match h {
        [.., a, b] => step_change(a, b),
        _ => (0.0, 0.0),
    };
    let (abs_c, rel_c) = change(&history_c);
    let (abs_d, rel_d) = change(&history_d);
    Ok(EscalatedSteadyState {
        n_cut_c: c.n_cut(),
        n_cut_d: d.n_cut(),
        state: NormalModeState { c, d },
        cutoff_bound: abs_c.max(abs_d),
        relative_change: rel_c.max(rel_d),
        history_c,
        history_d,
        converged: ok_c && ok_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_damping_vacuum() {
        let g = ModeGenerator::new(1.0, 0.0, 0.0, 6).unwrap();
        let s = g.steady_state().unwrap();
        assert!((s.as_slice()[0] - 1.0).abs() < 1e-14);
        let (v1, v2) = s.quadrature_variances();
        assert!((v1 - 1.0).abs() < 1e-12 && (v2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn squeezed_bath_alone() {
        let r: f64 = 0.5;
        let s = ModeGenerator::new(1.0, r, 0.0, 40).unwrap().steady_state().unwrap();
        let (v1, v2) = s.quadrature_variances();
        assert!((v1 - (-2.0 * r).exp()).abs() < 1e-9, "{v1}");
        assert!((v2 - (2.0 * r).exp()).abs() < 1e-9, "{v2}");
    }

    #[test]
    fn sector_ordering_is_banded() {
        let g = ModeGenerator::new(1.0, 0.3, 0.1, 20).unwrap();
        let s = g.steady_state().unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_rates_rejected() {
        let p = ModelParams::new(1.0, 1.2, 0.1, 0.0).unwrap();
        assert!(NormalModeEngine::new(&p, 10, 10, PumpConvention::Hamiltonian).is_err());
    }
}
