use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::case::{Engine, ValidationCase};
use super::report::{CaseDiagnostics, CheckEntry, ValidationReport, Worst};
use crate::analytic::{gaussian_widths, q_coefficients, q_two_mode, variance_two_mode, Horizon};
use crate::error::{NdpoError, Result};
use crate::fock::{
    build_liouvillian, evolve, husimi, quadrature_variance, steady_state, steady_state_escalating,
    DensityMatrix, EscalationPolicy, FockConfig, NormalModeEngine, NormalModeState,
    PumpConvention, Quadrature, StepControl,
};

enum NumState {
    Direct(DensityMatrix),
    Modes(NormalModeState),
}

impl NumState {
    fn variances(&self) -> (f64, f64) {
        match self {
            NumState::Direct(rho) => {
                let v = quadrature_variance(rho, Quadrature::TwoModeC);
                (v.v1.finite().unwrap_or(f64::NAN), v.v2.finite().unwrap_or(f64::NAN))
            }
            NumState::Modes(s) => s.two_mode_variances(),
        }
    }

    fn tail(&self) -> f64 {
        match self {
            NumState::Direct(rho) => rho.top_layer_population(),
            NumState::Modes(s) => s.top_layer_population(),
        }
    }

    fn husimi(&self, alpha: Complex64, beta: Complex64) -> Result<f64> {
        match self {
            NumState::Direct(rho) => husimi(rho, alpha, beta),
            NumState::Modes(s) => s.husimi(alpha, beta),
        }
    }
}

struct NumericRun {
    states: Vec<NumState>,
    steady: std::result::Result<NumState, String>,
    n_cut: Vec<usize>,
    escalation: Option<Escalation>,
}

struct Escalation {
    bound: f64,
    relative_change: f64,
    tolerance: f64,
    converged: bool,
}

fn steady_available(case: &ValidationCase) -> std::result::Result<(), String> {
    let p = &case.params;
    let regime = p.regime();
    if !regime.is_below() {
        return Err(format!("no stationary state {}", regime.tag));
    }
    if p.gamma_a <= 0.0 {
        return Err("no stationary state without damping".into());
    }
    Ok(())
}

fn run_numeric(case: &ValidationCase) -> Result<NumericRun> {
    let p = &case.params;
    let cfg = FockConfig::new(case.n_cut)?;
    let control = StepControl {
        rtol: cfg.rtol,
        atol: cfg.atol,
        ..StepControl::default()
    };
    match case.engine {
        Engine::Direct => {
            let l = build_liouvillian(p, &cfg)?;
            let states = evolve(&l, &DensityMatrix::vacuum(case.n_cut), &case.times)?;
            let steady = match steady_available(case) {
                Ok(()) => Ok(NumState::Direct(steady_state(&l)?)),
                Err(why) => Err(why),
            };
            Ok(NumericRun {
                states: states.into_iter().map(NumState::Direct).collect(),
                steady,
                n_cut: vec![case.n_cut],
                escalation: None,
            })
        }
        Engine::NormalMode => {
            let convention = PumpConvention::Hamiltonian;
            let (steady, n_c, n_d, escalation) = match steady_available(case) {
                Ok(()) => {
                    let policy = EscalationPolicy {
                        start: case.n_cut,
                        ..EscalationPolicy::default()
                    };
                    let esc = steady_state_escalating(p, &policy, convention)?;
                    // Variances grow monotonically from the vacuum, so the
                    // stationary cutoff also covers the transient.
                    let info = Escalation {
                        bound: esc.cutoff_bound,
                        relative_change: esc.relative_change,
                        tolerance: policy.convergence_tolerance,
                        converged: esc.converged,
                    };
                    (Ok(NumState::Modes(esc.state)), esc.n_cut_c, esc.n_cut_d, Some(info))
                }
                Err(why) => (Err(why), case.n_cut, case.n_cut, None),
            };
            let engine = NormalModeEngine::new(p, n_c, n_d, convention)?;
            let states = engine.evolve(&case.times, &control)?;
            Ok(NumericRun {
                states: states.into_iter().map(NumState::Modes).collect(),
                steady,
                n_cut: vec![n_c, n_d],
                escalation,
            })
        }
    }
}

fn variance_entries(case: &ValidationCase, run: &NumericRun) -> Result<Vec<CheckEntry>> {
    // Deviations within the measured truncation effect are not held against the engine.
    let bound = run.escalation.as_ref().map_or(0.0, |e| e.bound);
    let tol = case.tolerances.variance.max(bound);
    let mut w1 = Worst::default();
    let mut w2 = Worst::default();
    let mut initial = Worst::default();
    for (&t, state) in case.times.iter().zip(&run.states) {
        let a = variance_two_mode(&case.params, Horizon::At(t))?;
        let (n1, n2) = state.variances();
        let at = || format!("t={t}");
        match a.v1.finite() {
            Some(v) => w1.offer(n1 - v, at),
            None => w1.offer(f64::NAN, at),
        }
        // v2 diverges only in the steady state, but stay defensive.
        if let Some(v) = a.v2.finite() {
            w2.offer(n2 - v, at);
        }
        if t == 0.0 {
            initial.offer((n1 - 1.0).abs().max((n2 - 1.0).abs()), at);
        }
    }
    let tag = &case.tag;
    let mut out = vec![w1.entry(tag, "variance-v1", tol), w2.entry(tag, "variance-v2", tol)];
    if case.times.first() == Some(&0.0) {
        out.push(initial.entry(tag, "initial-variance", 1e-12));
    }
    match &run.steady {
        Ok(state) => {
            let a = variance_two_mode(&case.params, Horizon::Steady)?;
            let (n1, n2) = state.variances();
            for (check, num, ana) in [("steady-v1", n1, a.v1), ("steady-v2", n2, a.v2)] {
                let mut w = Worst::default();
                w.offer(num - ana.finite().unwrap_or(f64::NAN), || "t=steady".into());
                out.push(w.entry(tag, check, tol));
            }
        }
        Err(why) => {
            for check in ["steady-v1", "steady-v2"] {
                out.push(CheckEntry::skipped(tag, check, tol, why.clone()));
            }
        }
    }
    if let Some(e) = &run.escalation {
        let mut entry = CheckEntry {
            case: tag.clone(),
            check: "cutoff-convergence".into(),
            max_deviation: e.relative_change,
            tolerance: e.tolerance,
            passed: e.converged,
            worst_input: Some(format!("n_cut={:?}", run.n_cut)),
            skipped: None,
        };
        if !e.converged {
            entry.worst_input = Some(format!("n_cut={:?} hit the cap", run.n_cut));
        }
        out.push(entry);
    }
    if let Some(tail_tol) = case.tolerances.tail {
        let mut w = Worst::default();
        for (&t, s) in case.times.iter().zip(&run.states) {
            w.offer(s.tail(), || format!("t={t}"));
        }
        out.push(w.entry(tag, "tail-population", tail_tol));
    }
    if case.engine == Engine::Direct {
        let tv = case.tolerances.validity;
        let mut w = Worst::default();
        for (&t, s) in case.times.iter().zip(&run.states) {
            if let NumState::Direct(rho) = s {
                let v = rho.validity(&tv);
                // Each component scaled by its own tolerance; ≤ 1 passes.
                let score = (v.hermiticity_error / tv.hermiticity)
                    .max(v.trace_error / tv.trace)
                    .max(-v.min_eigenvalue / tv.negativity);
                w.offer(score, || {
                    format!(
                        "t={t} herm={:.1e} trace={:.1e} min_eig={:.1e}",
                        v.hermiticity_error, v.trace_error, v.min_eigenvalue
                    )
                });
            }
        }
        out.push(w.entry(tag, "state-validity", 1.0));
    }
    Ok(out)
}

fn q_entries(case: &ValidationCase, run: &NumericRun) -> Result<Vec<CheckEntry>> {
    let mut pointwise = Worst::default();
    let mut norm = Worst::default();
    for (&t, state) in case.times.iter().zip(&run.states) {
        let c = q_coefficients(&gaussian_widths(&case.params, t)?)?;
        norm.offer(c.total_probability()? - 1.0, || format!("t={t}"));
        for &(alpha, beta) in &case.amplitude_grid {
            let num = state.husimi(alpha, beta)?;
            pointwise.offer(num - q_two_mode(&c, alpha, beta), || {
                format!("t={t} alpha={alpha} beta={beta}")
            });
        }
    }
    Ok(vec![
        pointwise.entry(&case.tag, "q-pointwise", case.tolerances.q),
        norm.entry(&case.tag, "q-normalization", case.tolerances.normalization),
    ])
}

fn with_context<T>(case: &ValidationCase, r: Result<T>) -> Result<T> {
    r.map_err(|e| NdpoError::Validation {
        case: case.tag.clone(),
        source: Box::new(e),
    })
}

fn run_with<F>(case: &ValidationCase, checks: F) -> Result<ValidationReport>
where
    F: Fn(&ValidationCase, &NumericRun) -> Result<Vec<CheckEntry>>,
{
    let start = Instant::now();
    with_context(case, case.validate())?;
    let run = with_context(case, run_numeric(case))?;
    let entries = with_context(case, checks(case, &run))?;
    let wall = start.elapsed().as_secs_f64();
    let diag = CaseDiagnostics {
        case: case.tag.clone(),
        n_cut: run.n_cut.clone(),
        max_tail: run.states.iter().map(NumState::tail).fold(0.0, f64::max),
        cutoff_bound: run.escalation.as_ref().map(|e| e.bound),
        wall_clock_s: wall,
    };
    Ok(ValidationReport {
        entries,
        diagnostics: vec![diag],
        wall_clock_s: wall,
        ..ValidationReport::default()
    })
}

/// Two-mode variances from the closed forms against the Fock engine at each
/// sample time and in the steady state.
pub fn compare_variances(case: &ValidationCase) -> Result<ValidationReport> {
    run_with(case, variance_entries)
}

/// Closed-form Q against Husimi samples of the numeric state, plus the
/// Gaussian normalization of the closed form.
pub fn compare_q(case: &ValidationCase) -> Result<ValidationReport> {
    run_with(case, q_entries)
}

/// Both comparisons from a single numeric run.
pub fn run_case(case: &ValidationCase) -> Result<ValidationReport> {
    run_with(case, |c, r| {
        let mut e = variance_entries(c, r)?;
        e.extend(q_entries(c, r)?);
        Ok(e)
    })
}

/// Runs every case in parallel and merges the reports.
pub fn run_matrix(cases: &[ValidationCase]) -> Result<ValidationReport> {
    let start = Instant::now();
    let reports: Vec<ValidationReport> = cases.par_iter().map(run_case).collect::<Result<_>>()?;
    let mut out = ValidationReport::merge(reports);
    out.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn case(k: f64, r: f64, engine: Engine, n_cut: usize) -> ValidationCase {
        let p = ModelParams::symmetric(1.0, k, r).unwrap();
        let mut c = ValidationCase::new(p, vec![0.0, 0.5, 2.0]);
        c.engine = engine;
        c.n_cut = n_cut;
        c
    }

    #[test]
    fn pure_damping_is_exact() {
        for engine in [Engine::Direct, Engine::NormalMode] {
            let r = run_case(&case(0.0, 0.0, engine, 14)).unwrap();
            assert!(r.passed(), "{}", r.summary_table());
            for check in ["variance-v1", "variance-v2", "steady-v1", "q-pointwise"] {
                assert!(r.max_deviation(check).unwrap() < 1e-12, "{check}");
            }
        }
    }

    #[test]
    fn threshold_skips_steady_state() {
        let r = compare_variances(&case(0.5, 0.0, Engine::NormalMode, 30)).unwrap();
        let e = r.entries.iter().find(|e| e.check == "steady-v1").unwrap();
        assert!(e.skipped.as_deref().unwrap().contains("at-threshold"));
        assert!(r.max_deviation("variance-v2").unwrap() < 1e-3);
    }

    #[test]
    fn tight_tolerance_fails_with_input() {
        let mut c = case(0.2, 0.5, Engine::NormalMode, 30);
        c.tolerances.q = 1e-12;
        let r = compare_q(&c).unwrap();
        let e = r.entries.iter().find(|e| e.check == "q-pointwise").unwrap();
        assert!(!e.passed);
        assert!(e.worst_input.as_deref().unwrap().starts_with("t="));
        assert!(!r.passed());
    }

    #[test]
    fn engine_errors_carry_case() {
        let mut c = case(0.1, 0.0, Engine::NormalMode, 4);
        c.amplitude_grid = vec![(Complex64::new(3.0, 0.0), Complex64::default())];
        match compare_q(&c) {
            Err(NdpoError::Validation { case, source }) => {
                assert_eq!(case, c.tag);
                assert!(matches!(*source, NdpoError::AmplitudeTooLarge { .. }));
            }
            other => panic!("{other:?}"),
        }
    }
}
