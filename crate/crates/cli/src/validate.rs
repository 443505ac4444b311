use anyhow::{bail, Context, Result};
use ndpo_core::validation::{
    default_matrix, limit_suite, run_matrix, Engine, LimitFamily, ValidationCase, ValidationReport,
    LIMIT_TAGS, MATRIX_TIMES,
};

use crate::config::{grid, FileConfig};
use crate::{EngineArg, ValidateArgs};

fn cases(file: &FileConfig, a: &ValidateArgs) -> Result<Vec<ValidationCase>> {
    let times = match a.t_max.or(file.t_max) {
        Some(t) => Some(grid(t, a.steps.or(file.steps).unwrap_or(MATRIX_TIMES.len() - 1))?),
        None => None,
    };
    let mut cases = if let Some(path) = &a.matrix {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading matrix {}", path.display()))?;
        serde_json::from_str::<Vec<ValidationCase>>(&text)
            .with_context(|| format!("parsing matrix {}", path.display()))?
    } else if a.params.gamma.is_some()
        || a.params.kappa_gamma0.is_some()
        || a.params.r.is_some()
        || file.has_params()
    {
        let p = file.params(&a.params)?;
        vec![ValidationCase::new(p, times.clone().unwrap_or_else(|| MATRIX_TIMES.to_vec()))]
    } else {
        default_matrix()
    };

    let engine = match (a.engine, file.engine.is_some()) {
        (None, false) => None,
        (flag, _) => Some(match file.engine(flag)? {
            EngineArg::Direct => Engine::Direct,
            EngineArg::NormalMode => Engine::NormalMode,
        }),
    };
    for c in &mut cases {
        if let Some(t) = &times {
            c.times = t.clone();
        }
        if let Some(n) = a.ncut.or(file.n_cut) {
            c.n_cut = n;
        }
        if let Some(e) = engine {
            c.engine = e;
        }
        if let Some(v) = a.variance_tolerance {
            c.tolerances.variance = v;
        }
        if let Some(q) = a.q_tolerance {
            c.tolerances.q = q;
        }
        c.validate()?;
    }
    Ok(cases)
}

pub fn run(file: &FileConfig, a: &ValidateArgs) -> Result<bool> {
    if a.no_limits && a.no_matrix {
        bail!("--no-limits and --no-matrix leave nothing to run");
    }
    let wanted = |tag: &str| a.cases.is_empty() || a.cases.iter().any(|c| c == tag);
    let mut parts = Vec::new();

    if !a.no_matrix {
        let cases: Vec<_> = cases(file, a)?.into_iter().filter(|c| wanted(&c.tag)).collect();
        if !cases.is_empty() {
            log::info!("running {} matrix cases", cases.len());
            parts.push(run_matrix(&cases)?);
        }
    }
    if !a.no_limits && LIMIT_TAGS.iter().any(|t| wanted(t)) {
        let mut family = LimitFamily::default();
        if file.has_params() || a.params.gamma.is_some() || a.params.kappa_gamma0.is_some() || a.params.r.is_some() {
            let p = file.params(&a.params)?;
            family.gamma = p.gamma_a;
            family.kappa_gamma0 = p.kappa_gamma0;
            family.r = p.r;
        }
        parts.push(limit_suite(&family).filter_cases(wanted));
    }
    if parts.is_empty() {
        bail!("no case or limit tag matches {:?}", a.cases);
    }

    let report = ValidationReport::merge(parts);
    print!("{}", report.summary_table());
    if let Some(path) = &a.out {
        std::fs::write(path, report.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let passed = report.passed();
    if !passed {
        for f in report.failures() {
            log::warn!("{} {}: {:.3e} > {:.1e}", f.case, f.check, f.max_deviation, f.tolerance);
        }
    }
    Ok(passed)
}
