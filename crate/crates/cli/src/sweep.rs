use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ndpo_core::analytic::{variance_two_mode, Horizon, Variance};
use ndpo_core::fock::{
    build_liouvillian, format_sig12, steady_state_escalating, trajectory, DensityMatrix,
    EscalationPolicy, FockConfig, NormalModeEngine, PumpConvention, StepControl,
    DEFAULT_N_CUT, DEFAULT_TAIL_TOLERANCE,
};
use ndpo_core::{ModelParams, ParamsConfig};

use crate::config::{grid, positive_steps, FileConfig};
use crate::{EngineArg, SweepRArgs, SweepTimeArgs};

pub fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cell(v: Variance) -> String {
    match v {
        Variance::Finite(x) => format_sig12(x),
        Variance::Divergent => "inf".into(),
    }
}

fn params_comment(p: &ModelParams) -> String {
    format!(
        "gamma_a={} gamma_b={} kappa_gamma0={} r={}",
        p.gamma_a, p.gamma_b, p.kappa_gamma0, p.r
    )
}

struct NumericColumns {
    v1: Vec<f64>,
    v2: Vec<f64>,
    tail: Vec<f64>,
}

fn numeric_time(p: &ModelParams, times: &[f64], n_cut: usize, engine: EngineArg) -> Result<NumericColumns> {
    let cfg = FockConfig::new(n_cut)?;
    let cols = match engine {
        EngineArg::Direct => {
            let l = build_liouvillian(p, &cfg)?;
            let tr = trajectory(&l, &DensityMatrix::vacuum(n_cut), times)?;
            NumericColumns {
                v1: tr.points.iter().map(|q| q.v1).collect(),
                v2: tr.points.iter().map(|q| q.v2).collect(),
                tail: tr.points.iter().map(|q| q.tail_pop).collect(),
            }
        }
        EngineArg::NormalMode => {
            let engine = NormalModeEngine::new(p, n_cut, n_cut, PumpConvention::Hamiltonian)?;
            let control = StepControl {
                rtol: cfg.rtol,
                atol: cfg.atol,
                ..StepControl::default()
            };
            let states = engine.evolve(times, &control)?;
            let (v1, v2) = states.iter().map(|s| s.two_mode_variances()).unzip();
            NumericColumns {
                v1,
                v2,
                tail: states.iter().map(|s| s.top_layer_population()).collect(),
            }
        }
    };
    let worst = cols.tail.iter().copied().fold(0.0, f64::max);
    if worst > DEFAULT_TAIL_TOLERANCE {
        log::warn!("top-layer population reached {worst:.2e}; raise --ncut");
    }
    Ok(cols)
}

pub fn sweep_time(file: &FileConfig, a: &SweepTimeArgs) -> Result<()> {
    let p = file.params(&a.params)?;
    let t_max = a.t_max.or(file.t_max).unwrap_or(10.0);
    let steps = a.steps.or(file.steps).unwrap_or(100);
    let times = grid(t_max, steps)?;
    let numeric = a.numeric || file.numeric == Some(true);
    let n_cut = a.ncut.or(file.n_cut).unwrap_or(DEFAULT_N_CUT);
    let engine = file.engine(a.engine)?;

    let analytic = times
        .iter()
        .map(|&t| {
            variance_two_mode(&p, Horizon::At(t)).with_context(|| format!("closed form at t = {t}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let num = if numeric {
        Some(numeric_time(&p, &times, n_cut, engine).context("numeric evolution")?)
    } else {
        None
    };

    let mut out = open_out(a.out.as_deref().or(file.out.as_deref()))?;
    write!(
        out,
        "# ndpo {} sweep-time {} t_max={t_max} steps={steps}",
        ndpo_core::VERSION,
        params_comment(&p)
    )?;
    if numeric {
        let name = match engine {
            EngineArg::Direct => "direct",
            EngineArg::NormalMode => "normal-mode",
        };
        write!(out, " engine={name} n_cut={n_cut}")?;
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t", "v1_analytic", "v2_analytic"];
    if numeric {
        header.extend(["v1_numeric", "v2_numeric", "tail_pop"]);
    }
    w.write_record(&header)?;
    for (i, (&t, rep)) in times.iter().zip(&analytic).enumerate() {
        let mut row = vec![format_sig12(t), cell(rep.v1), cell(rep.v2)];
        if let Some(n) = &num {
            row.extend([n.v1[i], n.v2[i], n.tail[i]].map(format_sig12));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_r(file: &FileConfig, a: &SweepRArgs) -> Result<()> {
    let mut pc = file.params_config().overlay(&ParamsConfig {
        gamma: a.params.gamma,
        kappa_gamma0: a.params.kappa_gamma0,
        r: a.params.r,
        ..ParamsConfig::default()
    });
    // r is the sweep variable; any fixed value only needs to be valid.
    pc.r = Some(pc.r.unwrap_or(0.0));
    if a.threshold {
        let g = pc.gamma.context("--threshold needs --gamma")?;
        if pc.kappa_gamma0.is_some_and(|k| k != 0.5 * g) {
            log::warn!("--threshold overrides kappa_gamma0");
        }
        pc.kappa_gamma0 = Some(0.5 * g);
    }
    let base = pc.resolve()?;
    let regime = base.regime();
    if regime.tag == ndpo_core::RegimeTag::AboveThreshold {
        bail!("no steady state {} (margin {:.3e})", regime.tag, regime.margin);
    }
    let r_max = a.r_max.or(file.r_max).unwrap_or(2.0);
    let steps = positive_steps(a.steps.or(file.steps).unwrap_or(40))?;
    let rs = grid(r_max, steps)?;
    let numeric = a.numeric || file.numeric == Some(true);
    if numeric && !regime.is_below() {
        bail!("numeric steady states need a pump below threshold");
    }
    let n_cut = a.ncut.or(file.n_cut).unwrap_or(DEFAULT_N_CUT);

    let mut rows = Vec::with_capacity(rs.len());
    for &r in &rs {
        let p = base.with_r(r)?;
        let rep = variance_two_mode(&p, Horizon::Steady).with_context(|| format!("closed form at r = {r}"))?;
        let mut row = vec![format_sig12(r), cell(rep.v1), cell(rep.v2)];
        row.push(rep.squeezing_percent().map_or("nan".into(), format_sig12));
        if numeric {
            let policy = EscalationPolicy {
                start: n_cut,
                ..EscalationPolicy::default()
            };
            let esc = steady_state_escalating(&p, &policy, PumpConvention::Hamiltonian)
                .with_context(|| format!("numeric steady state at r = {r}"))?;
            let (v1, v2) = esc.state.two_mode_variances();
            row.extend([format_sig12(v1), format_sig12(v2), esc.n_cut_c.to_string()]);
        }
        rows.push(row);
    }

    let mut out = open_out(a.out.as_deref().or(file.out.as_deref()))?;
    writeln!(
        out,
        "# ndpo {} sweep-r gamma_a={} gamma_b={} kappa_gamma0={} r_max={r_max} steps={steps}{}",
        ndpo_core::VERSION,
        base.gamma_a,
        base.gamma_b,
        base.kappa_gamma0,
        if numeric { format!(" numeric n_cut_start={n_cut}") } else { String::new() }
    )?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["r", "v1", "v2", "squeezing_pct"];
    if numeric {
        header.extend(["v1_numeric", "v2_numeric", "n_cut"]);
    }
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
