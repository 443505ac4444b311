//! Special-case reductions of the closed forms, each checked against an
//! independently written formula.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::case::amplitude_grid;
use super::report::{CheckEntry, ValidationReport, Worst};
use crate::analytic::{
    gaussian_widths, q_coefficients, q_single_mode, q_single_undamped_amplifier,
    q_single_vacuum_reservoir, q_two_mode, q_undamped_amplifier, q_vacuum_reservoir,
    squeezing_onset_r, steady_widths, variance_single_mode, variance_two_mode, Horizon,
    VarianceReport,
};
use crate::error::Result;
use crate::params::{reservoir_stats, ModelParams};

/// Relative tolerance of every limit entry.
pub const LIMIT_TOLERANCE: f64 = 1e-12;

/// Every tag [`limit_suite`] emits.
pub const LIMIT_TAGS: [&str; 15] = [
    "vacuum-reservoir-q",
    "vacuum-reservoir-single-q",
    "undamped-amplifier-q",
    "undamped-amplifier-single-q",
    "single-mode-steady",
    "single-mode-steady-squeezing",
    "squeezing-onset",
    "unpumped-single-mode-steady",
    "reservoir-equivalence",
    "threshold-squeezing",
    "vacuum-reservoir-two-mode",
    "threshold-vacuum-v1",
    "undamped-amplifier-two-mode",
    "unpumped-two-mode",
    "unpumped-two-mode-steady",
];

/// Base point from which each limit is reached by zeroing or tuning one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitFamily {
    pub gamma: f64,
    pub kappa_gamma0: f64,
    pub r: f64,
    pub times: Vec<f64>,
    pub amplitudes: Vec<(Complex64, Complex64)>,
}

impl Default for LimitFamily {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            kappa_gamma0: 0.2,
            r: 0.5,
            times: vec![0.25, 0.5, 1.0, 2.0, 5.0],
            amplitudes: amplitude_grid(&[-0.7, 0.0, 0.7]),
        }
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want) / want.abs().max(1.0)
}

/// (1 − e^{−μt})/μ, equal to t at μ = 0.
fn relax(mu: f64, t: f64) -> f64 {
    if mu == 0.0 {
        t
    } else {
        -(-mu * t).exp_m1() / mu
    }
}

fn v(report: &VarianceReport) -> (f64, f64) {
    (
        report.v1.finite().unwrap_or(f64::NAN),
        report.v2.finite().unwrap_or(f64::NAN),
    )
}

fn run(tag: &str, check: &str, f: impl FnOnce(&mut Worst) -> Result<()>) -> CheckEntry {
    let mut w = Worst::default();
    match f(&mut w) {
        Ok(()) => w.entry(tag, check, LIMIT_TOLERANCE),
        Err(e) => CheckEntry {
            case: tag.into(),
            check: check.into(),
            max_deviation: f64::NAN,
            tolerance: LIMIT_TOLERANCE,
            passed: false,
            worst_input: Some(e.to_string()),
            skipped: None,
        },
    }
}

/// Checks every printed special case reachable from `family`.
pub fn limit_suite(family: &LimitFamily) -> ValidationReport {
    let start = std::time::Instant::now();
    let f = family;
    let sym = |k: f64, r: f64| ModelParams::symmetric(f.gamma, k, r);
    let amps = &f.amplitudes;
    let mut e = Vec::new();

    e.push(run(LIMIT_TAGS[0], "q matches the r = 0 form", |w| {
        let p = sym(f.kappa_gamma0, 0.0)?;
        for &t in &f.times {
            let wd = gaussian_widths(&p, t)?;
            w.offer(rel(wd.a1, wd.a2).max(rel(wd.a3, wd.a4).abs()), || format!("t={t} widths"));
            let c = q_coefficients(&wd)?;
            for &(a, b) in amps {
                let want = q_vacuum_reservoir(wd.a1, wd.a3, a, b);
                w.offer(rel(q_two_mode(&c, a, b), want), || format!("t={t} alpha={a} beta={b}"));
            }
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[1], "marginal matches the r = 0 form", |w| {
        let p = sym(f.kappa_gamma0, 0.0)?;
        for &t in &f.times {
            let wd = gaussian_widths(&p, t)?;
            let m = q_single_mode(&q_coefficients(&wd)?)?;
            for &(a, _) in amps {
                let want = q_single_vacuum_reservoir(wd.a1, wd.a3, a);
                w.offer(rel(m.value(a), want), || format!("t={t} alpha={a}"));
            }
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[2], "q matches the lossless form", |w| {
        let p = ModelParams::symmetric(0.0, f.kappa_gamma0, f.r)?;
        for &t in &f.times {
            let c = q_coefficients(&gaussian_widths(&p, t)?)?;
            let s = f.kappa_gamma0 * t;
            for &(a, b) in amps {
                let want = q_undamped_amplifier(s, a, b);
                w.offer(rel(q_two_mode(&c, a, b), want), || format!("t={t} alpha={a} beta={b}"));
            }
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[3], "marginal matches the lossless form", |w| {
        let p = ModelParams::symmetric(0.0, f.kappa_gamma0, f.r)?;
        for &t in &f.times {
            let m = q_single_mode(&q_coefficients(&gaussian_widths(&p, t)?)?)?;
            let s = f.kappa_gamma0 * t;
            for &(a, _) in amps {
                w.offer(rel(m.value(a), q_single_undamped_amplifier(s, a)), || {
                    format!("t={t} alpha={a}")
                });
            }
        }
        Ok(())
    }));

    let below = sym(f.kappa_gamma0, f.r).map(|p| p.regime().is_below()).unwrap_or(false);
    let single_steady = |tag: &str, check: &str, use_nm: bool| {
        if !below {
            return CheckEntry::skipped(tag, check, LIMIT_TOLERANCE, "family is not below threshold");
        }
        run(tag, check, |w| {
            let p = sym(f.kappa_gamma0, f.r)?;
            let g2 = f.gamma * f.gamma;
            let den = g2 - 4.0 * f.kappa_gamma0 * f.kappa_gamma0;
            let (want1, want2) = if use_nm {
                let s = reservoir_stats(f.r)?;
                let base = 2.0 * s.n + 1.0;
                (g2 * (base - 2.0 * s.m) / den, g2 * (base + 2.0 * s.m) / den)
            } else {
                (g2 * (-2.0 * f.r).exp() / den, g2 * (2.0 * f.r).exp() / den)
            };
            let (v1, v2) = v(&variance_single_mode(&p, Horizon::Steady)?);
            w.offer(rel(v1, want1), || "v1".into());
            w.offer(rel(v2, want2), || "v2".into());
            if use_nm {
                // Same numbers through the stationary Q marginal.
                let (q1, q2) = q_single_mode(&q_coefficients(&steady_widths(&p)?)?)?.variances();
                w.offer(rel(q1, want1), || "marginal v1".into());
                w.offer(rel(q2, want2), || "marginal v2".into());
            }
            Ok(())
        })
    };
    e.push(single_steady(LIMIT_TAGS[4], "steady single-mode variances in N, M", true));
    e.push(single_steady(LIMIT_TAGS[5], "steady single-mode variances in r", false));
    e.push(if below {
        run(LIMIT_TAGS[6], "v1 = 1 at the onset squeezing", |w| {
            let p = sym(f.kappa_gamma0, f.r)?;
            let r_star = squeezing_onset_r(&p)?;
            let (v1, _) = v(&variance_single_mode(&p.with_r(r_star)?, Horizon::Steady)?);
            w.offer(rel(v1, 1.0), || format!("r*={r_star}"));
            Ok(())
        })
    } else {
        CheckEntry::skipped(LIMIT_TAGS[6], "v1 = 1 at the onset squeezing", LIMIT_TOLERANCE, "family is not below threshold")
    });

    let rs = [0.0, 0.25, f.r, 1.0, 2.0];
    e.push(run(LIMIT_TAGS[7], "unpumped single-mode steady state", |w| {
        for r in rs {
            let (v1, v2) = v(&variance_single_mode(&sym(0.0, r)?, Horizon::Steady)?);
            w.offer(rel(v1, (-2.0 * r).exp()).abs().max(rel(v2, (2.0 * r).exp()).abs()), || {
                format!("r={r}")
            });
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[8], "single-mode and two-mode agree without pump", |w| {
        for r in rs {
            let p = sym(0.0, r)?;
            let (s1, s2) = v(&variance_single_mode(&p, Horizon::Steady)?);
            let (t1, t2) = v(&variance_two_mode(&p, Horizon::Steady)?);
            w.offer(rel(s1, t1).abs().max(rel(s2, t2).abs()), || format!("r={r}"));
            for &t in &f.times {
                let (s1, s2) = v(&variance_single_mode(&p, Horizon::At(t))?);
                let (t1, t2) = v(&variance_two_mode(&p, Horizon::At(t))?);
                w.offer(rel(s1, t1).abs().max(rel(s2, t2).abs()), || format!("r={r} t={t}"));
            }
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[9], "threshold v1 = e^(-2r)/2, v2 divergent", |w| {
        for r in [f.r, 0.5, 1.0, 2.0] {
            let rep = variance_two_mode(&sym(0.5 * f.gamma, r)?, Horizon::Steady)?;
            let dev = if rep.v2.is_divergent() {
                rel(v(&rep).0, 0.5 * (-2.0 * r).exp())
            } else {
                f64::NAN
            };
            w.offer(dev, || format!("r={r}"));
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[10], "two-mode variances without reservoir squeezing", |w| {
        let k = f.kappa_gamma0;
        let p = sym(k, 0.0)?;
        let g = f.gamma;
        for &t in &f.times {
            let (v1, v2) = v(&variance_two_mode(&p, Horizon::At(t))?);
            let (sp, sm) = (g + 2.0 * k, g - 2.0 * k);
            let want1 = g * relax(sp, t) + (-sp * t).exp();
            let want2 = g * relax(sm, t) + (-sm * t).exp();
            w.offer(rel(v1, want1).abs().max(rel(v2, want2).abs()), || format!("t={t}"));
        }
        if below {
            let (v1, v2) = v(&variance_two_mode(&p, Horizon::Steady)?);
            w.offer(rel(v1, g / (g + 2.0 * k)).abs().max(rel(v2, g / (g - 2.0 * k)).abs()), || {
                "steady".into()
            });
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[11], "threshold v1 = 1/2 without reservoir squeezing", |w| {
        let rep = variance_two_mode(&sym(0.5 * f.gamma, 0.0)?, Horizon::Steady)?;
        w.offer(v(&rep).0 - 0.5, || "steady".into());
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[12], "lossless two-mode variances e^(-+2kt)", |w| {
        let k = f.kappa_gamma0;
        for r in [0.0, f.r] {
            let p = ModelParams::symmetric(0.0, k, r)?;
            for &t in &f.times {
                let (v1, v2) = v(&variance_two_mode(&p, Horizon::At(t))?);
                let dev = rel(v1, (-2.0 * k * t).exp()).abs().max(rel(v2, (2.0 * k * t).exp()).abs());
                w.offer(dev, || format!("r={r} t={t}"));
            }
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[13], "unpumped two-mode relaxation", |w| {
        let p = sym(0.0, f.r)?;
        let (lo, hi) = ((-2.0 * f.r).exp(), (2.0 * f.r).exp());
        for &t in &f.times {
            let decay = (-f.gamma * t).exp();
            let (v1, v2) = v(&variance_two_mode(&p, Horizon::At(t))?);
            let dev = rel(v1, lo + (1.0 - lo) * decay).abs().max(rel(v2, hi + (1.0 - hi) * decay).abs());
            w.offer(dev, || format!("t={t}"));
        }
        Ok(())
    }));
    e.push(run(LIMIT_TAGS[14], "unpumped two-mode steady state", |w| {
        for r in rs {
            let (v1, v2) = v(&variance_two_mode(&sym(0.0, r)?, Horizon::Steady)?);
            w.offer(rel(v1, (-2.0 * r).exp()).abs().max(rel(v2, (2.0 * r).exp()).abs()), || {
                format!("r={r}")
            });
        }
        Ok(())
    }));

    let mut report = ValidationReport::merge([ValidationReport {
        entries: e,
        ..ValidationReport::default()
    }]);
    report.wall_clock_s = start.elapsed().as_secs_f64();
    report
}
