//! Dormand–Prince 5(4) with embedded error control.

use super::ops::Scalar;
use crate::error::{NdpoError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Fifth-order minus fourth-order weights; the last one multiplies f(y_new).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(y) through the increasing times in `grid`, starting from
/// `y` at `grid[0]`. `after_step` may modify the state after every accepted
/// step; `output` sees the state at each grid time.
pub fn integrate<T, F, P, O>(
    f: F,
    mut y: Vec<T>,
    grid: &[f64],
    control: &StepControl,
    mut after_step: P,
    mut output: O,
) -> Result<StepStats>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
    P: FnMut(&mut [T]),
    O: FnMut(usize, f64, &[T]) -> Result<()>,
{
    if grid.is_empty() {
        return Ok(StepStats::default());
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid[0].is_finite() {
        return Err(NdpoError::Domain("time grid must be strictly increasing".into()));
    }
    let n = y.len();
    let mut stats = StepStats::default();
    let mut k: Vec<Vec<T>> = (0..7).map(|_| vec![T::default(); n]).collect();
    let mut tmp = vec![T::default(); n];
    let mut y_new = vec![T::default(); n];

    let mut t = grid[0];
    output(0, t, &y)?;
    f(&y, &mut k[0]);
    stats.evaluations += 1;

    let mut h = initial_step(&y, &k[0], control, grid[grid.len() - 1] - t);
    for (gi, &target) in grid.iter().enumerate().skip(1) {
        while t < target {
            if stats.accepted + stats.rejected >= control.max_steps {
                return Err(NdpoError::Integration {
                    last_good_time: t,
                    reason: format!("step budget of {} exhausted", control.max_steps),
                });
            }
            // Steps are clipped to land on grid times; the free proposal is kept.
            let h_free = h;
            let last = t + h >= target || target - (t + h) < 1e-12 * target.abs().max(1.0);
            if last {
                h = target - t;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(NdpoError::Integration {
                    last_good_time: t,
                    reason: format!("step size underflow (h = {h:.3e})"),
                });
            }

            stage(&y, &k, &A2, h, &mut tmp);
            f(&tmp, &mut k[1]);
            stage(&y, &k, &A3, h, &mut tmp);
            f(&tmp, &mut k[2]);
            stage(&y, &k, &A4, h, &mut tmp);
            f(&tmp, &mut k[3]);
            stage(&y, &k, &A5, h, &mut tmp);
            f(&tmp, &mut k[4]);
            stage(&y, &k, &A6, h, &mut tmp);
            f(&tmp, &mut k[5]);
            stage(&y, &k, &B, h, &mut y_new);
            f(&y_new, &mut k[6]);
            stats.evaluations += 6;

            let mut acc = 0.0;
            let mut finite = true;
            for i in 0..n {
                let mut e = T::default();
                for (s, ks) in k.iter().enumerate() {
                    if E[s] != 0.0 {
                        e += ks[i] * E[s];
                    }
                }
                let scale = control.atol + control.rtol * y[i].modulus().max(y_new[i].modulus());
                let r = (e * h).modulus() / scale;
                acc += r * r;
                finite &= y_new[i].finite();
            }
            let err = (acc / n.max(1) as f64).sqrt();
            if !finite || !err.is_finite() {
                return Err(NdpoError::Integration {
                    last_good_time: t,
                    reason: "state became non-finite; the dynamics diverge".into(),
                });
            }
            if err <= 1.0 {
                t = if last { target } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                after_step(&mut y);
                f(&y, &mut k[0]);
                stats.evaluations += 1;
                stats.accepted += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = if last { h_free.max(h * factor) } else { h * factor };
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        output(gi, t, &y)?;
    }
    Ok(stats)
}

fn stage<T: Scalar>(y: &[T], k: &[Vec<T>], a: &[f64], h: f64, out: &mut [T]) {
    for i in 0..y.len() {
        let mut acc = y[i];
        for (s, &c) in a.iter().enumerate() {
            if c != 0.0 {
                acc += k[s][i] * (h * c);
            }
        }
        out[i] = acc;
    }
}

fn initial_step<T: Scalar>(y: &[T], f0: &[T], control: &StepControl, span: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(f0) {
        let sc = control.atol + control.rtol * yi.modulus();
        d0 += (yi.modulus() / sc).powi(2);
        d1 += (fi.modulus() / sc).powi(2);
    }
    let h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * (d0 / d1).sqrt()
    };
    h.min(span.max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exponential_decay() {
        let grid = [0.0, 0.5, 1.0, 3.0];
        let mut got = Vec::new();
        integrate(
            |y: &[f64], dy: &mut [f64]| dy[0] = -2.0 * y[0],
            vec![1.0],
            &grid,
            &StepControl::default(),
            |_| {},
            |_, t, y| {
                got.push((t, y[0]));
                Ok(())
            },
        )
        .unwrap();
        for (t, y) in got {
            assert!((y - (-2.0 * t).exp()).abs() < 1e-8, "{t} {y}");
        }
    }

    #[test]
    fn complex_rotation() {
        let grid = [0.0, std::f64::consts::PI];
        let mut last = Complex64::default();
        integrate(
            |y: &[Complex64], dy: &mut [Complex64]| dy[0] = Complex64::i() * y[0],
            vec![Complex64::new(1.0, 0.0)],
            &grid,
            &StepControl::default(),
            |_| {},
            |_, _, y| {
                last = y[0];
                Ok(())
            },
        )
        .unwrap();
        assert!((last + 1.0).norm() < 1e-7);
    }

    #[test]
    fn blow_up_reports_last_good_time() {
        let err = integrate(
            |y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0],
            vec![1.0],
            &[0.0, 2.0],
            &StepControl::default(),
            |_| {},
            |_, _, _| Ok(()),
        )
        .unwrap_err();
        match err {
            NdpoError::Integration { last_good_time, .. } => {
                assert!(last_good_time > 0.9 && last_good_time < 1.1, "{last_good_time}")
            }
            e => panic!("{e:?}"),
        }
    }
}
