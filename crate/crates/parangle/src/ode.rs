//! Embedded adaptive Runge-Kutta 4(5) integrator (Dormand-Prince pair).
//!
//! The driver steps exactly onto a caller-supplied output grid, so recorded
//! states carry full integrator accuracy; between grid nodes consumers
//! interpolate with cubic Hermite segments built from the recorded state and
//! derivative. An optional guard predicate truncates the trajectory (used for
//! chart-domain exits), with the crossing located by bisection on the Hermite
//! segment of the offending step.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 0.1,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = |t: f64| t > 0.0 && t < 1e-2;
        if !ok(self.rel_tol) || !ok(self.abs_tol) {
            return Err(Error::InvalidInput(format!(
                "integrator tolerances must lie in (0, 1e-2), got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_step <= 0.0 {
            return Err(Error::InvalidInput("max_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

pub struct OdeResult {
    /// Output times actually reached (a prefix of the requested grid when truncated).
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Right-hand side at each recorded time.
    pub derivs: Vec<Vec<f64>>,
    /// Time at which the guard stopped the trajectory, if it did.
    pub truncated: Option<f64>,
    pub stats: OdeStats,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate y' = f(t, y) recording the state at every time in `grid`.
///
/// `grid` must be strictly monotone starting at the initial time; decreasing
/// grids integrate backwards. `guard(y)` returning false truncates the
/// trajectory at the boundary crossing.
pub fn integrate_on_grid<F, G>(
    mut rhs: F,
    grid: &[f64],
    y0: &[f64],
    settings: &IntegratorSettings,
    mut guard: G,
) -> Result<OdeResult>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(&[f64]) -> bool,
{
    settings.validate()?;
    assert!(grid.len() >= 1, "output grid must contain the start time");
    let n = y0.len();
    let dir = if grid.len() >= 2 {
        (grid[grid.len() - 1] - grid[0]).signum()
    } else {
        1.0
    };
    let mut stats = OdeStats::default();

    let mut t = grid[0];
    let mut y = y0.to_vec();
    let mut f_cur = vec![0.0; n];
    rhs(t, &y, &mut f_cur);
    stats.rhs_evals += 1;

    if !guard(&y) {
        return Err(Error::InvalidInput(
            "initial state rejected by the domain guard".into(),
        ));
    }

    let mut out = OdeResult {
        times: vec![t],
        states: vec![y.clone()],
        derivs: vec![f_cur.clone()],
        truncated: None,
        stats,
    };
    if grid.len() == 1 {
        return Ok(out);
    }

    let mut k = vec![vec![0.0; n]; 7];
    k[0].copy_from_slice(&f_cur);
    let mut h = settings.max_step.min(initial_step(&y, &f_cur, settings));
    let mut y_stage = vec![0.0; n];
    let mut y_next = vec![0.0; n];

    let mut grid_idx = 1usize;
    let max_steps = 50_000_000usize;
    let mut steps = 0usize;

    while grid_idx < grid.len() {
        let target = grid[grid_idx];
        let mut h_try = h.min((target - t).abs()).max(1e-14);
        loop {
            steps += 1;
            if steps > max_steps {
                return Err(Error::StepFailure { s: t, h: h_try });
            }
            let hs = dir * h_try;
            // stages 2..7 (k1 is FSAL from the previous step)
            for stage in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for prev in 0..stage {
                        let a = A[stage - 1][prev];
                        if a != 0.0 {
                            acc += a * k[prev][i];
                        }
                    }
                    y_stage[i] = y[i] + hs * acc;
                }
                let (head, tail) = k.split_at_mut(stage);
                let _ = head;
                rhs(t + C[stage] * hs, &y_stage, &mut tail[0]);
                out.stats.rhs_evals += 1;
            }
            // 5th-order solution and embedded error
            let mut err_norm: f64 = 0.0;
            for i in 0..n {
                let mut acc5 = 0.0;
                let mut acc_err = 0.0;
                for s in 0..7 {
                    acc5 += B5[s] * k[s][i];
                    acc_err += (B5[s] - B4[s]) * k[s][i];
                }
                y_next[i] = y[i] + hs * acc5;
                let scale =
                    settings.abs_tol + settings.rel_tol * y[i].abs().max(y_next[i].abs());
                let e = hs * acc_err / scale;
                err_norm += e * e;
            }
            err_norm = (err_norm / n as f64).sqrt();

            if err_norm <= 1.0 {
                out.stats.accepted += 1;
                let t_new = t + hs;
                // FSAL: stage 7 was evaluated at (t+h, y_next)
                let f_new = k[6].clone();

                if !guard(&y_next) {
                    let (tb, yb, fb) = locate_boundary(
                        &mut rhs,
                        &mut guard,
                        t,
                        hs,
                        &y,
                        &k[0].clone(),
                        &y_next,
                        &f_new,
                        &mut out.stats,
                    );
                    out.times.push(tb);
                    out.states.push(yb);
                    out.derivs.push(fb);
                    out.truncated = Some(tb);
                    return Ok(out);
                }

                t = t_new;
                y.copy_from_slice(&y_next);
                k[0].copy_from_slice(&f_new);

                let grow = if err_norm > 0.0 {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h = (h_try * grow).min(settings.max_step);

                if (t - target).abs() < 1e-13 * (1.0 + target.abs()) {
                    out.times.push(target);
                    out.states.push(y.clone());
                    out.derivs.push(k[0].clone());
                    grid_idx += 1;
                }
                break;
            } else {
                out.stats.rejected += 1;
                let shrink = (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
                h_try *= shrink;
                if h_try < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::StepFailure { s: t, h: h_try });
                }
                h_try = h_try.min((target - t).abs());
            }
        }
    }
    Ok(out)
}

/// Bisect a Hermite segment of the failed step for the last guarded state.
#[allow(clippy::too_many_arguments)]
fn locate_boundary<F, G>(
    rhs: &mut F,
    guard: &mut G,
    t0: f64,
    hs: f64,
    y0: &[f64],
    f0: &[f64],
    y1: &[f64],
    f1: &[f64],
    stats: &mut OdeStats,
) -> (f64, Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(&[f64]) -> bool,
{
    let n = y0.len();
    let eval = |theta: f64| -> Vec<f64> {
        let u = theta;
        let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
        let h10 = u * u * u - 2.0 * u * u + u;
        let h01 = -2.0 * u * u * u + 3.0 * u * u;
        let h11 = u * u * u - u * u;
        (0..n)
            .map(|i| h00 * y0[i] + h10 * hs * f0[i] + h01 * y1[i] + h11 * hs * f1[i])
            .collect()
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if guard(&eval(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let yb = eval(lo);
    let mut fb = vec![0.0; n];
    rhs(t0 + lo * hs, &yb, &mut fb);
    stats.rhs_evals += 1;
    (t0 + lo * hs, yb, fb)
}

fn initial_step(y0: &[f64], f0: &[f64], settings: &IntegratorSettings) -> f64 {
    let sup_y = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sup_f = f0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = (settings.abs_tol + settings.rel_tol * sup_y) / (sup_f + 1e-30);
    (0.01 * scale.powf(0.2)).clamp(1e-8, settings.max_step)
}

/// Build a uniform output grid from `a` to `b` with spacing close to `ds`,
/// always including both endpoints. Degenerate ranges yield a single node.
pub fn uniform_grid(a: f64, b: f64, ds: f64) -> Vec<f64> {
    assert!(ds > 0.0);
    let span = (b - a).abs();
    if span < 1e-15 {
        return vec![a];
    }
    let n = (span / ds).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut grid: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
    *grid.last_mut().unwrap() = b;
    grid
}

/// Evaluate a cubic Hermite segment (y0, f0) -> (y1, f1) over width h at
/// fraction `u` in [0, 1]; returns value and derivative with respect to t.
pub fn hermite_eval(y0: f64, f0: f64, y1: f64, f1: f64, h: f64, u: f64) -> (f64, f64) {
    let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
    let h10 = u * u * u - 2.0 * u * u + u;
    let h01 = -2.0 * u * u * u + 3.0 * u * u;
    let h11 = u * u * u - u * u;
    let v = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
    let d00 = 6.0 * u * u - 6.0 * u;
    let d10 = 3.0 * u * u - 4.0 * u + 1.0;
    let d01 = -6.0 * u * u + 6.0 * u;
    let d11 = 3.0 * u * u - 2.0 * u;
    let d = (d00 * y0 + d01 * y1) / h + d10 * f0 + d11 * f1;
    (v, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_harmonic_oscillator_to_high_accuracy() {
        let settings = IntegratorSettings::default();
        let grid = uniform_grid(0.0, 10.0, 0.05);
        let res = integrate_on_grid(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &grid,
            &[1.0, 0.0],
            &settings,
            |_| true,
        )
        .unwrap();
        assert!(res.truncated.is_none());
        for (i, &t) in res.times.iter().enumerate() {
            assert!((res.states[i][0] - t.cos()).abs() < 1e-8, "t = {t}");
            assert!((res.states[i][1] + t.sin()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn integrates_backwards() {
        let settings = IntegratorSettings::default();
        let grid = uniform_grid(0.0, -2.0, 0.05);
        let res = integrate_on_grid(
            |t, _y, dy| {
                dy[0] = t;
            },
            &grid,
            &[0.0],
            &settings,
            |_| true,
        )
        .unwrap();
        let last = res.states.last().unwrap()[0];
        assert!((last - 2.0).abs() < 1e-10, "got {last}");
    }

    #[test]
    fn guard_truncates_at_boundary() {
        let settings = IntegratorSettings::default();
        let grid = uniform_grid(0.0, 5.0, 0.1);
        let res = integrate_on_grid(
            |_t, _y, dy| {
                dy[0] = 1.0;
            },
            &grid,
            &[0.0],
            &settings,
            |y| y[0] < 1.234,
        )
        .unwrap();
        let t_stop = res.truncated.expect("should truncate");
        assert!((t_stop - 1.234).abs() < 1e-6, "stopped at {t_stop}");
        let y_stop = res.states.last().unwrap()[0];
        assert!(y_stop <= 1.234 + 1e-9);
    }

    #[test]
    fn forced_grid_nodes_are_hit_exactly() {
        let settings = IntegratorSettings::default();
        let grid = uniform_grid(0.0, 1.0, 0.01);
        let res = integrate_on_grid(
            |t, _y, dy| {
                dy[0] = (3.0 * t).exp();
            },
            &grid,
            &[0.0],
            &settings,
            |_| true,
        )
        .unwrap();
        assert_eq!(res.times.len(), grid.len());
        for (a, b) in res.times.iter().zip(grid.iter()) {
            assert_eq!(a, b);
        }
    }
}
