//! Dormand-Prince 5(4) integrator with per-step error control for small
//! autonomous systems.

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step, which also bounds the spacing of the
    /// recorded trajectory.
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl AdaptiveOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_max: 0.05,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Why integration stopped early, with the last accepted state.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub reason: String,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
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
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the autonomous system `y' = f(y)` from `t0` to `t_end` (either direction) and
/// returns every accepted step, starting with `(t0, y0)` and ending exactly
/// at `t_end`.
///
/// `f` may refuse a state by returning `Err`; integration then stops with
/// the last accepted state.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &AdaptiveOptions,
) -> Result<Vec<(f64, [f64; N])>, Failure<N>>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N], String>,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut out = vec![(t, y)];
    if t_end == t0 {
        return Ok(out);
    }
    let fail = |t: f64, y: [f64; N], reason: String| Failure { t, y, reason };

    let mut k = [[0.0; N]; 7];
    k[0] = f(&y).map_err(|r| fail(t, y, r))?;
    let mut h = opts.h_max.min(1e-2).min((t_end - t0).abs());
    let mut steps = 0usize;

    while (t_end - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(fail(t, y, format!("exceeded {} steps", opts.max_steps)));
        }
        steps += 1;
        let last = h >= (t_end - t).abs();
        if last {
            h = (t_end - t).abs();
        }
        let hs = h * dir;

        let mut stage_ok = true;
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate().take(s) {
                    *yi += hs * A[s][j] * kj[i];
                }
            }
            match f(&ys) {
                Ok(v) => k[s] = v,
                Err(_) => {
                    stage_ok = false;
                    break;
                }
            }
        }

        if !stage_ok {
            h *= 0.25;
            if h < opts.h_min {
                return Err(fail(
                    t,
                    y,
                    "right-hand side refused every trial stage".into(),
                ));
            }
            continue;
        }

        // The seventh stage is evaluated at the fifth-order solution.
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            for (j, kj) in k.iter().enumerate().take(6) {
                *yi += hs * A[6][j] * kj[i];
            }
        }
        let mut err = 0.0f64;
        for i in 0..N {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * hs;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / scale);
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + hs };
            y = y_new;
            out.push((t, y));
            k[0] = k[6];
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(opts.h_max);
        if h < opts.h_min && (t_end - t) * dir > 0.0 {
            return Err(fail(t, y, format!("step size fell below {:e}", opts.h_min)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = AdaptiveOptions::with_tolerance(1e-12);
        let traj = integrate(|y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], 5.0, &opts).unwrap();
        let (t, y) = *traj.last().unwrap();
        assert_eq!(t, 5.0);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let opts = AdaptiveOptions::with_tolerance(1e-11);
        let traj = integrate(
            |y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            -3.0,
            &opts,
        )
        .unwrap();
        let (t, y) = *traj.last().unwrap();
        assert_eq!(t, -3.0);
        assert!((y[0] - (-3.0f64).sin()).abs() < 1e-9);
        assert!((y[1] - (-3.0f64).cos()).abs() < 1e-9);
        assert!(traj.windows(2).all(|w| w[1].0 < w[0].0));
        assert!(traj
            .windows(2)
            .all(|w| (w[0].0 - w[1].0) <= opts.h_max + 1e-15));
    }

    #[test]
    fn refusal_reports_last_good_state() {
        let opts = AdaptiveOptions::default();
        let res = integrate(
            |y: &[f64; 1]| {
                if y[0] > 2.0 {
                    Err("too big".into())
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            10.0,
            &opts,
        );
        let failure = res.unwrap_err();
        assert!(failure.y[0] <= 2.0);
        assert!(failure.t > 1.9 && failure.t <= 2.0);
    }
}
