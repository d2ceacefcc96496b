//! Radial solutions of `σ_2(g^{−1}A_g) = 3/2` on ℝ⁴ ∖ {0}: the round sphere
//! and the footballs.
//!
//! Writing `e^{2u} g_E = e^{2h(t)} (dt² + g_{S³})` with `t = ln r`, so that
//! `u = h(t) − t`, the Schouten tensor has one radial eigenvalue
//! `e^{−2h}(−h'' + (h'² − 1)/2)` and three tangential ones
//! `e^{−2h}(1 − h'²)/2` with respect to `g`. The equation becomes
//!
//! ```text
//! h'' (h'² − 1) = e^{4h},
//! ```
//!
//! and multiplying by `h'` gives the conserved quantity
//! `K = h'⁴ − 2h'² − e^{4h}`. A football of cone order `β` has
//! `h'(∓∞) = ±(1 + β)`, hence `K = α⁴ − 2α²` with `α = 1 + β`, and its even
//! peak sits at `e^{4h(0)} = 2α² − α⁴`.

use std::io::{BufRead, Write};

use crate::conformal::{norm, ConformalFactor, Point, DIM};
use crate::error::{Error, Result};
use crate::ode::{integrate, AdaptiveOptions};
use crate::symfunc::SymmetricMatrix;

/// `|h'|` beyond which the integrator stops; the equation degenerates at 1.
pub const DEGENERACY_GUARD: f64 = 1.0 - 1e-8;

pub const DEFAULT_T_MAX: f64 = 15.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Threshold on `e^{4h}` at the truncation ends below which the tails count
/// as decayed.
pub const DECAY_THRESHOLD: f64 = 1e-10;

/// `h''` from the cylinder equation, `e^{4h} / (h'² − 1)`.
pub fn cylinder_rhs(h: f64, dh: f64) -> Result<f64> {
    if !(dh.abs() < 1.0) {
        return Err(Error::domain(format!(
            "degenerate ellipticity: |h'| = {} >= 1",
            dh.abs()
        )));
    }
    Ok(second_derivative(h, dh))
}

fn second_derivative(h: f64, dh: f64) -> f64 {
    (4.0 * h).exp() / ((dh - 1.0) * (dh + 1.0))
}

/// `h'''`, by differentiating the cylinder equation once more.
fn third_derivative(h: f64, dh: f64) -> f64 {
    let d2 = second_derivative(h, dh);
    2.0 * dh * d2 * (2.0 - d2 / ((dh - 1.0) * (dh + 1.0)))
}

/// The first integral `K = h'⁴ − 2h'² − e^{4h}`.
pub fn first_integral(h: f64, dh: f64) -> f64 {
    let d2 = dh * dh;
    d2 * d2 - 2.0 * d2 - (4.0 * h).exp()
}

/// Cone order implied by a first-integral value: the asymptotic slopes are
/// `±α` with `α² = 1 − √(1 + K)`.
pub fn beta_from_first_integral(k: f64) -> Result<f64> {
    // K = −1 (the sphere) is allowed a rounding-level undershoot.
    if !(-1.0 - 1e-12..0.0).contains(&k) {
        return Err(Error::domain(format!(
            "first integral {k} outside [-1, 0): no football has this value"
        )));
    }
    let alpha_sq = 1.0 - (1.0 + k).max(0.0).sqrt();
    Ok(alpha_sq.sqrt() - 1.0)
}

/// A tabulated radial solution `h(t)` on a strictly increasing grid of
/// cylinder times.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    grid: Vec<f64>,
    h: Vec<f64>,
    dh: Vec<f64>,
    beta: f64,
    t_max: f64,
    /// `∫_{−∞}^{t_i} e^{4h}` at each node, tail included.
    cumulative: Vec<f64>,
    /// `∫_{t_last}^{∞} e^{4h}`.
    right_tail: f64,
}

impl RadialProfile {
    /// Validates the samples and precomputes the volume integrals.
    pub fn new(grid: Vec<f64>, h: Vec<f64>, dh: Vec<f64>, beta: f64, t_max: f64) -> Result<Self> {
        let n = grid.len();
        if n < 2 || h.len() != n || dh.len() != n {
            return Err(Error::domain(format!(
                "profile needs >= 2 points with matching columns (t: {n}, h: {}, dh: {})",
                h.len(),
                dh.len()
            )));
        }
        if !(beta > -1.0 && beta <= 0.0) {
            return Err(Error::domain(format!("cone order {beta} outside (-1, 0]")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::domain(format!(
                "t_max must be positive, got {t_max}"
            )));
        }
        if grid.iter().chain(&h).chain(&dh).any(|v| !v.is_finite()) {
            return Err(Error::domain("profile values must be finite"));
        }
        if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "grid not strictly increasing at index {i}"
            )));
        }
        if let Some(i) = dh.iter().position(|d| d.abs() >= 1.0) {
            return Err(Error::domain(format!("|h'| >= 1 at t = {}", grid[i])));
        }
        let mut profile = Self {
            grid,
            h,
            dh,
            beta,
            t_max,
            cumulative: Vec::new(),
            right_tail: 0.0,
        };
        profile.integrate_volume();
        Ok(profile)
    }

    /// Builds a profile from samples alone, inferring the cone order from
    /// the first integral at the peak.
    pub fn from_samples(grid: Vec<f64>, h: Vec<f64>, dh: Vec<f64>) -> Result<Self> {
        let peak = h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::domain("empty profile"))?;
        let beta = beta_from_first_integral(first_integral(h[peak], dh[peak]))?;
        let t_max = grid
            .first()
            .zip(grid.last())
            .map(|(a, b)| a.abs().max(b.abs()))
            .unwrap_or(0.0);
        Self::new(grid, h, dh, beta, t_max)
    }

    fn integrate_volume(&mut self) {
        let n = self.grid.len();
        let left_tail = exponential_tail(self.h[0], self.dh[0], 1.0);
        let mut cumulative = Vec::with_capacity(n);
        cumulative.push(left_tail);
        for i in 0..n - 1 {
            let seg = self.segment_volume(i, self.grid[i], self.grid[i + 1]);
            cumulative.push(cumulative[i] + seg);
        }
        self.cumulative = cumulative;
        self.right_tail = exponential_tail(self.h[n - 1], self.dh[n - 1], -1.0);
    }

    /// `∫_a^b e^{4h}` within segment `i`, by 5-point Gauss-Legendre on the
    /// interpolant.
    fn segment_volume(&self, i: usize, a: f64, b: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        NODES
            .iter()
            .zip(WEIGHTS)
            .map(|(x, w)| w * (4.0 * self.interpolate(i, mid + half * x).0).exp())
            .sum::<f64>()
            * half
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn dh(&self) -> &[f64] {
        &self.dh
    }

    /// Nominal cone order at both ends.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// First and last grid times.
    pub fn t_range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// `K` at every grid point.
    pub fn first_integral_values(&self) -> Vec<f64> {
        self.h
            .iter()
            .zip(&self.dh)
            .map(|(h, d)| first_integral(*h, *d))
            .collect()
    }

    /// `max |K(t) − K(t*)|`, with `t*` the grid point closest to 0.
    pub fn first_integral_drift(&self) -> f64 {
        let k = self.first_integral_values();
        let center = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        k.iter().map(|v| (v - k[center]).abs()).fold(0.0, f64::max)
    }

    fn segment_of(&self, t: f64) -> Result<usize> {
        let (t0, t1) = self.t_range();
        if !(t >= t0 && t <= t1) {
            return Err(Error::domain(format!(
                "cylinder time {t} outside profile range [{t0}, {t1}]"
            )));
        }
        let idx = self.grid.partition_point(|&g| g <= t);
        Ok(idx.saturating_sub(1).min(self.grid.len() - 2))
    }

    /// Quintic Hermite interpolation of `h` (from `h, h', h''`) and of `h'`
    /// (from `h', h'', h'''`) within segment `i`.
    fn interpolate(&self, i: usize, t: f64) -> (f64, f64) {
        let (ta, tb) = (self.grid[i], self.grid[i + 1]);
        let dt = tb - ta;
        let s = (t - ta) / dt;
        let (ha, hb) = (self.h[i], self.h[i + 1]);
        let (pa, pb) = (self.dh[i], self.dh[i + 1]);
        let (qa, qb) = (second_derivative(ha, pa), second_derivative(hb, pb));
        let (ra, rb) = (third_derivative(ha, pa), third_derivative(hb, pb));
        let basis = quintic_hermite_basis(s);
        let blend = |y0: f64, d0: f64, c0: f64, y1: f64, d1: f64, c1: f64| {
            basis[0] * y0
                + dt * basis[1] * d0
                + dt * dt * basis[2] * c0
                + basis[3] * y1
                + dt * basis[4] * d1
                + dt * dt * basis[5] * c1
        };
        (blend(ha, pa, qa, hb, pb, qb), blend(pa, qa, ra, pb, qb, rb))
    }

    /// `(h, h', h'')` at cylinder time `t`; `h''` comes from the equation.
    pub fn state_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        let i = self.segment_of(t)?;
        let (h, dh) = self.interpolate(i, t);
        Ok((h, dh, second_derivative(h, dh)))
    }

    /// `u = h(t) − t` at cylinder time `t`.
    pub fn u_at(&self, t: f64) -> Result<f64> {
        Ok(self.state_at(t)?.0 - t)
    }

    /// `∫_{−∞}^{t} e^{4h}`, with the part beyond the first grid point taken
    /// from the exponential asymptotics.
    pub fn volume_below(&self, t: f64) -> Result<f64> {
        let i = self.segment_of(t)?;
        Ok(self.cumulative[i] + self.segment_volume(i, self.grid[i], t))
    }

    /// `∫_{−∞}^{∞} e^{4h}`.
    pub fn total_volume(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1] + self.right_tail
    }

    /// The cylinder time where `u = h − t` equals `t_u`. `u` is strictly
    /// decreasing, so the root is unique.
    pub fn locate_level(&self, t_u: f64) -> Result<f64> {
        let (t0, t1) = self.t_range();
        let u_hi = self.h[0] - t0;
        let u_lo = self.h[self.h.len() - 1] - t1;
        if !(t_u >= u_lo && t_u <= u_hi) {
            return Err(Error::domain(format!(
                "level {t_u} outside the range [{u_lo}, {u_hi}] of u on the profile"
            )));
        }
        // Node values of u decrease along the grid.
        let idx = self
            .grid
            .iter()
            .zip(&self.h)
            .position(|(t, h)| h - t <= t_u)
            .unwrap_or(self.grid.len() - 1);
        if idx == 0 {
            return Ok(t0);
        }
        let seg = idx - 1;
        let (mut a, mut b) = (self.grid[seg], self.grid[idx]);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.interpolate(seg, mid).0 - mid > t_u {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Profile CSV: header `t,h,dh,K`, 17 significant digits, increasing `t`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,h,dh,K")?;
        for i in 0..self.len() {
            let (t, h, dh) = (self.grid[i], self.h[i], self.dh[i]);
            writeln!(
                out,
                "{},{},{},{}",
                crate::io::sig17(t),
                crate::io::sig17(h),
                crate::io::sig17(dh),
                crate::io::sig17(first_integral(h, dh))
            )?;
        }
        Ok(())
    }

    /// Reads a profile CSV. The `K` column must agree with `h, dh`.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty profile file".into()))??;
        if header.trim() != "t,h,dh,K" {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let (mut grid, mut h, mut dh) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!(
                    "line {}: expected 4 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e} in {s:?}", lineno + 2)))
            };
            let (t, hv, dv, k) = (
                parse(fields[0])?,
                parse(fields[1])?,
                parse(fields[2])?,
                parse(fields[3])?,
            );
            if (k - first_integral(hv, dv)).abs() > 1e-9 * (1.0 + k.abs()) {
                return Err(Error::Parse(format!(
                    "line {}: K column inconsistent with h and dh",
                    lineno + 2
                )));
            }
            grid.push(t);
            h.push(hv);
            dh.push(dv);
        }
        Self::from_samples(grid, h, dh).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `∫ e^{4h}` beyond an end point where `h` decays linearly with slope
/// `dh`; `side = 1` for the left end, `−1` for the right end.
fn exponential_tail(h: f64, dh: f64, side: f64) -> f64 {
    let slope = side * dh;
    if slope > 0.0 {
        (4.0 * h).exp() / (4.0 * slope)
    } else {
        0.0
    }
}

fn quintic_hermite_basis(s: f64) -> [f64; 6] {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    [
        1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
        s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        10.0 * s3 - 15.0 * s4 + 6.0 * s5,
        -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
    ]
}

/// `ln sech t`, stable for large `|t|`.
fn ln_sech(t: f64) -> f64 {
    let a = t.abs();
    std::f64::consts::LN_2 - a - (-2.0 * a).exp().ln_1p()
}

/// The round sphere `h = ln sech t` on a uniform grid over `[−t_max, t_max]`.
pub fn sphere_profile(t_max: f64, step: f64) -> Result<RadialProfile> {
    if !(t_max > 0.0 && step > 0.0 && t_max.is_finite()) {
        return Err(Error::domain("t_max and step must be positive"));
    }
    let intervals = (2.0 * t_max / step).ceil() as usize;
    let grid: Vec<f64> = (0..=intervals)
        .map(|i| -t_max + 2.0 * t_max * i as f64 / intervals as f64)
        .collect();
    let h = grid.iter().map(|&t| ln_sech(t)).collect();
    let dh = grid.iter().map(|&t| -t.tanh()).collect();
    RadialProfile::new(grid, h, dh, 0.0, t_max)
}

/// Peak height `h(0) = ¼ ln(2α² − α⁴)` of the football with `α = 1 + β`.
pub fn football_peak(beta: f64) -> f64 {
    let alpha = 1.0 + beta;
    let a2 = alpha * alpha;
    0.25 * (2.0 * a2 - a2 * a2).ln()
}

/// Integrates the football of order `β` from its even peak, forward to
/// `t_max` and backward to `−t_max`, with absolute and relative tolerance
/// `tol`.
///
/// `β = 0` reproduces the round sphere only near the peak: there `K = −1`
/// sits on the boundary of the admissible range, and an error `δ` in `K`
/// moves the limiting slope to about `1 − √δ/2`. Use [`sphere_profile`]
/// for the smooth case.
pub fn football_profile(beta: f64, t_max: f64, tol: f64) -> Result<RadialProfile> {
    if !(beta > -1.0 && beta <= 0.0) {
        return Err(Error::domain(format!("cone order {beta} outside (-1, 0]")));
    }
    if !(t_max > 0.0 && t_max.is_finite() && tol > 0.0) {
        return Err(Error::domain("t_max and tol must be positive"));
    }
    let opts = AdaptiveOptions::with_tolerance(tol);
    let rhs = |y: &[f64; 2]| -> std::result::Result<[f64; 2], String> {
        if !(y[1].abs() < DEGENERACY_GUARD) {
            return Err(format!(
                "|h'| = {} reached the degeneracy guard",
                y[1].abs()
            ));
        }
        Ok([y[1], second_derivative(y[0], y[1])])
    };
    let start = [football_peak(beta), 0.0];
    let to_err = |f: crate::ode::Failure<2>| Error::Integration {
        t: f.t,
        h: f.y[0],
        dh: f.y[1],
        reason: f.reason,
    };
    let forward = integrate(rhs, 0.0, start, t_max, &opts).map_err(to_err)?;
    let backward = integrate(rhs, 0.0, start, -t_max, &opts).map_err(to_err)?;

    let n = forward.len() + backward.len() - 1;
    let (mut grid, mut h, mut dh) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for (t, y) in backward.iter().rev().chain(forward.iter().skip(1)) {
        grid.push(*t);
        h.push(y[0]);
        dh.push(y[1]);
    }
    RadialProfile::new(grid, h, dh, beta, t_max)
}

/// The conformal factor `u(x) = h(ln|x|) − ln|x|` of a radial profile.
#[derive(Debug, Clone, Copy)]
pub struct RadialFactor<'a> {
    profile: &'a RadialProfile,
}

const ORIGIN: [Point; 1] = [[0.0; DIM]];

pub fn reconstruct_factor(profile: &RadialProfile) -> RadialFactor<'_> {
    RadialFactor { profile }
}

impl RadialFactor<'_> {
    pub fn profile(&self) -> &RadialProfile {
        self.profile
    }

    /// `(r, h, h', h'')` at `x`.
    fn radial_state(&self, x: &Point) -> Result<(f64, f64, f64, f64)> {
        let r = norm(x);
        let undefined = |reason: String| Error::Undefined { point: *x, reason };
        if r == 0.0 {
            return Err(undefined("the origin is a cone point".into()));
        }
        let (h, dh, d2h) = self
            .profile
            .state_at(r.ln())
            .map_err(|e| undefined(e.to_string()))?;
        Ok((r, h, dh, d2h))
    }
}

impl ConformalFactor for RadialFactor<'_> {
    fn value_at(&self, x: &Point) -> Result<f64> {
        let (r, h, _, _) = self.radial_state(x)?;
        Ok(h - r.ln())
    }

    fn gradient_at(&self, x: &Point) -> Result<Point> {
        let (r, _, dh, _) = self.radial_state(x)?;
        let du_dr = (dh - 1.0) / r;
        Ok(x.map(|xi| du_dr * xi / r))
    }

    fn hessian_at(&self, x: &Point) -> Result<SymmetricMatrix> {
        let (r, _, dh, d2h) = self.radial_state(x)?;
        let du_dr = (dh - 1.0) / r;
        let d2u_dr2 = (d2h - (dh - 1.0)) / (r * r);
        let tangential = du_dr / r;
        Ok(SymmetricMatrix::from_upper(DIM, |i, j| {
            let nn = x[i] * x[j] / (r * r);
            let id = if i == j { 1.0 } else { 0.0 };
            d2u_dr2 * nn + tangential * (id - nn)
        }))
    }

    fn singular_points(&self) -> &[Point] {
        &ORIGIN
    }
}

/// Slopes at the truncation ends and the cone orders they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticData {
    pub slope_minus: f64,
    pub slope_plus: f64,
    /// `slope_minus − 1`, the cone order at the origin.
    pub beta_zero: f64,
    /// `−slope_plus − 1`, the cone order at infinity.
    pub beta_infinity: f64,
    /// `r · H` for the level sphere through the first grid point, with
    /// `H = −div(∇u/|∇u|)`.
    pub mean_curvature_ratio: f64,
    /// Whether `e^{4h}` is below [`DECAY_THRESHOLD`] at both ends.
    pub decayed: bool,
}

pub fn measured_asymptotics(profile: &RadialProfile) -> Result<AsymptoticData> {
    let n = profile.len();
    let slope_minus = profile.dh[0];
    let slope_plus = profile.dh[n - 1];
    let decayed = (4.0 * profile.h[0]).exp() < DECAY_THRESHOLD
        && (4.0 * profile.h[n - 1]).exp() < DECAY_THRESHOLD;

    let u = reconstruct_factor(profile);
    let r = profile.grid[0].exp();
    let x = [r, 0.0, 0.0, 0.0];
    let g = u.gradient_at(&x)?;
    let hess = u.hessian_at(&x)?;
    let grad_norm = norm(&g);
    let g_hess_g: f64 = (0..DIM)
        .flat_map(|i| (0..DIM).map(move |j| (i, j)))
        .map(|(i, j)| g[i] * hess.get(i, j) * g[j])
        .sum();
    // div(∇u/|∇u|) = Δu/|∇u| − ∇uᵀ∇²u∇u/|∇u|³
    let div_normal = hess.trace() / grad_norm - g_hess_g / grad_norm.powi(3);
    let mean_curvature = -div_normal;

    Ok(AsymptoticData {
        slope_minus,
        slope_plus,
        beta_zero: slope_minus - 1.0,
        beta_infinity: -slope_plus - 1.0,
        mean_curvature_ratio: r * mean_curvature,
        decayed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{sigma_k_curvature, RoundSphereFactor};

    #[test]
    fn rhs_and_first_integral_at_the_sphere_peak() {
        assert_eq!(cylinder_rhs(0.0, 0.0).unwrap(), -1.0);
        assert_eq!(first_integral(0.0, 0.0), -1.0);
        assert!(cylinder_rhs(0.0, 1.0).is_err());
        assert!(cylinder_rhs(0.0, -1.5).is_err());
    }

    #[test]
    fn football_peak_first_integral() {
        let beta = -0.5;
        let h0 = football_peak(beta);
        assert!((h0 - 0.25 * 0.4375f64.ln()).abs() < 1e-15);
        assert!((first_integral(h0, 0.0) + 0.4375).abs() < 1e-15);
        assert!((beta_from_first_integral(-0.4375).unwrap() - beta).abs() < 1e-15);
    }

    #[test]
    fn sphere_profile_closed_form() {
        let p = sphere_profile(15.0, 0.01).unwrap();
        let mid = p.grid().iter().position(|t| t.abs() < 1e-12).unwrap();
        assert_eq!(p.h()[mid], 0.0);
        assert_eq!(p.dh()[mid], 0.0);
        for k in p.first_integral_values() {
            assert!((k + 1.0).abs() < 1e-14);
        }
        // u(r) = ln(2/(1+r²)) with r = e^t.
        for i in (0..p.len()).step_by(37) {
            let t = p.grid()[i];
            let u = p.h()[i] - t;
            let expected = (2.0 / (1.0 + (2.0 * t).exp())).ln();
            assert!((u - expected).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn sphere_profile_satisfies_the_equation() {
        let p = sphere_profile(5.0, 0.01).unwrap();
        let step = 1e-3;
        for i in (1..p.len() - 1).step_by(50) {
            let t = p.grid()[i];
            let d2_fd = (ln_sech(t + step) - 2.0 * ln_sech(t) + ln_sech(t - step)) / (step * step);
            let rhs = cylinder_rhs(p.h()[i], p.dh()[i]).unwrap();
            assert!((d2_fd - rhs).abs() < 1e-6, "t = {t}: {d2_fd} vs {rhs}");
        }
    }

    #[test]
    fn sphere_football_matches_closed_form_near_the_peak() {
        let p = football_profile(0.0, 3.0, 1e-10).unwrap();
        for (t, h) in p.grid().iter().zip(p.h()) {
            assert!((h - ln_sech(*t)).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn sphere_football_loses_the_slope_far_out() {
        // A first-integral error δ shifts the limiting slope by about √δ/2.
        let p = football_profile(0.0, 15.0, 1e-10).unwrap();
        let end = p.dh()[p.len() - 1];
        assert!(end > -1.0 + 1e-6 && end < -1.0 + 1e-4, "{end}");
    }

    #[test]
    fn football_basic_shape() {
        let p = football_profile(-0.5, 15.0, 1e-10).unwrap();
        let (i0, _) = p
            .grid()
            .iter()
            .enumerate()
            .find(|(_, t)| **t == 0.0)
            .unwrap();
        assert!((p.h()[i0] - football_peak(-0.5)).abs() < 1e-15);
        assert!((p.dh()[0] - 0.5).abs() < 1e-9);
        assert!((p.dh()[p.len() - 1] + 0.5).abs() < 1e-9);
        assert!(
            p.first_integral_drift() < 1e-8,
            "drift {}",
            p.first_integral_drift()
        );
        assert!(p.dh().iter().all(|d| d.abs() < 1.0));
        for i in 0..p.len() {
            assert!(cylinder_rhs(p.h()[i], p.dh()[i]).unwrap() < 0.0);
            assert!(p.dh()[i] - 1.0 < 0.0);
        }
    }

    #[test]
    fn football_is_even() {
        let p = football_profile(-0.3, 12.0, 1e-10).unwrap();
        for &t in &[0.5, 1.7, 4.2, 9.9] {
            let (a, da, _) = p.state_at(t).unwrap();
            let (b, db, _) = p.state_at(-t).unwrap();
            assert!((a - b).abs() < 1e-9, "t = {t}");
            assert!((da + db).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn football_argument_checks() {
        assert!(matches!(
            football_profile(0.1, 15.0, 1e-10),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            football_profile(-1.0, 15.0, 1e-10),
            Err(Error::Domain(_))
        ));
        assert!(football_profile(-0.5, 15.0, 0.0).is_err());
        assert!(football_profile(-0.5, -1.0, 1e-10).is_err());
    }

    #[test]
    fn interpolation_reproduces_the_sphere() {
        let p = sphere_profile(15.0, 0.05).unwrap();
        for &t in &[-12.345, -3.21, -0.013, 0.77, 5.5, 14.9] {
            let (h, dh, d2h) = p.state_at(t).unwrap();
            assert!((h - ln_sech(t)).abs() < 1e-10, "t = {t}");
            assert!((dh + t.tanh()).abs() < 1e-10, "t = {t}");
            assert!((d2h + 1.0 / t.cosh().powi(2)).abs() < 1e-10, "t = {t}");
        }
        assert!(p.state_at(15.5).is_err());
    }

    #[test]
    fn reconstructed_sphere_factor() {
        let p = sphere_profile(15.0, 0.01).unwrap();
        let u = reconstruct_factor(&p);
        for &r in &[1e-5, 0.01, 0.3, 1.0, 2.5, 40.0, 1e5] {
            let x = [0.0, r * 0.6, 0.0, r * 0.8];
            let expected = RoundSphereFactor.value_at(&x).unwrap();
            assert!((u.value_at(&x).unwrap() - expected).abs() < 1e-8, "r = {r}");
        }
        assert!(matches!(
            u.value_at(&[0.0; 4]),
            Err(Error::Undefined { .. })
        ));
        assert!(u.value_at(&[1e7, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn reconstructed_football_is_conic_at_the_origin() {
        let p = football_profile(-0.5, 15.0, 1e-10).unwrap();
        let u = reconstruct_factor(&p);
        let mut vals = Vec::new();
        for k in [6.0f64, 8.0, 10.0, 12.0] {
            let r = (-k).exp();
            vals.push(u.value_at(&[r, 0.0, 0.0, 0.0]).unwrap() - (-0.5) * r.ln());
        }
        // u − β ln|x| settles to a constant.
        assert!((vals[3] - vals[2]).abs() < 1e-8);
        assert!(vals.iter().all(|v| v.abs() < 10.0));
    }

    #[test]
    fn reconstructed_football_has_constant_curvature() {
        let p = football_profile(-0.5, 15.0, 1e-10).unwrap();
        let u = reconstruct_factor(&p);
        for i in 0..20 {
            let t = -5.0 + 0.5 * i as f64 + 0.013;
            let r = f64::exp(t);
            let x = [r * 0.5, r * 0.5, -r * 0.5, r * 0.5];
            let s2 = sigma_k_curvature(&u, &x, 2).unwrap();
            assert!((s2 - 1.5).abs() < 1e-6, "t = {t}: {s2}");
        }
    }

    #[test]
    fn asymptotics() {
        let p = football_profile(-0.5, 15.0, 1e-10).unwrap();
        let a = measured_asymptotics(&p).unwrap();
        assert!((a.beta_zero + 0.5).abs() < 1e-6);
        assert!((a.beta_infinity + 0.5).abs() < 1e-6);
        assert!((a.mean_curvature_ratio - 3.0).abs() < 1e-9);
        assert!(a.decayed);

        let s = sphere_profile(15.0, 0.01).unwrap();
        let a = measured_asymptotics(&s).unwrap();
        assert!(a.beta_zero.abs() < 1e-9);
        assert!(a.beta_infinity.abs() < 1e-9);
        assert!((a.mean_curvature_ratio - 3.0).abs() < 1e-9);
    }

    #[test]
    fn slow_decay_is_flagged() {
        let p = football_profile(-0.9, 15.0, 1e-10).unwrap();
        assert!(!measured_asymptotics(&p).unwrap().decayed);
    }

    #[test]
    fn level_location_inverts_u() {
        let p = football_profile(-0.4, 15.0, 1e-10).unwrap();
        for &t in &[-14.0, -3.3, 0.0, 2.2, 13.1] {
            let level = p.u_at(t).unwrap();
            let found = p.locate_level(level).unwrap();
            assert!((found - t).abs() < 1e-9, "{t} vs {found}");
        }
        assert!(p.locate_level(1e3).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(
            RadialProfile::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 1.0], 0.0, 1.0).is_err()
        );
        assert!(
            RadialProfile::new(vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], 0.0, 1.0).is_err()
        );
        assert!(RadialProfile::new(vec![0.0], vec![0.0], vec![0.0], 0.0, 1.0).is_err());
        assert!(
            RadialProfile::new(vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0], 0.5, 1.0).is_err()
        );
    }

    #[test]
    fn csv_round_trip() {
        let p = football_profile(-0.25, 6.0, 1e-10).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,h,dh,K\n"));
        let q = RadialProfile::read_csv(&buf[..]).unwrap();
        assert_eq!(q.grid(), p.grid());
        assert_eq!(q.h(), p.h());
        assert_eq!(q.dh(), p.dh());
        assert!((q.beta() + 0.25).abs() < 1e-9);
    }

    #[test]
    fn corrupt_csv_is_rejected() {
        let bad = "t,h,dh,K\n0.0,0.0,0.0,-1.0\n1.0,0.1\n";
        assert!(matches!(
            RadialProfile::read_csv(bad.as_bytes()),
            Err(Error::Parse(_))
        ));
        let bad_k = "t,h,dh,K\n0.0,0.0,0.0,-0.5\n1.0,-0.5,-0.7,-1.0\n";
        assert!(matches!(
            RadialProfile::read_csv(bad_k.as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(RadialProfile::read_csv("x,y\n".as_bytes()).is_err());
        assert!(RadialProfile::read_csv("".as_bytes()).is_err());
    }
}
