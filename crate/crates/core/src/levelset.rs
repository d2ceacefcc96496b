//! Level-set quantities of a radial conformal factor and the monotone
//! quantity `M`.
//!
//! For `u = h(t) − t` the superlevel set `S(t_u) = {u ≥ t_u}` is the ball of
//! radius `r = e^t`, where `t` is the cylinder time with `u(t) = t_u`, and
//! the level set `L(t_u)` is its boundary sphere. With `w = 1 − h'` one has
//! `|∇u| = w/r` and `H = −div(∇u/|∇u|) = 3/r` on `L`. Averages `⨍` divide by
//! `|S³|`, so that
//!
//! ```text
//! A = ∫_{−∞}^{t} e^{4h},  B = r⁴/4,  C = e^{4t_u} B = e^{4h}/4,
//! Σ₀ = w³,  Σ₁ = 6w² − 3w³,  D = (3/2)w² − w³/2,  z = −w.
//! ```
//!
//! Expanding `M = (2/3)D + (4/9)Dz + z⁴/36 − C` gives
//! `w² − w³ + w⁴/4 − e^{4h}/4 = ((1 − h'²)² − e^{4h})/4 = (K + 1)/4`, with `K`
//! the first integral of the profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conformal::{ConformalFactor, Point, DIM};
use crate::divisor::defect;
use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use crate::symfunc::sphere_volume;

pub mod csv {
    use std::io::Write;

    use super::LevelSetSummary;
    use crate::error::Result;
    use crate::io::sig17;

    /// Summary CSV: header `t_u,A,B,C,D,z,M`, rows by increasing `t_u`.
    pub fn write_summaries<W: Write>(rows: &[LevelSetSummary], mut out: W) -> Result<()> {
        writeln!(out, "t_u,A,B,C,D,z,M")?;
        for s in rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                sig17(s.t_u),
                sig17(s.a),
                sig17(s.b),
                sig17(s.c),
                sig17(s.d),
                sig17(s.z),
                sig17(s.m)
            )?;
        }
        Ok(())
    }
}

/// Number of levels in the default grid.
pub const DEFAULT_LEVELS: usize = 400;

/// Levels are kept where `e^{4h}` exceeds this.
pub const LEVEL_FLOOR: f64 = 1e-14;

/// Cylinder-time margin kept from each end of the profile.
pub const END_MARGIN: f64 = 0.5;

/// Largest step used for derivatives in `t_u`.
pub const DERIVATIVE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetSummary {
    pub t_u: f64,
    /// Cylinder time `ln r` of the level sphere.
    pub cylinder_t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub d: f64,
    pub z: f64,
    pub m: f64,
}

pub fn summary_at(p: &RadialProfile, t_u: f64) -> Result<LevelSetSummary> {
    let t = p.locate_level(t_u)?;
    let (h, dh, _) = p.state_at(t)?;
    let w = 1.0 - dh;
    let e4h = (4.0 * h).exp();
    let sigma0 = w.powi(3);
    let sigma1 = 6.0 * w * w - 3.0 * sigma0;
    let d = 0.25 * (sigma0 + sigma1);
    let z = -w;
    let c = 0.25 * e4h;
    Ok(LevelSetSummary {
        t_u,
        cylinder_t: t,
        a: p.volume_below(t)?,
        b: 0.25 * (4.0 * t).exp(),
        c,
        sigma0,
        sigma1,
        d,
        z,
        m: 2.0 / 3.0 * d + 4.0 / 9.0 * d * z + z.powi(4) / 36.0 - c,
    })
}

/// `n` uniformly spaced levels, increasing, spanning the part of the profile
/// at least [`END_MARGIN`] away from its ends where `e^{4h} ≥ LEVEL_FLOOR`.
pub fn level_grid(p: &RadialProfile, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::domain("level grid needs at least 2 points"));
    }
    let (t0, t1) = p.t_range();
    let inside: Vec<f64> = p
        .grid()
        .iter()
        .zip(p.h())
        .filter(|(t, h)| {
            **t >= t0 + END_MARGIN && **t <= t1 - END_MARGIN && (4.0 * **h).exp() >= LEVEL_FLOOR
        })
        .map(|(t, _)| *t)
        .collect();
    let (lo, hi) = match (inside.first(), inside.last()) {
        (Some(a), Some(b)) if b > a => (*a, *b),
        _ => return Err(Error::domain("profile too short for a level grid")),
    };
    // u decreases in t, so the smallest level sits at the largest time.
    let (u_min, u_max) = (p.u_at(hi)?, p.u_at(lo)?);
    Ok((0..n)
        .map(|i| u_min + (u_max - u_min) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Derivatives in `t_u` of the summary quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDerivatives {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub z: f64,
    pub m: f64,
}

/// Richardson-extrapolated central differences of the summary at `t_u`
/// with step `delta`.
pub fn derivatives_at(p: &RadialProfile, t_u: f64, delta: f64) -> Result<LevelDerivatives> {
    let central = |step: f64| -> Result<[f64; 5]> {
        let plus = summary_at(p, t_u + step)?;
        let minus = summary_at(p, t_u - step)?;
        let q = |s: &LevelSetSummary| [s.a, s.c, s.d, s.z, s.m];
        let (qp, qm) = (q(&plus), q(&minus));
        Ok(std::array::from_fn(|i| (qp[i] - qm[i]) / (2.0 * step)))
    };
    let coarse = central(delta)?;
    let fine = central(0.5 * delta)?;
    let r: [f64; 5] = std::array::from_fn(|i| (4.0 * fine[i] - coarse[i]) / 3.0);
    Ok(LevelDerivatives {
        a: r[0],
        c: r[1],
        d: r[2],
        z: r[3],
        m: r[4],
    })
}

fn derivative_step(levels: &[f64], t_u: f64) -> f64 {
    let (lo, hi) = (levels[0], levels[levels.len() - 1]);
    let room = (t_u - lo).min(hi - t_u);
    if room > 0.0 {
        DERIVATIVE_STEP.min(0.25 * room)
    } else {
        DERIVATIVE_STEP
    }
}

/// Deviations of the end values from their limits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LimitErrors {
    /// `|z(end) − β|` at the largest level.
    pub z_end: f64,
    /// `|z(start) + 2 + β|` at the smallest level.
    pub z_start: f64,
    /// `|D(end) − ((3/2)β² − |β|³/2)|`.
    pub d_end: f64,
    /// `|D(start) − ((3/2)(2+β)² − (2+β)³/2)|`.
    pub d_start: f64,
    /// `C` at the largest level.
    pub c_end: f64,
    /// `C` at the smallest level.
    pub c_start: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    /// `sup |C′ − A′ − 4C|`.
    pub max_abs_ca: f64,
    /// `sup |A − (2/3)(D − D(+∞))|`.
    pub max_abs_ad: f64,
    /// `sup |A′ − (2/3)D′|`.
    pub max_abs_da_dd: f64,
    pub min_m_slope: f64,
    pub m_spread: f64,
    pub m_mean: f64,
    pub limit_errors: LimitErrors,
    pub summaries: Vec<LevelSetSummary>,
}

/// `D(+∞) = (3/2)β² − |β|³/2`, the defect of the order at the origin.
pub fn d_plus_infinity(beta: f64) -> f64 {
    1.5 * beta * beta - 0.5 * beta.abs().powi(3)
}

/// `D(−∞) = (3/2)(2+β)² − (2+β)³/2`.
pub fn d_minus_infinity(beta: f64) -> f64 {
    let a = 2.0 + beta;
    1.5 * a * a - 0.5 * a.powi(3)
}

/// Evaluates the level-set identities over `levels`; derivative-based
/// entries use the levels in `interior`.
pub fn relation_report_on(
    p: &RadialProfile,
    levels: &[f64],
    interior: std::ops::Range<usize>,
) -> Result<RelationReport> {
    if levels.len() < 10 {
        return Err(Error::domain("relation report needs at least 10 levels"));
    }
    if interior.is_empty() || interior.end > levels.len() {
        return Err(Error::domain("interior range outside the level grid"));
    }
    let beta = p.beta();
    let d_plus = d_plus_infinity(beta);
    let summaries = levels
        .par_iter()
        .map(|&t| summary_at(p, t))
        .collect::<Result<Vec<_>>>()?;
    let derivs = levels[interior.clone()]
        .par_iter()
        .map(|&t| derivatives_at(p, t, derivative_step(levels, t)))
        .collect::<Result<Vec<_>>>()?;

    let mut max_abs_ca = 0.0f64;
    let mut max_abs_ad = 0.0f64;
    let mut max_abs_da_dd = 0.0f64;
    let mut min_m_slope = f64::INFINITY;
    for (s, dv) in summaries[interior].iter().zip(&derivs) {
        max_abs_ca = max_abs_ca.max((dv.c - dv.a - 4.0 * s.c).abs());
        max_abs_ad = max_abs_ad.max((s.a - 2.0 / 3.0 * (s.d - d_plus)).abs());
        max_abs_da_dd = max_abs_da_dd.max((dv.a - 2.0 / 3.0 * dv.d).abs());
        min_m_slope = min_m_slope.min(dv.m);
    }
    let m_max = summaries
        .iter()
        .map(|s| s.m)
        .fold(f64::NEG_INFINITY, f64::max);
    let m_min = summaries.iter().map(|s| s.m).fold(f64::INFINITY, f64::min);
    let m_mean = summaries.iter().map(|s| s.m).sum::<f64>() / summaries.len() as f64;

    let first = summaries[0];
    let last = summaries[summaries.len() - 1];
    let limit_errors = LimitErrors {
        z_end: (last.z - beta).abs(),
        z_start: (first.z + 2.0 + beta).abs(),
        d_end: (last.d - d_plus).abs(),
        d_start: (first.d - d_minus_infinity(beta)).abs(),
        c_end: last.c,
        c_start: first.c,
    };
    Ok(RelationReport {
        max_abs_ca,
        max_abs_ad,
        max_abs_da_dd,
        min_m_slope,
        m_spread: m_max - m_min,
        m_mean,
        limit_errors,
        summaries,
    })
}

/// [`relation_report_on`] over `levels`, with derivatives at every level
/// except the two ends.
pub fn relation_report(p: &RadialProfile, levels: &[f64]) -> Result<RelationReport> {
    relation_report_on(p, levels, 1..levels.len().saturating_sub(1))
}

/// Index range of the central 90% of a grid of `n` levels.
pub fn interior_90(n: usize) -> std::ops::Range<usize> {
    let cut = n / 20;
    cut..n - cut
}

/// `z′ ⨍σ₁(Ã)|∇u| (zA′)² / ((3/2)(4C)³)` at level `t_u`, with `z′` and `A′`
/// by central differences and `⨍σ₁(Ã)|∇u| = (3/2)w²(2 − w)` on the round
/// level sphere. Equals 1 on radial solutions.
///
/// The step in `t_u` is `DERIVATIVE_STEP · w`, i.e. about `DERIVATIVE_STEP`
/// in cylinder time, since `du/dt = −w`.
pub fn key_inequality_ratio(p: &RadialProfile, t_u: f64) -> Result<f64> {
    let s = summary_at(p, t_u)?;
    let w = -s.z;
    let dv = derivatives_at(p, t_u, DERIVATIVE_STEP * w)?;
    let sigma1_flux = 1.5 * w * w * (2.0 - w);
    let za = s.z * dv.a;
    let lhs = dv.z * sigma1_flux * za * za;
    let rhs = 1.5 * (4.0 * s.c).powi(3);
    if !(rhs > f64::MIN_POSITIVE) {
        return Err(Error::domain(format!(
            "right side underflows at t_u = {t_u} (C = {})",
            s.c
        )));
    }
    Ok(lhs / rhs)
}

/// `(1/|S³|) ∫ σ₂(g) dv_g = (3/2) ∫ e^{4h} dt` over the whole cylinder.
pub fn gbc_from_profile(p: &RadialProfile) -> f64 {
    1.5 * p.total_volume()
}

/// Sanity value: `2 − 2f(β)`, the total for a football with equal orders at
/// both ends.
pub fn football_gbc(beta: f64) -> Result<f64> {
    Ok(2.0 - 2.0 * defect(beta, 4)?)
}

pub const MIN_SAMPLES: usize = 10_000;
const CHUNK: usize = 1 << 15;
const BOUNDARY_PROBES: usize = 4096;

/// Monte-Carlo estimates of `A` and `B` with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VolumeEstimate {
    pub a: f64,
    pub a_se: f64,
    pub b: f64,
    pub b_se: f64,
    pub samples: usize,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    weight: f64,
    weight_sq: f64,
    hits: f64,
}

/// Estimates `A(t_u) = ⨍_{S} e^{4u}` and `B(t_u) = ⨍_{S} 1` by uniform
/// sampling of the cube `[−half_width, half_width]⁴`.
///
/// Chunk `k` draws from the ChaCha8 stream `k` of `seed` and chunks are
/// summed in order, so the result does not depend on thread scheduling.
/// Fails when `u ≥ t_u` somewhere on the cube boundary (probed at random
/// points of each face), since the superlevel set then leaks out of the
/// box.
pub fn montecarlo_volume_check(
    u: &dyn ConformalFactor,
    t_u: f64,
    seed: u64,
    n_samples: usize,
    half_width: f64,
) -> Result<VolumeEstimate> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::domain("sampling half-width must be positive"));
    }
    check_boundary(u, t_u, seed, half_width)?;

    let chunks = n_samples.div_ceil(CHUNK);
    let partial = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let count = CHUNK.min(n_samples - k * CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                let x: Point = std::array::from_fn(|_| rng.random_range(-half_width..half_width));
                let v = u.value_at(&x)?;
                if v >= t_u {
                    let wt = (4.0 * v).exp();
                    m.weight += wt;
                    m.weight_sq += wt * wt;
                    m.hits += 1.0;
                }
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = partial.iter().fold(Moments::default(), |acc, m| Moments {
        weight: acc.weight + m.weight,
        weight_sq: acc.weight_sq + m.weight_sq,
        hits: acc.hits + m.hits,
    });

    let n = n_samples as f64;
    let scale = (2.0 * half_width).powi(DIM as i32) / sphere_volume(3);
    let mean_se = |sum: f64, sum_sq: f64| {
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
        (mean * scale, (var / n).sqrt() * scale)
    };
    let (a, a_se) = mean_se(total.weight, total.weight_sq);
    let (b, b_se) = mean_se(total.hits, total.hits);
    Ok(VolumeEstimate {
        a,
        a_se,
        b,
        b_se,
        samples: n_samples,
    })
}

fn check_boundary(u: &dyn ConformalFactor, t_u: f64, seed: u64, half_width: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for probe in 0..BOUNDARY_PROBES {
        let axis = probe % DIM;
        let side = if (probe / DIM).is_multiple_of(2) {
            half_width
        } else {
            -half_width
        };
        let mut x: Point = std::array::from_fn(|_| rng.random_range(-half_width..=half_width));
        x[axis] = side;
        if u.value_at(&x)? >= t_u {
            return Err(Error::domain(format!(
                "superlevel set {{u >= {t_u}}} reaches the sampling box boundary at {x:?}"
            )));
        }
    }
    Ok(())
}
