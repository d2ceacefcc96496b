//! The acceptance checks, grouped into suites by module.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conformal::{
    divergence_residual, sigma_k_curvature, ConformalFactor, CubicPolynomial,
    FiniteDifferenceConfig, Point, RoundSphereFactor, Scheme,
};
use crate::divisor::{
    classify, defect, football_invariant, reflection_identity_gap, ConicDivisor, Kind,
    DEFAULT_CRITICAL_EPS,
};
use crate::error::{Error, Result};
use crate::io::Sig17;
use crate::levelset::{
    gbc_from_profile, interior_90, key_inequality_ratio, level_grid, montecarlo_volume_check,
    relation_report_on, summary_at, RelationReport, DEFAULT_LEVELS,
};
use crate::radial::{football_profile, reconstruct_factor, sphere_profile, RadialProfile};
use crate::symfunc::{newton_tensor, sigma_k_matrix, SymmetricMatrix};

pub const DEFAULT_SEED: u64 = 20_241_017;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

const T_MAX: f64 = 15.0;
const TOL: f64 = 1e-10;
const SPHERE_STEP: f64 = 0.01;
const FOOTBALL_BETAS: [f64; 3] = [-0.2, -0.5, -0.8];
const DRIFT_BETAS: [f64; 5] = [-0.1, -0.3, -0.5, -0.7, -0.9];
const LIMIT_BETAS: [f64; 2] = [-0.2, -0.5];
const MC_BETA: f64 = -0.3;
const MC_HALF_WIDTH: f64 = 1.25;
/// Sampled radii and key-ratio levels stay where `e^{4h}` exceeds this.
const SAMPLE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Symfunc,
    Conformal,
    Divisor,
    Radial,
    Levelset,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Symfunc => "symfunc",
            Suite::Conformal => "conformal",
            Suite::Divisor => "divisor",
            Suite::Radial => "radial",
            Suite::Levelset => "levelset",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "symfunc" => Suite::Symfunc,
            "conformal" => Suite::Conformal,
            "divisor" => Suite::Divisor,
            "radial" => Suite::Radial,
            "levelset" => Suite::Levelset,
            other => return Err(Error::Parse(format!("unknown suite {other:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub value: Sig17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Sig17>,
    pub tolerance: Sig17,
    pub label: String,
}

impl Check {
    /// Passes when `|value − expected| ≤ tol`.
    pub fn near(
        criterion: u8,
        name: impl Into<String>,
        value: f64,
        expected: f64,
        tol: f64,
    ) -> Self {
        let name = name.into();
        Self {
            criterion,
            passed: (value - expected).abs() <= tol,
            label: format!("{name}={value:.6}±{}", short_exp(tol)),
            name,
            value: Sig17(value),
            expected: Some(Sig17(expected)),
            tolerance: Sig17(tol),
        }
    }

    /// Passes when `value < bound`. NaN fails.
    pub fn below(criterion: u8, name: impl Into<String>, value: f64, bound: f64) -> Self {
        let name = name.into();
        Self {
            criterion,
            passed: value < bound,
            label: format!("{name}={value:.3e}<{bound:e}"),
            name,
            value: Sig17(value),
            expected: None,
            tolerance: Sig17(bound),
        }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(criterion: u8, name: impl Into<String>, value: f64, bound: f64) -> Self {
        let name = name.into();
        Self {
            criterion,
            passed: value >= bound,
            label: format!("{name}={value:.4}>={bound:e}"),
            name,
            value: Sig17(value),
            expected: None,
            tolerance: Sig17(bound),
        }
    }

    /// A yes/no condition; `value` counts the violations.
    pub fn holds(criterion: u8, name: impl Into<String>, failures: usize, detail: &str) -> Self {
        let name = name.into();
        Self {
            criterion,
            passed: failures == 0,
            label: if detail.is_empty() {
                format!("{name}: {failures} failures")
            } else {
                format!("{name}: {failures} failures ({detail})")
            },
            name,
            value: Sig17(failures as f64),
            expected: None,
            tolerance: Sig17(0.0),
        }
    }

    fn error(criterion: u8, name: &str, err: &Error) -> Self {
        Self {
            criterion,
            name: name.to_string(),
            passed: false,
            value: Sig17(f64::NAN),
            expected: None,
            tolerance: Sig17(f64::NAN),
            label: format!("{name}: {err}"),
        }
    }
}

/// `1e-6` stays `1e-6`; measured tolerances get four significant digits.
fn short_exp(x: f64) -> String {
    let plain = format!("{x:e}");
    if plain.len() <= 6 {
        plain
    } else {
        format!("{x:.3e}")
    }
}

fn guarded(criterion: u8, name: &str, f: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    f().unwrap_or_else(|e| vec![Check::error(criterion, name, &e)])
}

fn sphere() -> Result<RadialProfile> {
    sphere_profile(T_MAX, SPHERE_STEP)
}

fn football(beta: f64) -> Result<RadialProfile> {
    football_profile(beta, T_MAX, TOL)
}

/// The sphere followed by the footballs of `betas`, labelled.
fn profiles(betas: &[f64]) -> Result<Vec<(String, RadialProfile)>> {
    let mut out = vec![("sphere".to_string(), sphere()?)];
    for &b in betas {
        out.push((format!("football({b})"), football(b)?));
    }
    Ok(out)
}

fn report(p: &RadialProfile) -> Result<RelationReport> {
    let levels = level_grid(p, DEFAULT_LEVELS)?;
    relation_report_on(p, &levels, interior_90(levels.len()))
}

/// Cylinder-time window where `e^{4h} ≥ SAMPLE_FLOOR`.
fn sample_window(p: &RadialProfile) -> Result<(f64, f64)> {
    let inside: Vec<f64> = p
        .grid()
        .iter()
        .zip(p.h())
        .filter(|(_, h)| (4.0 * **h).exp() >= SAMPLE_FLOOR)
        .map(|(t, _)| *t)
        .collect();
    match (inside.first(), inside.last()) {
        (Some(a), Some(b)) if b > a => Ok((*a, *b)),
        _ => Err(Error::domain("profile has no sampling window")),
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let x: Point = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return x.map(|v| v / n);
        }
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Smooth total curvature equals 2.
pub fn criterion_1() -> Vec<Check> {
    guarded(1, "gbc_sphere", || {
        Ok(vec![Check::near(
            1,
            "gbc_sphere",
            gbc_from_profile(&sphere()?),
            2.0,
            1e-6,
        )])
    })
}

/// Conic totals equal `2 − 2f(β)`.
pub fn criterion_2() -> Vec<Check> {
    FOOTBALL_BETAS
        .iter()
        .flat_map(|&b| {
            let name = format!("gbc_football({b})");
            guarded(2, &name.clone(), || {
                let expected = 2.0 - (b.powi(3) + 3.0 * b * b);
                Ok(vec![Check::near(
                    2,
                    name,
                    gbc_from_profile(&football(b)?),
                    expected,
                    1e-6,
                )])
            })
        })
        .collect()
}

/// `σ₂` of every reconstructed profile is `3/2` at random radii.
pub fn criterion_3(cfg: &VerifyConfig) -> Vec<Check> {
    guarded(3, "sigma2_constancy", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut checks = Vec::new();
        for (label, p) in profiles(&FOOTBALL_BETAS)? {
            let (lo, hi) = sample_window(&p)?;
            let u = reconstruct_factor(&p);
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let r = rng.random_range(lo..hi).exp();
                let x = random_direction(&mut rng).map(|v| r * v);
                worst = worst.max((sigma_k_curvature(&u, &x, 2)? - 1.5).abs());
            }
            checks.push(Check::below(3, format!("sigma2_dev_{label}"), worst, 1e-6));
        }
        Ok(checks)
    })
}

/// First-integral drift over `[−15, 15]` at tolerance `1e-10`.
pub fn criterion_4() -> Vec<Check> {
    DRIFT_BETAS
        .iter()
        .flat_map(|&b| {
            let name = format!("k_drift({b})");
            guarded(4, &name.clone(), || {
                Ok(vec![Check::below(
                    4,
                    name,
                    football(b)?.first_integral_drift(),
                    1e-8,
                )])
            })
        })
        .collect()
}

/// `C′ = A′ + 4C` and `A = (2/3)(D − D(+∞))` on the interior levels.
pub fn criterion_5() -> Vec<Check> {
    guarded(5, "levelset_identities", || {
        let mut checks = Vec::new();
        for (label, p) in profiles(&FOOTBALL_BETAS)? {
            let r = report(&p)?;
            checks.push(Check::below(
                5,
                format!("c_a_relation_{label}"),
                r.max_abs_ca,
                1e-6,
            ));
            checks.push(Check::below(
                5,
                format!("a_d_relation_{label}"),
                r.max_abs_ad,
                1e-6,
            ));
        }
        Ok(checks)
    })
}

/// `M` is constant and equals `β²(β+2)²/4`.
pub fn criterion_6() -> Vec<Check> {
    guarded(6, "monotone_quantity", || {
        let mut checks = Vec::new();
        for (label, p) in profiles(&FOOTBALL_BETAS)? {
            let r = report(&p)?;
            let target = football_invariant(p.beta())?;
            let dev = r
                .summaries
                .iter()
                .map(|s| (s.m - target).abs())
                .fold(0.0, f64::max);
            checks.push(Check::below(
                6,
                format!("m_spread_{label}"),
                r.m_spread,
                1e-6,
            ));
            checks.push(Check::below(
                6,
                format!("m_vs_invariant_{label}"),
                dev,
                1e-6,
            ));
        }
        Ok(checks)
    })
}

/// End values of `z`, `D`, `C` against their limits at `t_max = 15`.
pub fn criterion_7() -> Vec<Check> {
    guarded(7, "limits", || {
        let mut checks = Vec::new();
        for (label, p) in profiles(&LIMIT_BETAS)? {
            let e = report(&p)?.limit_errors;
            checks.push(Check::below(7, format!("z_end_{label}"), e.z_end, 1e-5));
            checks.push(Check::below(7, format!("z_start_{label}"), e.z_start, 1e-5));
            checks.push(Check::below(7, format!("d_end_{label}"), e.d_end, 1e-5));
            checks.push(Check::below(7, format!("c_end_{label}"), e.c_end, 1e-10));
            checks.push(Check::below(
                7,
                format!("c_start_{label}"),
                e.c_start,
                1e-10,
            ));
        }
        Ok(checks)
    })
}

/// The key estimate is an equality on radial solutions.
pub fn criterion_8() -> Vec<Check> {
    guarded(8, "key_ratio", || {
        let mut checks = Vec::new();
        for (label, p) in profiles(&[-0.5])? {
            let (lo, hi) = sample_window(&p)?;
            let pad = 0.05 * (hi - lo);
            let mut worst = 0.0f64;
            for i in 0..20 {
                let t = lo + pad + (hi - lo - 2.0 * pad) * i as f64 / 19.0;
                let ratio = key_inequality_ratio(&p, p.u_at(t)?)?;
                worst = worst.max((ratio - 1.0).abs());
            }
            checks.push(Check::below(
                8,
                format!("key_ratio_dev_{label}"),
                worst,
                1e-4,
            ));
        }
        Ok(checks)
    })
}

/// Divergence structure of `σ₂` and its convergence order.
pub fn criterion_9(cfg: &VerifyConfig) -> Vec<Check> {
    guarded(9, "divergence_identity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9);
        let mut factors: Vec<Box<dyn ConformalFactor>> = (0..10)
            .map(|_| Box::new(CubicPolynomial::random(&mut rng, 0.5)) as Box<dyn ConformalFactor>)
            .collect();
        factors.push(Box::new(RoundSphereFactor));

        let default = FiniteDifferenceConfig::default();
        let coarse = FiniteDifferenceConfig::new(0.05, Scheme::Richardson)?;
        let fine = coarse.with_step(0.025)?;
        let mut worst = 0.0f64;
        let mut min_order = f64::INFINITY;
        for u in &factors {
            let (mut sum_coarse, mut sum_fine) = (0.0, 0.0);
            for _ in 0..50 {
                let x: Point = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                worst = worst.max(divergence_residual(u.as_ref(), &x, &default)?);
                sum_coarse += divergence_residual(u.as_ref(), &x, &coarse)?;
                sum_fine += divergence_residual(u.as_ref(), &x, &fine)?;
            }
            min_order = min_order.min((sum_coarse / sum_fine).log2());
        }
        Ok(vec![
            Check::below(9, "divergence_residual_max", worst, 1e-5),
            Check::at_least(9, "divergence_order_min", min_order, 2.0),
        ])
    })
}

/// The classification of conic divisors.
pub fn criterion_10(cfg: &VerifyConfig) -> Vec<Check> {
    guarded(10, "classifier", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA);
        let mut checks = Vec::new();

        let mut misses = 0;
        for _ in 0..50 {
            let b = rng.random_range(-0.999..-0.001);
            let c = classify(&ConicDivisor::new(vec![b, b], false)?, DEFAULT_CRITICAL_EPS)?;
            if c.kind != Kind::Critical {
                misses += 1;
            }
        }
        checks.push(Check::holds(
            10,
            "equal_pairs_critical",
            misses,
            "50 sampled orders",
        ));

        let c = classify(
            &ConicDivisor::new(vec![-0.3, -0.6], false)?,
            DEFAULT_CRITICAL_EPS,
        )?;
        let witness_ok = c.kind == Kind::Supercritical && c.witness_index == Some(1);
        checks.push(Check::holds(
            10,
            "pair_-0.3_-0.6_supercritical",
            usize::from(!witness_ok),
            "witness 2nd point",
        ));
        checks.push(Check::near(10, "witness_lhs", c.lhs, 0.2646, 1e-12));
        checks.push(Check::near(10, "witness_rhs", c.rhs, 0.0975375, 1e-12));

        let single = classify(&ConicDivisor::new(vec![-0.5], false)?, DEFAULT_CRITICAL_EPS)?;
        checks.push(Check::holds(
            10,
            "single_-0.5_supercritical",
            usize::from(single.kind != Kind::Supercritical),
            "",
        ));

        let mut mismatches = 0;
        for _ in 0..100 {
            let q = rng.random_range(1..=6);
            let betas: Vec<f64> = (0..q).map(|_| rng.random_range(-0.999..-0.001)).collect();
            let mut shuffled = betas.clone();
            shuffled.shuffle(&mut rng);
            let a = classify(
                &ConicDivisor::new(betas.clone(), false)?,
                DEFAULT_CRITICAL_EPS,
            )?;
            let b = classify(
                &ConicDivisor::new(shuffled.clone(), false)?,
                DEFAULT_CRITICAL_EPS,
            )?;
            let same_witness = match (a.witness_index, b.witness_index) {
                (Some(i), Some(j)) => betas[i] == shuffled[j],
                (None, None) => true,
                _ => false,
            };
            if a.kind != b.kind
                || !same_witness
                || (a.lhs - b.lhs).abs() > 1e-12
                || (a.rhs - b.rhs).abs() > 1e-12
            {
                mismatches += 1;
            }
        }
        checks.push(Check::holds(
            10,
            "permutation_invariance",
            mismatches,
            "100 random divisors",
        ));
        Ok(checks)
    })
}

/// Maclaurin and Newton-trace properties of the symmetric functions.
pub fn criterion_11_symfunc(cfg: &VerifyConfig) -> Vec<Check> {
    guarded(11, "symmetric_functions", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xB);
        let mut min_gap = f64::INFINITY;
        for _ in 0..100_000 {
            let m = random_symmetric(&mut rng, 3);
            let s1 = sigma_k_matrix(&m, 1)?;
            let s2 = sigma_k_matrix(&m, 2)?;
            min_gap = min_gap.min(s1 * s1 - 3.0 * s2);
        }
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let n = rng.random_range(2..=6);
            let l = rng.random_range(0..n);
            let m = random_symmetric(&mut rng, n);
            let trace = newton_tensor(&m, l)?.trace();
            let expected = (n - l) as f64 * sigma_k_matrix(&m, l)?;
            let scale = expected
                .abs()
                .max(m.as_matrix().norm().powi(l as i32))
                .max(f64::MIN_POSITIVE);
            worst = worst.max((trace - expected).abs() / scale);
        }
        Ok(vec![
            Check::at_least(11, "maclaurin_min_gap", min_gap, -1e-12),
            Check::below(11, "newton_trace_rel_err", worst, 1e-10),
        ])
    })
}

/// The reflection identity `f(β) + f(−2−β) = 2`.
pub fn criterion_11_divisor() -> Vec<Check> {
    guarded(11, "reflection_identity", || {
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let b = -(i as f64) / 999.0;
            worst = worst.max(reflection_identity_gap(b, 4)?);
        }
        Ok(vec![Check::below(11, "reflection_gap_max", worst, 1e-12)])
    })
}

/// Monte-Carlo `A`, `B` against the radial closed forms.
pub fn criterion_12(cfg: &VerifyConfig) -> Vec<Check> {
    guarded(12, "montecarlo", || {
        let mut checks = Vec::new();
        let s = sphere()?;
        let exact = summary_at(&s, 0.0)?;
        let est = montecarlo_volume_check(
            &RoundSphereFactor,
            0.0,
            cfg.seed,
            cfg.samples,
            MC_HALF_WIDTH,
        )?;
        checks.push(Check::near(
            12,
            "mc_a_sphere",
            est.a,
            exact.a,
            3.0 * est.a_se,
        ));
        checks.push(Check::near(
            12,
            "mc_b_sphere",
            est.b,
            exact.b,
            3.0 * est.b_se,
        ));

        let f = football(MC_BETA)?;
        let level = f.u_at(0.0)?;
        let exact = summary_at(&f, level)?;
        let u = reconstruct_factor(&f);
        // A separate stream keeps the two estimates independent.
        let est = montecarlo_volume_check(
            &u,
            level,
            cfg.seed.wrapping_add(1),
            cfg.samples,
            MC_HALF_WIDTH,
        )?;
        let a_from_d = 2.0 / 3.0 * (exact.d - defect(MC_BETA, 4)?);
        checks.push(Check::near(
            12,
            format!("mc_a_football({MC_BETA})"),
            est.a,
            a_from_d,
            3.0 * est.a_se,
        ));
        checks.push(Check::near(
            12,
            format!("mc_b_football({MC_BETA})"),
            est.b,
            exact.b,
            3.0 * est.b_se,
        ));
        Ok(checks)
    })
}

/// All checks of `suite`, in criterion order.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<Check> {
    let mut checks = Vec::new();
    let want = |s: Suite| suite == Suite::All || suite == s;
    if want(Suite::Levelset) {
        checks.extend(criterion_1());
        checks.extend(criterion_2());
    }
    if want(Suite::Radial) {
        checks.extend(criterion_3(cfg));
        checks.extend(criterion_4());
    }
    if want(Suite::Levelset) {
        checks.extend(criterion_5());
        checks.extend(criterion_6());
        checks.extend(criterion_7());
        checks.extend(criterion_8());
    }
    if want(Suite::Conformal) {
        checks.extend(criterion_9(cfg));
    }
    if want(Suite::Divisor) {
        checks.extend(criterion_10(cfg));
    }
    if want(Suite::Symfunc) {
        checks.extend(criterion_11_symfunc(cfg));
    }
    if want(Suite::Divisor) {
        checks.extend(criterion_11_divisor());
    }
    if want(Suite::Levelset) {
        checks.extend(criterion_12(cfg));
    }
    checks.sort_by_key(|c| c.criterion);
    checks
}
