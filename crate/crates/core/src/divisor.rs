//! Conic divisors on S⁴, the Gauss-Bonnet-Chern defect of a cone point and
//! the subcritical / critical / supercritical trichotomy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symfunc::binomial;

/// Default half-width of the band in which the two sides of the
/// classification inequality count as equal.
pub const DEFAULT_CRITICAL_EPS: f64 = 1e-9;

/// Cone orders `β_i ∈ (−1, 0)` at marked points. When `includes_infinity`
/// is set, the last entry is the order at the point at infinity; the
/// classification treats it like any other entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicDivisor {
    betas: Vec<f64>,
    includes_infinity: bool,
}

impl ConicDivisor {
    pub fn new(betas: Vec<f64>, includes_infinity: bool) -> Result<Self> {
        if let Some(bad) = betas.iter().find(|b| !(**b > -1.0 && **b < 0.0)) {
            return Err(Error::domain(format!("cone order {bad} outside (-1, 0)")));
        }
        if includes_infinity && betas.is_empty() {
            return Err(Error::domain(
                "point at infinity flagged on an empty divisor",
            ));
        }
        Ok(Self {
            betas,
            includes_infinity,
        })
    }

    /// The smooth sphere.
    pub fn empty() -> Self {
        Self {
            betas: Vec::new(),
            includes_infinity: false,
        }
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn includes_infinity(&self) -> bool {
        self.includes_infinity
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }
}

fn check_even_dimension(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "dimension must be even and >= 2, got {n}"
        )));
    }
    Ok(())
}

/// The defect sum `2^{2−n} Σ_{k<m} C(n−1,k) (2+β)^k |β|^{n−1−k}`, `m = n/2`,
/// evaluated without any range restriction on `β`.
fn defect_sum(beta: f64, n: usize) -> f64 {
    let m = n / 2;
    let a = 2.0 + beta;
    let b = beta.abs();
    let sum: f64 = (0..m)
        .map(|k| binomial(n - 1, k) * a.powi(k as i32) * b.powi((n - 1 - k) as i32))
        .sum();
    sum / 2f64.powi(n as i32 - 2)
}

fn check_closed_order(beta: f64) -> Result<()> {
    if !(-1.0..=0.0).contains(&beta) {
        return Err(Error::domain(format!("cone order {beta} outside [-1, 0]")));
    }
    Ok(())
}

/// Gauss-Bonnet-Chern defect `f(β)` of a cone point of order `β` in even
/// dimension `n`. For `n = 4` this is `(β³ + 3β²)/2`.
///
/// Accepts the closed range `[−1, 0]` so the limiting values can be
/// inspected; divisors themselves only carry orders in `(−1, 0)`.
pub fn defect(beta: f64, n: usize) -> Result<f64> {
    check_even_dimension(n)?;
    check_closed_order(beta)?;
    Ok(defect_sum(beta, n))
}

/// `2 − Σ f(β_i)`, the normalized total curvature
/// `(1/|S_{n−1}|) ∫ (m/2^{m−1}) σ_m dv_g` predicted for the divisor.
pub fn gbc_total(d: &ConicDivisor, n: usize) -> Result<f64> {
    check_even_dimension(n)?;
    let mut total = 2.0;
    for &b in d.betas() {
        total -= defect(b, n)?;
    }
    Ok(total)
}

/// `|f(β) + f(−2−β) − 2|`, with `f(−2−β)` evaluated by the same sum and
/// `|−2−β| = 2+β`.
pub fn reflection_identity_gap(beta: f64, n: usize) -> Result<f64> {
    let direct = defect(beta, n)?;
    Ok((direct + defect_sum(-2.0 - beta, n) - 2.0).abs())
}

/// Real cube root; negative input gives a negative root.
pub fn real_cbrt(x: f64) -> f64 {
    if x < 0.0 {
        -(-x).cbrt()
    } else {
        x.cbrt()
    }
}

/// `β̃_j = (Σ_{i≠j} β_i³)^{1/3}` (real root). Zero for a single point; the
/// remaining order itself when exactly one other point exists.
pub fn beta_tilde(d: &ConicDivisor, j: usize) -> Result<f64> {
    let q = d.len();
    if j >= q {
        return Err(Error::domain(format!(
            "index {j} outside divisor of size {q}"
        )));
    }
    let mut others = d
        .betas()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, b)| *b);
    match (others.next(), others.next()) {
        (None, _) => Ok(0.0),
        (Some(b), None) => Ok(b),
        (Some(b0), Some(b1)) => {
            let cubes = b0.powi(3) + b1.powi(3) + others.map(|b| b.powi(3)).sum::<f64>();
            Ok(real_cbrt(cubes))
        }
    }
}

/// `(3/8) β²(β+2)²`, the left side of the classification inequality.
pub fn threshold_lhs(beta: f64) -> f64 {
    0.375 * beta * beta * (beta + 2.0) * (beta + 2.0)
}

/// Both sides of the classification inequality at index `j`.
pub fn inequality_sides(d: &ConicDivisor, j: usize) -> Result<(f64, f64)> {
    let bt = beta_tilde(d, j)?;
    let squares: f64 = d
        .betas()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, b)| b * b)
        .sum();
    let lhs = threshold_lhs(d.betas()[j]);
    let rhs = threshold_lhs(bt) + (bt + 1.5) * (squares - bt * bt);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Subcritical,
    Critical,
    Supercritical,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Subcritical => "subcritical",
            Kind::Critical => "critical",
            Kind::Supercritical => "supercritical",
        }
    }
}

/// Result of [`classify`]. `lhs` and `rhs` are taken at the index that
/// maximizes `lhs − rhs`; `witness_index` (0-based) is reported only for
/// critical and supercritical divisors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub kind: Kind,
    pub witness_index: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Classifies a non-empty divisor. Supercritical if some `lhs_j > rhs_j + eps`,
/// critical if none is and some `|lhs_j − rhs_j| ≤ eps`, subcritical otherwise.
pub fn classify(d: &ConicDivisor, eps: f64) -> Result<Classification> {
    if d.is_empty() {
        return Err(Error::domain(
            "classification needs at least one cone point",
        ));
    }
    if !(eps >= 0.0) {
        return Err(Error::domain(format!("eps must be nonnegative, got {eps}")));
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..d.len() {
        let (lhs, rhs) = inequality_sides(d, j)?;
        if best.is_none_or(|(_, l, r)| lhs - rhs > l - r) {
            best = Some((j, lhs, rhs));
        }
    }
    let (j, lhs, rhs) = best.expect("non-empty divisor");
    let gap = lhs - rhs;
    let kind = if gap > eps {
        Kind::Supercritical
    } else if gap.abs() <= eps {
        Kind::Critical
    } else {
        Kind::Subcritical
    };
    Ok(Classification {
        kind,
        witness_index: (kind != Kind::Subcritical).then_some(j),
        lhs,
        rhs,
    })
}

/// `β²(β+2)²/4`, the constant value of the monotone level-set quantity along
/// the football of order `β`.
pub fn football_invariant(beta: f64) -> Result<f64> {
    check_closed_order(beta)?;
    Ok(beta * beta * (beta + 2.0) * (beta + 2.0) / 4.0)
}
