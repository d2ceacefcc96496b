//! Schouten tensor and `σ_k` curvature of conformally flat metrics
//! `g = e^{2u} g_E` on ℝ⁴.
//!
//! With Euclidean derivatives, the Schouten tensor of `g` is
//! `A = −∇²u + du⊗du − ½|∇u|² g_E`. The `σ_k` curvature with respect to `g`
//! is `e^{−2ku} σ_k(A)`, the convention that gives `C(4,k)/2^k` on the round
//! sphere.

use rand::Rng;

use crate::error::{Error, Result};
use crate::symfunc::{sigma_k_matrix, SymmetricMatrix};

pub type Point = [f64; 4];

pub const DIM: usize = 4;

/// A conformal factor `u` on ℝ⁴ with value, gradient and Hessian oracles.
///
/// Implementations must be free of interior mutability so a factor can be
/// evaluated from several threads at once.
pub trait ConformalFactor: Send + Sync {
    fn value_at(&self, x: &Point) -> Result<f64>;
    fn gradient_at(&self, x: &Point) -> Result<Point>;
    fn hessian_at(&self, x: &Point) -> Result<SymmetricMatrix>;

    /// Points where the oracles are undefined.
    fn singular_points(&self) -> &[Point] {
        &[]
    }
}

pub(crate) fn norm(x: &Point) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_regular(u: &dyn ConformalFactor, x: &Point) -> Result<()> {
    if u.singular_points().iter().any(|p| p == x) {
        return Err(Error::Undefined {
            point: *x,
            reason: "singular point of the conformal factor".into(),
        });
    }
    Ok(())
}

/// Schouten tensor `−∇²u + du⊗du − ½|∇u|² I` in Euclidean coordinates,
/// without the `e^{−2u}` factor.
pub fn schouten_flat(u: &dyn ConformalFactor, x: &Point) -> Result<SymmetricMatrix> {
    check_regular(u, x)?;
    let g = u.gradient_at(x)?;
    let hess = u.hessian_at(x)?;
    let g2 = dot(&g, &g);
    Ok(SymmetricMatrix::from_upper(DIM, |i, j| {
        let delta = if i == j { 0.5 * g2 } else { 0.0 };
        -hess.get(i, j) + g[i] * g[j] - delta
    }))
}

/// `σ_k(g^{−1}A_g) = e^{−2ku} σ_k(A)` at `x`, for `1 ≤ k ≤ 4`.
pub fn sigma_k_curvature(u: &dyn ConformalFactor, x: &Point, k: usize) -> Result<f64> {
    if !(1..=DIM).contains(&k) {
        return Err(Error::domain(format!("curvature order {k} outside 1..=4")));
    }
    let a = schouten_flat(u, x)?;
    let value = u.value_at(x)?;
    Ok((-2.0 * k as f64 * value).exp() * sigma_k_matrix(&a, k)?)
}

/// Finite-difference scheme for numerical derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Second-order central differences.
    Central,
    /// Central differences at `s` and `s/2` combined by one Richardson step.
    Richardson,
}

/// Step and scheme for numerical differentiation. The effective step at `x`
/// is `step · (1 + |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferenceConfig {
    step: f64,
    scheme: Scheme,
}

impl FiniteDifferenceConfig {
    pub fn new(step: f64, scheme: Scheme) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!(
                "finite-difference step must be positive, got {step}"
            )));
        }
        Ok(Self { step, scheme })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn with_step(self, step: f64) -> Result<Self> {
        Self::new(step, self.scheme)
    }

    fn step_at(&self, x: &Point) -> f64 {
        self.step * (1.0 + norm(x))
    }
}

impl Default for FiniteDifferenceConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            scheme: Scheme::Richardson,
        }
    }
}

fn shifted(x: &Point, i: usize, s: f64) -> Point {
    let mut y = *x;
    y[i] += s;
    y
}

/// Applies `scheme` to a central-difference estimator `d(s)`.
fn extrapolate(scheme: Scheme, s: f64, mut d: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    match scheme {
        Scheme::Central => d(s),
        Scheme::Richardson => {
            let coarse = d(s)?;
            let fine = d(0.5 * s)?;
            Ok((4.0 * fine - coarse) / 3.0)
        }
    }
}

/// The flux `F_i = (−Δu δ_ij + u_ij − u_i u_j) u_j`, whose divergence is
/// `−2 σ_2(A)`.
fn sigma2_flux(u: &dyn ConformalFactor, x: &Point) -> Result<Point> {
    let g = u.gradient_at(x)?;
    let hess = u.hessian_at(x)?;
    let lap = hess.trace();
    let g2 = dot(&g, &g);
    let mut flux = [0.0; DIM];
    for (i, f) in flux.iter_mut().enumerate() {
        let hg: f64 = (0..DIM).map(|j| hess.get(i, j) * g[j]).sum();
        *f = -lap * g[i] + hg - g[i] * g2;
    }
    Ok(flux)
}

fn flux_divergence(u: &dyn ConformalFactor, x: &Point, s: f64, scheme: Scheme) -> Result<f64> {
    let mut div = 0.0;
    for i in 0..DIM {
        div += extrapolate(scheme, s, |h| {
            let plus = sigma2_flux(u, &shifted(x, i, h))?[i];
            let minus = sigma2_flux(u, &shifted(x, i, -h))?[i];
            Ok((plus - minus) / (2.0 * h))
        })?;
    }
    Ok(div)
}

/// `|σ_2(A) + ½ ∂_i F_i|` at `x`, where the divergence of the flux is taken
/// numerically. Vanishes up to truncation for every smooth `u`.
pub fn divergence_residual(
    u: &dyn ConformalFactor,
    x: &Point,
    cfg: &FiniteDifferenceConfig,
) -> Result<f64> {
    let lhs = sigma_k_matrix(&schouten_flat(u, x)?, 2)?;
    let div = flux_divergence(u, x, cfg.step_at(x), cfg.scheme)?;
    Ok((lhs + 0.5 * div).abs())
}

/// Outcome of repeating [`divergence_residual`] with the step halved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceDiagnostic {
    pub residual: f64,
    pub refined_residual: f64,
    /// `log2(residual / refined_residual)`.
    pub observed_order: f64,
    /// False when halving the step did not reduce the residual.
    pub resolved: bool,
}

pub fn divergence_convergence(
    u: &dyn ConformalFactor,
    x: &Point,
    cfg: &FiniteDifferenceConfig,
) -> Result<ConvergenceDiagnostic> {
    let residual = divergence_residual(u, x, cfg)?;
    let refined_residual = divergence_residual(u, x, &cfg.with_step(0.5 * cfg.step)?)?;
    Ok(convergence_from(residual, refined_residual))
}

pub(crate) fn convergence_from(residual: f64, refined_residual: f64) -> ConvergenceDiagnostic {
    ConvergenceDiagnostic {
        residual,
        refined_residual,
        observed_order: (residual / refined_residual).log2(),
        resolved: refined_residual < residual,
    }
}

/// Wraps a scalar function with central-difference gradient and Hessian
/// oracles.
pub fn finite_difference_factor<F>(f: F, cfg: FiniteDifferenceConfig) -> FiniteDifferenceFactor<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    FiniteDifferenceFactor { f, cfg }
}

pub struct FiniteDifferenceFactor<F> {
    f: F,
    cfg: FiniteDifferenceConfig,
}

impl<F> ConformalFactor for FiniteDifferenceFactor<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn value_at(&self, x: &Point) -> Result<f64> {
        Ok((self.f)(x))
    }

    fn gradient_at(&self, x: &Point) -> Result<Point> {
        let s = self.cfg.step_at(x);
        let mut g = [0.0; DIM];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = extrapolate(self.cfg.scheme, s, |h| {
                Ok(((self.f)(&shifted(x, i, h)) - (self.f)(&shifted(x, i, -h))) / (2.0 * h))
            })?;
        }
        Ok(g)
    }

    fn hessian_at(&self, x: &Point) -> Result<SymmetricMatrix> {
        let s = self.cfg.step_at(x);
        let f = &self.f;
        let fx = f(x);
        let mut raw = nalgebra::DMatrix::<f64>::zeros(DIM, DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                raw[(i, j)] = extrapolate(self.cfg.scheme, s, |h| {
                    if i == j {
                        Ok((f(&shifted(x, i, h)) - 2.0 * fx + f(&shifted(x, i, -h))) / (h * h))
                    } else {
                        let pp = f(&shifted(&shifted(x, i, h), j, h));
                        let pm = f(&shifted(&shifted(x, i, h), j, -h));
                        let mp = f(&shifted(&shifted(x, i, -h), j, h));
                        let mm = f(&shifted(&shifted(x, i, -h), j, -h));
                        Ok((pp - pm - mp + mm) / (4.0 * h * h))
                    }
                })?;
            }
        }
        Ok(SymmetricMatrix::symmetrize(&raw))
    }
}

/// `u ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFactor(pub f64);

impl ConformalFactor for ConstantFactor {
    fn value_at(&self, _x: &Point) -> Result<f64> {
        Ok(self.0)
    }
    fn gradient_at(&self, _x: &Point) -> Result<Point> {
        Ok([0.0; DIM])
    }
    fn hessian_at(&self, _x: &Point) -> Result<SymmetricMatrix> {
        Ok(SymmetricMatrix::zeros(DIM))
    }
}

/// `u(x) = a·x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFactor(pub Point);

impl ConformalFactor for LinearFactor {
    fn value_at(&self, x: &Point) -> Result<f64> {
        Ok(dot(&self.0, x))
    }
    fn gradient_at(&self, _x: &Point) -> Result<Point> {
        Ok(self.0)
    }
    fn hessian_at(&self, _x: &Point) -> Result<SymmetricMatrix> {
        Ok(SymmetricMatrix::zeros(DIM))
    }
}

/// The round sphere `u(x) = ln(2 / (1 + |x|²))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundSphereFactor;

impl ConformalFactor for RoundSphereFactor {
    fn value_at(&self, x: &Point) -> Result<f64> {
        Ok(std::f64::consts::LN_2 - dot(x, x).ln_1p())
    }

    fn gradient_at(&self, x: &Point) -> Result<Point> {
        let q = 1.0 + dot(x, x);
        Ok(x.map(|xi| -2.0 * xi / q))
    }

    fn hessian_at(&self, x: &Point) -> Result<SymmetricMatrix> {
        let q = 1.0 + dot(x, x);
        Ok(SymmetricMatrix::from_upper(DIM, |i, j| {
            let diag = if i == j { -2.0 / q } else { 0.0 };
            diag + 4.0 * x[i] * x[j] / (q * q)
        }))
    }
}

/// A polynomial of degree at most three,
/// `c + b·x + ½ xᵀQx + (1/6) T_{ijk} x_i x_j x_k` with `Q`, `T` symmetric.
#[derive(Debug, Clone)]
pub struct CubicPolynomial {
    constant: f64,
    linear: Point,
    quadratic: [[f64; DIM]; DIM],
    cubic: [[[f64; DIM]; DIM]; DIM],
}

impl CubicPolynomial {
    /// Random coefficients, each uniform in `[−scale, scale]` before
    /// symmetrization.
    #[allow(clippy::needless_range_loop)]
    pub fn random<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Self {
        let mut draw = || rng.random_range(-scale..=scale);
        let constant = draw();
        let linear = [draw(), draw(), draw(), draw()];
        let mut quadratic = [[0.0; DIM]; DIM];
        for i in 0..DIM {
            for j in i..DIM {
                let v = draw();
                quadratic[i][j] = v;
                quadratic[j][i] = v;
            }
        }
        let mut cubic = [[[0.0; DIM]; DIM]; DIM];
        for i in 0..DIM {
            for j in i..DIM {
                for k in j..DIM {
                    let v = draw();
                    for (a, b, c) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        cubic[a][b][c] = v;
                    }
                }
            }
        }
        Self {
            constant,
            linear,
            quadratic,
            cubic,
        }
    }
}

impl ConformalFactor for CubicPolynomial {
    fn value_at(&self, x: &Point) -> Result<f64> {
        let mut v = self.constant + dot(&self.linear, x);
        for i in 0..DIM {
            for j in 0..DIM {
                v += 0.5 * self.quadratic[i][j] * x[i] * x[j];
                for k in 0..DIM {
                    v += self.cubic[i][j][k] * x[i] * x[j] * x[k] / 6.0;
                }
            }
        }
        Ok(v)
    }

    fn gradient_at(&self, x: &Point) -> Result<Point> {
        let mut g = self.linear;
        for (i, gi) in g.iter_mut().enumerate() {
            for j in 0..DIM {
                *gi += self.quadratic[i][j] * x[j];
                for k in 0..DIM {
                    *gi += 0.5 * self.cubic[i][j][k] * x[j] * x[k];
                }
            }
        }
        Ok(g)
    }

    fn hessian_at(&self, x: &Point) -> Result<SymmetricMatrix> {
        Ok(SymmetricMatrix::from_upper(DIM, |i, j| {
            self.quadratic[i][j] + (0..DIM).map(|k| self.cubic[i][j][k] * x[k]).sum::<f64>()
        }))
    }
}
