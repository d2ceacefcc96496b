//! Elementary symmetric functions of eigenvalues, Newton transforms and the
//! positive cones `Γ_k^+`.
//!
//! `σ_k` of a symmetric matrix is evaluated as the sum of its principal
//! `k × k` minors, i.e. as a coefficient of the characteristic polynomial.
//! This is basis-free and needs no eigenvalue ordering. The eigenvalue route
//! is still available through [`SymmetricMatrix::eigenvalues`] and is what the
//! verification suite compares against.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A finite, non-empty list of real eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("spectrum must contain at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("spectrum values must be finite"));
        }
        Ok(Spectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A real symmetric matrix. Symmetry holds exactly in the stored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Wraps `m`, rejecting non-square, non-finite or non-symmetric input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::domain(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        for i in 0..n {
            for j in 0..n {
                if !m[(i, j)].is_finite() {
                    return Err(Error::domain("matrix entries must be finite"));
                }
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::domain(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    /// Builds a matrix from the upper triangle of `f`, mirroring it below the
    /// diagonal.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrix(m)
    }

    /// Averages `m` with its transpose.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self::from_upper(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(n, n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_upper(n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        SymmetricMatrix(&self.0 * factor)
    }

    /// Eigenvalues from a symmetric eigensolver, in ascending order.
    pub fn eigenvalues(&self) -> Spectrum {
        let mut values: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        Spectrum(values)
    }

    /// Leading principal `k × k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Self::from_upper(k, |i, j| self.0[(i, j)])
    }
}

impl fmt::Display for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `k`-th elementary symmetric function of the spectrum. `σ_0 = 1`.
pub fn sigma_k(spectrum: &Spectrum, k: usize) -> Result<f64> {
    let n = spectrum.len();
    if k > n {
        return Err(Error::domain(format!("sigma_{k} undefined for n = {n}")));
    }
    // e[j] accumulates σ_j of the values seen so far.
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &lambda in spectrum.values() {
        for j in (1..=k).rev() {
            e[j] += lambda * e[j - 1];
        }
    }
    Ok(e[k])
}

/// `σ_k` of the eigenvalues of `m`, as the sum of principal `k × k` minors.
pub fn sigma_k_matrix(m: &SymmetricMatrix, k: usize) -> Result<f64> {
    let n = m.dim();
    if k > n {
        return Err(Error::domain(format!("sigma_{k} undefined for n = {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    let mut rows = Vec::with_capacity(k);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        rows.clear();
        rows.extend((0..n).filter(|i| mask & (1 << i) != 0));
        total += principal_minor(m.as_matrix(), &rows);
    }
    Ok(total)
}

/// Determinant of the principal submatrix on `idx`, by Gaussian elimination
/// with partial pivoting.
fn principal_minor(m: &DMatrix<f64>, idx: &[usize]) -> f64 {
    let k = idx.len();
    match k {
        1 => return m[(idx[0], idx[0])],
        2 => {
            let (a, b) = (idx[0], idx[1]);
            return m[(a, a)] * m[(b, b)] - m[(a, b)] * m[(b, a)];
        }
        _ => {}
    }
    let mut a: Vec<f64> = Vec::with_capacity(k * k);
    for &r in idx {
        for &c in idx {
            a.push(m[(r, c)]);
        }
    }
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs()))
            .unwrap_or(col);
        if a[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for r in col + 1..k {
            let factor = a[r * k + col] / p;
            if factor != 0.0 {
                for c in col..k {
                    a[r * k + c] -= factor * a[col * k + c];
                }
            }
        }
    }
    det
}

/// Newton transform `T_l(M)`, computed by the recursion
/// `T_0 = I`, `T_l = σ_l(M) I − M T_{l−1}`.
///
/// The recursion reproduces the generalized-Kronecker-delta definition;
/// the result is symmetrized so that symmetry holds exactly.
pub fn newton_tensor(m: &SymmetricMatrix, l: usize) -> Result<SymmetricMatrix> {
    let n = m.dim();
    if l >= n {
        return Err(Error::domain(format!(
            "Newton transform T_{l} undefined for n = {n} (need l <= n - 1)"
        )));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let mut t = id.clone();
    for j in 1..=l {
        let s = sigma_k_matrix(m, j)?;
        t = &id * s - m.as_matrix() * &t;
        t = SymmetricMatrix::symmetrize(&t).0;
    }
    Ok(SymmetricMatrix(t))
}

/// Membership in the open cone `σ_1 > 0, …, σ_k > 0`. Comparisons are exact.
pub fn in_cone(m: &SymmetricMatrix, k: usize) -> Result<bool> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(Error::domain(format!("cone index {k} outside 1..={n}")));
    }
    for j in 1..=k {
        if sigma_k_matrix(m, j)? <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Volume of the unit round `n`-sphere `S^n ⊂ ℝ^{n+1}`.
///
/// Uses `|S_n| = 2π/(n−1) · |S_{n−2}|` from `|S_0| = 2`, `|S_1| = 2π`.
pub fn sphere_volume(n: usize) -> f64 {
    let (mut vol, start) = if n.is_multiple_of(2) {
        (2.0, 0)
    } else {
        (2.0 * PI, 1)
    };
    let mut d = start;
    while d < n {
        d += 2;
        vol *= 2.0 * PI / (d as f64 - 1.0);
    }
    vol
}

/// Binomial coefficient as a float. Exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
