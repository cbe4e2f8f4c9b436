//! Closed-form 2×2 complex matrix arithmetic and qubit density matrices.
//!
//! Every matrix in this crate is 2×2, so eigenvalues and singular values are
//! obtained from the quadratic formula rather than an iterative solver.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{QslError, Result};

/// Absolute tolerance used by the density-matrix validity checks.
pub const DENSITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl Matrix2 {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(
            Complex64::new(a11, 0.0),
            Complex64::new(a12, 0.0),
            Complex64::new(a21, 0.0),
            Complex64::new(a22, 0.0),
        )
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    /// σ₀
    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    /// σ₃ = diag(1, −1)
    pub const fn sigma_z() -> Self {
        Self::from_real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// Squared Frobenius norm, Σ|aᵢⱼ|² = Σσᵢ².
    pub fn frobenius_sq(&self) -> f64 {
        self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        let d = *self - *other;
        [d.a11, d.a12, d.a21, d.a22]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

/// A single-qubit density matrix `[[d0, c], [c*, d1]]`.
///
/// Construction validates unit trace, nonnegative populations and
/// positivity (`d0·d1 − |c|² ≥ −1e-12`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity {
    d0: f64,
    d1: f64,
    c: Complex64,
}

impl QubitDensity {
    pub fn new(d0: f64, d1: f64, c: Complex64) -> Result<Self> {
        if !(d0.is_finite() && d1.is_finite() && c.re.is_finite() && c.im.is_finite()) {
            return Err(QslError::InvalidDensity("non-finite entry".into()));
        }
        if ((d0 + d1) - 1.0).abs() > DENSITY_TOL {
            return Err(QslError::InvalidDensity(format!("trace {} differs from 1", d0 + d1)));
        }
        if d0 < -DENSITY_TOL || d1 < -DENSITY_TOL {
            return Err(QslError::InvalidDensity(format!("negative population ({d0}, {d1})")));
        }
        let det = d0 * d1 - c.norm_sqr();
        if det < -DENSITY_TOL {
            return Err(QslError::InvalidDensity(format!(
                "not positive semidefinite (det = {det:e})"
            )));
        }
        Ok(Self {
            d0: d0.max(0.0),
            d1: d1.max(0.0),
            c,
        })
    }

    /// Builds a density from a Hermitian matrix, rejecting non-Hermitian input.
    pub fn from_matrix(m: &Matrix2) -> Result<Self> {
        let herm = m.a11.im.abs() <= DENSITY_TOL
            && m.a22.im.abs() <= DENSITY_TOL
            && (m.a12 - m.a21.conj()).norm() <= DENSITY_TOL;
        if !herm {
            return Err(QslError::InvalidDensity("matrix is not Hermitian".into()));
        }
        Self::new(m.a11.re, m.a22.re, m.a12)
    }

    /// |+⟩⟨+|
    pub fn plus() -> Self {
        Self {
            d0: 0.5,
            d1: 0.5,
            c: Complex64::new(0.5, 0.0),
        }
    }

    /// I/2
    pub fn maximally_mixed() -> Self {
        Self {
            d0: 0.5,
            d1: 0.5,
            c: ZERO,
        }
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn coherence(&self) -> Complex64 {
        self.c
    }

    pub fn to_matrix(&self) -> Matrix2 {
        Matrix2::new(
            Complex64::new(self.d0, 0.0),
            self.c,
            self.c.conj(),
            Complex64::new(self.d1, 0.0),
        )
    }

    /// Same populations with the coherence replaced.
    pub fn with_coherence(&self, c: Complex64) -> Result<Self> {
        Self::new(self.d0, self.d1, c)
    }
}

/// tr(ρ²) = d0² + d1² + 2|c|².
pub fn purity(rho: &QubitDensity) -> f64 {
    rho.d0 * rho.d0 + rho.d1 * rho.d1 + 2.0 * rho.c.norm_sqr()
}

/// tr(ρσ) for two densities (always real).
pub fn overlap(rho: &QubitDensity, sigma: &QubitDensity) -> f64 {
    rho.d0 * sigma.d0 + rho.d1 * sigma.d1 + 2.0 * (rho.c * sigma.c.conj()).re
}

/// Relative purity tr(ρ_τ ρ_later) / tr(ρ_τ²).
pub fn relative_purity(rho_tau: &QubitDensity, rho_later: &QubitDensity) -> f64 {
    overlap(rho_tau, rho_later) / purity(rho_tau)
}

/// Eigenvalues of a density matrix, descending. They coincide with its
/// singular values.
pub fn hermitian_eigenvalues(rho: &QubitDensity) -> (f64, f64) {
    let mean = 0.5 * (rho.d0 + rho.d1);
    let radius = (0.5 * (rho.d0 - rho.d1)).hypot(rho.c.norm());
    ((mean + radius).max(0.0), (mean - radius).max(0.0))
}

/// Singular values of a general 2×2 complex matrix, descending.
///
/// With `F = Σ|aᵢⱼ|²` and `D = |det M|`, the squared singular values are the
/// roots of `x² − F x + D² = 0`, so `σ₁ + σ₂ = √(F + 2D)`. The gap comes from
/// `(σ₁² − σ₂²)² = (G₁₁ − G₂₂)² + 4|G₁₂|²` for the Gram matrix `G = MM†`,
/// which has no cancellation when the singular values nearly coincide.
pub fn singular_values(m: &Matrix2) -> (f64, f64) {
    let f = m.frobenius_sq();
    let d = m.det().norm();
    let sum = (f + 2.0 * d).sqrt();
    if sum == 0.0 {
        return (0.0, 0.0);
    }
    let g11 = m.a11.norm_sqr() + m.a12.norm_sqr();
    let g22 = m.a21.norm_sqr() + m.a22.norm_sqr();
    let g12 = m.a11 * m.a21.conj() + m.a12 * m.a22.conj();
    let diff = (g11 - g22).hypot(2.0 * g12.norm()) / sum;
    let s1 = 0.5 * (sum + diff);
    // D/σ₁ avoids cancellation in (sum − diff) when σ₂ ≪ σ₁.
    let s2 = (d / s1).min(s1);
    (s1, s2)
}
