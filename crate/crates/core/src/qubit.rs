//! Closed-form linear algebra on a single qubit.
//!
//! Everything here is exact up to floating point: Hermitian exponentials are
//! evaluated through the Pauli decomposition `H = c0·I + n·σ`, never through
//! a series or a general eigensolver.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance used for exact-identity checks (Hermiticity, trace, positivity).
pub const EXACT_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A dense complex 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex2x2 {
    pub m: [[C64; 2]; 2],
}

impl Complex2x2 {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self { m: [[a11, a12], [a21, a22]] }
    }

    pub fn from_real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn diag(a: C64, b: C64) -> Self {
        Self::new(a, ZERO, ZERO, b)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, C64::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0))
    }

    /// `c0·I + nx·σx + ny·σy + nz·σz`.
    pub fn from_pauli(c0: f64, n: [f64; 3]) -> Self {
        Self::new(
            C64::new(c0 + n[2], 0.0),
            C64::new(n[0], -n[1]),
            C64::new(n[0], n[1]),
            C64::new(c0 - n[2], 0.0),
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// Frobenius norm of `self − self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        frobenius_norm_sq(&(*self - self.dagger())).sqrt()
    }

    /// Frobenius distance of `self·self†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        frobenius_norm_sq(&(*self * self.dagger() - Self::identity())).sqrt()
    }

    /// `self · rho · self†`.
    #[inline]
    pub fn conjugate(&self, rho: &Self) -> Self {
        *self * *rho * self.dagger()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }
}

impl Mul for Complex2x2 {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for Complex2x2 {
    type Output = Self;

    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for Complex2x2 {
    type Output = Self;

    fn mul(self, rhs: f64) -> Self {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Add for Complex2x2 {
    type Output = Self;

    #[inline]
    fn add(self, rhs: Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Complex2x2 {
    type Output = Self;

    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Complex2x2 {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl fmt::Display for Complex2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1])
    }
}

/// Pauli decomposition `c0·I + n·σ` of a Hermitian 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hermitian2Decomposition {
    pub c0: f64,
    pub n: [f64; 3],
}

impl Hermitian2Decomposition {
    pub fn of(h: &Complex2x2) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if !(defect <= EXACT_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        let m = &h.m;
        // Average the off-diagonal pair so tiny anti-Hermitian noise is dropped.
        let off = (m[1][0] + m[0][1].conj()) * 0.5;
        Ok(Self {
            c0: 0.5 * (m[0][0].re + m[1][1].re),
            n: [off.re, off.im, 0.5 * (m[0][0].re - m[1][1].re)],
        })
    }

    pub fn norm(&self) -> f64 {
        let [x, y, z] = self.n;
        (x * x + y * y + z * z).sqrt()
    }

    pub fn reconstruct(&self) -> Complex2x2 {
        Complex2x2::from_pauli(self.c0, self.n)
    }

    /// `exp(−i·H·t)` for the decomposed `H`.
    pub fn exp_minus_i(&self, t: f64) -> Complex2x2 {
        let phase = C64::from_polar(1.0, -self.c0 * t);
        let r = self.norm();
        if r == 0.0 {
            return Complex2x2::identity().scale(phase);
        }
        let (s, c) = (r * t).sin_cos();
        let k = s / r;
        let [x, y, z] = self.n;
        // I cos − i (n·σ) sin/|n|
        let u = Complex2x2::new(
            C64::new(c, -k * z),
            C64::new(-k * y, -k * x),
            C64::new(k * y, -k * x),
            C64::new(c, k * z),
        );
        u.scale(phase)
    }
}

/// Closed-form `exp(−i·H·t)` of a Hermitian 2×2 matrix.
pub fn herm2_exp(h: &Complex2x2, t: f64) -> Result<Complex2x2> {
    Ok(Hermitian2Decomposition::of(h)?.exp_minus_i(t))
}

/// `Tr(M·M†)`.
pub fn frobenius_norm_sq(m: &Complex2x2) -> f64 {
    m.m.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// Overlap fidelity `Tr(ρσ)`, clamped to `[0, 1]`.
///
/// For a pure comparison state this coincides with the Uhlmann fidelity.
pub fn fidelity(rho: &DensityMatrix2, sigma: &DensityMatrix2) -> f64 {
    (rho.0 * sigma.0).trace().re.clamp(0.0, 1.0)
}

/// Collapse a 2×2 array of `D×D` blocks to the 2×2 matrix of block traces.
pub fn partial_trace_blocks(blocks: &[[DMatrix<C64>; 2]; 2]) -> Result<Complex2x2> {
    let d = blocks[0][0].nrows();
    if d == 0 {
        return Err(Error::Dimension("blocks must be at least 1×1".into()));
    }
    for row in blocks {
        for b in row {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::Dimension(format!(
                    "block of shape {}×{} in a {d}×{d} block matrix",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
    }
    Ok(Complex2x2::new(
        blocks[0][0].trace(),
        blocks[0][1].trace(),
        blocks[1][0].trace(),
        blocks[1][1].trace(),
    ))
}

/// Partial trace over the environment of an operator on `C² ⊗ C^D`, with the
/// qubit as the leading (most significant) tensor factor.
pub fn partial_trace_env(a: &DMatrix<C64>) -> Result<Complex2x2> {
    let n = a.nrows();
    if n != a.ncols() || !n.is_multiple_of(2) || n == 0 {
        return Err(Error::Dimension(format!("{}×{} is not a qubit⊗env operator", n, a.ncols())));
    }
    let d = n / 2;
    let block = |r: usize, c: usize| a.view((r * d, c * d), (d, d)).into_owned();
    partial_trace_blocks(&[[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]])
}

/// A validated qubit state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2(Complex2x2);

impl DensityMatrix2 {
    pub fn new(m: Complex2x2) -> Result<Self> {
        let herm = m.hermiticity_defect();
        if !(herm <= EXACT_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if !((tr - ONE).norm() <= EXACT_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = Self(m);
        let (lo, _) = rho.eigenvalues();
        if !(lo >= -EXACT_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    /// Wrap a matrix produced by a trace-preserving map without re-validating.
    pub(crate) fn from_map_output(m: Complex2x2) -> Self {
        Self(m)
    }

    /// State with Bloch vector `b`, `|b| ≤ 1`.
    pub fn from_bloch(b: [f64; 3]) -> Result<Self> {
        let len = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if !(len <= 1.0 + EXACT_TOL) {
            return Err(Error::InvalidState(format!("Bloch vector length {len} exceeds 1")));
        }
        Ok(Self(Complex2x2::from_pauli(0.5, [0.5 * b[0], 0.5 * b[1], 0.5 * b[2]])))
    }

    /// Projector onto the normalised ket `(c0, c1)`.
    pub fn pure(c0: C64, c1: C64) -> Result<Self> {
        let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite ket".into()));
        }
        let (a, b) = (c0 / norm, c1 / norm);
        Ok(Self(Complex2x2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj())))
    }

    pub fn ground() -> Self {
        Self(Complex2x2::diag(ONE, ZERO))
    }

    pub fn excited() -> Self {
        Self(Complex2x2::diag(ZERO, ONE))
    }

    pub fn maximally_mixed() -> Self {
        Self(Complex2x2::diag(0.5.into(), 0.5.into()))
    }

    pub fn matrix(&self) -> &Complex2x2 {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.0.m;
        let mean = 0.5 * (m[0][0].re + m[1][1].re);
        let half_gap = (0.25 * (m[0][0].re - m[1][1].re).powi(2) + m[0][1].norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    pub fn purity(&self) -> f64 {
        frobenius_norm_sq(&self.0)
    }

    /// `|ρ₀₁|`.
    pub fn coherence(&self) -> f64 {
        self.0.m[0][1].norm()
    }

    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0.m;
        [2.0 * m[1][0].re, 2.0 * m[1][0].im, (m[0][0] - m[1][1]).re]
    }

    /// `U ρ U†` for a unitary `U`.
    pub fn conjugated(&self, u: &Complex2x2) -> Self {
        Self(u.conjugate(&self.0))
    }

    /// Half the trace norm of `self − other`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let d = self.0 - other.0;
        let m = &d.m;
        let mean = 0.5 * (m[0][0].re + m[1][1].re);
        let half_gap = (0.25 * (m[0][0].re - m[1][1].re).powi(2)
            + (0.5 * (m[0][1] + m[1][0].conj())).norm_sqr())
        .sqrt();
        0.5 * ((mean - half_gap).abs() + (mean + half_gap).abs())
    }

    /// Check the state invariants at a caller-chosen tolerance.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.0.hermiticity_defect() <= tol
            && (self.0.trace() - ONE).norm() <= tol
            && self.eigenvalues().0 >= -tol
    }
}
