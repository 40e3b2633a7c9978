//! Closed-form solution of the commuting-block Riccati equation.
//!
//! For the block Hamiltonian `[[H₊, α], [α, H₋]]` with `H₊ − H₋ = 2V` and all
//! blocks diagonal in the bath basis, the Riccati equation reduces to the
//! scalar quadratic `α f² + 2λ f − α = 0` on every eigenvalue `λ` of `V`. Its
//! roots are
//!
//! ```text
//! f(λ)  = ( √(λ² + α²) − λ) / α      (principal)
//! f₂(λ) = (−√(λ² + α²) − λ) / α      (secondary)
//! ```
//!
//! The principal root stays bounded as `α → 0` and is used everywhere; the
//! secondary one is exposed for checks only.

use num_complex::Complex64 as C64;

use crate::bath::Mode;
use crate::error::{Error, Result};
use crate::qubit::Complex2x2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Principal,
    Secondary,
}

/// A root branch of the Riccati quadratic at a fixed `α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiBranch {
    pub branch: Branch,
    pub alpha: f64,
}

impl RiccatiBranch {
    pub fn principal(alpha: f64) -> Self {
        Self { branch: Branch::Principal, alpha }
    }

    pub fn secondary(alpha: f64) -> Self {
        Self { branch: Branch::Secondary, alpha }
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        match self.branch {
            Branch::Principal => riccati_f(lambda, self.alpha),
            Branch::Secondary => riccati_f2(lambda, self.alpha),
        }
    }
}

/// Principal root `(√(λ²+α²) − λ)/α`.
///
/// Evaluated as `α/(√(λ²+α²) + λ)` for `λ > 0`, where the direct form cancels.
pub fn riccati_f(lambda: f64, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::RiccatiBranch);
    }
    let h = lambda.hypot(alpha);
    Ok(if lambda > 0.0 { alpha / (h + lambda) } else { (h - lambda) / alpha })
}

/// Secondary root `(−√(λ²+α²) − λ)/α`.
pub fn riccati_f2(lambda: f64, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::RiccatiBranch);
    }
    let h = lambda.hypot(alpha);
    Ok(if lambda < 0.0 { -alpha / (h - lambda) } else { -(h + lambda) / alpha })
}

/// `|α f² + 2λ f − α|`.
pub fn riccati_residual(f: f64, lambda: f64, alpha: f64) -> f64 {
    (alpha * f * f + 2.0 * lambda * f - alpha).abs()
}

/// Per-mode similarity transform built from a Riccati eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSimilarity {
    pub f: f64,
    /// `(1+f²)^{-1/2} · [[1, −f], [f, 1]]`.
    pub u: Complex2x2,
    /// Determinant of the unnormalised `[[1, −f], [f, 1]]`.
    pub det_raw: f64,
}

pub fn mode_similarity(f: f64) -> ModeSimilarity {
    let det_raw = 1.0 + f * f;
    let s = det_raw.sqrt().recip();
    ModeSimilarity { f, u: Complex2x2::from_real(s, -f * s, f * s, s), det_raw }
}

/// Riccati eigenvalue of a mode, with the `α = 0` limit `f = 0`.
pub fn mode_f(e: f64, alpha: f64) -> f64 {
    riccati_f(e, alpha).unwrap_or(0.0)
}

/// Block evolution `U_i(t) = S_i · diag(e⁺, e⁻) · S_i†` with
/// `e^± = exp(−i(E_i^± ± α f_i) t)`, taking the Riccati eigenvalue `f`
/// explicitly.
///
/// This is the Riccati-diagonalisation route to the per-mode unitary, kept as
/// a cross-check for the closed-form exponential used by the dynamics.
pub fn similarity_unitary_with(mode: &Mode, alpha: f64, f: f64, t: f64) -> Complex2x2 {
    let sim = mode_similarity(f);
    let ep = C64::from_polar(1.0, -(mode.e_plus + alpha * f) * t);
    let em = C64::from_polar(1.0, -(mode.e_minus - alpha * f) * t);
    sim.u * Complex2x2::diag(ep, em) * sim.u.dagger()
}

/// [`similarity_unitary_with`] using the principal Riccati root.
pub fn similarity_unitary(mode: &Mode, alpha: f64, t: f64) -> Complex2x2 {
    similarity_unitary_with(mode, alpha, mode_f(mode.e, alpha), t)
}
