//! Fidelity of adiabatic following.
//!
//! The drive is parameterised by its magnitude `β0` and polar angle `φ`
//! (`α = β0 sin φ`, `β = β0 cos φ`), and the rotation speed by the adiabatic
//! parameter `x = ω / (2β0)`. A qubit prepared in the upper instantaneous
//! eigenstate `|ψ₀⁺⟩` follows it perfectly when `F(t) = Tr(η_t ρ₊(t)) = 1`.
//!
//! At `φ = π/2` and for a uniform bath the fidelity has the closed form
//!
//! ```text
//! F(t)   = Σ_k C(N,k) ρ_k F_k(t)
//! F_k(t) = 1 − x_k²/(1 + x_k²) · sin²(β0 √(1 + x_k²) t),   x_k = g(N − 2k)/β0 − x
//! ```
//!
//! which reduces to the closed-qubit result with `x_k = −x` when `g = 0`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

use crate::bath::{hamming_spectrum, Drive, ModelParams};
use crate::dynamics::{check_grid, ReducedDynamics, SpectrumPath};
use crate::error::{Error, Result};
use crate::qubit::{fidelity, DensityMatrix2};

const PHI_TOL: f64 = 1e-12;

/// Drive in polar form together with the bath it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct AdiabaticConfig {
    pub beta0: f64,
    pub phi: f64,
    pub x: f64,
    params: ModelParams,
}

impl AdiabaticConfig {
    /// Replaces the drive of `bath` by the one described by `(beta0, phi, x)`.
    pub fn new(beta0: f64, phi: f64, x: f64, bath: ModelParams) -> Result<Self> {
        if !(beta0 > 0.0) || !beta0.is_finite() {
            return Err(Error::InvalidParams(format!("field magnitude must be positive, got {beta0}")));
        }
        if !phi.is_finite() || !x.is_finite() {
            return Err(Error::InvalidParams("phi and x must be finite".into()));
        }
        let params = bath.with_drive(Drive::polar(beta0, phi, 2.0 * beta0 * x))?;
        Ok(Self { beta0, phi, x, params })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn omega_drive(&self) -> f64 {
        self.params.omega_drive()
    }

    fn require_perpendicular(&self) -> Result<()> {
        if (self.phi - FRAC_PI_2).abs() > PHI_TOL {
            return Err(Error::Contract("closed-form fidelity requires phi = pi/2"));
        }
        Ok(())
    }
}

/// `|ψ⟩⟨ψ|` with `|ψ⟩ = (cos(φ/2), e^{iωt} sin(φ/2))`, the upper eigenstate of
/// the bare qubit Hamiltonian at drive phase `omega_t = ωt`.
pub fn eigenstate_plus(phi: f64, omega_t: f64) -> DensityMatrix2 {
    let (s, c) = (0.5 * phi).sin_cos();
    DensityMatrix2::pure(C64::new(c, 0.0), C64::from_polar(s, omega_t))
        .expect("unit ket is always a valid state")
}

/// `1 − x²/(1+x²) · sin²(β0 √(1+x²) t)`.
pub fn mode_fidelity(x: f64, beta0: f64, t: f64) -> f64 {
    let q = 1.0 + x * x;
    let s = (beta0 * q.sqrt() * t).sin();
    1.0 - x * x / q * s * s
}

/// Closed-qubit fidelity at `φ = π/2`.
pub fn closed_fidelity(t: f64, cfg: &AdiabaticConfig) -> Result<f64> {
    cfg.require_perpendicular()?;
    Ok(mode_fidelity(cfg.x, cfg.beta0, t))
}

/// Hamming-class weights and detunings of the open-system closed form.
#[derive(Clone, Debug)]
pub struct OpenFidelity {
    beta0: f64,
    /// `(C(N,k) ρ_k, x_k)` for every class of non-zero weight.
    classes: Vec<(f64, f64)>,
}

impl OpenFidelity {
    pub fn new(cfg: &AdiabaticConfig) -> Result<Self> {
        cfg.require_perpendicular()?;
        let params = cfg.params();
        let (_, g) = params
            .uniform_values()
            .ok_or(Error::Contract("closed-form open fidelity requires a uniform bath"))?;
        let n = params.n() as f64;
        let spectrum = hamming_spectrum(params, params.beta())?;
        let classes = spectrum
            .iter()
            .filter(|m| m.weight != 0.0)
            .map(|m| (m.weight, g * (n - 2.0 * m.label as f64) / cfg.beta0 - cfg.x))
            .collect();
        Ok(Self { beta0: cfg.beta0, classes })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let f: f64 = self.classes.iter().map(|&(w, xk)| w * mode_fidelity(xk, self.beta0, t)).sum();
        f.clamp(0.0, 1.0)
    }

    /// `R(t) = 1 − F(t)`.
    pub fn loss(&self, t: f64) -> f64 {
        self.classes
            .iter()
            .map(|&(w, xk)| {
                let q = 1.0 + xk * xk;
                let s = (self.beta0 * q.sqrt() * t).sin();
                w * xk * xk / q * s * s
            })
            .sum()
    }

    /// `max_k |x_k|` over classes carrying weight.
    pub fn max_detuning(&self) -> f64 {
        self.classes.iter().map(|&(_, xk)| xk.abs()).fold(0.0, f64::max)
    }
}

/// Open-system fidelity at `φ = π/2` for a uniform bath.
pub fn open_fidelity(t: f64, cfg: &AdiabaticConfig) -> Result<f64> {
    Ok(OpenFidelity::new(cfg)?.eval(t))
}

/// `Tr(η_t ρ₊(t))` with `η_t` from the reduced-dynamics channel and
/// `η_0 = ρ₊(0)`; valid for any `φ` and any bath.
pub fn fidelity_via_channel(t: f64, cfg: &AdiabaticConfig, path: SpectrumPath) -> Result<f64> {
    Ok(fidelity_series_via_channel(&[t], cfg, path)?[0])
}

/// [`fidelity_via_channel`] over a time grid, sharing one spectrum.
pub fn fidelity_series_via_channel(
    times: &[f64],
    cfg: &AdiabaticConfig,
    path: SpectrumPath,
) -> Result<Vec<f64>> {
    check_grid(times)?;
    let dynamics = ReducedDynamics::new(cfg.params(), path)?;
    let rho0 = eigenstate_plus(cfg.phi, 0.0);
    let omega = cfg.omega_drive();
    Ok(times
        .iter()
        .map(|&t| fidelity(&dynamics.state(t, &rho0), &eigenstate_plus(cfg.phi, omega * t)))
        .collect())
}
