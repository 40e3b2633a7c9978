//! Reduced dynamics of the driven qubit.
//!
//! In the frame rotating with the drive the total Hamiltonian is time
//! independent with `β → β_eff = β − ω/2`, and it is block diagonal over the
//! bath eigenbasis. Bath mode `i` evolves the qubit with
//! `U_i(t) = e^{−iΩ_i t} exp(−i H_i t)`, `H_i = [[E_i, α], [α, −E_i]]`
//! (with `E_i` evaluated at `β_eff`). Tracing out the bath leaves the random
//! unitary channel
//!
//! ```text
//! η_t = V_t ( Σ_i ρ_i U_i(t) η U_i(t)† ) V_t†,   V_t = diag(e^{−iωt/2}, e^{iωt/2})
//! ```
//!
//! For a uniform bath the sum runs over the `N + 1` Hamming classes instead
//! of the `2^N` indices.

use num_complex::Complex64 as C64;

use crate::bath::{bath_spectrum, hamming_spectrum, Mode, ModeSpectrum, ModelParams};
use crate::error::{Error, Result};
use crate::qubit::{herm2_exp, Complex2x2, DensityMatrix2, Hermitian2Decomposition};

/// Above this bath size `Auto` switches to Hamming classes for uniform baths.
pub const AUTO_HAMMING_ABOVE: usize = 12;

/// How the bath spectrum is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SpectrumPath {
    /// All `2^N` bath indices.
    Enumerate,
    /// `N + 1` Hamming classes; uniform baths only.
    Hamming,
    /// Hamming classes for uniform baths with `N > 12`, enumeration otherwise.
    #[default]
    Auto,
}

impl SpectrumPath {
    pub fn uses_hamming(self, params: &ModelParams) -> bool {
        match self {
            SpectrumPath::Enumerate => false,
            SpectrumPath::Hamming => true,
            SpectrumPath::Auto => params.is_uniform() && params.n() > AUTO_HAMMING_ABOVE,
        }
    }

    pub fn spectrum(self, params: &ModelParams, beta_value: f64) -> Result<ModeSpectrum> {
        if self.uses_hamming(params) {
            hamming_spectrum(params, beta_value)
        } else {
            bath_spectrum(params, beta_value)
        }
    }
}

/// `H_i = [[E − ω/2, α], [α, −E + ω/2]]`.
pub fn mode_hamiltonian(e: f64, omega_drive: f64, alpha: f64) -> Complex2x2 {
    let d = e - 0.5 * omega_drive;
    Complex2x2::from_real(d, alpha, alpha, -d)
}

/// Evolution of the qubit block belonging to one bath mode under the static
/// Hamiltonian the spectrum was built for, global phase `e^{−iΩ_i t}`
/// included.
pub fn mode_unitary(mode: &Mode, t: f64, alpha: f64) -> Complex2x2 {
    if alpha == 0.0 {
        return Complex2x2::diag(
            C64::from_polar(1.0, -mode.e_plus * t),
            C64::from_polar(1.0, -mode.e_minus * t),
        );
    }
    let h = Hermitian2Decomposition { c0: mode.omega, n: [alpha, 0.0, mode.e] };
    h.exp_minus_i(t)
}

/// `V_t = diag(e^{−iωt/2}, e^{iωt/2})`.
pub fn frame_rotation(t: f64, omega_drive: f64) -> Complex2x2 {
    let half = 0.5 * omega_drive * t;
    Complex2x2::diag(C64::from_polar(1.0, -half), C64::from_polar(1.0, half))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausElement {
    /// Thermal weight of the mode (multiplicity folded in).
    pub weight: f64,
    pub unitary: Complex2x2,
}

/// Random-unitary channel `ρ ↦ V (Σ w_k U_k ρ U_k†) V†`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitChannel {
    pub elements: Vec<KrausElement>,
    pub frame_rotation: Complex2x2,
}

impl QubitChannel {
    pub fn identity() -> Self {
        Self {
            elements: vec![KrausElement { weight: 1.0, unitary: Complex2x2::identity() }],
            frame_rotation: Complex2x2::identity(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.elements.iter().map(|k| k.weight).sum()
    }

    /// Kraus operators `√w_k · V · U_k`.
    pub fn kraus_operators(&self) -> Vec<Complex2x2> {
        self.elements
            .iter()
            .map(|k| (self.frame_rotation * k.unitary).scale(k.weight.sqrt().into()))
            .collect()
    }

    /// Frobenius distances of `Σ K†K` and `Σ KK†` from the identity.
    pub fn completeness_defects(&self) -> (f64, f64) {
        let ks = self.kraus_operators();
        let (mut left, mut right) = (Complex2x2::zero(), Complex2x2::zero());
        for k in &ks {
            left = left + k.dagger() * *k;
            right = right + *k * k.dagger();
        }
        let id = Complex2x2::identity();
        let d = |m: Complex2x2| crate::qubit::frobenius_norm_sq(&(m - id)).sqrt();
        (d(left), d(right))
    }

    pub fn apply(&self, rho: &DensityMatrix2) -> DensityMatrix2 {
        let r = rho.matrix();
        let mut acc = Complex2x2::zero();
        for k in &self.elements {
            acc = acc + k.unitary.conjugate(r).scale(k.weight.into());
        }
        DensityMatrix2::from_map_output(self.frame_rotation.conjugate(&acc))
    }
}

pub fn apply_channel(channel: &QubitChannel, rho0: &DensityMatrix2) -> DensityMatrix2 {
    channel.apply(rho0)
}

/// Precomputed rotating-frame spectrum from which channels at any time are
/// built.
///
/// This is the only place where `β_eff` replaces `β`.
#[derive(Clone, Debug)]
pub struct ReducedDynamics {
    spectrum: ModeSpectrum,
    alpha: f64,
    omega_drive: f64,
}

impl ReducedDynamics {
    pub fn new(params: &ModelParams, path: SpectrumPath) -> Result<Self> {
        let mut spectrum = path.spectrum(params, params.drive().beta_eff())?;
        spectrum.modes.retain(|m| m.weight != 0.0);
        Ok(Self { spectrum, alpha: params.alpha(), omega_drive: params.omega_drive() })
    }

    /// Rotating-frame spectrum restricted to modes of non-zero weight.
    pub fn spectrum(&self) -> &ModeSpectrum {
        &self.spectrum
    }

    pub fn channel(&self, t: f64) -> QubitChannel {
        QubitChannel {
            elements: self
                .spectrum
                .iter()
                .map(|m| KrausElement { weight: m.weight, unitary: mode_unitary(m, t, self.alpha) })
                .collect(),
            frame_rotation: frame_rotation(t, self.omega_drive),
        }
    }

    /// `η_t` without materialising the channel.
    pub fn state(&self, t: f64, rho0: &DensityMatrix2) -> DensityMatrix2 {
        let r = rho0.matrix();
        let mut acc = Complex2x2::zero();
        for m in self.spectrum.iter() {
            let u = mode_unitary(m, t, self.alpha);
            acc = acc + u.conjugate(r).scale(m.weight.into());
        }
        DensityMatrix2::from_map_output(frame_rotation(t, self.omega_drive).conjugate(&acc))
    }
}

/// The channel `T_t² ∘ T_t¹` of the reduced dynamics at time `t`.
pub fn build_channel(t: f64, params: &ModelParams, path: SpectrumPath) -> Result<QubitChannel> {
    Ok(ReducedDynamics::new(params, path)?.channel(t))
}

/// Qubit states along a time grid plus derived scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix2>,
    /// `|η₀₁(t)|`.
    pub coherence: Vec<f64>,
    /// `Tr η_t²`.
    pub purity: Vec<f64>,
    /// Overlap with a reference state, when one was requested.
    pub fidelity: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn from_states(times: Vec<f64>, states: Vec<DensityMatrix2>) -> Self {
        let coherence = states.iter().map(DensityMatrix2::coherence).collect();
        let purity = states.iter().map(DensityMatrix2::purity).collect();
        Self { times, states, coherence, purity, fidelity: None }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParams("time grid must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Reduced state at every point of `times`, each computed in one shot.
pub fn evolve(
    params: &ModelParams,
    rho0: &DensityMatrix2,
    times: &[f64],
    path: SpectrumPath,
) -> Result<Trajectory> {
    check_grid(times)?;
    let dynamics = ReducedDynamics::new(params, path)?;
    let states = times.iter().map(|&t| dynamics.state(t, rho0)).collect();
    Ok(Trajectory::from_states(times.to_vec(), states))
}

/// `Σ_i ρ_i e^{−2iE_i t}`, the factor multiplying `η₀₁` under pure dephasing.
///
/// Uses the lab-frame `E_i` (raw `β`); for `α = 0` the drive frequency drops
/// out entirely.
pub fn dephasing_factor(t: f64, params: &ModelParams, path: SpectrumPath) -> Result<C64> {
    let spectrum = path.spectrum(params, params.beta())?;
    Ok(spectrum
        .iter()
        .map(|m| C64::from_polar(m.weight, -2.0 * m.e * t))
        .sum())
}

/// Unitary evolution of the uncoupled qubit, `U(t) = V_t exp(−iHt)` with
/// `H = [[β_eff, α], [α, −β_eff]]`.
pub fn closed_evolution(t: f64, params: &ModelParams) -> Result<Complex2x2> {
    if params.has_coupling() {
        return Err(Error::Contract("closed evolution requires all couplings to vanish"));
    }
    let h = mode_hamiltonian(params.beta(), params.omega_drive(), params.alpha());
    Ok(frame_rotation(t, params.omega_drive()) * herm2_exp(&h, t)?)
}
