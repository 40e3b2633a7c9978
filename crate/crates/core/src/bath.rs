//! Model parameters and the spectrum of the spin bath.
//!
//! The bath is `N` non-interacting spins with `H_E = Σ ω_n σ_n^z`, coupled to
//! the qubit through `σ^z ⊗ Σ g_n σ_n^z`. Every operator that matters is
//! diagonal in the computational basis `|i⟩ = |i_1 … i_N⟩`, where bit value
//! `b` carries the `σ^z` eigenvalue `(−1)^b` and `i_1` is the most significant
//! bit of `i`.
//!
//! Temperature enters only as the inverse temperature `theta = 1/kT`
//! (`k_B = ħ = 1`); `theta = 0` is infinite temperature and `theta = ∞` is the
//! ground state of the bath.

use crate::error::{Error, Result};

/// Largest bath that [`bath_spectrum`] will enumerate mode by mode.
pub const N_MAX_ENUMERATE: usize = 24;

/// Tolerance below which a bath is treated as uniform.
const UNIFORM_TOL: f64 = 0.0;

/// Driving field `H_Q(t) = β σ³ + α (σ¹ cos ωt + σ² sin ωt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    /// Transverse amplitude.
    pub alpha: f64,
    /// Longitudinal amplitude.
    pub beta: f64,
    /// Rotation frequency of the transverse component.
    pub omega: f64,
}

impl Drive {
    pub fn new(alpha: f64, beta: f64, omega: f64) -> Self {
        Self { alpha, beta, omega }
    }

    /// Field of magnitude `beta0` tilted by the polar angle `phi`.
    pub fn polar(beta0: f64, phi: f64, omega: f64) -> Self {
        Self { alpha: beta0 * phi.sin(), beta: beta0 * phi.cos(), omega }
    }

    /// `β − ω/2`, the longitudinal field seen in the rotating frame.
    pub fn beta_eff(&self) -> f64 {
        self.beta - 0.5 * self.omega
    }
}

/// Full physical configuration of qubit, drive and bath.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    omegas: Vec<f64>,
    couplings: Vec<f64>,
    drive: Drive,
    theta: f64,
}

impl ModelParams {
    pub fn new(omegas: Vec<f64>, couplings: Vec<f64>, drive: Drive, theta: f64) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidParams("bath must contain at least one spin".into()));
        }
        if omegas.len() != couplings.len() {
            return Err(Error::InvalidParams(format!(
                "{} bath frequencies but {} couplings",
                omegas.len(),
                couplings.len()
            )));
        }
        if omegas.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("bath frequencies and couplings must be finite".into()));
        }
        let params = Self { omegas, couplings, drive, theta };
        params.check_drive_and_theta()?;
        Ok(params)
    }

    /// `n` identical spins with frequency `omega` and coupling `g`.
    pub fn uniform(n: usize, omega: f64, g: f64, drive: Drive, theta: f64) -> Result<Self> {
        Self::new(vec![omega; n], vec![g; n], drive, theta)
    }

    fn check_drive_and_theta(&self) -> Result<()> {
        let Drive { alpha, beta, omega } = self.drive;
        if ![alpha, beta, omega].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("drive parameters must be finite".into()));
        }
        if self.theta.is_nan() || self.theta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "inverse temperature must lie in [0, inf], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn with_drive(mut self, drive: Drive) -> Result<Self> {
        self.drive = drive;
        self.check_drive_and_theta()?;
        Ok(self)
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        self.theta = theta;
        self.check_drive_and_theta()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.omegas.len()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn drive(&self) -> Drive {
        self.drive
    }

    pub fn alpha(&self) -> f64 {
        self.drive.alpha
    }

    pub fn beta(&self) -> f64 {
        self.drive.beta
    }

    pub fn omega_drive(&self) -> f64 {
        self.drive.omega
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `Some((ω, g))` when every spin has the same frequency and coupling.
    pub fn uniform_values(&self) -> Option<(f64, f64)> {
        let (w0, g0) = (self.omegas[0], self.couplings[0]);
        let same = |xs: &[f64], x0: f64| xs.iter().all(|x| (x - x0).abs() <= UNIFORM_TOL);
        (same(&self.omegas, w0) && same(&self.couplings, g0)).then_some((w0, g0))
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_values().is_some()
    }

    pub fn has_coupling(&self) -> bool {
        self.couplings.iter().any(|&g| g != 0.0)
    }
}

/// One bath eigenmode, or one Hamming class of degenerate modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    /// Bath index `i`, or Hamming weight `k` for an aggregated class.
    pub label: u64,
    /// Number of bath indices represented by this record.
    pub multiplicity: u64,
    /// Eigenvalue of `V = Σ (g_n σ_n^z + β/N)`.
    pub e: f64,
    /// Eigenvalue of `H_E`.
    pub omega: f64,
    /// Eigenvalue of the upper diagonal block `H_+`.
    pub e_plus: f64,
    /// Eigenvalue of the lower diagonal block `H_-`.
    pub e_minus: f64,
    /// Thermal weight of the whole record, multiplicity included.
    pub weight: f64,
}

impl Mode {
    /// Thermal weight `ρ_i` of a single bath index in this record.
    pub fn member_weight(&self) -> f64 {
        self.weight / self.multiplicity as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    Enumerated,
    Hamming,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum {
    pub kind: SpectrumKind,
    pub modes: Vec<Mode>,
}

impl ModeSpectrum {
    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Mode> {
        self.modes.iter()
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln(½(1 + tanh(−θ·ω·s)))`, the log-probability that a spin of frequency
/// `omega` has `σ^z = s` in the Gibbs state, including the `θ = ∞` limit.
fn ln_spin_prob(theta: f64, omega: f64, s: f64) -> f64 {
    let x = omega * s;
    if theta.is_infinite() {
        return if x > 0.0 {
            f64::NEG_INFINITY
        } else if x < 0.0 {
            0.0
        } else {
            -std::f64::consts::LN_2
        };
    }
    -softplus(2.0 * theta * x)
}

/// Turn unnormalised log-weights into weights summing to one, in place.
fn normalize_log_weights(log_w: &mut [f64]) {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for w in log_w.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    for w in log_w.iter_mut() {
        *w /= total;
    }
}

/// `σ^z` eigenvalue of spin `n` (0-based) in bath index `index`.
#[inline]
fn spin_sign(index: u64, n: usize, n_spins: usize) -> f64 {
    if (index >> (n_spins - 1 - n)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Enumerate all `2^N` bath modes.
///
/// `beta_value` is the longitudinal field used inside `E_i` and `E_i^±`
/// (the raw `β`, or `β − ω/2` in the rotating frame).
pub fn bath_spectrum(params: &ModelParams, beta_value: f64) -> Result<ModeSpectrum> {
    let n = params.n();
    if n > N_MAX_ENUMERATE {
        return Err(Error::Capacity { n, max: N_MAX_ENUMERATE });
    }

    // Doubling construction: appending spin n maps index i to 2i + bit, so
    // the first spin ends up as the most significant bit.
    let size = 1usize << n;
    let mut e = Vec::with_capacity(size);
    let mut om = Vec::with_capacity(size);
    e.push(0.0);
    om.push(0.0);
    for (&w, &g) in params.omegas().iter().zip(params.couplings()) {
        let (e_prev, om_prev) = (std::mem::take(&mut e), std::mem::take(&mut om));
        for (&ev, &ov) in e_prev.iter().zip(&om_prev) {
            e.push(ev + g);
            e.push(ev - g);
            om.push(ov + w);
            om.push(ov - w);
        }
    }

    let theta = params.theta();
    let mut weights: Vec<f64> = if theta.is_infinite() {
        ground_state_weights(params)
    } else if theta == 0.0 {
        vec![0.0; size]
    } else {
        om.iter().map(|&o| -theta * o).collect()
    };
    if !theta.is_infinite() {
        normalize_log_weights(&mut weights);
    }

    let modes = (0..size)
        .map(|i| {
            let ei = e[i] + beta_value;
            Mode {
                label: i as u64,
                multiplicity: 1,
                e: ei,
                omega: om[i],
                e_plus: om[i] + ei,
                e_minus: om[i] - ei,
                weight: weights[i],
            }
        })
        .collect();
    Ok(ModeSpectrum { kind: SpectrumKind::Enumerated, modes })
}

/// Zero-temperature weights: uniform over the ground space of `H_E`.
///
/// A spin with `ω_n > 0` is pinned to bit 1, one with `ω_n < 0` to bit 0, and
/// a spin with `ω_n = 0` is free.
fn ground_state_weights(params: &ModelParams) -> Vec<f64> {
    let n = params.n();
    let (mut mask, mut bits, mut free) = (0u64, 0u64, 0u32);
    for (k, &w) in params.omegas().iter().enumerate() {
        let bit = 1u64 << (n - 1 - k);
        if w > 0.0 {
            mask |= bit;
            bits |= bit;
        } else if w < 0.0 {
            mask |= bit;
        } else {
            free += 1;
        }
    }
    let share = 0.5f64.powi(free as i32);
    (0..1u64 << n).map(|i| if i & mask == bits { share } else { 0.0 }).collect()
}

/// Hamming-class spectrum of a uniform bath: `N + 1` records, class `k`
/// holding the `C(N, k)` indices with `k` spins down.
pub fn hamming_spectrum(params: &ModelParams, beta_value: f64) -> Result<ModeSpectrum> {
    let (w, g) = params
        .uniform_values()
        .ok_or(Error::Contract("Hamming-class aggregation requires a uniform bath"))?;
    let n = params.n();
    let theta = params.theta();
    let ln_up = ln_spin_prob(theta, w, 1.0);
    let ln_down = ln_spin_prob(theta, w, -1.0);

    let mut ln_binom = 0.0;
    let mut log_w = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            ln_binom += ((n - k + 1) as f64 / k as f64).ln();
        }
        let mut lw = ln_binom;
        if n - k > 0 {
            lw += (n - k) as f64 * ln_up;
        }
        if k > 0 {
            lw += k as f64 * ln_down;
        }
        log_w.push(lw);
    }
    normalize_log_weights(&mut log_w);

    let mut multiplicity = 1u64;
    let modes = (0..=n)
        .map(|k| {
            let level = (n as f64) - 2.0 * k as f64;
            let e = g * level + beta_value;
            let omega = w * level;
            let m = Mode {
                label: k as u64,
                multiplicity,
                e,
                omega,
                e_plus: omega + e,
                e_minus: omega - e,
                weight: log_w[k],
            };
            // C(N, k+1) = C(N, k)·(N−k)/(k+1); pinned at u64::MAX once it no
            // longer fits.
            if multiplicity != u64::MAX {
                let next = multiplicity as u128 * (n - k) as u128 / (k as u128 + 1);
                multiplicity = u64::try_from(next).unwrap_or(u64::MAX);
            }
            m
        })
        .collect();
    Ok(ModeSpectrum { kind: SpectrumKind::Hamming, modes })
}

/// Gibbs weight `ρ_i` of bath index `index` from the product form
/// `Π_n ½(1 + tanh(−θω_n)(−1)^{i_n})`.
pub fn product_weight(params: &ModelParams, index: u64) -> Result<f64> {
    let n = params.n();
    if n < 64 && index >> n != 0 {
        return Err(Error::Range { index, n });
    }
    let theta = params.theta();
    let ln: f64 = params
        .omegas()
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let s = if n - 1 - k >= 64 { 1.0 } else { spin_sign(index, k, n) };
            ln_spin_prob(theta, w, s)
        })
        .sum();
    Ok(ln.exp())
}

/// Index of the ground state of `H_E` (smallest index among degenerate
/// minimisers).
pub fn zero_temperature_index(params: &ModelParams) -> Result<u64> {
    let n = params.n();
    if n > 64 {
        return Err(Error::Capacity { n, max: 64 });
    }
    Ok(params
        .omegas()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .fold(0u64, |acc, (k, _)| acc | 1u64 << (n - 1 - k)))
}
