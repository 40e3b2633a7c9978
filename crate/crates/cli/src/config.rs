//! TOML run configuration.
//!
//! ```toml
//! mode = "auto"                 # enumerate | hamming | auto
//!
//! [bath]
//! n = 4                         # uniform shorthand: n, omega, g
//! omega = 1.0
//! g = 0.1
//! # omegas = [1.0, 0.8]         # or explicit per-spin lists
//! # couplings = [0.1, 0.2]
//! theta = 1.0                   # inverse temperature; "inf" / "zero" accepted
//!
//! [drive]
//! alpha = 0.5                   # either alpha + beta (+ omega) ...
//! beta = 1.0
//! omega = 0.2
//! # beta0 = 1.0                 # ... or beta0 + phi (+ omega or x)
//! # phi = 1.5707963267948966
//! # x = 0.1
//!
//! [time]
//! t_start = 0.0
//! t_end = 10.0
//! steps = 101
//!
//! [initial_state]
//! bloch = [0.0, 0.0, 1.0]       # or rho00, rho11, rho01_re, rho01_im
//!
//! [output]
//! path = "out.csv"
//! format = "csv"
//! ```

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::Deserialize;
use spinbath::{AdiabaticConfig, Complex2x2, DensityMatrix2, Drive, ModelParams, SpectrumPath};

use crate::CliError;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A real number that may also be written as `"inf"` or `"zero"`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Scalar::Num(v) => Ok(*v),
            Scalar::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "zero" => Ok(0.0),
                other => other.parse().map_err(|_| bad(format!("cannot read {s:?} as a number"))),
            },
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<String>,
    pub bath: Option<BathSection>,
    pub drive: Option<DriveSection>,
    pub time: Option<TimeSection>,
    pub initial_state: Option<StateSection>,
    pub output: Option<OutputSection>,
    pub sweep: Option<SweepSection>,
    pub verify: Option<VerifySection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub n: Option<usize>,
    pub omega: Option<f64>,
    pub g: Option<f64>,
    pub omegas: Option<Vec<f64>>,
    pub couplings: Option<Vec<f64>>,
    pub theta: Option<Scalar>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub beta0: Option<f64>,
    pub phi: Option<f64>,
    pub omega: Option<f64>,
    pub x: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub bloch: Option<[f64; 3]>,
    pub rho00: Option<f64>,
    pub rho11: Option<f64>,
    pub rho01_re: Option<f64>,
    pub rho01_im: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: String,
    pub values: Vec<Scalar>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub seed: Option<u64>,
    pub sets: Option<usize>,
    pub n_max: Option<usize>,
    pub times: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
}

/// Drive as written in the config, kept so that the adiabatic commands can
/// use the polar form without a lossy round trip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveInput {
    pub drive: Drive,
    pub beta0: f64,
    pub phi: f64,
}

impl DriveInput {
    /// `x = ω/(2β0)`.
    pub fn x(&self) -> f64 {
        self.drive.omega / (2.0 * self.beta0)
    }
}

/// Sweep variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVar {
    X,
    G,
    Theta,
    N,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::X => "x",
            SweepVar::G => "g",
            SweepVar::Theta => "theta",
            SweepVar::N => "N",
        }
    }
}

pub const SWEEP_MAX_CELLS: usize = 10_000;

/// Parsed configuration. Sections are validated lazily by the accessors so
/// that each subcommand only requires what it uses.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    raw: RawConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        Ok(Self { raw })
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }

    pub fn mode(&self) -> Result<SpectrumPath, CliError> {
        self.raw.mode.as_deref().map_or(Ok(SpectrumPath::Auto), parse_mode)
    }

    pub fn output_path(&self) -> Result<Option<PathBuf>, CliError> {
        let Some(out) = &self.raw.output else { return Ok(None) };
        if let Some(fmt) = &out.format {
            if !fmt.eq_ignore_ascii_case("csv") {
                return Err(bad(format!("unsupported output format {fmt:?}; only csv is available")));
            }
        }
        Ok(out.path.clone())
    }

    pub fn theta(&self) -> Result<f64, CliError> {
        let bath = self.raw.bath.as_ref().ok_or_else(|| bad("missing [bath] section"))?;
        let theta = bath.theta.as_ref().ok_or_else(|| bad("[bath] needs theta"))?.value()?;
        if theta.is_nan() || theta < 0.0 {
            return Err(bad(format!("theta must lie in [0, inf], got {theta}")));
        }
        Ok(theta)
    }

    /// Per-spin `(ω_n, g_n)` lists.
    pub fn bath_lists(&self) -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let bath = self.raw.bath.as_ref().ok_or_else(|| bad("missing [bath] section"))?;
        let shorthand = bath.n.is_some() || bath.omega.is_some() || bath.g.is_some();
        let lists = bath.omegas.is_some() || bath.couplings.is_some();
        match (shorthand, lists) {
            (true, true) => Err(bad("[bath] mixes the uniform shorthand (n, omega, g) with explicit lists")),
            (false, false) => Err(bad("[bath] needs either n, omega, g or omegas, couplings")),
            (true, false) => {
                let (Some(n), Some(omega), Some(g)) = (bath.n, bath.omega, bath.g) else {
                    return Err(bad("uniform [bath] needs all of n, omega, g"));
                };
                if n == 0 {
                    return Err(bad("[bath] n must be at least 1"));
                }
                Ok((vec![omega; n], vec![g; n]))
            }
            (false, true) => {
                let (Some(om), Some(g)) = (&bath.omegas, &bath.couplings) else {
                    return Err(bad("[bath] needs both omegas and couplings"));
                };
                if om.len() != g.len() {
                    return Err(bad(format!("[bath] has {} omegas but {} couplings", om.len(), g.len())));
                }
                Ok((om.clone(), g.clone()))
            }
        }
    }

    pub fn drive(&self) -> Result<DriveInput, CliError> {
        let d = self.raw.drive.as_ref().ok_or_else(|| bad("missing [drive] section"))?;
        let cartesian = d.alpha.is_some() || d.beta.is_some();
        let polar = d.beta0.is_some() || d.phi.is_some();
        if d.omega.is_some() && d.x.is_some() {
            return Err(bad("[drive] takes omega or x, not both"));
        }
        match (cartesian, polar) {
            (true, true) => Err(bad("[drive] mixes alpha/beta with beta0/phi")),
            (false, false) => Err(bad("[drive] needs alpha and beta, or beta0")),
            (true, false) => {
                let (Some(alpha), Some(beta)) = (d.alpha, d.beta) else {
                    return Err(bad("[drive] needs both alpha and beta"));
                };
                if d.x.is_some() {
                    return Err(bad("[drive] x is only meaningful with beta0"));
                }
                let drive = Drive::new(alpha, beta, d.omega.unwrap_or(0.0));
                Ok(DriveInput { drive, beta0: alpha.hypot(beta), phi: alpha.atan2(beta) })
            }
            (false, true) => {
                let beta0 = d.beta0.ok_or_else(|| bad("[drive] needs beta0"))?;
                let phi = d.phi.unwrap_or(FRAC_PI_2);
                let omega = match d.x {
                    Some(x) => 2.0 * beta0 * x,
                    None => d.omega.unwrap_or(0.0),
                };
                Ok(DriveInput { drive: Drive::polar(beta0, phi, omega), beta0, phi })
            }
        }
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let (omegas, couplings) = self.bath_lists()?;
        Ok(ModelParams::new(omegas, couplings, self.drive()?.drive, self.theta()?)?)
    }

    /// Adiabatic setup, using the polar form of the configured drive.
    pub fn adiabatic(&self) -> Result<AdiabaticConfig, CliError> {
        let input = self.drive()?;
        let params = self.params()?;
        Ok(AdiabaticConfig::new(input.beta0, input.phi, input.x(), params)?)
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let t = self.raw.time.as_ref().ok_or_else(|| bad("missing [time] section"))?;
        time_grid(t.t_start, t.t_end, t.steps)
    }

    pub fn initial_state(&self) -> Result<DensityMatrix2, CliError> {
        let s = self.raw.initial_state.as_ref().ok_or_else(|| bad("missing [initial_state] section"))?;
        let entries = [s.rho00, s.rho11, s.rho01_re, s.rho01_im];
        let matrix = entries.iter().any(Option::is_some);
        match (s.bloch, matrix) {
            (Some(_), true) => Err(bad("[initial_state] gives both a Bloch vector and matrix entries")),
            (None, false) => Err(bad("[initial_state] needs bloch or rho00/rho11/rho01_re/rho01_im")),
            (Some(b), false) => {
                let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
                if !(norm <= 1.0 + 1e-12) {
                    return Err(bad(format!("Bloch vector has length {norm} > 1")));
                }
                Ok(DensityMatrix2::from_bloch(b)?)
            }
            (None, true) => {
                let (Some(r00), Some(r11)) = (s.rho00, s.rho11) else {
                    return Err(bad("[initial_state] matrix form needs rho00 and rho11"));
                };
                let c = C64::new(s.rho01_re.unwrap_or(0.0), s.rho01_im.unwrap_or(0.0));
                let m = Complex2x2::new(r00.into(), c, c.conj(), r11.into());
                Ok(DensityMatrix2::new(m)?)
            }
        }
    }

    pub fn sweep(&self) -> Result<(SweepVar, Vec<f64>), CliError> {
        let s = self.raw.sweep.as_ref().ok_or_else(|| bad("missing [sweep] section"))?;
        let var = match s.variable.as_str() {
            "x" => SweepVar::X,
            "g" => SweepVar::G,
            "theta" => SweepVar::Theta,
            "N" | "n" => SweepVar::N,
            other => return Err(bad(format!("unknown sweep variable {other:?}; expected x, g, theta or N"))),
        };
        if s.values.is_empty() {
            return Err(bad("[sweep] values is empty"));
        }
        if s.values.len() > SWEEP_MAX_CELLS {
            return Err(bad(format!("[sweep] has {} cells, limit is {SWEEP_MAX_CELLS}", s.values.len())));
        }
        let values = s.values.iter().map(Scalar::value).collect::<Result<Vec<_>, _>>()?;
        if var == SweepVar::N && values.iter().any(|v| !(*v >= 1.0) || v.fract() != 0.0 || !v.is_finite()) {
            return Err(bad("[sweep] N values must be positive integers"));
        }
        if var != SweepVar::Theta && values.iter().any(|v| !v.is_finite()) {
            return Err(bad(format!("[sweep] {} values must be finite", var.name())));
        }
        Ok((var, values))
    }

    pub fn verify(&self) -> VerifySection {
        self.raw.verify.clone().unwrap_or_default()
    }

    pub fn has_model(&self) -> bool {
        self.raw.bath.is_some() || self.raw.drive.is_some()
    }
}

pub fn parse_mode(s: &str) -> Result<SpectrumPath, CliError> {
    match s {
        "enumerate" => Ok(SpectrumPath::Enumerate),
        "hamming" => Ok(SpectrumPath::Hamming),
        "auto" => Ok(SpectrumPath::Auto),
        other => Err(bad(format!("unknown mode {other:?}; expected enumerate, hamming or auto"))),
    }
}

/// Evenly spaced grid with both endpoints. A single point is allowed only
/// when the interval is degenerate.
pub fn time_grid(t_start: f64, t_end: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !t_start.is_finite() || !t_end.is_finite() {
        return Err(bad("[time] bounds must be finite"));
    }
    if steps == 1 && t_start == t_end {
        return Ok(vec![t_start]);
    }
    if steps < 2 {
        return Err(bad("[time] steps must be at least 2"));
    }
    if !(t_end > t_start) {
        return Err(bad("[time] t_end must exceed t_start"));
    }
    let h = (t_end - t_start) / (steps - 1) as f64;
    Ok((0..steps).map(|k| if k + 1 == steps { t_end } else { t_start + k as f64 * h }).collect())
}
