//! Table-producing subcommands.

use std::fmt::Write as _;

use spinbath::adiabatic::{fidelity_series_via_channel, OpenFidelity};
use spinbath::dynamics::evolve;
use spinbath::riccati::mode_f;
use spinbath::{AdiabaticConfig, SpectrumPath};

use crate::config::{RunConfig, SweepVar};
use crate::CliError;

/// Reals are written with 17 significant digits so that they round-trip.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn spectrum(cfg: &RunConfig, path: SpectrumPath) -> Result<String, CliError> {
    let params = cfg.params()?;
    let spectrum = path.spectrum(&params, params.beta())?;
    let alpha = params.alpha();
    let mut out = String::from("index_or_class,multiplicity,E,Omega,Eplus,Eminus,weight,f\n");
    for m in spectrum.iter() {
        row(
            &mut out,
            &[
                m.label.to_string(),
                m.multiplicity.to_string(),
                real(m.e),
                real(m.omega),
                real(m.e_plus),
                real(m.e_minus),
                real(m.weight),
                real(mode_f(m.e, alpha)),
            ],
        );
    }
    Ok(out)
}

pub fn evolve_table(cfg: &RunConfig, path: SpectrumPath) -> Result<String, CliError> {
    let traj = evolve(&cfg.params()?, &cfg.initial_state()?, &cfg.times()?, path)?;
    let mut out = String::from("t,rho00_re,rho01_re,rho01_im,rho11_re,coherence,purity\n");
    for (k, state) in traj.states.iter().enumerate() {
        let m = state.matrix();
        row(
            &mut out,
            &[
                real(traj.times[k]),
                real(m.m[0][0].re),
                real(m.m[0][1].re),
                real(m.m[0][1].im),
                real(m.m[1][1].re),
                real(traj.coherence[k]),
                real(traj.purity[k]),
            ],
        );
    }
    Ok(out)
}

pub fn coherence_table(cfg: &RunConfig, path: SpectrumPath) -> Result<String, CliError> {
    let traj = evolve(&cfg.params()?, &cfg.initial_state()?, &cfg.times()?, path)?;
    let mut out = String::from("t,coherence\n");
    for (t, c) in traj.times.iter().zip(&traj.coherence) {
        row(&mut out, &[real(*t), real(*c)]);
    }
    Ok(out)
}

/// Closed-form open-system fidelity when it applies (uniform bath, field
/// perpendicular to the rotation axis).
fn closed_form(cfg: &AdiabaticConfig) -> Option<OpenFidelity> {
    OpenFidelity::new(cfg).ok()
}

pub fn fidelity_table(cfg: &RunConfig, path: SpectrumPath) -> Result<String, CliError> {
    let adiabatic = cfg.adiabatic()?;
    let times = cfg.times()?;
    let channel = fidelity_series_via_channel(&times, &adiabatic, path)?;
    let closed = closed_form(&adiabatic);
    let mut out = String::from("t,F_closed_form,F_channel\n");
    for (t, f) in times.iter().zip(&channel) {
        let cf = closed.as_ref().map_or(String::new(), |c| real(c.eval(*t)));
        row(&mut out, &[real(*t), cf, real(*f)]);
    }
    Ok(out)
}

pub fn sweep_table(cfg: &RunConfig, path: SpectrumPath) -> Result<String, CliError> {
    let (var, values) = cfg.sweep()?;
    let times = cfg.times()?;
    let input = cfg.drive()?;
    let theta = cfg.theta()?;
    let (omegas, couplings) = cfg.bath_lists()?;
    let uniform = |what: &str| -> Result<(f64, f64), CliError> {
        let (om, g) = (omegas[0], couplings[0]);
        if omegas.iter().any(|&v| v != om) || couplings.iter().any(|&v| v != g) {
            return Err(CliError::Config(format!("sweeping {what} needs a uniform bath")));
        }
        Ok((om, g))
    };

    let mut out = String::new();
    writeln!(out, "{},t,F", var.name()).expect("writing to a String cannot fail");
    for &v in &values {
        let mut x = input.x();
        let (mut om, mut g, mut th) = (omegas.clone(), couplings.clone(), theta);
        match var {
            SweepVar::X => x = v,
            SweepVar::G => {
                uniform("g")?;
                g = vec![v; om.len()];
            }
            SweepVar::Theta => th = v,
            SweepVar::N => {
                let (o, c) = uniform("N")?;
                let n = v as usize;
                (om, g) = (vec![o; n], vec![c; n]);
            }
        }
        let bath = spinbath::ModelParams::new(om, g, input.drive, th)?;
        let adiabatic = AdiabaticConfig::new(input.beta0, input.phi, x, bath)?;
        let f = fidelity_series_via_channel(&times, &adiabatic, path)?;
        let label = if var == SweepVar::N { (v as usize).to_string() } else { real(v) };
        for (t, fv) in times.iter().zip(&f) {
            row(&mut out, &[label.clone(), real(*t), real(*fv)]);
        }
    }
    Ok(out)
}
