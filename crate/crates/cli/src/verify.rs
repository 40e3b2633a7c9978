//! Self-verification against the brute-force full-space oracles.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinbath::bath::bath_spectrum;
use spinbath::dynamics::{frame_rotation, ReducedDynamics};
use spinbath::oracle::{bath_weights, block_diagonalize_with, ode_propagators, reduce_with_propagator, ExactPropagator};
use spinbath::riccati::{riccati_f, riccati_residual, similarity_unitary_with};
use spinbath::{Complex2x2, DensityMatrix2, Drive, ModelParams, SpectrumPath};

use crate::config::VerifySection;
use crate::CliError;

/// Largest bath the verification suite will touch.
pub const VERIFY_N_MAX: usize = 6;

pub const TOL_EXACT: f64 = 1e-10;
pub const TOL_ODE: f64 = 1e-6;
pub const TOL_RICCATI: f64 = 1e-12;
pub const TOL_BLOCK: f64 = 1e-12;
pub const TOL_CHANNEL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random parameter sets per bath size.
    pub sets: usize,
    pub n_max: usize,
    pub times: usize,
    pub t_max: f64,
    pub dt: f64,
    /// Multiplies every Riccati eigenvalue before use; a negative control.
    pub corrupt_riccati: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, sets: 20, n_max: VERIFY_N_MAX, times: 50, t_max: 10.0, dt: 1e-3, corrupt_riccati: None }
    }
}

impl VerifyOptions {
    pub fn from_section(s: &VerifySection) -> Self {
        let d = Self::default();
        Self {
            seed: s.seed.unwrap_or(d.seed),
            sets: s.sets.unwrap_or(d.sets),
            n_max: s.n_max.unwrap_or(d.n_max),
            times: s.times.unwrap_or(d.times),
            t_max: s.t_max.unwrap_or(d.t_max),
            dt: s.dt.unwrap_or(d.dt),
            corrupt_riccati: None,
        }
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.times.max(2);
        (0..n).map(|k| self.t_max * k as f64 / (n - 1) as f64).collect()
    }

    fn riccati(&self) -> impl Fn(f64, f64) -> f64 + '_ {
        move |e, a| riccati_f(e, a).unwrap_or(0.0) * self.corrupt_riccati.unwrap_or(1.0)
    }
}

/// A single verification case.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub params: ModelParams,
    pub rho0: DensityMatrix2,
    pub times: Vec<f64>,
}

/// Maxima of every checked quantity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Maxima {
    pub exact: f64,
    pub ode: f64,
    pub riccati_residual: f64,
    pub block_diag: f64,
    pub riccati_route: f64,
    pub trace_defect: f64,
    pub negativity: f64,
    pub ode_unitarity: f64,
}

impl Maxima {
    fn merge(&mut self, o: &Maxima) {
        self.exact = self.exact.max(o.exact);
        self.ode = self.ode.max(o.ode);
        self.riccati_residual = self.riccati_residual.max(o.riccati_residual);
        self.block_diag = self.block_diag.max(o.block_diag);
        self.riccati_route = self.riccati_route.max(o.riccati_route);
        self.trace_defect = self.trace_defect.max(o.trace_defect);
        self.negativity = self.negativity.max(o.negativity);
        self.ode_unitarity = self.ode_unitarity.max(o.ode_unitarity);
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub maxima: Maxima,
    /// `(N, maxima, seconds)` for each bath size of the random suite.
    pub by_size: Vec<(usize, Maxima, f64)>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn checks(&self) -> Vec<Check> {
        let m = &self.maxima;
        vec![
            Check { name: "channel_vs_exact_oracle", value: m.exact, tol: TOL_EXACT },
            Check { name: "channel_vs_ode_oracle", value: m.ode, tol: TOL_ODE },
            Check { name: "riccati_residual", value: m.riccati_residual, tol: TOL_RICCATI },
            Check { name: "block_diag_residual", value: m.block_diag, tol: TOL_BLOCK },
            Check { name: "riccati_route_vs_exact_oracle", value: m.riccati_route, tol: TOL_EXACT },
            Check { name: "channel_trace_defect", value: m.trace_defect, tol: TOL_CHANNEL },
            Check { name: "channel_negativity", value: m.negativity, tol: TOL_CHANNEL },
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(Check::passed)
    }

    pub fn failing(&self) -> Vec<&'static str> {
        self.checks().into_iter().filter(|c| !c.passed()).map(|c| c.name).collect()
    }

    pub fn render(&self, detailed: bool) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "verify: seed {}, {} cases, {:.2} s", self.seed, self.cases, self.seconds);
        let _ = writeln!(w, "{:<32} {:>12} {:>10}  status", "check", "max", "tolerance");
        for c in self.checks() {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(w, "{:<32} {:>12.3e} {:>10.0e}  {status}", c.name, c.value, c.tol);
        }
        if detailed {
            let _ = writeln!(w, "ode_unitarity_defect (info)      {:>12.3e}", self.maxima.ode_unitarity);
            for (n, m, secs) in &self.by_size {
                let _ = writeln!(
                    w,
                    "N={n}: exact {:.3e}  ode {:.3e}  riccati {:.3e}  block {:.3e}  ({secs:.2} s)",
                    m.exact, m.ode, m.riccati_residual, m.block_diag
                );
            }
        }
        if self.passed() {
            let _ = writeln!(w, "result: PASS");
        } else {
            let _ = writeln!(w, "result: FAIL ({})", self.failing().join(", "));
        }
        s
    }
}

/// `½‖a − b‖₁` for Hermitian 2×2 matrices.
pub fn trace_distance(a: &Complex2x2, b: &Complex2x2) -> f64 {
    let d = *a - *b;
    let mean = 0.5 * (d.m[0][0].re + d.m[1][1].re);
    let half = 0.5 * (d.m[0][0].re - d.m[1][1].re);
    let r = half.hypot(0.5 * (d.m[0][1].norm() + d.m[1][0].norm()));
    0.5 * ((mean + r).abs() + (mean - r).abs())
}

fn random_params(rng: &mut ChaCha8Rng, n: usize, theta: f64) -> ModelParams {
    let omegas = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let couplings = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let drive = Drive::new(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0), rng.gen_range(-4.0..=4.0));
    ModelParams::new(omegas, couplings, drive, theta).expect("sampled parameters are finite")
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix2 {
    loop {
        let b: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        if b.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return DensityMatrix2::from_bloch(b).expect("inside the Bloch ball");
        }
    }
}

/// The random suite: `sets` parameter sets for each `N = 1..=n_max`, cycling
/// the inverse temperature through `0, 1, ∞`.
pub fn random_cases(opts: &VerifyOptions) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let thetas = [0.0, 1.0, f64::INFINITY];
    let times = opts.grid();
    let mut cases = Vec::new();
    for n in 1..=opts.n_max {
        for k in 0..opts.sets {
            let params = random_params(&mut rng, n, thetas[k % 3]);
            let rho0 = random_state(&mut rng);
            cases.push(Case { label: format!("N={n}#{k}"), params, rho0, times: times.clone() });
        }
    }
    cases
}

fn check_capacity(n: usize) -> Result<(), CliError> {
    if n > VERIFY_N_MAX {
        return Err(spinbath::Error::Capacity { n, max: VERIFY_N_MAX }.into());
    }
    Ok(())
}

pub fn check_case(case: &Case, opts: &VerifyOptions) -> Result<Maxima, CliError> {
    let p = &case.params;
    check_capacity(p.n())?;
    let f = opts.riccati();
    let mut m = Maxima::default();

    let alpha = p.alpha();
    if alpha != 0.0 {
        for beta in [p.beta(), p.drive().beta_eff()] {
            for mode in bath_spectrum(p, beta)?.iter() {
                m.riccati_residual = m.riccati_residual.max(riccati_residual(f(mode.e, alpha), mode.e, alpha));
            }
        }
    }
    m.block_diag = block_diagonalize_with(p, &f)?.residual;

    let dynamics = ReducedDynamics::new(p, SpectrumPath::Enumerate)?;
    let exact = ExactPropagator::new(p)?;
    let weights = bath_weights(p)?;
    let ode = ode_propagators(p, &case.times, opts.dt)?;
    let rho = case.rho0.matrix();

    for (k, &t) in case.times.iter().enumerate() {
        let channel = dynamics.channel(t);
        let out = channel.apply(&case.rho0);
        let out_m = out.matrix();
        let reference = reduce_with_propagator(&exact.at(t), &case.rho0, &weights)?;
        m.exact = m.exact.max(trace_distance(out_m, reference.matrix()));

        let via_ode = reduce_with_propagator(&ode[k].matrix, &case.rho0, &weights)?;
        m.ode = m.ode.max(trace_distance(out_m, via_ode.matrix()));
        m.ode_unitarity = m.ode_unitarity.max(ode[k].unitarity_defect);

        let mut route = Complex2x2::zero();
        for mode in dynamics.spectrum().iter() {
            let u = similarity_unitary_with(mode, alpha, f(mode.e, alpha), t);
            route = route + u.conjugate(rho) * mode.weight;
        }
        let route = frame_rotation(t, p.omega_drive()).conjugate(&route);
        m.riccati_route = m.riccati_route.max(trace_distance(&route, reference.matrix()));

        m.trace_defect = m.trace_defect.max((out_m.trace() - 1.0).norm());
        let (d1, d2) = channel.completeness_defects();
        m.trace_defect = m.trace_defect.max(d1).max(d2);
        m.negativity = m.negativity.max(-out.eigenvalues().0);
    }
    Ok(m)
}

/// Runs the random suite plus any extra cases.
pub fn run(opts: &VerifyOptions, extra: &[Case]) -> Result<VerifyReport, CliError> {
    check_capacity(opts.n_max)?;
    let start = Instant::now();
    let mut total = Maxima::default();
    let mut by_size: Vec<(usize, Maxima, f64)> = Vec::new();
    let cases = random_cases(opts);
    for case in &cases {
        let t0 = Instant::now();
        let m = check_case(case, opts)?;
        total.merge(&m);
        let n = case.params.n();
        match by_size.last_mut() {
            Some((last, acc, secs)) if *last == n => {
                acc.merge(&m);
                *secs += t0.elapsed().as_secs_f64();
            }
            _ => by_size.push((n, m, t0.elapsed().as_secs_f64())),
        }
    }
    for case in extra {
        total.merge(&check_case(case, opts)?);
    }
    Ok(VerifyReport {
        seed: opts.seed,
        cases: cases.len() + extra.len(),
        maxima: total,
        by_size,
        seconds: start.elapsed().as_secs_f64(),
    })
}
