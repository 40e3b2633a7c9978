//! Brute-force reference dynamics on the full `2^(N+1)`-dimensional space.
//!
//! Nothing here uses the Riccati solution or the per-mode channel: the total
//! Hamiltonian is assembled from tensor products, the propagator comes either
//! from a dense Hermitian eigendecomposition in the rotating frame or from a
//! fourth-order Runge–Kutta integration of the lab-frame Schrödinger
//! equation, and the bath is traced out explicitly.
//!
//! Qubit is the leading tensor factor: full index `q·2^N + i` for qubit level
//! `q` and bath index `i`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::bath::{bath_spectrum, ModelParams};
use crate::error::{Error, Result};
use crate::qubit::{partial_trace_env, Complex2x2, DensityMatrix2};
use crate::riccati::riccati_f;

pub type DenseMatrix = DMatrix<C64>;

/// Largest bath the dense oracle accepts.
pub const ORACLE_N_MAX: usize = 12;

fn check_capacity(params: &ModelParams) -> Result<()> {
    if params.n() > ORACLE_N_MAX {
        return Err(Error::Capacity { n: params.n(), max: ORACLE_N_MAX });
    }
    Ok(())
}

pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

fn to_dense(m: &Complex2x2) -> DenseMatrix {
    DMatrix::from_fn(2, 2, |r, c| m.m[r][c])
}

/// Diagonal of `σ_n^z` acting on spin `n` of an `n_spins` bath, built as a
/// Kronecker product of 2-vectors.
fn bath_sigma_z(n: usize, n_spins: usize) -> DVector<f64> {
    let z = DVector::from_vec(vec![1.0, -1.0]);
    let one = DVector::from_vec(vec![1.0, 1.0]);
    (0..n_spins).fold(DVector::from_vec(vec![1.0]), |acc, k| acc.kronecker(if k == n { &z } else { &one }))
}

/// Static part of `H_QE(t, β)`: everything except the rotating transverse
/// field, i.e. `β σ³⊗I + I⊗H_E + σ³⊗Σ g_n σ_n^z`.
fn static_hamiltonian(params: &ModelParams, beta_value: f64) -> DenseMatrix {
    let n = params.n();
    let dim_e = 1usize << n;
    let mut h_e = DVector::<f64>::zeros(dim_e);
    let mut v = DVector::<f64>::zeros(dim_e);
    for k in 0..n {
        let z = bath_sigma_z(k, n);
        h_e += &z * params.omegas()[k];
        v += &z * params.couplings()[k];
    }
    let id_q = DMatrix::<C64>::identity(2, 2);
    let sz = to_dense(&Complex2x2::sigma_z());
    let id_e = DMatrix::<C64>::identity(dim_e, dim_e);
    let diag = |d: &DVector<f64>| DMatrix::from_diagonal(&d.map(C64::from));
    kron(&sz, &id_e) * C64::from(beta_value) + kron(&id_q, &diag(&h_e)) + kron(&sz, &diag(&v))
}

/// `α σ⁺ ⊗ I_E`; the transverse field is `e^{−iωt}·this + h.c.`
fn raising_part(params: &ModelParams) -> DenseMatrix {
    let dim_e = 1usize << params.n();
    let sp = DMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 0.0.into(), 0.0.into()]);
    kron(&sp, &DMatrix::identity(dim_e, dim_e)) * C64::from(params.alpha())
}

/// `H_QE(β)` at `t = 0` with the longitudinal field set to `beta_value`.
pub fn build_full_hamiltonian(params: &ModelParams, beta_value: f64) -> Result<DenseMatrix> {
    full_hamiltonian_at(0.0, params, beta_value)
}

/// Lab-frame `H_QE(t, β)` with the field rotated to phase `ωt`.
pub fn full_hamiltonian_at(t: f64, params: &ModelParams, beta_value: f64) -> Result<DenseMatrix> {
    check_capacity(params)?;
    let b = raising_part(params);
    let phase = C64::from_polar(1.0, -params.omega_drive() * t);
    Ok(static_hamiltonian(params, beta_value) + &b * phase + b.adjoint() * phase.conj())
}

/// `V_t ⊗ I_E`, the analytic `e^{iKt}` with `K = −(ω/2) σ³ ⊗ I_E`.
fn frame_phases(t: f64, omega: f64, dim: usize) -> impl Fn(usize) -> C64 {
    let lo = C64::from_polar(1.0, -0.5 * omega * t);
    let hi = lo.conj();
    move |row| if row < dim / 2 { lo } else { hi }
}

/// Rotating-frame eigendecomposition, reusable across times.
pub struct ExactPropagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DenseMatrix,
    omega: f64,
}

impl ExactPropagator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let h_eff = build_full_hamiltonian(params, params.drive().beta_eff())?;
        let eig = h_eff.symmetric_eigen();
        Ok(Self { eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors, omega: params.omega_drive() })
    }

    /// `U_t = e^{iKt} · exp(−i H(β − ω/2) t)`.
    pub fn at(&self, t: f64) -> DenseMatrix {
        let q = &self.eigenvectors;
        let dim = q.nrows();
        let mut scaled = q.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from_polar(1.0, -self.eigenvalues[j] * t);
        }
        let mut u = scaled * q.adjoint();
        let phase = frame_phases(t, self.omega, dim);
        for (r, mut row) in u.row_iter_mut().enumerate() {
            row *= phase(r);
        }
        u
    }
}

pub fn full_propagator_exact(t: f64, params: &ModelParams) -> Result<DenseMatrix> {
    Ok(ExactPropagator::new(params)?.at(t))
}

/// Result of a Runge–Kutta propagation.
#[derive(Clone, Debug)]
pub struct OdePropagator {
    pub time: f64,
    pub matrix: DenseMatrix,
    /// `‖U†U − I‖_F` of the raw integrated propagator.
    pub unitarity_defect: f64,
    /// Set when `dt` times the spectral-radius bound exceeds `1e-2`.
    pub accuracy_warning: bool,
}

/// One connected component of the Hamiltonian's sparsity graph, with its
/// entries in local indices.
struct Component {
    indices: Vec<usize>,
    statics: Vec<(usize, usize, C64)>,
    raising: Vec<(usize, usize, C64)>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Split `A + e^{−iωt}B + e^{iωt}B†` into invariant subspaces: basis states
/// never coupled by any matrix element evolve independently.
fn components(a: &DenseMatrix, b: &DenseMatrix) -> Vec<Component> {
    let dim = a.nrows();
    let mut parent: Vec<usize> = (0..dim).collect();
    for m in [a, b] {
        for c in 0..dim {
            for r in 0..dim {
                if m[(r, c)] != C64::new(0.0, 0.0) {
                    let (pr, pc) = (find(&mut parent, r), find(&mut parent, c));
                    parent[pr] = pc;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for i in 0..dim {
        let root = find(&mut parent, i);
        groups[root].push(i);
    }
    let mut local = vec![0usize; dim];
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|indices| {
            for (k, &i) in indices.iter().enumerate() {
                local[i] = k;
            }
            let entries = |m: &DenseMatrix| {
                let mut out = Vec::new();
                for &r in &indices {
                    for &c in &indices {
                        if m[(r, c)] != C64::new(0.0, 0.0) {
                            out.push((local[r], local[c], m[(r, c)]));
                        }
                    }
                }
                out
            };
            let (statics, raising) = (entries(a), entries(b));
            Component { indices, statics, raising }
        })
        .collect()
}

impl Component {
    /// `out = −i H(t) x` for a row-major `m×m` block.
    fn derivative(&self, t: f64, omega: f64, x: &[C64], out: &mut [C64]) {
        let m = self.indices.len();
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let mut axpy = |r: usize, c: usize, v: C64| {
            let (dst, src) = (r * m, c * m);
            for k in 0..m {
                out[dst + k] += v * x[src + k];
            }
        };
        for &(r, c, v) in &self.statics {
            axpy(r, c, v);
        }
        let phase = C64::from_polar(1.0, -omega * t);
        for &(r, c, v) in &self.raising {
            axpy(r, c, v * phase);
            axpy(c, r, (v * phase).conj());
        }
        let minus_i = C64::new(0.0, -1.0);
        out.iter_mut().for_each(|v| *v *= minus_i);
    }

    fn gershgorin(&self) -> f64 {
        let m = self.indices.len();
        let mut rows = vec![0.0; m];
        for &(r, _, v) in &self.statics {
            rows[r] += v.norm();
        }
        for &(r, c, v) in &self.raising {
            rows[r] += v.norm();
            rows[c] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

fn rk4_step(comp: &Component, omega: f64, t: f64, h: f64, u: &mut [C64], work: &mut [Vec<C64>; 5]) {
    let [k1, k2, k3, k4, tmp] = work;
    comp.derivative(t, omega, u, k1);
    for ((y, x), k) in tmp.iter_mut().zip(u.iter()).zip(k1.iter()) {
        *y = x + k * (0.5 * h);
    }
    comp.derivative(t + 0.5 * h, omega, tmp, k2);
    for ((y, x), k) in tmp.iter_mut().zip(u.iter()).zip(k2.iter()) {
        *y = x + k * (0.5 * h);
    }
    comp.derivative(t + 0.5 * h, omega, tmp, k3);
    for ((y, x), k) in tmp.iter_mut().zip(u.iter()).zip(k3.iter()) {
        *y = x + k * h;
    }
    comp.derivative(t + h, omega, tmp, k4);
    for (i, x) in u.iter_mut().enumerate() {
        *x += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}

/// Propagators `U(t)` at every time of `times` (non-decreasing, starting at
/// or after 0) by classical RK4 on `i ∂_t U = H_QE(t, β) U`, `U(0) = I`.
///
/// Each interval between consecutive output times is split into equal steps
/// no longer than `dt`.
pub fn ode_propagators(params: &ModelParams, times: &[f64], dt: f64) -> Result<Vec<OdePropagator>> {
    check_capacity(params)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParams(format!("step must be positive, got {dt}")));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("output times must be finite, non-negative and sorted".into()));
    }
    let a = static_hamiltonian(params, params.beta());
    let b = raising_part(params);
    let dim = a.nrows();
    let omega = params.omega_drive();
    let comps = components(&a, &b);
    let radius = comps.iter().map(Component::gershgorin).fold(0.0, f64::max);
    let accuracy_warning = dt * radius > 1e-2;

    let mut states: Vec<Vec<C64>> = comps
        .iter()
        .map(|c| {
            let m = c.indices.len();
            let mut u = vec![C64::new(0.0, 0.0); m * m];
            for k in 0..m {
                u[k * m + k] = C64::new(1.0, 0.0);
            }
            u
        })
        .collect();

    let mut out = Vec::with_capacity(times.len());
    let mut now = 0.0;
    for &target in times {
        let span = target - now;
        let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for (comp, u) in comps.iter().zip(states.iter_mut()) {
                let m = comp.indices.len();
                let mut work: [Vec<C64>; 5] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); m * m]);
                for s in 0..steps {
                    rk4_step(comp, omega, now + s as f64 * h, h, u, &mut work);
                }
            }
        }
        now = target;

        let mut full = DMatrix::<C64>::zeros(dim, dim);
        let mut defect_sq = 0.0;
        for (comp, u) in comps.iter().zip(&states) {
            let m = comp.indices.len();
            for (lr, &r) in comp.indices.iter().enumerate() {
                for (lc, &c) in comp.indices.iter().enumerate() {
                    full[(r, c)] = u[lr * m + lc];
                }
            }
            // U is block diagonal up to a permutation, so its defect splits
            // over the invariant blocks.
            let block = DMatrix::from_row_slice(m, m, u);
            defect_sq += unitarity_defect(&block).powi(2);
        }
        let unitarity_defect = defect_sq.sqrt();
        out.push(OdePropagator { time: target, matrix: full, unitarity_defect, accuracy_warning });
    }
    Ok(out)
}

pub fn full_propagator_ode(t: f64, params: &ModelParams, dt: f64) -> Result<OdePropagator> {
    Ok(ode_propagators(params, &[t], dt)?.remove(0))
}

pub fn unitarity_defect(u: &DenseMatrix) -> f64 {
    let dim = u.nrows();
    (u.adjoint() * u - DMatrix::<C64>::identity(dim, dim)).norm()
}

/// Gibbs weights of the bath in the computational basis.
pub fn bath_weights(params: &ModelParams) -> Result<Vec<f64>> {
    Ok(bath_spectrum(params, params.beta())?.iter().map(|m| m.weight).collect())
}

/// `Tr_E(U (ρ_Q ⊗ ρ_E) U†)` for a diagonal `ρ_E`, contracted entry by entry.
pub fn reduce_with_propagator(u: &DenseMatrix, rho0: &DensityMatrix2, weights: &[f64]) -> Result<DensityMatrix2> {
    let dim = u.nrows();
    if dim != 2 * weights.len() || u.ncols() != dim {
        return Err(Error::Dimension(format!("{dim}×{} propagator for {} bath states", u.ncols(), weights.len())));
    }
    let de = weights.len();
    let r = rho0.matrix();
    let mut out = Complex2x2::zero();
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        // Columns of U for |0,i⟩ and |1,i⟩, mixed by ρ_Q.
        let col = [u.column(i), u.column(de + i)];
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..de {
                    let ua = [col[0][a * de + j], col[1][a * de + j]];
                    let ub = [col[0][b * de + j], col[1][b * de + j]];
                    for (uq, rq) in ua.iter().zip(&r.m) {
                        for (rqp, up) in rq.iter().zip(&ub) {
                            acc += uq * rqp * up.conj();
                        }
                    }
                }
                out.m[a][b] += acc * w;
            }
        }
    }
    Ok(DensityMatrix2::from_map_output(out))
}

/// Same as [`reduce_with_propagator`] but through the dense total state and
/// the block-trace partial trace.
pub fn reduce_dense(u: &DenseMatrix, rho0: &DensityMatrix2, weights: &[f64]) -> Result<DensityMatrix2> {
    let rho_e = DMatrix::from_diagonal(&DVector::from_iterator(weights.len(), weights.iter().map(|&w| C64::from(w))));
    let total = kron(&to_dense(rho0.matrix()), &rho_e);
    let evolved = u * total * u.adjoint();
    Ok(DensityMatrix2::from_map_output(partial_trace_env(&evolved)?))
}

/// Ground-truth reduced state from the exact full-space propagator.
pub fn reduced_from_full(rho0: &DensityMatrix2, params: &ModelParams, t: f64) -> Result<DensityMatrix2> {
    let u = full_propagator_exact(t, params)?;
    reduce_with_propagator(&u, rho0, &bath_weights(params)?)
}

/// `U_X⁻¹ H U_X` for `X = Σ f(E_i)|i⟩⟨i|`.
#[derive(Clone, Debug)]
pub struct BlockDiagonalization {
    pub hamiltonian: DenseMatrix,
    pub transformed: DenseMatrix,
    /// `‖off-diagonal blocks‖_F / ‖H‖_F`.
    pub residual: f64,
}

impl BlockDiagonalization {
    pub fn upper_block(&self) -> DenseMatrix {
        let d = self.transformed.nrows() / 2;
        self.transformed.view((0, 0), (d, d)).into_owned()
    }

    pub fn lower_block(&self) -> DenseMatrix {
        let d = self.transformed.nrows() / 2;
        self.transformed.view((d, d), (d, d)).into_owned()
    }
}

/// Block-diagonalise `H_QE(β)` with the Riccati solution produced by `f`
/// (called as `f(E_i, α)`).
pub fn block_diagonalize_with(params: &ModelParams, f: impl Fn(f64, f64) -> f64) -> Result<BlockDiagonalization> {
    let n = params.n();
    if n > 10 {
        return Err(Error::Capacity { n, max: 10 });
    }
    let h = build_full_hamiltonian(params, params.beta())?;
    let dim = h.nrows();
    let d = dim / 2;
    let alpha = params.alpha();
    let x_diag: Vec<f64> = if alpha == 0.0 {
        vec![0.0; d]
    } else {
        bath_spectrum(params, params.beta())?.iter().map(|m| f(m.e, alpha)).collect()
    };
    let x = DMatrix::from_diagonal(&DVector::from_iterator(d, x_diag.iter().map(|&v| C64::from(v))));
    let id = DMatrix::<C64>::identity(d, d);
    let x_dag = x.adjoint();

    let mut u_x = DMatrix::<C64>::zeros(dim, dim);
    u_x.view_mut((0, 0), (d, d)).copy_from(&id);
    u_x.view_mut((0, d), (d, d)).copy_from(&(-&x_dag));
    u_x.view_mut((d, 0), (d, d)).copy_from(&x);
    u_x.view_mut((d, d), (d, d)).copy_from(&id);

    // U_X⁻¹ = (I + XX†)⁻¹ [[I, X†], [−X, I]] for normal X.
    let inv_diag = (&id + &x * &x_dag)
        .try_inverse()
        .ok_or_else(|| Error::Dimension("I + XX† is singular".into()))?;
    let mut adj = DMatrix::<C64>::zeros(dim, dim);
    adj.view_mut((0, 0), (d, d)).copy_from(&inv_diag);
    adj.view_mut((0, d), (d, d)).copy_from(&(&inv_diag * &x_dag));
    adj.view_mut((d, 0), (d, d)).copy_from(&(-&inv_diag * &x));
    adj.view_mut((d, d), (d, d)).copy_from(&inv_diag);

    let transformed = &adj * &h * &u_x;
    let off = transformed.view((0, d), (d, d)).norm_squared() + transformed.view((d, 0), (d, d)).norm_squared();
    let residual = off.sqrt() / h.norm();
    Ok(BlockDiagonalization { hamiltonian: h, transformed, residual })
}

pub fn block_diag_residual(params: &ModelParams) -> Result<f64> {
    Ok(block_diagonalize_with(params, |e, a| riccati_f(e, a).unwrap_or(0.0))?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::Drive;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng, n: usize, theta: f64) -> ModelParams {
        let om = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let drive = Drive::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-4.0..4.0));
        ModelParams::new(om, g, drive, theta).unwrap()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn single_spin_hamiltonian_by_hand() {
        let p = ModelParams::new(vec![1.0], vec![0.5], Drive::new(0.2, 0.3, 0.0), 0.0).unwrap();
        let h = build_full_hamiltonian(&p, 0.3).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        let want = [1.8, -1.2, 0.2, -0.8];
        for (a, b) in diag.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(h[(0, 2)], C64::from(0.2));
        assert_eq!(h[(1, 3)], C64::from(0.2));
        assert_eq!(h[(0, 1)], C64::from(0.0));
        assert!((&h - h.adjoint()).norm() == 0.0);
    }

    #[test]
    fn zero_alpha_is_block_diagonal_and_matches_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_params(&mut rng, 4, 1.0);
        let p = p.clone().with_drive(Drive::new(0.0, p.beta(), p.omega_drive())).unwrap();
        let h = build_full_hamiltonian(&p, p.beta()).unwrap();
        let d = h.nrows() / 2;
        assert_eq!(h.view((0, d), (d, d)).norm(), 0.0);
        let eig = sorted(h.clone().symmetric_eigen().eigenvalues.iter().copied().collect());
        let s = bath_spectrum(&p, p.beta()).unwrap();
        let want = sorted(s.iter().flat_map(|m| [m.e_plus, m.e_minus]).collect());
        for (a, b) in eig.iter().zip(&want) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        // Diagonal blocks commute.
        let hp = h.view((0, 0), (d, d)).into_owned();
        let hm = h.view((d, d), (d, d)).into_owned();
        assert_eq!((&hp * &hm - &hm * &hp).norm(), 0.0);
    }

    #[test]
    fn capacity_is_enforced() {
        let p = ModelParams::uniform(ORACLE_N_MAX + 1, 1.0, 0.1, Drive::new(0.1, 0.1, 0.1), 1.0).unwrap();
        assert!(matches!(build_full_hamiltonian(&p, 0.0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn exact_propagator_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_params(&mut rng, 3, 1.0);
        let u0 = full_propagator_exact(0.0, &p).unwrap();
        assert!((u0 - DMatrix::<C64>::identity(16, 16)).norm() < 1e-13);
        let u = full_propagator_exact(4.2, &p).unwrap();
        assert!(unitarity_defect(&u) < 1e-11);

        let still = p.clone().with_drive(Drive::new(p.alpha(), p.beta(), 0.0)).unwrap();
        let t = 1.9;
        let h = build_full_hamiltonian(&still, still.beta()).unwrap();
        let eig = h.symmetric_eigen();
        let direct = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)))
            * eig.eigenvectors.adjoint();
        assert!((full_propagator_exact(t, &still).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn exact_propagator_solves_lab_frame_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_params(&mut rng, 2, 1.0);
        let exact = ExactPropagator::new(&p).unwrap();
        let h = 1e-6;
        for &t in &[0.0, 0.7, 2.5] {
            let du = (exact.at(t + h) - exact.at(t - h)) * C64::new(0.0, 1.0 / (2.0 * h));
            let hu = full_hamiltonian_at(t, &p, p.beta()).unwrap() * exact.at(t);
            assert!((du - hu).norm() < 1e-6);
        }
    }

    #[test]
    fn ode_matches_exact_and_converges_at_fourth_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_params(&mut rng, 2, 1.0);
        let exact = full_propagator_exact(1.0, &p).unwrap();
        let coarse = full_propagator_ode(1.0, &p, 2e-2).unwrap();
        let fine = full_propagator_ode(1.0, &p, 1e-2).unwrap();
        let e1 = (&coarse.matrix - &exact).norm();
        let e2 = (&fine.matrix - &exact).norm();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
        let accurate = full_propagator_ode(1.0, &p, 1e-3).unwrap();
        assert!((&accurate.matrix - &exact).norm() < 1e-6);
        assert!(accurate.unitarity_defect < 1e-6);
        let dense = unitarity_defect(&accurate.matrix);
        assert!((accurate.unitarity_defect - dense).abs() <= 1e-12 * dense.max(1e-300) + 1e-15);
    }

    #[test]
    fn ode_without_transverse_field_stays_diagonal() {
        let p = ModelParams::new(vec![0.4, -0.8], vec![0.0, 0.0], Drive::new(0.0, 0.7, 1.0), 1.0).unwrap();
        let u = full_propagator_ode(2.0, &p, 1e-2).unwrap().matrix;
        for r in 0..8 {
            for c in 0..8 {
                if r != c {
                    assert_eq!(u[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn ode_flags_large_steps() {
        let p = ModelParams::uniform(3, 2.0, 2.0, Drive::new(1.0, 1.0, 1.0), 1.0).unwrap();
        assert!(full_propagator_ode(0.1, &p, 1e-2).unwrap().accuracy_warning);
        assert!(!full_propagator_ode(0.1, &p, 1e-4).unwrap().accuracy_warning);
    }

    #[test]
    fn contraction_matches_dense_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_params(&mut rng, 3, 0.6);
        let rho = DensityMatrix2::from_bloch([0.2, -0.5, 0.4]).unwrap();
        let u = full_propagator_exact(3.1, &p).unwrap();
        let w = bath_weights(&p).unwrap();
        let a = reduce_with_propagator(&u, &rho, &w).unwrap();
        let b = reduce_dense(&u, &rho, &w).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        assert!(a.is_valid(1e-12));
    }

    #[test]
    fn reduced_state_at_time_zero_is_initial() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_params(&mut rng, 3, 1.0);
        let rho = DensityMatrix2::from_bloch([0.1, 0.3, -0.2]).unwrap();
        let out = reduced_from_full(&rho, &p, 0.0).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-13);
    }

    #[test]
    fn uncoupled_reduced_state_factorises() {
        let p = ModelParams::new(vec![0.5, -1.1], vec![0.0, 0.0], Drive::new(0.0, 0.8, 1.5), 1.0).unwrap();
        let rho = DensityMatrix2::from_bloch([0.6, 0.0, 0.3]).unwrap();
        let t = 2.3;
        let out = reduced_from_full(&rho, &p, t).unwrap();
        let u = crate::dynamics::closed_evolution(t, &p).unwrap();
        assert!(out.matrix().max_abs_diff(rho.conjugated(&u).matrix()) < 1e-12);
    }

    #[test]
    fn block_diagonalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let p = random_params(&mut rng, n, 1.0);
            let bd = block_diagonalize_with(&p, |e, a| riccati_f(e, a).unwrap()).unwrap();
            assert!(bd.residual <= 1e-12, "n={n} residual {}", bd.residual);
            let s = bath_spectrum(&p, p.beta()).unwrap();
            let upper = sorted(bd.upper_block().symmetric_eigen().eigenvalues.iter().copied().collect());
            let lower = sorted(bd.lower_block().symmetric_eigen().eigenvalues.iter().copied().collect());
            let a = p.alpha();
            let want_up = sorted(s.iter().map(|m| m.omega + m.e.hypot(a)).collect());
            let want_lo = sorted(s.iter().map(|m| m.omega - m.e.hypot(a)).collect());
            for (x, y) in upper.iter().zip(&want_up).chain(lower.iter().zip(&want_lo)) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-11);
            }
        }
        let p = ModelParams::uniform(3, 1.0, 0.5, Drive::new(0.0, 0.3, 0.0), 1.0).unwrap();
        assert_eq!(block_diag_residual(&p).unwrap(), 0.0);
    }

    #[test]
    fn corrupted_riccati_solution_leaves_off_diagonal_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_params(&mut rng, 3, 1.0);
        let bd = block_diagonalize_with(&p, |e, a| 1.01 * riccati_f(e, a).unwrap()).unwrap();
        assert!(bd.residual > 1e-6);
    }
}
