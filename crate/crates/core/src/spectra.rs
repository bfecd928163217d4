//! Hermitian eigensolving and ground-state extraction with adaptive Fock
//! truncation.
//!
//! The Hamiltonian conserves the parity `(−1)^{n + j}`, so lab-frame ground
//! states are computed in each parity sector separately. Besides halving the
//! dimension, this keeps the superradiant quasi-degenerate doublet from being
//! returned as an arbitrary symmetry-broken mixture.

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianOperator, StateVector};
use crate::model::{
    self, check_dim, hamiltonian_entries, ModelParams, ProductBasis, DEFAULT_DIM_CAP,
};
use crate::reduce;

/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: Mat<c64>,
}

/// Rotates every column so that its largest-magnitude entry (first one on
/// ties) is real and positive.
fn fix_phases(v: &mut Mat<c64>) {
    for c in 0..v.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for r in 0..v.nrows() {
            let a = v[(r, c)].norm();
            if a > best_abs * (1.0 + 1e-12) {
                best = r;
                best_abs = a;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let phase = v[(best, c)].conj() / best_abs;
        for r in 0..v.nrows() {
            v[(r, c)] *= phase;
        }
    }
}

fn fix_signs(v: &mut [f64]) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = x.abs();
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition. Matrices without imaginary parts go through the
/// real symmetric solver.
pub fn eigh(m: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = m.dim();
    let (eigenvalues, mut eigenvectors) = if m.is_real() {
        let re = Mat::from_fn(n, n, |i, j| m.matrix()[(i, j)].re);
        let (vals, vecs) = linalg::evd_real(re.as_ref())?;
        (vals, linalg::to_complex(vecs.as_ref()))
    } else {
        linalg::evd_complex(m.matrix())?
    };
    fix_phases(&mut eigenvectors);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Lab,
    RotatedDisplaced,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Amplitudes in `basis`.
    pub state: StateVector,
    pub basis: ProductBasis,
    pub n_max_used: usize,
    pub converged: bool,
    /// The two lowest levels agree within [`DEGENERACY_TOL`].
    pub degenerate: bool,
    pub frame: Frame,
}

impl GroundState {
    /// Reduced qubit state with the cavity traced out.
    pub fn qubit_state(&self) -> Result<reduce::DensityMatrix> {
        reduce::trace_out_cavity(self, &self.basis)
    }

    /// `⟨J_z⟩`.
    pub fn mean_m_s(&self) -> f64 {
        mean_m_s(self.state.amplitudes(), &self.basis)
    }
}

fn mean_m_s(psi: &[c64], basis: &ProductBasis) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * basis.m_s(basis.split(i).1))
        .sum()
}

struct SectorGround {
    energy: f64,
    next: Option<f64>,
    state: Vec<f64>,
}

fn sector_ground(
    basis: &ProductBasis,
    entries: &[(usize, usize, f64)],
    parity: i8,
) -> Result<Option<SectorGround>> {
    let dim = basis.dim();
    let members: Vec<usize> = (0..dim).filter(|&i| basis.parity(i) == parity).collect();
    if members.is_empty() {
        return Ok(None);
    }
    let mut local = vec![usize::MAX; dim];
    for (k, &i) in members.iter().enumerate() {
        local[i] = k;
    }
    let d = members.len();
    let mut h = Mat::<f64>::zeros(d, d);
    for &(r, c, v) in entries {
        let (lr, lc) = (local[r], local[c]);
        if lr != usize::MAX {
            debug_assert!(lc != usize::MAX, "Hamiltonian mixes parity sectors");
            h[(lr, lc)] += v;
        }
    }
    let (vals, vecs) = linalg::evd_real(h.as_ref())?;
    let mut state = vec![0.0; dim];
    for (k, &i) in members.iter().enumerate() {
        state[i] = vecs[(k, 0)];
    }
    fix_signs(&mut state);
    Ok(Some(SectorGround {
        energy: vals[0],
        next: vals.get(1).copied(),
        state,
    }))
}

/// Lab-frame ground state at the truncation `p.n_max`.
///
/// When the two lowest levels are degenerate within [`DEGENERACY_TOL`], the
/// candidate with the lower `⟨J_z⟩` is returned (even parity on a further
/// tie) and `degenerate` is set.
pub fn ground_state(p: &ModelParams) -> Result<GroundState> {
    ground_state_with_cap(p, DEFAULT_DIM_CAP)
}

pub fn ground_state_with_cap(p: &ModelParams, dim_cap: usize) -> Result<GroundState> {
    p.validate()?;
    let basis = p.basis();
    check_dim(basis.dim(), dim_cap)?;
    let entries = hamiltonian_entries(p);
    let candidates: Vec<SectorGround> = [1i8, -1]
        .into_iter()
        .map(|s| sector_ground(&basis, &entries, s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let tol = DEGENERACY_TOL * candidates[0].energy.abs().max(1.0);
    let lowest = candidates
        .iter()
        .map(|c| c.energy)
        .fold(f64::INFINITY, f64::min);
    let tied: Vec<&SectorGround> = candidates
        .iter()
        .filter(|c| c.energy - lowest <= tol)
        .collect();
    let mut chosen = tied[0];
    for c in &tied[1..] {
        let to_c = |s: &SectorGround| {
            let amps: Vec<c64> = s.state.iter().map(|&x| c64::new(x, 0.0)).collect();
            mean_m_s(&amps, &basis)
        };
        if to_c(c) < to_c(chosen) - 1e-12 {
            chosen = c;
        }
    }
    let degenerate =
        tied.len() > 1 || chosen.next.is_some_and(|e| e - chosen.energy <= tol);
    let amps = chosen.state.iter().map(|&x| c64::new(x, 0.0)).collect();
    Ok(GroundState {
        energy: chosen.energy,
        state: StateVector::normalized(amps)?,
        basis,
        n_max_used: p.n_max,
        converged: true,
        degenerate,
        frame: Frame::Lab,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceOptions {
    /// Relative ground-energy tolerance between successive truncations.
    pub e_tol: f64,
    /// Max-norm tolerance on the change of the reduced qubit state.
    pub obs_tol: f64,
    /// Largest Fock cutoff tried.
    pub n_max_cap: usize,
    pub dim_cap: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            e_tol: 1e-9,
            obs_tol: 1e-8,
            n_max_cap: 1024,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl ConvergenceOptions {
    fn validate(&self) -> Result<()> {
        if !(self.e_tol > 0.0 && self.obs_tol > 0.0) {
            return Err(Error::InvalidParams(
                "convergence tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// First cutoff of the doubling schedule `8, 16, 32, …`.
pub const FIRST_N_MAX: usize = 8;

/// Doubles the Fock cutoff (8, 16, 32, …, each compared against half its
/// value) until the ground energy and the reduced qubit state stop moving.
/// `p.n_max` is ignored. Hitting `n_max_cap` or `dim_cap` first yields the
/// last state computed with `converged = false`.
pub fn converged_ground_state(p: &ModelParams, opts: &ConvergenceOptions) -> Result<GroundState> {
    opts.validate()?;
    p.validate()?;
    let mut prev = ground_state_with_cap(&p.with_n_max(FIRST_N_MAX / 2), opts.dim_cap)?;
    let mut prev_rho = prev.qubit_state()?;
    let mut n_max = FIRST_N_MAX;
    loop {
        if n_max > opts.n_max_cap || p.with_n_max(n_max).basis().dim() > opts.dim_cap {
            prev.converged = false;
            return Ok(prev);
        }
        let mut gs = ground_state_with_cap(&p.with_n_max(n_max), opts.dim_cap)?;
        let rho = gs.qubit_state()?;
        let de = (gs.energy - prev.energy).abs();
        let drho = linalg::max_abs_diff(rho.matrix(), prev_rho.matrix());
        if de <= opts.e_tol * gs.energy.abs().max(1.0) && drho <= opts.obs_tol {
            gs.converged = true;
            return Ok(gs);
        }
        prev = gs;
        prev_rho = rho;
        n_max *= 2;
    }
}

/// Displacement amplitude that removes the linear cavity term once the
/// coupling has been rotated onto `J_z`.
pub fn frame_displacement_beta(p: &ModelParams) -> f64 {
    -2.0 * p.spin_boson_coupling() / p.omega_c
}

/// Lab-frame Fock cutoff that holds every frame state with `n ≤ frame_n_max`
/// after displacement.
fn lab_cutoff_for_frame(p: &ModelParams, frame_n_max: usize) -> usize {
    let shift = frame_displacement_beta(p).abs() * p.n_qubits as f64 / 2.0;
    let reach = (frame_n_max as f64).sqrt() + shift;
    frame_n_max.max((reach * reach + 10.0 * reach + 20.0).ceil() as usize)
}

/// Ground state from the rotated and displaced frame, `U = (R† ⊗ 1) D(β)`.
///
/// The frame Hamiltonian `U† H U` is projected onto frame states with
/// `n ≤ p.n_max`; `H` itself is built on a lab cutoff large enough to hold
/// their images, so the result is a variational (Rayleigh–Ritz) estimate. The
/// eigenvector is rotated back and returned in that enlarged lab basis.
pub fn frame_ground_state(p: &ModelParams) -> Result<GroundState> {
    frame_ground_state_with_cap(p, DEFAULT_DIM_CAP)
}

pub fn frame_ground_state_with_cap(p: &ModelParams, dim_cap: usize) -> Result<GroundState> {
    p.validate()?;
    let frame_basis = p.basis();
    let lab = p.with_n_max(lab_cutoff_for_frame(p, p.n_max));
    let lab_basis = lab.basis();
    check_dim(lab_basis.dim(), dim_cap)?;

    let beta = frame_displacement_beta(p);
    let (blocks, defect) = model::displacement_blocks(beta, &lab_basis)?;
    if defect > model::DISPLACEMENT_TOL {
        return Err(Error::TruncationLoss { defect });
    }
    let r_adj = model::rotate_y_half_pi(p.n_qubits).adjoint().to_owned();

    // R is real for a y rotation and D(β) is real for real β.
    let real = |z: c64| {
        debug_assert!(z.im.abs() < 1e-12);
        z.re
    };
    let (lab_dim, frame_dim) = (lab_basis.dim(), frame_basis.dim());
    let mut u = Mat::<f64>::zeros(lab_dim, frame_dim);
    for n in 0..frame_basis.fock_dim() {
        for j in 0..frame_basis.spin_dim() {
            let col = frame_basis.index(n, j);
            for np in 0..lab_basis.fock_dim() {
                let d = real(blocks[j][(np, n)]);
                if d == 0.0 {
                    continue;
                }
                for jp in 0..lab_basis.spin_dim() {
                    u[(lab_basis.index(np, jp), col)] = real(r_adj[(jp, j)]) * d;
                }
            }
        }
    }

    let mut hu = Mat::<f64>::zeros(lab_dim, frame_dim);
    for (r, c, v) in hamiltonian_entries(&lab) {
        for k in 0..frame_dim {
            hu[(r, k)] += v * u[(c, k)];
        }
    }
    let h_frame = u.transpose() * &hu;
    let h_frame = Mat::from_fn(frame_dim, frame_dim, |i, j| {
        0.5 * (h_frame[(i, j)] + h_frame[(j, i)])
    });
    let (vals, vecs) = linalg::evd_real(h_frame.as_ref())?;

    let mut psi = vec![0.0; lab_dim];
    for (i, x) in psi.iter_mut().enumerate() {
        *x = (0..frame_dim).map(|k| u[(i, k)] * vecs[(k, 0)]).sum();
    }
    fix_signs(&mut psi);
    let amps = psi.into_iter().map(|x| c64::new(x, 0.0)).collect();
    let tol = DEGENERACY_TOL * vals[0].abs().max(1.0);
    Ok(GroundState {
        energy: vals[0],
        state: StateVector::normalized(amps)?,
        basis: lab_basis,
        n_max_used: lab_basis.n_max,
        converged: true,
        degenerate: vals.get(1).is_some_and(|e| e - vals[0] <= tol),
        frame: Frame::RotatedDisplaced,
    })
}

/// Frame-path analogue of [`converged_ground_state`]. Only the energy
/// criterion is applied, since near-degenerate doublets may come back in any
/// superposition from this path.
pub fn converged_frame_ground_state(
    p: &ModelParams,
    opts: &ConvergenceOptions,
) -> Result<GroundState> {
    opts.validate()?;
    let mut prev = frame_ground_state_with_cap(&p.with_n_max(FIRST_N_MAX / 2), opts.dim_cap)?;
    let mut n_max = FIRST_N_MAX;
    loop {
        let next = p.with_n_max(n_max);
        if n_max > opts.n_max_cap
            || next.with_n_max(lab_cutoff_for_frame(&next, n_max)).basis().dim() > opts.dim_cap
        {
            prev.converged = false;
            return Ok(prev);
        }
        let mut gs = frame_ground_state_with_cap(&next, opts.dim_cap)?;
        if (gs.energy - prev.energy).abs() <= opts.e_tol * gs.energy.abs().max(1.0) {
            gs.converged = true;
            return Ok(gs);
        }
        prev = gs;
        n_max *= 2;
    }
}
