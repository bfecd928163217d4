//! Hilbert-space basis, Hamiltonian construction, frame transforms and the
//! analytic decoupled (λ = 0) spectrum.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = ω_c a†a + ω_0 J_z + (η/N) J_z² + (λ/N)(a† + a)·2J_x
//! ```
//!
//! with collective spin-N/2 operators `J_α` (single-qubit eigenvalues ±1/2).
//! Writing `g = λ/√N` for the scaled coupling used on every figure axis, the
//! interaction reads `(g/√N)(a† + a)·2J_x`, which puts the superradiant
//! transition at `g_c = √(ω_c ω_0)/2` independently of `N`.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianOperator, ZERO};

/// Dense solves refuse Hilbert spaces larger than this by default.
pub const DEFAULT_DIM_CAP: usize = 20_000;

/// Allowed deviation of a truncated displacement from its reference on the
/// lower half of the Fock ladder.
pub const DISPLACEMENT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_0: f64,
    pub lambda: f64,
    pub eta: f64,
    pub n_qubits: usize,
    pub n_max: usize,
}

impl ModelParams {
    pub fn new(
        omega_c: f64,
        omega_0: f64,
        lambda: f64,
        eta: f64,
        n_qubits: usize,
        n_max: usize,
    ) -> Result<Self> {
        let p = Self {
            omega_c,
            omega_0,
            lambda,
            eta,
            n_qubits,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the scaled axes `λ/√N` and `η/N`.
    pub fn from_scaled(
        omega_c: f64,
        omega_0: f64,
        lambda_scaled: f64,
        eta_scaled: f64,
        n_qubits: usize,
        n_max: usize,
    ) -> Result<Self> {
        let n = n_qubits as f64;
        Self::new(
            omega_c,
            omega_0,
            lambda_scaled * n.sqrt(),
            eta_scaled * n,
            n_qubits,
            n_max,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return bad("omega_c must be positive and finite");
        }
        if !(self.omega_0 > 0.0 && self.omega_0.is_finite()) {
            return bad("omega_0 must be positive and finite");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative and finite");
        }
        if !self.eta.is_finite() {
            return bad("eta must be finite");
        }
        if self.n_qubits == 0 {
            return bad("at least one qubit is required");
        }
        Ok(())
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    pub fn lambda_scaled(&self) -> f64 {
        self.lambda / (self.n_qubits as f64).sqrt()
    }

    pub fn eta_scaled(&self) -> f64 {
        self.eta / self.n_qubits as f64
    }

    /// Coefficient multiplying `(a† + a)·2J_x`.
    pub fn spin_boson_coupling(&self) -> f64 {
        self.lambda / self.n_qubits as f64
    }

    pub fn basis(&self) -> ProductBasis {
        ProductBasis::new(self.n_qubits, self.n_max)
    }
}

/// Index map for `|n⟩ ⊗ |S, m_s⟩`, Fock-major: `index(n, j) = n (N+1) + j`
/// with Dicke index `j = m_s + N/2` (the number of excited qubits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductBasis {
    pub n_qubits: usize,
    pub n_max: usize,
}

impl ProductBasis {
    pub fn new(n_qubits: usize, n_max: usize) -> Self {
        Self { n_qubits, n_max }
    }

    pub fn spin_dim(&self) -> usize {
        self.n_qubits + 1
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.fock_dim()
    }

    pub fn index(&self, n: usize, j: usize) -> usize {
        debug_assert!(n <= self.n_max && j <= self.n_qubits);
        n * self.spin_dim() + j
    }

    /// Inverse of [`index`](Self::index).
    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.spin_dim(), idx % self.spin_dim())
    }

    pub fn m_s(&self, j: usize) -> f64 {
        j as f64 - self.n_qubits as f64 / 2.0
    }

    /// Eigenvalue of `exp(iπ(a†a + J_z + N/2))` on basis state `idx`.
    pub fn parity(&self, idx: usize) -> i8 {
        let (n, j) = self.split(idx);
        if (n + j) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Collective spin matrices in the Dicke basis ordered by ascending `m_s`.
#[derive(Clone, Debug)]
pub struct SpinMatrices {
    pub jx: HermitianOperator,
    pub jy: HermitianOperator,
    pub jz: HermitianOperator,
}

/// `⟨m+1|J+|m⟩ = √(S(S+1) − m(m+1))`.
pub(crate) fn raising_element(spin: f64, m: f64) -> f64 {
    (spin * (spin + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn collective_spin_matrices(n_qubits: usize) -> SpinMatrices {
    let d = n_qubits + 1;
    let s = n_qubits as f64 / 2.0;
    let mut jx = Mat::<c64>::zeros(d, d);
    let mut jy = Mat::<c64>::zeros(d, d);
    let mut jz = Mat::<c64>::zeros(d, d);
    for j in 0..d {
        let m = j as f64 - s;
        jz[(j, j)] = c64::new(m, 0.0);
        if j + 1 < d {
            let up = raising_element(s, m) / 2.0;
            jx[(j + 1, j)] = c64::new(up, 0.0);
            jx[(j, j + 1)] = c64::new(up, 0.0);
            // J_y = (J+ − J−)/(2i)
            jy[(j + 1, j)] = c64::new(0.0, -up);
            jy[(j, j + 1)] = c64::new(0.0, up);
        }
    }
    SpinMatrices {
        jx: HermitianOperator::new(jx).expect("J_x is Hermitian"),
        jy: HermitianOperator::new(jy).expect("J_y is Hermitian"),
        jz: HermitianOperator::new(jz).expect("J_z is Hermitian"),
    }
}

/// Nonzero Hamiltonian entries `(row, col, value)`, both triangles.
pub(crate) fn hamiltonian_entries(p: &ModelParams) -> Vec<(usize, usize, f64)> {
    let basis = p.basis();
    let s = p.n_qubits as f64 / 2.0;
    let coupling = p.spin_boson_coupling();
    let mut out = Vec::with_capacity(basis.dim() * 5);
    for n in 0..=p.n_max {
        for j in 0..=p.n_qubits {
            let m = basis.m_s(j);
            let idx = basis.index(n, j);
            out.push((idx, idx, analytic_energy(n, m, p)));
            if coupling == 0.0 || n == p.n_max {
                continue;
            }
            // (a† + a)·2J_x links (n, j) with (n+1, j±1)
            let boson = coupling * ((n + 1) as f64).sqrt();
            if j < p.n_qubits {
                let v = boson * raising_element(s, m);
                let other = basis.index(n + 1, j + 1);
                out.push((idx, other, v));
                out.push((other, idx, v));
            }
            if j > 0 {
                let v = boson * raising_element(s, m - 1.0);
                let other = basis.index(n + 1, j - 1);
                out.push((idx, other, v));
                out.push((other, idx, v));
            }
        }
    }
    out
}

pub(crate) fn check_dim(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        Err(Error::DimensionCap { dim, cap })
    } else {
        Ok(())
    }
}

pub fn build_hamiltonian(p: &ModelParams) -> Result<HermitianOperator> {
    build_hamiltonian_with_cap(p, DEFAULT_DIM_CAP)
}

pub fn build_hamiltonian_with_cap(p: &ModelParams, dim_cap: usize) -> Result<HermitianOperator> {
    p.validate()?;
    let dim = p.basis().dim();
    check_dim(dim, dim_cap)?;
    let mut h = Mat::<c64>::zeros(dim, dim);
    for (i, j, v) in hamiltonian_entries(p) {
        h[(i, j)] += c64::new(v, 0.0);
    }
    HermitianOperator::new(h)
}

/// Parity operator `exp(iπ(a†a + J_z + N/2))`, diagonal in the product basis.
pub fn parity_operator(basis: &ProductBasis) -> HermitianOperator {
    let dim = basis.dim();
    let m = Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            c64::new(basis.parity(i) as f64, 0.0)
        } else {
            ZERO
        }
    });
    HermitianOperator::new(m).expect("diagonal real matrix")
}

/// `E(n, m_s) = ω_c n + ω_0 m_s + (η/N) m_s²`; the coupling λ is ignored.
pub fn analytic_energy(n: usize, m_s: f64, p: &ModelParams) -> f64 {
    p.omega_c * n as f64 + p.omega_0 * m_s + p.eta / p.n_qubits as f64 * m_s * m_s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalCoupling {
    /// Projection whose level is overtaken by `m_s + 1` at this coupling.
    pub m_s: f64,
    pub eta_c_over_n: f64,
}

/// First-order level crossings of the λ = 0 ground state,
/// `η^c/N = −ω_0/(2 m_s + 1)` for every `m_s ≤ −1`, ascending.
pub fn first_order_critical_couplings(n_qubits: usize, omega_0: f64) -> Vec<CriticalCoupling> {
    let s = n_qubits as f64 / 2.0;
    let mut out: Vec<CriticalCoupling> = (0..=n_qubits)
        .map(|j| j as f64 - s)
        .filter(|&m| m <= -1.0)
        .map(|m| CriticalCoupling {
            m_s: m,
            eta_c_over_n: -omega_0 / (2.0 * m + 1.0),
        })
        .collect();
    out.sort_by(|a, b| a.eta_c_over_n.total_cmp(&b.eta_c_over_n));
    out
}

/// Second-order (superradiant) critical point on the `λ/√N` axis.
pub fn superradiant_critical_coupling(omega_c: f64, omega_0: f64) -> f64 {
    (omega_c * omega_0).sqrt() / 2.0
}

/// Annihilation operator on `fock_dim` levels, real.
fn annihilation(fock_dim: usize) -> Mat<f64> {
    Mat::from_fn(fock_dim, fock_dim, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// `exp(α(a† − a))` on `fock_dim` levels via the spectral decomposition of
/// the Hermitian generator `i(a† − a)`.
pub fn fock_displacement(alpha: f64, fock_dim: usize) -> Result<Mat<c64>> {
    Ok(fock_displacements(&[alpha], fock_dim)?.remove(0))
}

/// `D(α)` for several real `α` sharing one eigendecomposition of the generator.
pub(crate) fn fock_displacements(alphas: &[f64], fock_dim: usize) -> Result<Vec<Mat<c64>>> {
    let a = annihilation(fock_dim);
    // K = i(a† − a) is Hermitian, and a† − a = −iK.
    let k = Mat::from_fn(fock_dim, fock_dim, |i, j| {
        c64::new(0.0, a[(j, i)] - a[(i, j)])
    });
    let (mu, v) = linalg::evd_complex(k.as_ref())?;
    let v_adj = v.adjoint().to_owned();
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let scaled = Mat::from_fn(fock_dim, fock_dim, |r, c| {
                let phase = -alpha * mu[c];
                v[(r, c)] * c64::new(phase.cos(), phase.sin())
            });
            scaled * &v_adj
        })
        .collect())
}

/// Conditional displacement `exp(β J_z ⊗ (a† − a))` on a truncated basis.
#[derive(Clone, Debug)]
pub struct Displacement {
    pub matrix: Mat<c64>,
    /// Largest deviation of the truncated blocks from a reference computed on
    /// a larger Fock space, measured on the lowest `⌈(n_max+1)/2⌉` layers.
    pub truncation_defect: f64,
}

impl Displacement {
    pub fn within_tolerance(&self) -> bool {
        self.truncation_defect <= DISPLACEMENT_TOL
    }
}

/// Per-`j` blocks `exp(β m_s (a† − a))` together with the truncation defect.
pub(crate) fn displacement_blocks(beta: f64, basis: &ProductBasis) -> Result<(Vec<Mat<c64>>, f64)> {
    let fock_dim = basis.fock_dim();
    let low = fock_dim.div_ceil(2);
    let ref_dim = 2 * fock_dim + 16;
    let alphas: Vec<f64> = (0..basis.spin_dim()).map(|j| beta * basis.m_s(j)).collect();
    let blocks = fock_displacements(&alphas, fock_dim)?;
    let references = fock_displacements(&alphas, ref_dim)?;
    let mut defect = 0.0f64;
    for (block, reference) in blocks.iter().zip(&references) {
        for c in 0..low {
            for r in 0..low {
                defect = defect.max((block[(r, c)] - reference[(r, c)]).norm());
            }
        }
    }
    Ok((blocks, defect))
}

pub fn conditional_displacement(beta: f64, basis: &ProductBasis) -> Result<Displacement> {
    let (blocks, truncation_defect) = displacement_blocks(beta, basis)?;
    let dim = basis.dim();
    let mut matrix = Mat::<c64>::zeros(dim, dim);
    for (j, block) in blocks.iter().enumerate() {
        for c in 0..basis.fock_dim() {
            for r in 0..basis.fock_dim() {
                matrix[(basis.index(r, j), basis.index(c, j))] = block[(r, c)];
            }
        }
    }
    Ok(Displacement {
        matrix,
        truncation_defect,
    })
}

/// Spin rotation `R = exp(+i(π/2) J_y)`, the sign fixed so that `R† J_z R = J_x`.
pub fn rotate_y_half_pi(n_qubits: usize) -> Mat<c64> {
    let spins = collective_spin_matrices(n_qubits);
    let half_pi = std::f64::consts::FRAC_PI_2;
    linalg::hermitian_function(spins.jy.matrix(), |mu| {
        c64::new((half_pi * mu).cos(), (half_pi * mu).sin())
    })
    .expect("spin matrices are small")
}

#[cfg(test)]
pub(crate) fn identity(dim: usize) -> Mat<c64> {
    Mat::from_fn(dim, dim, |i, j| if i == j { linalg::ONE } else { ZERO })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn commutator(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
        a * b - b * a
    }

    fn owned(op: &HermitianOperator) -> Mat<c64> {
        op.matrix().to_owned()
    }

    #[test]
    fn single_spin_half() {
        let s = collective_spin_matrices(1);
        assert_eq!(s.jz.matrix()[(0, 0)], c64::new(-0.5, 0.0));
        assert_eq!(s.jz.matrix()[(1, 1)], c64::new(0.5, 0.0));
    }

    #[test]
    fn spin_one_matrices() {
        let s = collective_spin_matrices(2);
        for (j, m) in [-1.0, 0.0, 1.0].iter().enumerate() {
            assert_eq!(s.jz.matrix()[(j, j)].re, *m);
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.jx.matrix()[(0, 1)].re - r).abs() < 1e-15);
        assert!((s.jx.matrix()[(1, 2)].re - r).abs() < 1e-15);
        assert_eq!(s.jx.matrix()[(0, 2)], ZERO);
    }

    #[test]
    fn dicke_projections_for_five_qubits() {
        let s = collective_spin_matrices(5);
        let diag: Vec<f64> = (0..6).map(|j| s.jz.matrix()[(j, j)].re).collect();
        assert_eq!(diag, vec![-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
    }

    #[test]
    fn angular_momentum_algebra_up_to_48() {
        let i = c64::new(0.0, 1.0);
        for n in [1usize, 2, 3, 7, 16, 33, 48] {
            let s = collective_spin_matrices(n);
            let (x, y, z) = (owned(&s.jx), owned(&s.jy), owned(&s.jz));
            let scale = |m: &Mat<c64>| Mat::from_fn(m.nrows(), m.ncols(), |r, c| i * m[(r, c)]);
            assert!(max_abs_diff(commutator(&x, &y).as_ref(), scale(&z).as_ref()) < 1e-12);
            assert!(max_abs_diff(commutator(&y, &z).as_ref(), scale(&x).as_ref()) < 1e-12);
            assert!(max_abs_diff(commutator(&z, &x).as_ref(), scale(&y).as_ref()) < 1e-12);
        }
    }

    #[test]
    fn ladder_elements() {
        // J+|S,m⟩ = √(S(S+1) − m(m+1)) |S,m+1⟩ with J+ = J_x + iJ_y
        let n = 6;
        let s = collective_spin_matrices(n);
        let spin = n as f64 / 2.0;
        for j in 0..n {
            let m = j as f64 - spin;
            let jp = s.jx.matrix()[(j + 1, j)] + c64::new(0.0, 1.0) * s.jy.matrix()[(j + 1, j)];
            assert!((jp.re - raising_element(spin, m)).abs() < 1e-14);
            assert!(jp.im.abs() < 1e-14);
        }
    }

    #[test]
    fn decoupled_ground_energy() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 5, 0).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let diag: Vec<f64> = (0..h.dim()).map(|i| h.matrix()[(i, i)].re).collect();
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(min, -2.5);
        assert_eq!(diag[p.basis().index(0, 0)], -2.5);
    }

    #[test]
    fn decoupled_hamiltonian_is_diagonal_with_analytic_entries() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 2.0, 5, 3).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let b = p.basis();
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                let v = h.matrix()[(r, c)];
                if r == c {
                    let (n, j) = b.split(r);
                    assert!((v.re - analytic_energy(n, b.m_s(j), &p)).abs() < 1e-12);
                } else {
                    assert_eq!(v, ZERO);
                }
            }
        }
    }

    #[test]
    fn coupling_structure() {
        let p = ModelParams::new(1.0, 1.0, 0.8, 0.0, 2, 3).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let b = p.basis();
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                if r == c || h.matrix()[(r, c)] == ZERO {
                    continue;
                }
                let (n1, j1) = b.split(r);
                let (n2, j2) = b.split(c);
                assert_eq!(n1.abs_diff(n2), 1);
                assert_eq!(j1.abs_diff(j2), 1);
            }
        }
        // ⟨1, j=1| H |0, j=0⟩ = (λ/N)·1·⟨1|2J_x|0⟩ = (0.8/2)·√2
        let v = h.matrix()[(b.index(1, 1), b.index(0, 0))].re;
        assert!((v - 0.4 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn analytic_energy_examples() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 5, 0).unwrap();
        assert_eq!(analytic_energy(0, -2.5, &p), -2.5);
        assert_eq!(analytic_energy(0, 0.0, &p), 0.0);
        let p = ModelParams::from_scaled(1.0, 1.0, 0.0, 0.4, 5, 0).unwrap();
        assert!((analytic_energy(1, -1.5, &p) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn critical_couplings_five_qubits() {
        let c = first_order_critical_couplings(5, 1.0);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].m_s, c[0].eta_c_over_n), (-2.5, 0.25));
        assert_eq!((c[1].m_s, c[1].eta_c_over_n), (-1.5, 0.5));
    }

    #[test]
    fn critical_couplings_match_level_crossings() {
        for n in [2usize, 3, 6, 11, 20] {
            for c in first_order_critical_couplings(n, 1.0) {
                let p = ModelParams::from_scaled(1.0, 1.0, 0.0, c.eta_c_over_n, n, 0).unwrap();
                let lo = analytic_energy(0, c.m_s, &p);
                let hi = analytic_energy(0, c.m_s + 1.0, &p);
                assert!((lo - hi).abs() < 1e-12, "N={n} m={}", c.m_s);
            }
        }
        let c = first_order_critical_couplings(2, 1.0);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].m_s, c[0].eta_c_over_n), (-1.0, 1.0));
        let c = first_order_critical_couplings(20, 1.0);
        assert_eq!(c[0].m_s, -10.0);
        assert!((c[0].eta_c_over_n - 1.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_maps_jz_to_jx() {
        for n in [1usize, 2, 5, 8] {
            let r = rotate_y_half_pi(n);
            let s = collective_spin_matrices(n);
            let rotated = r.adjoint() * s.jz.matrix() * &r;
            assert!(max_abs_diff(rotated.as_ref(), s.jx.matrix()) < 1e-12);
            let rr = &r * r.adjoint();
            assert!(max_abs_diff(rr.as_ref(), identity(n + 1).as_ref()) < 1e-12);
        }
    }

    #[test]
    fn single_spin_rotation_sends_down_to_symmetric_superposition() {
        let r = rotate_y_half_pi(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // R|↓⟩ up to a global phase
        let (a, b) = (r[(0, 0)], r[(1, 0)]);
        assert!((a.norm() - h).abs() < 1e-14 && (b.norm() - h).abs() < 1e-14);
        assert!(((a.conj() * b).re.abs() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_displacement_is_identity() {
        let b = ProductBasis::new(3, 6);
        let d = conditional_displacement(0.0, &b).unwrap();
        assert!(max_abs_diff(d.matrix.as_ref(), identity(b.dim()).as_ref()) < 1e-12);
        assert!(d.within_tolerance());
    }

    #[test]
    fn coherent_vacuum_overlap() {
        // N = 1: the m_s = +1/2 block is an ordinary displacement by β/2.
        let alpha: f64 = 0.7;
        let b = ProductBasis::new(1, 40);
        let d = conditional_displacement(2.0 * alpha, &b).unwrap();
        let vac = d.matrix[(b.index(0, 1), b.index(0, 1))];
        assert!((vac.re - (-alpha * alpha / 2.0).exp()).abs() < 1e-12);
        assert!(vac.im.abs() < 1e-12);
        // ⟨n|D(α)|0⟩ = e^{−α²/2} αⁿ/√n!
        let mut fact = 1.0;
        for n in 0..12 {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = (-alpha * alpha / 2.0).exp() * alpha.powi(n as i32) / fact.sqrt();
            let got = d.matrix[(b.index(n, 1), b.index(0, 1))];
            assert!((got.re - expect).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn displacement_inverse() {
        let b = ProductBasis::new(4, 30);
        let d = conditional_displacement(0.3, &b).unwrap();
        let dinv = conditional_displacement(-0.3, &b).unwrap();
        let prod = &d.matrix * &dinv.matrix;
        let low = 10;
        for ci in 0..low {
            for j in 0..b.spin_dim() {
                for ri in 0..low {
                    for k in 0..b.spin_dim() {
                        let want = if ri == ci && j == k { 1.0 } else { 0.0 };
                        let got = prod[(b.index(ri, k), b.index(ci, j))];
                        assert!((got.re - want).abs() < 1e-8 && got.im.abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn displacement_flags_tight_truncation() {
        let b = ProductBasis::new(4, 4);
        let d = conditional_displacement(1.5, &b).unwrap();
        assert!(!d.within_tolerance());
    }

    #[test]
    fn parity_commutes_with_hamiltonian() {
        let p = ModelParams::from_scaled(1.0, 1.0, 0.9, 0.3, 4, 10).unwrap();
        let h = owned(&build_hamiltonian(&p).unwrap());
        let pi = owned(&parity_operator(&p.basis()));
        let c = commutator(&h, &pi);
        assert!(crate::linalg::max_abs(c.as_ref()) < 1e-10);
    }

    #[test]
    fn rejects_invalid_params_and_oversized_spaces() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0, 2, 1).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0, 0.0, 2, 1).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 0.0, 2, 1).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.0, 0, 1).is_err());
        let p = ModelParams::new(1.0, 1.0, 0.1, 0.0, 99, 999).unwrap();
        assert!(matches!(
            build_hamiltonian(&p),
            Err(Error::DimensionCap { dim: 100_000, .. })
        ));
    }

    #[test]
    fn basis_index_is_a_bijection() {
        let b = ProductBasis::new(5, 7);
        let mut seen = vec![false; b.dim()];
        for n in 0..=7 {
            for j in 0..=5 {
                let i = b.index(n, j);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(b.split(i), (n, j));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }
}
