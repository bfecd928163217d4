//! Cavity trace-out, symmetric k-qubit marginals, entropy and purity.
//!
//! Reduced states of permutation-symmetric qubit states stay inside the
//! symmetric sector, so a k-qubit marginal is carried as a `(k+1)×(k+1)`
//! matrix in the Dicke basis `|D_k^q⟩`, `q` = number of excitations.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, ZERO};
use crate::model::ProductBasis;
use crate::spectra::GroundState;

pub const TRACE_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Eigenvalues below this contribute nothing to the entropy.
pub const ENTROPY_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisTag {
    /// Symmetric sector of `n_qubits` qubits, dimension `n_qubits + 1`.
    Dicke { n_qubits: usize },
    /// Computational basis of `n_qubits` qubits, dimension `2^n_qubits`;
    /// qubit 0 is the least-significant bit.
    Product { n_qubits: usize },
}

impl BasisTag {
    pub fn n_qubits(&self) -> usize {
        match *self {
            BasisTag::Dicke { n_qubits } | BasisTag::Product { n_qubits } => n_qubits,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            BasisTag::Dicke { n_qubits } => n_qubits + 1,
            BasisTag::Product { n_qubits } => 1 << n_qubits,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: Mat<c64>,
    basis: BasisTag,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: Mat<c64>, basis: BasisTag) -> Result<Self> {
        let dim = basis.dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mat.nrows(),
            });
        }
        let herm = linalg::hermiticity_defect(mat.as_ref());
        if herm > linalg::HERMITIAN_TOL * max_abs(mat.as_ref()).max(1.0) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace: f64 = (0..dim).map(|i| mat[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let rho = Self { mat, basis };
        let lowest = rho.eigenvalues()?[0];
        if lowest < -NEGATIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {lowest:.3e}"
            )));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector in the given basis.
    pub fn pure(amplitudes: &[c64], basis: BasisTag) -> Result<Self> {
        let dim = amplitudes.len();
        let mat = Mat::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj());
        Self::new(mat, basis)
    }

    /// Dicke-basis projector onto `|D_n^e⟩`.
    pub fn dicke_projector(n_qubits: usize, excitations: usize) -> Self {
        let mut amps = vec![ZERO; n_qubits + 1];
        amps[excitations] = c64::new(1.0, 0.0);
        Self::pure(&amps, BasisTag::Dicke { n_qubits }).expect("projector is a valid state")
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.n_qubits()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigenvalues_complex(self.mat.as_ref())
    }
}

/// Traces the cavity out of a ground state: `ρ_N[j, j'] = Σ_n ψ(n,j) ψ*(n,j')`.
pub fn trace_out_cavity(gs: &GroundState, basis: &ProductBasis) -> Result<DensityMatrix> {
    trace_out_cavity_amplitudes(gs.state.amplitudes(), basis)
}

pub(crate) fn trace_out_cavity_amplitudes(
    psi: &[c64],
    basis: &ProductBasis,
) -> Result<DensityMatrix> {
    if psi.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: psi.len(),
        });
    }
    let d = basis.spin_dim();
    let mut rho = Mat::<c64>::zeros(d, d);
    for n in 0..basis.fock_dim() {
        let block = &psi[n * d..(n + 1) * d];
        for c in 0..d {
            let bc = block[c].conj();
            if bc == ZERO {
                continue;
            }
            for r in 0..d {
                rho[(r, c)] += block[r] * bc;
            }
        }
    }
    DensityMatrix::new(
        rho,
        BasisTag::Dicke {
            n_qubits: basis.n_qubits,
        },
    )
}

/// Binomial coefficient in floating point.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Splitting amplitude `√(C(k,q) C(N−k,e−q) / C(N,e))` of
/// `|D_N^e⟩ = Σ_q amp · |D_k^q⟩|D_{N−k}^{e−q}⟩`.
pub(crate) fn splitting_amplitude(n: usize, k: usize, e: usize, q: usize) -> f64 {
    if q > e || q > k || e - q > n - k {
        return 0.0;
    }
    (binomial(k, q) * binomial(n - k, e - q) / binomial(n, e)).sqrt()
}

/// Marginal of any `k` qubits of a symmetric `N`-qubit state.
pub fn reduce_symmetric(rho_n: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    reduce_symmetric_with(rho_n, k, splitting_amplitude)
}

/// Same as [`reduce_symmetric`] with the splitting amplitude injected; lets the
/// oracle harness verify that a corrupted weight is caught.
pub fn reduce_symmetric_with(
    rho_n: &DensityMatrix,
    k: usize,
    amplitude: impl Fn(usize, usize, usize, usize) -> f64,
) -> Result<DensityMatrix> {
    let n = match rho_n.basis() {
        BasisTag::Dicke { n_qubits } => n_qubits,
        BasisTag::Product { .. } => {
            return Err(Error::InvalidDensityMatrix(
                "symmetric reduction needs a Dicke-basis state".into(),
            ))
        }
    };
    if k < 1 || k > n {
        return Err(Error::OrderOutOfRange { k, min: 1, max: n });
    }
    if k == n {
        return Ok(rho_n.clone());
    }
    let src = rho_n.matrix();
    let mut out = Mat::<c64>::zeros(k + 1, k + 1);
    // |D_N^e⟩⟨D_N^e'| keeps only terms where the traced block carries the
    // same number r of excitations on both sides.
    for r in 0..=(n - k) {
        for qc in 0..=k {
            let ec = qc + r;
            let wc = amplitude(n, k, ec, qc);
            if wc == 0.0 {
                continue;
            }
            for qr in 0..=k {
                let er = qr + r;
                let wr = amplitude(n, k, er, qr);
                if wr == 0.0 {
                    continue;
                }
                out[(qr, qc)] += src[(er, ec)] * (wr * wc);
            }
        }
    }
    DensityMatrix::new(out, BasisTag::Dicke { n_qubits: k })
}

/// Von Neumann entropy in nats. Eigenvalues below [`ENTROPY_CLAMP`] are
/// dropped and the remaining spectrum renormalized.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eigenvalues()?;
    Ok(entropy_of_spectrum(&eig))
}

pub(crate) fn entropy_of_spectrum(eig: &[f64]) -> f64 {
    let kept: Vec<f64> = eig.iter().map(|&p| if p < ENTROPY_CLAMP { 0.0 } else { p }).collect();
    let total: f64 = kept.iter().sum();
    let s: f64 = kept
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let p = p / total;
            -p * p.ln()
        })
        .sum();
    s.max(0.0)
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let mut acc = 0.0;
    for j in 0..rho.dim() {
        for i in 0..rho.dim() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc
}
