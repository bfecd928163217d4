//! Dense complex matrices and the thin eigensolver layer over faer.
//!
//! All decompositions here run with `Par::Seq` so results do not depend on
//! how many threads the caller happens to be using.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::diag::Diag;
use faer::{c64, Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity check of [`HermitianOperator`].
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// `max |M - M†|` over all entries.
pub fn hermiticity_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// Largest absolute entrywise difference of two equally shaped matrices.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = out.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    out
}

pub(crate) fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// A square complex matrix that is Hermitian within [`HERMITIAN_TOL`].
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<c64>,
}

impl HermitianOperator {
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let deviation = hermiticity_defect(mat.as_ref());
        if deviation > HERMITIAN_TOL * max_abs(mat.as_ref()).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { mat })
    }

    pub fn from_real(mat: &Mat<f64>) -> Result<Self> {
        Self::new(to_complex(mat.as_ref()))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.mat
    }

    /// True when every entry has an exactly vanishing imaginary part.
    pub fn is_real(&self) -> bool {
        (0..self.dim()).all(|j| (0..self.dim()).all(|i| self.mat[(i, j)].im == 0.0))
    }

    /// `⟨v|M|v⟩`, real for Hermitian `M`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        let a = v.amplitudes();
        assert_eq!(a.len(), self.dim());
        let mut acc = 0.0;
        for j in 0..self.dim() {
            if a[j] == ZERO {
                continue;
            }
            let col: c64 = a
                .iter()
                .enumerate()
                .map(|(i, ai)| ai.conj() * self.mat[(i, j)])
                .sum();
            acc += (col * a[j]).re;
        }
        acc
    }
}

/// A normalized complex state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<c64>,
}

impl StateVector {
    /// Normalizes `amplitudes` to unit 2-norm.
    pub fn normalized(mut amplitudes: Vec<c64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Full eigendecomposition of a real symmetric matrix (lower triangle read),
/// eigenvalues ascending.
pub(crate) fn evd_real(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    let mut u = Mat::<f64>::zeros(n, n);
    let mut s = Diag::<f64>::zeros(n);
    let par = Par::Seq;
    let scratch = evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    );
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
        Default::default(),
    )
    .map_err(|_| Error::EigenNoConvergence { dim: n })?;
    let values = s.column_vector().iter().copied().collect();
    Ok((values, u))
}

/// Full eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
pub(crate) fn evd_complex(a: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = a.nrows();
    let mut u = Mat::<c64>::zeros(n, n);
    let mut s = Diag::<c64>::zeros(n);
    let par = Par::Seq;
    let scratch = evd::self_adjoint_evd_scratch::<c64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    );
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
        Default::default(),
    )
    .map_err(|_| Error::EigenNoConvergence { dim: n })?;
    let values = s.column_vector().iter().map(|z| z.re).collect();
    Ok((values, u))
}

/// Eigenvalues only of a complex Hermitian matrix, ascending.
pub(crate) fn eigenvalues_complex(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut s = Diag::<c64>::zeros(n);
    let par = Par::Seq;
    let scratch = evd::self_adjoint_evd_scratch::<c64>(
        n,
        ComputeEigenvectors::No,
        par,
        Default::default(),
    );
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        None,
        par,
        MemStack::new(&mut MemBuffer::new(scratch)),
        Default::default(),
    )
    .map_err(|_| Error::EigenNoConvergence { dim: n })?;
    Ok(s.column_vector().iter().map(|z| z.re).collect())
}

/// `V diag(f(μ)) V†` for Hermitian `a = V diag(μ) V†`.
pub(crate) fn hermitian_function(
    a: MatRef<'_, c64>,
    f: impl Fn(f64) -> c64,
) -> Result<Mat<c64>> {
    let (mu, v) = evd_complex(a)?;
    let n = a.nrows();
    let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] * f(mu[k]));
    Ok(scaled * v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { ONE } else { ZERO });
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_square() {
        let m = Mat::<c64>::zeros(2, 3);
        assert!(HermitianOperator::new(m).is_err());
    }

    #[test]
    fn normalization() {
        let v = StateVector::normalized(vec![c64::new(3.0, 0.0), c64::new(0.0, 4.0)]).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::normalized(vec![ZERO; 3]).is_err());
    }

    #[test]
    fn complex_evd_of_pauli_y() {
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.0, -1.0),
            (1, 0) => c64::new(0.0, 1.0),
            _ => ZERO,
        });
        let (vals, _) = evd_complex(m.as_ref()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }
}
