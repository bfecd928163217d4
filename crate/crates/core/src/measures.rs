//! Genuine multipartite correlations, the QFI entanglement witness and
//! generalized global entanglement of symmetric qubit states.
//!
//! For a permutation-invariant state the closest product state with blocks of
//! at most `k` qubits is `ρ_k^{⊗⌊N/k⌋} ⊗ ρ_{N mod k}`, so every correlation
//! quantity reduces to the marginal entropies `S(ρ_1), …, S(ρ_N)`:
//!
//! ```text
//! I^{k→N} = ⌊N/k⌋ S(ρ_k) + [N mod k ≠ 0] S(ρ_{N mod k}) − S(ρ_N)
//! I^k     = I^{k−1→N} − I^{k→N}
//! I^1     = N S(ρ_1) − S(ρ_N) = Σ_{k≥2} I^k
//! ```

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::model::collective_spin_matrices;
use crate::reduce::{self, BasisTag, DensityMatrix};

pub const SUM_RULE_TOL: f64 = 1e-9;
/// Eigenvalue pairs with `p_i + p_j` at or below this are left out of Γ.
pub const QFI_SPECTRAL_FLOOR: f64 = 1e-12;
/// `E_G` is reported only for states at least this pure.
pub const PURITY_GATE: f64 = 1.0 - 1e-8;
/// Below this total correlation all shares are reported as 0.
const SHARE_FLOOR: f64 = 1e-12;

fn dicke_qubits(rho: &DensityMatrix) -> Result<usize> {
    match rho.basis() {
        BasisTag::Dicke { n_qubits } => Ok(n_qubits),
        BasisTag::Product { .. } => Err(Error::InvalidDensityMatrix(
            "expected a Dicke-basis state".into(),
        )),
    }
}

/// `S(ρ_k)` for `k = 1..=N`; entry `k − 1` holds the `k`-qubit marginal.
pub fn marginal_entropies(rho_n: &DensityMatrix) -> Result<Vec<f64>> {
    let n = dicke_qubits(rho_n)?;
    (1..=n)
        .map(|k| reduce::von_neumann_entropy(&reduce::reduce_symmetric(rho_n, k)?))
        .collect()
}

/// `I^{k→N}` from the marginal entropies.
pub fn higher_than_from_entropies(entropies: &[f64], k: usize) -> Result<f64> {
    let n = entropies.len();
    if k < 1 || k > n {
        return Err(Error::OrderOutOfRange { k, min: 1, max: n });
    }
    let s = |m: usize| entropies[m - 1];
    let blocks = (n / k) as f64;
    let rest = n % k;
    let remainder = if rest == 0 { 0.0 } else { s(rest) };
    if k == n {
        return Ok(0.0);
    }
    Ok(blocks * s(k) + remainder - s(n))
}

/// Genuine correlations of order higher than `k`, `I^{k→N}`.
pub fn gmc_higher_than_k(rho_n: &DensityMatrix, k: usize) -> Result<f64> {
    let n = dicke_qubits(rho_n)?;
    if k < 1 || k > n {
        return Err(Error::OrderOutOfRange { k, min: 1, max: n });
    }
    higher_than_from_entropies(&marginal_entropies(rho_n)?, k)
}

/// Genuine `k`-partite correlations `I^k`.
pub fn gmc_order_k(rho_n: &DensityMatrix, k: usize) -> Result<f64> {
    let n = dicke_qubits(rho_n)?;
    if k < 2 || k > n {
        return Err(Error::OrderOutOfRange { k, min: 2, max: n });
    }
    let s = marginal_entropies(rho_n)?;
    Ok(higher_than_from_entropies(&s, k - 1)? - higher_than_from_entropies(&s, k)?)
}

/// Total correlations `I^1 = N S(ρ_1) − S(ρ_N)`.
pub fn total_correlations(rho_n: &DensityMatrix) -> Result<f64> {
    let n = dicke_qubits(rho_n)?;
    let s1 = reduce::von_neumann_entropy(&reduce::reduce_symmetric(rho_n, 1)?)?;
    let sn = reduce::von_neumann_entropy(rho_n)?;
    Ok(n as f64 * s1 - sn)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GmcReport {
    pub n_qubits: usize,
    /// `S(ρ_k)`, `k = 1..=N`, nats.
    pub entropies: Vec<f64>,
    /// `I^{k→N}`, `k = 1..N−1`.
    pub higher_than: Vec<f64>,
    /// `I^k`, `k = 2..=N`.
    pub orders: Vec<f64>,
    /// `I^1`.
    pub total: f64,
    /// `100 · I^k / I^1` in percent, `k = 2..=N`.
    pub shares: Vec<f64>,
}

impl GmcReport {
    pub fn from_entropies(entropies: Vec<f64>) -> Result<Self> {
        let n = entropies.len();
        let higher_than = (1..n)
            .map(|k| higher_than_from_entropies(&entropies, k))
            .collect::<Result<Vec<_>>>()?;
        let hi = |k: usize| if k >= n { 0.0 } else { higher_than[k - 1] };
        let orders: Vec<f64> = (2..=n).map(|k| hi(k - 1) - hi(k)).collect();
        let total = if n == 0 {
            0.0
        } else {
            n as f64 * entropies[0] - entropies[n - 1]
        };
        let sum: f64 = orders.iter().sum();
        if (total - sum).abs() > SUM_RULE_TOL {
            return Err(Error::SumRule { total, sum });
        }
        let shares = orders
            .iter()
            .map(|&ik| if total < SHARE_FLOOR { 0.0 } else { 100.0 * ik / total })
            .collect();
        Ok(Self {
            n_qubits: n,
            entropies,
            higher_than,
            orders,
            total,
            shares,
        })
    }

    /// `I^k` for `2 ≤ k ≤ N`.
    pub fn order(&self, k: usize) -> f64 {
        self.orders[k - 2]
    }

    pub fn share(&self, k: usize) -> f64 {
        self.shares[k - 2]
    }
}

pub fn gmc_report(rho_n: &DensityMatrix) -> Result<GmcReport> {
    GmcReport::from_entropies(marginal_entropies(rho_n)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QfiReport {
    pub gamma: [[f64; 3]; 3],
    pub f_max: f64,
    /// Largest `k ≥ 1` with `F_max/N > k − 1`. A depth of 1 witnesses
    /// nothing: `F_max < N` is inconclusive.
    pub depth: usize,
}

/// Entanglement depth witnessed by `f_max` for `n` qubits.
pub fn witnessed_depth(f_max: f64, n_qubits: usize) -> usize {
    let ratio = f_max / n_qubits as f64;
    // strict inequality, with slack for round-off on exact integer ratios
    let k = (ratio - 1e-9).ceil();
    (k.max(1.0) as usize).min(n_qubits.max(1))
}

/// Maximal QFI over collective generators: the largest eigenvalue of
/// `Γ_{αβ} = 2 Σ_{ij} (p_i − p_j)²/(p_i + p_j) ⟨j|J_α|i⟩⟨i|J_β|j⟩`.
pub fn qfi_matrix(rho_n: &DensityMatrix) -> Result<QfiReport> {
    let n = dicke_qubits(rho_n)?;
    let spins = collective_spin_matrices(n);
    let (p, vecs) = linalg::evd_complex(rho_n.matrix())?;
    let d = rho_n.dim();
    // generators in the eigenbasis of ρ
    let rotate = |a: faer::MatRef<'_, c64>| vecs.adjoint() * a * &vecs;
    let gens = [
        rotate(spins.jx.matrix()),
        rotate(spins.jy.matrix()),
        rotate(spins.jz.matrix()),
    ];
    let mut gamma = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let mut acc = ZERO;
            for i in 0..d {
                for j in 0..d {
                    let s = p[i] + p[j];
                    if s <= QFI_SPECTRAL_FLOOR {
                        continue;
                    }
                    let w = (p[i] - p[j]).powi(2) / s;
                    if w == 0.0 {
                        continue;
                    }
                    acc += gens[a][(j, i)] * gens[b][(i, j)] * w;
                }
            }
            gamma[a][b] = 2.0 * acc.re;
            gamma[b][a] = 2.0 * acc.re;
        }
    }
    let f_max = largest_eigenvalue_3x3(&gamma)?.max(0.0);
    Ok(QfiReport {
        gamma,
        f_max,
        depth: witnessed_depth(f_max, n),
    })
}

pub(crate) fn largest_eigenvalue_3x3(m: &[[f64; 3]; 3]) -> Result<f64> {
    let mat = Mat::from_fn(3, 3, |i, j| m[i][j]);
    let (vals, _) = linalg::evd_real(mat.as_ref())?;
    Ok(vals[2])
}

/// Generalized global entanglement `E_G^(ℓ) = d/(d−1) (1 − Tr ρ_ℓ²)` with
/// `d = 2^min(ℓ, N−ℓ)`. `None` when `ρ_N` is mixed, where the measure does
/// not apply.
pub fn global_entanglement(rho_n: &DensityMatrix, l: usize) -> Result<Option<f64>> {
    let n = dicke_qubits(rho_n)?;
    if n < 2 || l < 1 || l > n - 1 {
        return Err(Error::OrderOutOfRange {
            k: l,
            min: 1,
            max: n.saturating_sub(1),
        });
    }
    if reduce::purity(rho_n) < PURITY_GATE {
        return Ok(None);
    }
    let rho_l = reduce::reduce_symmetric(rho_n, l)?;
    Ok(Some(global_entanglement_from_purity(reduce::purity(&rho_l), n, l)))
}

pub(crate) fn global_entanglement_from_purity(purity: f64, n: usize, l: usize) -> f64 {
    let d = (1u64 << l.min(n - l)) as f64;
    d / (d - 1.0) * (1.0 - purity)
}
