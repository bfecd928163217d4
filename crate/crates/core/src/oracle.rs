//! Brute-force reference implementation in the full `2^N ⊗ Fock` space.
//!
//! Nothing here uses the Dicke-basis shortcuts: the Hamiltonian is a literal
//! sum of per-site Pauli operators, marginals are index-summation partial
//! traces over explicit qubit subsets, and the QFI is evaluated with the
//! generators `Σ_i σ_α^i / 2` on the full qubit space. Qubit `i` is bit `i`
//! of the computational index (qubit 0 least significant), bit value 1 is
//! the excited state, and the full index is `n · 2^N + bits`.

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianOperator, ZERO};
use crate::measures::{self, GmcReport};
use crate::model::{check_dim, ModelParams, DEFAULT_DIM_CAP};
use crate::reduce::{self, binomial, BasisTag, DensityMatrix};
use crate::spectra;

pub const MAX_ORACLE_QUBITS: usize = 6;
pub const MAX_ORACLE_N_MAX: usize = 32;
/// Agreement required between the symmetric pipeline and brute force.
pub const ORACLE_TOL: f64 = 1e-8;
/// Fock cutoff shared by both sides of [`oracle_check`].
pub const DEFAULT_ORACLE_N_MAX: usize = 24;

/// Amplitudes over `2^N · (n_max + 1)` states.
#[derive(Clone, Debug)]
pub struct FullSpaceState {
    pub n_qubits: usize,
    pub n_max: usize,
    amplitudes: Vec<c64>,
}

impl FullSpaceState {
    pub fn new(n_qubits: usize, n_max: usize, amplitudes: Vec<c64>) -> Result<Self> {
        let dim = (1usize << n_qubits) * (n_max + 1);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "full-space state has norm {norm}"
            )));
        }
        Ok(Self {
            n_qubits,
            n_max,
            amplitudes,
        })
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }
}

fn check_oracle_size(n_qubits: usize, n_max: usize) -> Result<usize> {
    if n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::InvalidParams(format!(
            "oracle supports at most {MAX_ORACLE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    if n_max > MAX_ORACLE_N_MAX {
        return Err(Error::InvalidParams(format!(
            "oracle supports n_max ≤ {MAX_ORACLE_N_MAX}, got {n_max}"
        )));
    }
    let dim = (1usize << n_qubits) * (n_max + 1);
    check_dim(dim, DEFAULT_DIM_CAP)?;
    Ok(dim)
}

fn full_hamiltonian_real(p: &ModelParams) -> Result<Mat<f64>> {
    p.validate()?;
    let n = p.n_qubits;
    let dim = check_oracle_size(n, p.n_max)?;
    let qubit_dim = 1usize << n;
    let coupling = p.lambda / n as f64;
    let mut h = Mat::<f64>::zeros(dim, dim);
    for photons in 0..=p.n_max {
        for bits in 0..qubit_dim {
            let row = photons * qubit_dim + bits;
            // Σ_i σ_z^i / 2
            let sz: f64 = (0..n)
                .map(|i| if bits >> i & 1 == 1 { 0.5 } else { -0.5 })
                .sum();
            h[(row, row)] =
                p.omega_c * photons as f64 + p.omega_0 * sz + p.eta / n as f64 * sz * sz;
            if photons == p.n_max {
                continue;
            }
            // (λ/N)(a + a†) Σ_i σ_x^i
            let boson = coupling * ((photons + 1) as f64).sqrt();
            for i in 0..n {
                let col = (photons + 1) * qubit_dim + (bits ^ (1 << i));
                h[(row, col)] += boson;
                h[(col, row)] += boson;
            }
        }
    }
    Ok(h)
}

pub fn build_full_hamiltonian(p: &ModelParams) -> Result<HermitianOperator> {
    HermitianOperator::from_real(&full_hamiltonian_real(p)?)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn permute_bits(bits: usize, perm: &[usize]) -> usize {
    perm.iter()
        .enumerate()
        .map(|(from, &to)| ((bits >> from) & 1) << to)
        .sum()
}

/// Average of a full-space vector over all qubit permutations.
fn symmetrize(v: &[f64], n_qubits: usize, perms: &[Vec<usize>]) -> Vec<f64> {
    let qubit_dim = 1usize << n_qubits;
    let mut out = vec![0.0; v.len()];
    for perm in perms {
        for (idx, o) in out.iter_mut().enumerate() {
            let (photons, bits) = (idx / qubit_dim, idx % qubit_dim);
            *o += v[photons * qubit_dim + permute_bits(bits, perm)];
        }
    }
    let scale = 1.0 / perms.len() as f64;
    out.iter_mut().for_each(|x| *x *= scale);
    out
}

/// Lowest-energy permutation-symmetric eigenstate of the full Hamiltonian.
///
/// Eigenvalues are grouped into clusters (relative spread 1e-8); the first
/// cluster with a nonvanishing symmetric component supplies the state, taken
/// as the symmetrized member with the largest symmetric weight.
pub fn full_ground_state(p: &ModelParams) -> Result<(f64, FullSpaceState)> {
    let h = full_hamiltonian_real(p)?;
    let (vals, vecs) = linalg::evd_real(h.as_ref())?;
    let perms = permutations(p.n_qubits);
    let dim = vals.len();
    let mut start = 0;
    while start < dim {
        let tol = 1e-8 * vals[start].abs().max(1.0);
        let mut end = start + 1;
        while end < dim && vals[end] - vals[start] <= tol {
            end += 1;
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for c in start..end {
            let col: Vec<f64> = (0..dim).map(|r| vecs[(r, c)]).collect();
            let sym = symmetrize(&col, p.n_qubits, &perms);
            let w = sym.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                best = Some((w, sym));
            }
        }
        if let Some((w, sym)) = best {
            if w > 1e-6 {
                let amps = sym.iter().map(|&x| c64::new(x / w, 0.0)).collect();
                let state = FullSpaceState::new(p.n_qubits, p.n_max, amps)?;
                return Ok((vals[start], state));
            }
        }
        start = end;
    }
    Err(Error::InvalidParams(
        "no permutation-symmetric eigenstate found".into(),
    ))
}

/// Expands a Dicke-basis state over computational strings:
/// `|D_k^q⟩ = C(k,q)^{−1/2} Σ_{|b| = q} |b⟩`.
pub fn embed_dicke(rho_k: &DensityMatrix) -> Result<DensityMatrix> {
    let k = match rho_k.basis() {
        BasisTag::Dicke { n_qubits } => n_qubits,
        BasisTag::Product { .. } => return Ok(rho_k.clone()),
    };
    if k > MAX_ORACLE_QUBITS {
        return Err(Error::InvalidParams(format!(
            "embedding supports at most {MAX_ORACLE_QUBITS} qubits"
        )));
    }
    let dim = 1usize << k;
    let src = rho_k.matrix();
    let weight = |q: usize| binomial(k, q).sqrt().recip();
    let m = Mat::from_fn(dim, dim, |r, c| {
        let (qr, qc) = (r.count_ones() as usize, c.count_ones() as usize);
        src[(qr, qc)] * (weight(qr) * weight(qc))
    });
    DensityMatrix::new(m, BasisTag::Product { n_qubits: k })
}

/// Qubit state of a full-space vector, cavity traced out.
pub fn brute_force_qubit_state(state: &FullSpaceState) -> Result<DensityMatrix> {
    let qubit_dim = 1usize << state.n_qubits;
    let mut m = Mat::<c64>::zeros(qubit_dim, qubit_dim);
    for photons in 0..=state.n_max {
        let block = &state.amplitudes[photons * qubit_dim..(photons + 1) * qubit_dim];
        for c in 0..qubit_dim {
            for r in 0..qubit_dim {
                m[(r, c)] += block[r] * block[c].conj();
            }
        }
    }
    DensityMatrix::new(
        m,
        BasisTag::Product {
            n_qubits: state.n_qubits,
        },
    )
}

/// Marginal on an arbitrary ordered subset of qubits; kept qubit `keep[i]`
/// becomes bit `i` of the result.
pub fn brute_force_marginal(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = match rho.basis() {
        BasisTag::Product { n_qubits } => n_qubits,
        BasisTag::Dicke { .. } => {
            return Err(Error::InvalidDensityMatrix(
                "brute-force reduction needs a product-basis state".into(),
            ))
        }
    };
    if keep.iter().any(|&q| q >= n) {
        return Err(Error::OrderOutOfRange {
            k: keep.len(),
            min: 1,
            max: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept_dim = 1usize << keep.len();
    let scatter = |sub: usize, qubits: &[usize]| -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(i, &q)| ((sub >> i) & 1) << q)
            .sum()
    };
    let src = rho.matrix();
    let mut out = Mat::<c64>::zeros(kept_dim, kept_dim);
    for env in 0..(1usize << traced.len()) {
        let env_bits = scatter(env, &traced);
        for c in 0..kept_dim {
            let full_c = env_bits | scatter(c, keep);
            for r in 0..kept_dim {
                let full_r = env_bits | scatter(r, keep);
                out[(r, c)] += src[(full_r, full_c)];
            }
        }
    }
    DensityMatrix::new(
        out,
        BasisTag::Product {
            n_qubits: keep.len(),
        },
    )
}

/// Literal partial trace over the last `N − k` qubits.
pub fn brute_force_reduce(rho: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let keep: Vec<usize> = (0..k).collect();
    brute_force_marginal(rho, &keep)
}

/// Every quantity the symmetric pipeline reports, recomputed by brute force.
#[derive(Clone, Debug)]
pub struct BruteForceMeasures {
    pub qubit_state: DensityMatrix,
    /// Marginals on qubits `0..k`, `k = 1..=N`.
    pub marginals: Vec<DensityMatrix>,
    pub entropies: Vec<f64>,
    /// `I^{k→N}` for `k = 1..=N`, from the entropies of the actual qubit
    /// blocks `[0,k), [k,2k), …` rather than from symmetry.
    pub higher_than: Vec<f64>,
    pub f_max: f64,
    pub global: Vec<Option<f64>>,
}

impl BruteForceMeasures {
    pub fn order(&self, k: usize) -> f64 {
        self.higher_than[k - 2] - self.higher_than[k - 1]
    }

    pub fn total(&self) -> f64 {
        self.higher_than[0]
    }
}

fn pauli_sum(n: usize, axis: usize) -> Mat<c64> {
    // Σ_i σ_α^i / 2 on 2^n states
    let dim = 1usize << n;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for b in 0..dim {
        for i in 0..n {
            let up = b >> i & 1 == 1;
            match axis {
                0 => m[(b ^ (1 << i), b)] += c64::new(0.5, 0.0),
                1 => {
                    // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
                    let v = if up { c64::new(0.0, -0.5) } else { c64::new(0.0, 0.5) };
                    m[(b ^ (1 << i), b)] += v;
                }
                _ => m[(b, b)] += c64::new(if up { 0.5 } else { -0.5 }, 0.0),
            }
        }
    }
    m
}

fn brute_force_f_max(rho: &DensityMatrix, n: usize) -> Result<f64> {
    let (p, v) = linalg::evd_complex(rho.matrix())?;
    let d = p.len();
    let gens: Vec<Mat<c64>> = (0..3).map(|a| pauli_sum(n, a)).collect();
    // ⟨j|A|i⟩ computed column by column
    let elements: Vec<Mat<c64>> = gens.iter().map(|g| v.adjoint() * g * &v).collect();
    let mut gamma = [[0.0; 3]; 3];
    for (a, ga) in elements.iter().enumerate() {
        for (b, gb) in elements.iter().enumerate() {
            let mut acc = ZERO;
            for i in 0..d {
                for j in 0..d {
                    let s = p[i] + p[j];
                    if s > measures::QFI_SPECTRAL_FLOOR {
                        acc += ga[(j, i)] * gb[(i, j)] * ((p[i] - p[j]).powi(2) / s);
                    }
                }
            }
            gamma[a][b] = 2.0 * acc.re;
        }
    }
    Ok(measures::largest_eigenvalue_3x3(&gamma)?.max(0.0))
}

pub fn brute_force_measures(state: &FullSpaceState) -> Result<BruteForceMeasures> {
    let n = state.n_qubits;
    let qubit_state = brute_force_qubit_state(state)?;
    let marginals = (1..=n)
        .map(|k| brute_force_reduce(&qubit_state, k))
        .collect::<Result<Vec<_>>>()?;
    let entropies = marginals
        .iter()
        .map(reduce::von_neumann_entropy)
        .collect::<Result<Vec<_>>>()?;
    let s_n = entropies[n - 1];
    let mut higher_than = Vec::with_capacity(n);
    for k in 1..=n {
        let mut acc = -s_n;
        let mut first = 0;
        while first < n {
            let block: Vec<usize> = (first..(first + k).min(n)).collect();
            acc += reduce::von_neumann_entropy(&brute_force_marginal(&qubit_state, &block)?)?;
            first += k;
        }
        higher_than.push(acc);
    }
    let f_max = brute_force_f_max(&qubit_state, n)?;
    let pure = reduce::purity(&qubit_state) >= measures::PURITY_GATE;
    let global = (1..n)
        .map(|l| {
            pure.then(|| {
                let d = (1u64 << l.min(n - l)) as f64;
                d / (d - 1.0) * (1.0 - reduce::purity(&marginals[l - 1]))
            })
        })
        .collect();
    Ok(BruteForceMeasures {
        qubit_state,
        marginals,
        entropies,
        higher_than,
        f_max,
        global,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub lambda_scaled: f64,
    pub eta_scaled: f64,
    pub quantity: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub n_qubits: usize,
    pub n_max: usize,
    pub tolerance: f64,
    pub comparisons: Vec<Comparison>,
}

impl OracleReport {
    pub fn failures(&self) -> impl Iterator<Item = &Comparison> {
        self.comparisons
            .iter()
            .filter(|c| c.deviation.is_nan() || c.deviation > self.tolerance)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn max_deviation(&self) -> f64 {
        self.comparisons
            .iter()
            .map(|c| c.deviation)
            .fold(0.0, f64::max)
    }
}

/// Ten `(λ/√N, η/N)` points covering both phases and the first W plateau,
/// away from the λ = 0 level crossings.
pub fn default_sample_points() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (0.0, 0.4),
        (0.0, 0.8),
        (0.25, 0.1),
        (0.5, 0.0),
        (0.5, 0.6),
        (0.75, 0.0),
        (0.75, 0.3),
        (1.0, 0.2),
        (1.0, 0.9),
    ]
}

/// Symmetric-sector reduction under test.
pub type Reducer<'a> = &'a dyn Fn(&DensityMatrix, usize) -> Result<DensityMatrix>;

pub fn oracle_check(n_qubits: usize, points: &[(f64, f64)], n_max: usize) -> Result<OracleReport> {
    oracle_check_with(n_qubits, points, n_max, &reduce::reduce_symmetric)
}

/// Compares the symmetric pipeline (with `reducer` supplying the marginals)
/// against brute force at each `(λ/√N, η/N)` point, `ω_c = ω_0 = 1`.
pub fn oracle_check_with(
    n_qubits: usize,
    points: &[(f64, f64)],
    n_max: usize,
    reducer: Reducer<'_>,
) -> Result<OracleReport> {
    check_oracle_size(n_qubits, n_max)?;
    let mut comparisons = Vec::new();
    for &(g, eta) in points {
        let p = ModelParams::from_scaled(1.0, 1.0, g, eta, n_qubits, n_max)?;
        let mut push = |quantity: String, deviation: f64| {
            comparisons.push(Comparison {
                lambda_scaled: g,
                eta_scaled: eta,
                quantity,
                deviation,
            })
        };

        let (e_full, full) = full_ground_state(&p)?;
        let brute = brute_force_measures(&full)?;
        let gs = spectra::ground_state(&p)?;
        let rho_n = gs.qubit_state()?;
        push("energy".into(), (gs.energy - e_full).abs());
        push(
            "rho_N".into(),
            linalg::max_abs_diff(embed_dicke(&rho_n)?.matrix(), brute.qubit_state.matrix()),
        );

        let mut entropies = Vec::with_capacity(n_qubits);
        let mut marginals = Vec::with_capacity(n_qubits);
        let mut reduction_ok = true;
        for k in 1..=n_qubits {
            match reducer(&rho_n, k) {
                Ok(rho_k) => {
                    let dev = linalg::max_abs_diff(
                        embed_dicke(&rho_k)?.matrix(),
                        brute.marginals[k - 1].matrix(),
                    );
                    push(format!("rho_{k}"), dev);
                    let s = reduce::von_neumann_entropy(&rho_k)?;
                    push(format!("S_{k}"), (s - brute.entropies[k - 1]).abs());
                    entropies.push(s);
                    marginals.push(rho_k);
                }
                Err(_) => {
                    push(format!("rho_{k}"), f64::INFINITY);
                    reduction_ok = false;
                }
            }
        }

        if reduction_ok {
            match GmcReport::from_entropies(entropies) {
                Ok(gmc) => {
                    for k in 1..n_qubits {
                        push(
                            format!("I_higher_{k}"),
                            (gmc.higher_than[k - 1] - brute.higher_than[k - 1]).abs(),
                        );
                    }
                    for k in 2..=n_qubits {
                        push(format!("I_{k}"), (gmc.order(k) - brute.order(k)).abs());
                    }
                    push("I1".into(), (gmc.total - brute.total()).abs());
                }
                Err(_) => push("I1".into(), f64::INFINITY),
            }
            let pure = reduce::purity(&rho_n) >= measures::PURITY_GATE;
            for l in 1..n_qubits {
                let sym = pure.then(|| {
                    measures::global_entanglement_from_purity(
                        reduce::purity(&marginals[l - 1]),
                        n_qubits,
                        l,
                    )
                });
                let dev = match (sym, brute.global[l - 1]) {
                    (Some(a), Some(b)) => (a - b).abs(),
                    (None, None) => 0.0,
                    _ => f64::INFINITY,
                };
                push(format!("E_G_{l}"), dev);
            }
        }

        let qfi = measures::qfi_matrix(&rho_n)?;
        push("f_max".into(), (qfi.f_max - brute.f_max).abs());
    }
    Ok(OracleReport {
        n_qubits,
        n_max,
        tolerance: ORACLE_TOL,
        comparisons,
    })
}
