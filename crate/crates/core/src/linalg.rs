//! Bipartite state representations, Schmidt decomposition, entropies and the
//! two-qubit entanglement of formation.
//!
//! All entropies are in bits (log base 2). Eigenvalues in `[-1e-9, 0)` are
//! clamped to zero before any logarithm is taken; eigenvalues below `1e-10`
//! count as zero for support and rank tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entrywise tolerance for Hermiticity and trace checks.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted as numerical noise.
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalues below this are treated as exactly zero (support / Schmidt rank).
pub const SUPPORT_TOL: f64 = 1e-10;

/// A pure state on a `dim_a x dim_b` bipartite system, row-major over `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureBipartiteState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

impl PureBipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dim_a < 1 || dim_b < 1 {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions must be >= 1, got {dim_a}x{dim_b}"
            )));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes for a {dim_a}x{dim_b} system, got {}",
                dim_a * dim_b,
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > HERMITICITY_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { dim_a, dim_b, amplitudes })
    }

    /// The maximally entangled two-qubit state `(|00> + |11>)/sqrt(2)`.
    pub fn bell() -> Self {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            dim_a: 2,
            dim_b: 2,
            amplitudes: vec![s, Complex64::ZERO, Complex64::ZERO, s],
        }
    }

    /// `sum_n sqrt(p_n) |nn>` for a probability vector `p` (computational Schmidt basis).
    pub fn from_schmidt_probs(probs: &[f64]) -> Result<Self> {
        let d = probs.len();
        if d == 0 {
            return Err(Error::DimensionMismatch("empty Schmidt vector".into()));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -HERMITICITY_TOL) || (sum - 1.0).abs() > HERMITICITY_TOL {
            return Err(Error::OutOfRange(format!(
                "Schmidt coefficients must form a probability vector (sum {sum})"
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; d * d];
        for (n, &p) in probs.iter().enumerate() {
            amplitudes[n * d + n] = Complex64::new(p.max(0.0).sqrt(), 0.0);
        }
        Ok(Self { dim_a: d, dim_b: d, amplitudes })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Rank-one density matrix `|psi><psi|`.
    pub fn projector(&self) -> DensityMatrix {
        let d = self.dim_a * self.dim_b;
        let mut entries = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { dim: d, entries }
    }

    fn amplitude_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim_a, self.dim_b, |a, b| self.amplitudes[a * self.dim_b + b])
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite (within tolerances).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim < 1 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let mut max_asym = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_asym = max_asym.max(d);
            }
        }
        if max_asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian(max_asym));
        }
        let trace: Complex64 = (0..dim).map(|i| entries[i * dim + i]).sum();
        if (trace.re - 1.0).abs() > HERMITICITY_TOL || trace.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let rho = Self { dim, entries };
        let min_eig = rho
            .eigenvalues_ascending()?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(rho)
    }

    /// Constructor for matrices already known to satisfy the invariants
    /// (internal assembly paths that would be too large to re-validate).
    pub(crate) fn from_parts_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        Self { dim, entries }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub(crate) fn to_na(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entries[i * self.dim + j])
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues_ascending(&self) -> Result<Vec<f64>> {
        let eig = self.to_na().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        Ok(vals)
    }

    /// Eigenpairs `(eigenvalue, eigenvector)` sorted by descending eigenvalue.
    pub(crate) fn eigensystem(&self) -> Vec<(f64, Vec<Complex64>)> {
        let eig = self.to_na().symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..self.dim)
            .map(|k| {
                let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
                (eig.eigenvalues[k], v)
            })
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("eigenvalues are finite"));
        pairs
    }

    /// Tensor product `self (x) other`.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut entries = vec![Complex64::ZERO; d * d];
        for i1 in 0..da {
            for j1 in 0..da {
                let a = self.entries[i1 * da + j1];
                if a == Complex64::ZERO {
                    continue;
                }
                for i2 in 0..db {
                    for j2 in 0..db {
                        entries[(i1 * db + i2) * d + (j1 * db + j2)] =
                            a * other.entries[i2 * db + j2];
                    }
                }
            }
        }
        DensityMatrix { dim: d, entries }
    }
}

/// Schmidt data of a pure bipartite state: squared coefficients `p_n` sorted
/// nonincreasing, and the matching orthonormal local basis columns.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub basis_a: Vec<Vec<Complex64>>,
    pub basis_b: Vec<Vec<Complex64>>,
}

impl SchmidtDecomposition {
    /// Number of coefficients above the support tolerance.
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&p| p > SUPPORT_TOL).count()
    }

    /// Rebuilds `sum_n sqrt(p_n) |a_n>|b_n>`.
    pub fn reconstruct(&self) -> Result<PureBipartiteState> {
        let dim_a = self.basis_a.first().map_or(0, Vec::len);
        let dim_b = self.basis_b.first().map_or(0, Vec::len);
        let mut amplitudes = vec![Complex64::ZERO; dim_a * dim_b];
        for (n, &p) in self.coefficients.iter().enumerate() {
            let s = p.max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            for a in 0..dim_a {
                for b in 0..dim_b {
                    amplitudes[a * dim_b + b] += s * self.basis_a[n][a] * self.basis_b[n][b];
                }
            }
        }
        PureBipartiteState::new(dim_a, dim_b, amplitudes)
    }
}

/// Schmidt decomposition via SVD of the amplitude matrix.
pub fn schmidt_decompose(state: &PureBipartiteState) -> Result<SchmidtDecomposition> {
    let m = state.amplitude_matrix();
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD did not produce U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD did not produce V^H".into()))?;
    let r = svd.singular_values.len();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .expect("singular values are finite")
    });

    let mut coefficients = Vec::with_capacity(r);
    let mut basis_a = Vec::with_capacity(r);
    let mut basis_b = Vec::with_capacity(r);
    for &k in &order {
        let s = svd.singular_values[k];
        coefficients.push(s * s);
        basis_a.push(u.column(k).iter().copied().collect());
        // rows of V^H are the conjugated B-side basis vectors
        basis_b.push(v_t.row(k).iter().copied().collect());
    }
    Ok(SchmidtDecomposition { coefficients, basis_a, basis_b })
}

/// Shannon entropy in bits of a (sub)probability vector, with `0 log 0 = 0`.
fn shannon_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .map(|&p| if p > SUPPORT_TOL { -p * p.log2() } else { 0.0 })
        .sum()
}

/// Entanglement entropy `S_e` of a pure bipartite state, in bits.
pub fn entanglement_entropy(state: &PureBipartiteState) -> Result<f64> {
    let schmidt = schmidt_decompose(state)?;
    Ok(shannon_bits(&schmidt.coefficients))
}

/// Von Neumann entropy in bits. Rejects inputs with eigenvalues below `-1e-9`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let vals = rho.eigenvalues_ascending()?;
    if let Some(&min) = vals.first() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
    }
    Ok(shannon_bits(&vals.iter().map(|&v| v.max(0.0)).collect::<Vec<_>>()))
}

/// Partial trace over the subsystems not listed in `keep`.
///
/// `dims` are the subsystem dimensions in row-major tensor order; the result
/// is ordered by the original subsystem order restricted to `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {:?} multiply to {total}, matrix dim is {}",
            dims,
            rho.dim()
        )));
    }
    if keep.is_empty() {
        return Err(Error::DimensionMismatch("empty keep set".into()));
    }
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || *keep_sorted.last().unwrap() >= dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "keep set {keep:?} is not a subset of subsystem indices 0..{}",
            dims.len()
        )));
    }

    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let dim_keep: usize = keep_sorted.iter().map(|&i| dims[i]).product();
    let dim_traced: usize = traced.iter().map(|&i| dims[i]).product();

    // strides of each subsystem in the full row-major index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let flat = |digits_keep: usize, digits_tr: usize| -> usize {
        let mut idx = 0;
        let mut rem_k = digits_keep;
        for (pos, &s) in keep_sorted.iter().enumerate().rev() {
            let d = dims[s];
            let _ = pos;
            idx += (rem_k % d) * strides[s];
            rem_k /= d;
        }
        let mut rem_t = digits_tr;
        for &s in traced.iter().rev() {
            let d = dims[s];
            idx += (rem_t % d) * strides[s];
            rem_t /= d;
        }
        idx
    };

    let mut entries = vec![Complex64::ZERO; dim_keep * dim_keep];
    for i in 0..dim_keep {
        for j in 0..dim_keep {
            let mut acc = Complex64::ZERO;
            for t in 0..dim_traced {
                acc += rho.entry(flat(i, t), flat(j, t));
            }
            entries[i * dim_keep + j] = acc;
        }
    }
    Ok(DensityMatrix { dim: dim_keep, entries })
}

/// Binary entropy `h(x)` in bits; endpoints map to 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-HERMITICITY_TOL..=1.0 + HERMITICITY_TOL).contains(&x) {
        return Err(Error::OutOfRange(format!("binary entropy argument {x} outside [0,1]")));
    }
    Ok(h(x.clamp(0.0, 1.0)))
}

/// Unchecked binary entropy for arguments already known to lie in [0,1].
pub(crate) fn h(x: f64) -> f64 {
    shannon_bits(&[x, 1.0 - x])
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence_2qubit(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence is defined for 4x4 (two-qubit) matrices, got dim {}",
            rho.dim()
        )));
    }
    // rho_tilde = (sigma_y (x) sigma_y) conj(rho) (sigma_y (x) sigma_y),
    // expressed entrywise: Y (x) Y maps basis index i to 3-i with sign (-1)^{popcount as below}.
    let sign = |i: usize| -> f64 {
        match i {
            0 | 3 => -1.0,
            _ => 1.0,
        }
    };
    let mut tilde = vec![Complex64::ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            tilde[i * 4 + j] = sign(i) * sign(j) * rho.entry(3 - i, 3 - j).conj();
        }
    }

    // Hermitian route: lambda_i = sqrt(eig(sqrt(rho) rho_tilde sqrt(rho))).
    let eig = rho.eigensystem();
    let mut sqrt_rho = DMatrix::<Complex64>::zeros(4, 4);
    for (val, vec) in &eig {
        // clamping before the square root keeps eigenvalue noise of order
        // machine epsilon from turning into sqrt-scale perturbations
        let s = if *val > 1e-12 { val.sqrt() } else { 0.0 };
        for i in 0..4 {
            for j in 0..4 {
                sqrt_rho[(i, j)] += Complex64::new(s, 0.0) * vec[i] * vec[j].conj();
            }
        }
    }
    let tilde_na = DMatrix::from_fn(4, 4, |i, j| tilde[i * 4 + j]);
    let m = &sqrt_rho * tilde_na * &sqrt_rho;
    let m_herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = m_herm
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&v| if v > 1e-12 { v.sqrt() } else { 0.0 })
        .collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Entanglement of formation of a two-qubit state via the concurrence closed form.
pub fn entanglement_of_formation_2qubit(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence_2qubit(rho)?;
    let x = (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0;
    Ok(h(x))
}

/// Quantum relative entropy `D(rho || sigma)` in bits.
///
/// Returns `f64::INFINITY` when the support of `rho` is not contained in the
/// support of `sigma` (support decided at eigenvalue tolerance `1e-10`).
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy needs equal dims, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let rho_eig = rho.eigensystem();
    let sigma_eig = sigma.eigensystem();
    let dim = rho.dim();

    let mut d = 0.0f64;
    let mut escaped_mass = 0.0f64;
    for (lam, rv) in rho_eig.iter().filter(|(l, _)| *l > SUPPORT_TOL) {
        d += lam * lam.log2();
        let mut inside = 0.0f64;
        for (mu, sv) in &sigma_eig {
            let overlap: Complex64 = (0..dim).map(|k| sv[k].conj() * rv[k]).sum();
            let w = overlap.norm_sqr();
            if *mu > SUPPORT_TOL {
                inside += w;
                d -= lam * w * mu.log2();
            }
        }
        escaped_mass += lam * (1.0 - inside).max(0.0);
    }
    if escaped_mass > 1e-8 {
        return Ok(f64::INFINITY);
    }
    Ok(d.max(0.0))
}

/// Shared helpers for the crate's test modules: seeded random states and an
/// independent Jacobi eigensolver used as an oracle.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use rand_chacha::ChaCha12Rng;

    pub(crate) fn random_complex(rng: &mut ChaCha12Rng) -> Complex64 {
        use rand_distr::{Distribution, StandardNormal};
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    }

    pub(crate) fn random_pure(dim_a: usize, dim_b: usize, rng: &mut ChaCha12Rng) -> PureBipartiteState {
        let mut amps: Vec<Complex64> = (0..dim_a * dim_b).map(|_| random_complex(rng)).collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        PureBipartiteState::new(dim_a, dim_b, amps).unwrap()
    }

    pub(crate) fn random_density(dim: usize, rng: &mut ChaCha12Rng) -> DensityMatrix {
        // Wishart-style: G G^dagger / tr
        let g: Vec<Complex64> = (0..dim * dim).map(|_| random_complex(rng)).collect();
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::ZERO;
                for k in 0..dim {
                    acc += g[i * dim + k] * g[j * dim + k].conj();
                }
                entries[i * dim + j] = acc;
            }
        }
        let tr: f64 = (0..dim).map(|i| entries[i * dim + i].re).sum();
        for e in &mut entries {
            *e /= tr;
        }
        DensityMatrix::new(dim, entries).unwrap()
    }

    /// Independent oracle: cyclic Jacobi eigenvalues of a Hermitian matrix.
    /// Deliberately avoids the nalgebra code paths used by the implementation.
    pub(crate) fn jacobi_eigenvalues(dim: usize, m: &[Complex64]) -> Vec<f64> {
        let mut a: Vec<Complex64> = m.to_vec();
        let at = |a: &[Complex64], i: usize, j: usize| a[i * dim + j];
        for _sweep in 0..60 {
            let mut off = 0.0;
            for i in 0..dim {
                for j in (i + 1)..dim {
                    off += at(&a, i, j).norm_sqr();
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..dim {
                for q in (p + 1)..dim {
                    let apq = at(&a, p, q);
                    if apq.norm() < 1e-18 {
                        continue;
                    }
                    let app = at(&a, p, p).re;
                    let aqq = at(&a, q, q).re;
                    // phase so the rotated off-diagonal element is real
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // columns (right multiplication by rotation)
                    for k in 0..dim {
                        let akp = at(&a, k, p);
                        let akq = at(&a, k, q);
                        a[k * dim + p] = akp * c - akq * phase.conj() * s;
                        a[k * dim + q] = akq * c + akp * phase * s;
                    }
                    // rows (left multiplication by the adjoint rotation)
                    for k in 0..dim {
                        let apk = at(&a, p, k);
                        let aqk = at(&a, q, k);
                        a[p * dim + k] = apk * c - aqk * phase * s;
                        a[q * dim + k] = aqk * c + apk * phase.conj() * s;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..dim).map(|i| at(&a, i, i).re).collect();
        vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
        vals
    }
}
