//! Numerical verification of the biseparable relative-entropy identity:
//! the closest biseparable state to a pure network state sits on the weakest
//! proper cut, realized by dephasing each cut edge in its Schmidt basis.
//!
//! Three operations: building the candidate minimizer (`build_sigma_star`),
//! checking `D(rho || sigma*) =` weakest-cut value against random biseparable
//! competitors (`verify_gme_identity`), and the directional-derivative
//! inequality at the minimizer (`directional_derivative_check`). A fourth
//! (`total_correlation_check`) verifies that Schmidt-basis measurements
//! extract exactly the cross-edge entropy as classical total correlation.
//!
//! `sigma*` is diagonal in a known product basis, so divergences from the
//! pure network state are evaluated in its support without large dense
//! eigenproblems; the dense `relative_entropy` route cross-checks small
//! networks.

use std::collections::{BTreeSet, HashMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{weakest_cut_bound, Witness};
use crate::error::{Error, Result};
use crate::linalg::{relative_entropy, DensityMatrix, SUPPORT_TOL};
use crate::network::{derive_weights, PenNetwork, StateSpec, WeightKind};
use crate::partition::Partition;
use crate::tensor::{haar_vector, inner, NetworkSpace};

/// Hilbert-space cap for assembling whole-network states.
pub const DIMENSION_CAP: usize = 4096;
/// Cap on the joint measurement outcome space of `total_correlation_check`.
pub const OUTCOME_CAP: usize = 1_000_000;

/// Schmidt data of one edge: squared coefficients and local basis columns.
struct EdgeSchmidt {
    probs: Vec<f64>,
    basis_u: Vec<Vec<Complex64>>,
    basis_v: Vec<Vec<Complex64>>,
}

fn edge_schmidt(net: &PenNetwork) -> Result<Vec<EdgeSchmidt>> {
    let mut out = Vec::with_capacity(net.edges().len());
    for e in net.edges() {
        let (probs, basis_u, basis_v) = match &e.state {
            StateSpec::Bell => computational_schmidt(&[0.5, 0.5]),
            StateSpec::Pure(p) => computational_schmidt(p),
            StateSpec::DensePure { .. } => {
                let s = crate::linalg::schmidt_decompose(&e.pure_state().expect("pure"))?;
                (s.coefficients, s.basis_a, s.basis_b)
            }
            _ => {
                return Err(Error::UnsupportedEdgeState {
                    u: e.u,
                    v: e.v,
                    reason: "verification requires pure edge states".into(),
                })
            }
        };
        // drop zero coefficients so support tuples stay minimal
        let keep: Vec<usize> =
            (0..probs.len()).filter(|&n| probs[n] > SUPPORT_TOL).collect();
        out.push(EdgeSchmidt {
            probs: keep.iter().map(|&n| probs[n]).collect(),
            basis_u: keep.iter().map(|&n| basis_u[n].clone()).collect(),
            basis_v: keep.iter().map(|&n| basis_v[n].clone()).collect(),
        });
    }
    Ok(out)
}

fn computational_schmidt(probs: &[f64]) -> (Vec<f64>, Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let d = probs.len();
    let basis: Vec<Vec<Complex64>> = (0..d)
        .map(|n| {
            let mut v = vec![Complex64::ZERO; d];
            v[n] = Complex64::ONE;
            v
        })
        .collect();
    (probs.to_vec(), basis.clone(), basis)
}

/// The candidate minimizer: cut edges dephased in their Schmidt bases,
/// remaining edges kept pure.
pub struct SigmaStar {
    /// Cut edges as sorted endpoint pairs.
    pub cut: Vec<(usize, usize)>,
    /// Per original edge: the classical dephasing spectrum for cut edges,
    /// `None` for edges kept as projectors.
    pub edge_dephasings: Vec<Option<Vec<f64>>>,
    pub dim: usize,
    cut_indices: Vec<usize>,
    /// Orthonormal eigenvectors with nonzero eigenvalues.
    support: Vec<(f64, Vec<Complex64>)>,
}

impl SigmaStar {
    pub fn support_rank(&self) -> usize {
        self.support.len()
    }

    pub(crate) fn support(&self) -> &[(f64, Vec<Complex64>)] {
        &self.support
    }

    pub fn cut_indices(&self) -> &[usize] {
        &self.cut_indices
    }

    /// Dense matrix form (block-diagonal in the cut edges' Schmidt bases).
    pub fn assembled(&self) -> DensityMatrix {
        let d = self.dim;
        let mut entries = vec![Complex64::ZERO; d * d];
        for (w, v) in &self.support {
            for i in 0..d {
                if v[i] == Complex64::ZERO {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += w * v[i] * v[j].conj();
                }
            }
        }
        DensityMatrix::from_parts_unchecked(d, entries)
    }
}

/// True when `cut` is exactly the crossing set of some seeker-separating
/// vertex bipartition.
fn cut_is_proper(net: &PenNetwork, cut: &[usize]) -> bool {
    let n = net.n_vertices();
    let in_cut = |i: usize| cut.contains(&i);
    // components of the graph minus the cut
    let mut comp = vec![usize::MAX; n + 1];
    let mut n_comp = 0;
    for start in 1..=n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = n_comp;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for (i, e) in net.edges().iter().enumerate() {
                if in_cut(i) {
                    continue;
                }
                let other = if e.u == u { e.v } else if e.v == u { e.u } else { continue };
                if comp[other] == usize::MAX {
                    comp[other] = n_comp;
                    queue.push_back(other);
                }
            }
        }
        n_comp += 1;
    }
    // every cut edge must join two different components
    if cut.iter().any(|&i| {
        let e = &net.edges()[i];
        comp[e.u] == comp[e.v]
    }) {
        return false;
    }
    // 2-color the component graph whose links are the cut edges
    let mut color = vec![usize::MAX; n_comp];
    let mut piece = vec![usize::MAX; n_comp];
    let mut n_pieces = 0;
    for start in 0..n_comp {
        if color[start] != usize::MAX {
            continue;
        }
        color[start] = 0;
        piece[start] = n_pieces;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for &i in cut {
                let e = &net.edges()[i];
                let (a, b) = (comp[e.u], comp[e.v]);
                let other = if a == c { b } else if b == c { a } else { continue };
                if color[other] == usize::MAX {
                    color[other] = 1 - color[c];
                    piece[other] = n_pieces;
                    queue.push_back(other);
                } else if color[other] == color[c] {
                    return false; // odd cycle: not a bipartition cut
                }
            }
        }
        n_pieces += 1;
    }
    // seekers per (piece, color); some flip assignment must split them
    let mut piece_colors: Vec<[bool; 2]> = vec![[false; 2]; n_pieces];
    for &s in net.seekers() {
        let c = comp[s];
        piece_colors[piece[c]][color[c]] = true;
    }
    if piece_colors.iter().any(|pc| pc[0] && pc[1]) {
        return true;
    }
    piece_colors.iter().filter(|pc| pc[0] || pc[1]).count() >= 2
}

/// Build the dephased-cut state for a proper cut (edges given as endpoint
/// pairs, as reported by the weakest-cut witness).
pub fn build_sigma_star(net: &PenNetwork, cut: &[(usize, usize)]) -> Result<SigmaStar> {
    let mut cut_indices = Vec::with_capacity(cut.len());
    for &(u, v) in cut {
        cut_indices.push(net.edge_index(u, v).ok_or_else(|| {
            Error::InvalidNetwork(format!("cut edge ({u},{v}) not in the network"))
        })?);
    }
    cut_indices.sort_unstable();
    cut_indices.dedup();
    if !cut_is_proper(net, &cut_indices) {
        return Err(Error::Precondition(
            "cut is not the crossing set of a seeker-separating bipartition".into(),
        ));
    }
    let space = NetworkSpace::new(net)?;
    if space.total_dim > DIMENSION_CAP {
        return Err(Error::LimitExceeded(format!(
            "network dimension {} exceeds the cap {DIMENSION_CAP}",
            space.total_dim
        )));
    }
    let schmidt = edge_schmidt(net)?;

    // enumerate support tuples over the cut copies
    let cut_copies: Vec<usize> = (0..space.expanded_edges().len())
        .filter(|&x| cut_indices.contains(&space.expanded_edges()[x].edge))
        .collect();
    let ranks: Vec<usize> =
        cut_copies.iter().map(|&x| schmidt[space.expanded_edges()[x].edge].probs.len()).collect();
    let mut support = Vec::new();
    let mut tuple = vec![0usize; cut_copies.len()];
    loop {
        let mut weight = 1.0f64;
        let mut groups: Vec<(Vec<usize>, Vec<Complex64>)> = Vec::new();
        for (k, &x) in cut_copies.iter().enumerate() {
            let sd = &schmidt[space.expanded_edges()[x].edge];
            let (hu, hv) = space.edge_half_positions(x);
            weight *= sd.probs[tuple[k]];
            groups.push((vec![hu], sd.basis_u[tuple[k]].clone()));
            groups.push((vec![hv], sd.basis_v[tuple[k]].clone()));
        }
        for (x, ec) in space.expanded_edges().iter().enumerate() {
            if cut_indices.contains(&ec.edge) {
                continue;
            }
            let e = &net.edges()[ec.edge];
            let st = e.pure_state().expect("pure edges checked in edge_schmidt");
            let (hu, hv) = space.edge_half_positions(x);
            groups.push((vec![hu, hv], st.amplitudes().to_vec()));
        }
        support.push((weight, space.assemble(&groups)));

        // next tuple
        let mut k = 0;
        loop {
            if k == tuple.len() {
                break;
            }
            tuple[k] += 1;
            if tuple[k] < ranks[k] {
                break;
            }
            tuple[k] = 0;
            k += 1;
        }
        if k == tuple.len() {
            break;
        }
    }

    let edge_dephasings = (0..net.edges().len())
        .map(|i| cut_indices.contains(&i).then(|| schmidt[i].probs.clone()))
        .collect();
    Ok(SigmaStar {
        cut: cut_indices.iter().map(|&i| net.edges()[i].endpoints()).collect(),
        edge_dephasings,
        dim: space.total_dim,
        cut_indices,
        support,
    })
}

/// `D(|psi><psi| || sigma)` for `sigma = (1-x) |phi><phi| + x sigma*`,
/// evaluated in the span of the sigma* support and `phi`.
///
/// `c_psi[k] = <u_k|psi>` must carry (numerically) all of `psi`'s mass.
fn d_pure_vs_mixture(
    c_psi: &[Complex64],
    weights: &[f64],
    g_phi: &[Complex64],
    phi_residual_norm: f64,
    x: f64,
) -> f64 {
    let k = weights.len();
    let extra = usize::from(phi_residual_norm > 1e-9 && x < 1.0);
    let n = k + extra;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..k {
        m[(i, i)] = Complex64::new(x * weights[i], 0.0);
    }
    if x < 1.0 {
        let mut w: Vec<Complex64> = g_phi.to_vec();
        if extra == 1 {
            w.push(Complex64::new(phi_residual_norm, 0.0));
        }
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += Complex64::new(1.0 - x, 0.0) * w[i] * w[j].conj();
            }
        }
    }
    let eig = m.symmetric_eigen();
    let mut d = 0.0f64;
    let mut escaped = 0.0f64;
    for j in 0..n {
        let mu = eig.eigenvalues[j];
        let overlap: Complex64 = (0..k)
            .map(|i| eig.eigenvectors[(i, j)].conj() * c_psi[i])
            .sum();
        let p = overlap.norm_sqr();
        if mu > 1e-12 {
            d -= p * mu.log2();
        } else {
            escaped += p;
        }
    }
    if escaped > 1e-9 {
        return f64::INFINITY;
    }
    d.max(0.0)
}

#[derive(Debug, Clone, Copy)]
pub struct GmeVerifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Densely cross-check `relative_entropy(rho, sigma*)` up to this dimension.
    pub dense_dim_cap: usize,
}

impl Default for GmeVerifyConfig {
    fn default() -> Self {
        Self { samples: 1000, seed: 0x5EED, dense_dim_cap: 300 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmeIdentityReport {
    /// Weakest-cut bound value `W*`.
    pub cut_value: f64,
    pub cut: Vec<(usize, usize)>,
    /// `D(rho || sigma*)` in the sigma* eigenbasis.
    pub d_sigma_star: f64,
    /// Same divergence through the dense eigendecomposition route, when the
    /// dimension allows it.
    pub d_sigma_star_dense: Option<f64>,
    pub identity_ok: bool,
    pub samples: usize,
    /// Smallest finite divergence among the sampled biseparable competitors.
    pub min_sampled: f64,
    /// Sampled states beating `W*` by more than 1e-8 (expected empty).
    pub counterexamples: Vec<String>,
    pub pass: bool,
}

/// Check `min_sigma biseparable D(rho||sigma) = W*` numerically: the
/// dephased-cut state attains the weakest-cut value, and no sampled
/// biseparable state (Haar product across a random proper bipartition, also
/// mixed with sigma* at weights 0, 1/2, 1) goes below it.
pub fn verify_gme_identity(net: &PenNetwork, cfg: &GmeVerifyConfig) -> Result<GmeIdentityReport> {
    let w = derive_weights(net, WeightKind::EntropyS)?;
    let cut_report = weakest_cut_bound(net, &w)?;
    let Witness::Cut { edges: cut_pairs } = &cut_report.witness else {
        unreachable!("weakest_cut_bound always returns a cut witness")
    };
    let sigma = build_sigma_star(net, cut_pairs)?;
    let space = NetworkSpace::new(net)?;
    let psi = space.pure_network_vector(net)?;

    let c_psi: Vec<Complex64> =
        sigma.support().iter().map(|(_, u)| inner(u, &psi)).collect();
    let psi_mass: f64 = c_psi.iter().map(|c| c.norm_sqr()).sum();
    if (psi_mass - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "network state leaks out of the sigma* support (mass {psi_mass})"
        )));
    }
    let weights: Vec<f64> = sigma.support().iter().map(|(w, _)| *w).collect();
    let d_sigma_star: f64 = c_psi
        .iter()
        .zip(&weights)
        .map(|(c, w)| -c.norm_sqr() * w.log2())
        .sum();

    let d_dense = if sigma.dim <= cfg.dense_dim_cap {
        let rho = pure_projector(&psi);
        Some(relative_entropy(&rho, &sigma.assembled())?)
    } else {
        None
    };

    let wstar = cut_report.value;
    let identity_ok = (d_sigma_star - wstar).abs() <= 1e-8
        && d_dense.is_none_or(|d| (d - wstar).abs() <= 1e-8);

    // falsification search over biseparable competitors
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut min_sampled = f64::INFINITY;
    let mut counterexamples = Vec::new();
    for sample in 0..cfg.samples {
        let side = random_proper_side(net, &mut rng);
        let phi = haar_biseparable(&space, net, &side, &mut rng);
        let g: Vec<Complex64> = sigma.support().iter().map(|(_, u)| inner(u, &phi)).collect();
        let residual = (1.0 - g.iter().map(|x| x.norm_sqr()).sum::<f64>()).max(0.0).sqrt();
        for x in [0.0, 0.5, 1.0] {
            let d = d_pure_vs_mixture(&c_psi, &weights, &g, residual, x);
            if d.is_finite() {
                min_sampled = min_sampled.min(d);
            }
            if d < wstar - 1e-8 {
                counterexamples.push(format!(
                    "sample {sample} (mix weight {x}): D = {d} < W* = {wstar}"
                ));
            }
        }
    }

    let pass = identity_ok && counterexamples.is_empty();
    Ok(GmeIdentityReport {
        cut_value: wstar,
        cut: sigma.cut.clone(),
        d_sigma_star,
        d_sigma_star_dense: d_dense,
        identity_ok,
        samples: cfg.samples,
        min_sampled,
        counterexamples,
        pass,
    })
}

fn pure_projector(psi: &[Complex64]) -> DensityMatrix {
    let d = psi.len();
    let mut entries = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            entries[i * d + j] = psi[i] * psi[j].conj();
        }
    }
    DensityMatrix::from_parts_unchecked(d, entries)
}

/// A uniformly random vertex side with seekers on both sides.
fn random_proper_side(net: &PenNetwork, rng: &mut ChaCha12Rng) -> BTreeSet<usize> {
    let n = net.n_vertices();
    loop {
        let mask: u64 = rng.random_range(1..(1u64 << n) - 1);
        let side: BTreeSet<usize> = (1..=n).filter(|&v| (mask >> (v - 1)) & 1 == 1).collect();
        let s_seek = net.seekers().iter().any(|s| side.contains(s));
        let t_seek = net.seekers().iter().any(|s| !side.contains(s));
        if s_seek && t_seek {
            return side;
        }
    }
}

/// Haar-random product vector across the bipartition (arbitrary within each side).
fn haar_biseparable(
    space: &NetworkSpace,
    net: &PenNetwork,
    side: &BTreeSet<usize>,
    rng: &mut ChaCha12Rng,
) -> Vec<Complex64> {
    let pos_s = space.positions_of_vertices(side.iter().copied());
    let pos_t: Vec<usize> = space
        .positions_of_vertices((1..=net.n_vertices()).filter(|v| !side.contains(v)));
    let dim_s: usize = pos_s.iter().map(|&p| space.subsystem_dim(p)).product();
    let dim_t: usize = pos_t.iter().map(|&p| space.subsystem_dim(p)).product();
    let vs = haar_vector(dim_s, rng);
    let vt = haar_vector(dim_t, rng);
    space.assemble(&[(pos_s, vs), (pos_t, vt)])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub trials: usize,
    pub cut_value: f64,
    /// Largest `|1 - f'(0)|` over the sampled directions (must stay <= 1).
    pub max_abs_one_minus_fprime: f64,
    /// Largest disagreement between the closed-form product and quadrature.
    pub max_closed_quadrature_gap: f64,
    /// `|f'(0)|` along the sigma* direction itself (stationarity).
    pub stationarity_residual: f64,
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Directional derivative of `D(rho || (1-x) sigma* + x sigma)` at `x = 0`
/// for random pure biseparable directions `sigma`, on networks whose edges
/// are all maximally entangled.
///
/// Each direction factorizes edge-wise: product vectors on the edges of a
/// random proper bipartition cut, arbitrary bipartite vectors elsewhere.
/// `1 - f'(0)` is evaluated both by the closed-form per-edge product and by
/// adaptive-Simpson quadrature of the resolvent integral in the sigma*
/// eigenbasis; the two must agree and the magnitude must not exceed 1.
pub fn directional_derivative_check(
    net: &PenNetwork,
    trials: usize,
    seed: u64,
) -> Result<DerivativeReport> {
    let schmidt = edge_schmidt(net)?;
    for (e, sd) in net.edges().iter().zip(&schmidt) {
        let d = sd.probs.len();
        if sd.probs.iter().any(|&p| (p - 1.0 / d as f64).abs() > 1e-9) {
            return Err(Error::Precondition(format!(
                "edge ({},{}) is not maximally entangled; the closed-form derivative needs uniform Schmidt spectra",
                e.u, e.v
            )));
        }
    }
    let w = derive_weights(net, WeightKind::EntropyS)?;
    let cut_report = weakest_cut_bound(net, &w)?;
    let Witness::Cut { edges: cut_pairs } = &cut_report.witness else {
        unreachable!("weakest_cut_bound always returns a cut witness")
    };
    let sigma = build_sigma_star(net, cut_pairs)?;
    let space = NetworkSpace::new(net)?;
    let psi = space.pure_network_vector(net)?;
    let c_psi: Vec<Complex64> =
        sigma.support().iter().map(|(_, u)| inner(u, &psi)).collect();
    let lambdas: Vec<f64> = sigma.support().iter().map(|(w, _)| *w).collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut max_abs = 0.0f64;
    let mut max_gap = 0.0f64;
    let mut violations = Vec::new();

    for trial in 0..trials {
        let side = random_proper_side(net, &mut rng);
        // per-copy direction factors of the biseparable vector
        let mut groups: Vec<(Vec<usize>, Vec<Complex64>)> = Vec::new();
        let mut closed = 1.0f64;
        for (x, ec) in space.expanded_edges().iter().enumerate() {
            let e = &net.edges()[ec.edge];
            let sd = &schmidt[ec.edge];
            let d_e = sd.probs.len();
            let (hu, hv) = space.edge_half_positions(x);
            let (du, dv) = e.dims().expect("pure edges have dims");
            let crossing = side.contains(&e.u) != side.contains(&e.v);
            let in_cstar = sigma.cut_indices().contains(&ec.edge);
            if crossing {
                let alpha = haar_vector(du, &mut rng);
                let beta = haar_vector(dv, &mut rng);
                // sum_n <n_u|alpha><n_v|beta>
                let s: Complex64 = (0..d_e)
                    .map(|n| inner(&sd.basis_u[n], &alpha) * inner(&sd.basis_v[n], &beta))
                    .sum();
                closed *= if in_cstar { s.norm_sqr() } else { s.norm_sqr() / d_e as f64 };
                groups.push((vec![hu], alpha));
                groups.push((vec![hv], beta));
            } else {
                let phi_e = haar_vector(du * dv, &mut rng);
                if in_cstar {
                    // sum_n <n_u n_v | phi_e>
                    let s: Complex64 = (0..d_e)
                        .map(|n| {
                            let mut acc = Complex64::ZERO;
                            for a in 0..du {
                                for b in 0..dv {
                                    acc += (sd.basis_u[n][a] * sd.basis_v[n][b]).conj()
                                        * phi_e[a * dv + b];
                                }
                            }
                            acc
                        })
                        .sum();
                    closed *= s.norm_sqr();
                } else {
                    let st = e.pure_state().expect("pure edge");
                    closed *= inner(st.amplitudes(), &phi_e).norm_sqr();
                }
                groups.push((vec![hu, hv], phi_e));
            }
        }
        let phi = space.assemble(&groups);
        let d_phi: Vec<Complex64> =
            sigma.support().iter().map(|(_, u)| inner(u, &phi)).collect();
        // integrand(t) = |sum_k c_k conj(d_k) / (lambda_k + t)|^2 for the pure direction
        let coeffs: Vec<Complex64> =
            c_psi.iter().zip(&d_phi).map(|(c, d)| c * d.conj()).collect();
        let quad = resolvent_integral(&[(1.0, coeffs)], &lambdas);
        let gap = (quad - closed).abs();
        max_gap = max_gap.max(gap);
        max_abs = max_abs.max(quad.abs());
        if gap > 1e-6 {
            violations
                .push(format!("trial {trial}: closed {closed} vs quadrature {quad}"));
        }
        if quad.abs() > 1.0 + 1e-9 {
            violations.push(format!("trial {trial}: |1 - f'(0)| = {} > 1", quad.abs()));
        }
    }

    // stationarity along sigma* itself: 1 - f'(0) must equal 1
    let star_members: Vec<(f64, Vec<Complex64>)> = (0..lambdas.len())
        .map(|j| {
            let coeffs: Vec<Complex64> = (0..lambdas.len())
                .map(|k| if k == j { c_psi[k] } else { Complex64::ZERO })
                .collect();
            (lambdas[j], coeffs)
        })
        .collect();
    let stationarity_residual = (1.0 - resolvent_integral(&star_members, &lambdas)).abs();
    if stationarity_residual > 1e-8 {
        violations.push(format!(
            "sigma* direction is not stationary: |f'(0)| = {stationarity_residual}"
        ));
    }

    Ok(DerivativeReport {
        trials,
        cut_value: cut_report.value,
        max_abs_one_minus_fprime: max_abs,
        max_closed_quadrature_gap: max_gap,
        stationarity_residual,
        pass: violations.is_empty(),
        violations,
    })
}

/// `int_0^inf sum_j mu_j |sum_k coeffs_jk / (lambda_k + t)|^2 dt` by adaptive
/// Simpson after `t = u / (1 - u)`, with the `u -> 1` limit taken in closed
/// form. `coeffs_jk = <phi_j|u_k><u_k|psi> * mu-weighting` is prepacked per
/// ensemble member as `(mu_j, [c_k conj(d_jk)])`.
fn resolvent_integral(members: &[(f64, Vec<Complex64>)], lambdas: &[f64]) -> f64 {
    let eval_t = |t: f64| -> f64 {
        members
            .iter()
            .map(|(mu, coeffs)| {
                let s: Complex64 = coeffs
                    .iter()
                    .zip(lambdas)
                    .map(|(c, l)| c / Complex64::new(l + t, 0.0))
                    .sum();
                mu * s.norm_sqr()
            })
            .sum()
    };
    let integrand = |u: f64| -> f64 {
        if u >= 1.0 {
            // lim t^2 * eval(t) as t -> inf
            return members
                .iter()
                .map(|(mu, coeffs)| {
                    let s: Complex64 = coeffs.iter().sum();
                    mu * s.norm_sqr()
                })
                .sum();
        }
        let t = u / (1.0 - u);
        eval_t(t) / ((1.0 - u) * (1.0 - u))
    };
    adaptive_simpson(&integrand, 0.0, 1.0, 1e-8, 40)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, b, fa, fb, fm, whole, tol, depth)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TotalCorrelationReport {
    /// `sum_blocks H(X_block) - H(joint)` of the Schmidt-measurement outcomes.
    pub total_correlation: f64,
    /// `sum of S_e over cross edges` of the partition.
    pub expected_cross_entropy: f64,
    pub block_entropies: Vec<f64>,
    pub joint_entropy: f64,
    pub pass: bool,
}

/// Measure every edge subsystem in its Schmidt basis and compare the total
/// correlation of the outcome blocks with the cross-edge entropy sum.
pub fn total_correlation_check(
    net: &PenNetwork,
    partition: &Partition,
) -> Result<TotalCorrelationReport> {
    let n = net.n_vertices();
    let mut seen = vec![false; n + 1];
    for b in &partition.blocks {
        for &v in b {
            if v < 1 || v > n || seen[v] {
                return Err(Error::OutOfRange(format!(
                    "partition does not partition 1..={n} (vertex {v})"
                )));
            }
            seen[v] = true;
        }
    }
    if !seen[1..].iter().all(|&s| s) {
        return Err(Error::OutOfRange(format!("partition does not cover 1..={n}")));
    }

    let space = NetworkSpace::new(net)?;
    let schmidt = edge_schmidt(net)?;
    // measurement outcome space: pairs (n_u, n_v) per expanded edge
    let mut outcome_space = 1usize;
    for ec in space.expanded_edges() {
        let (du, dv) = net.edges()[ec.edge].dims().expect("pure edge");
        outcome_space = outcome_space
            .checked_mul(du * dv)
            .filter(|&s| s <= OUTCOME_CAP)
            .ok_or_else(|| {
                Error::LimitExceeded(format!("joint outcome space exceeds {OUTCOME_CAP}"))
            })?;
    }

    // per expanded edge, the exact outcome distribution from the state
    let mut dists: Vec<Vec<Vec<f64>>> = Vec::new(); // [edge][n_u][n_v]
    for ec in space.expanded_edges() {
        let e = &net.edges()[ec.edge];
        let sd = &schmidt[ec.edge];
        let st = e.pure_state().expect("pure edge");
        let (du, dv) = e.dims().expect("pure edge");
        let d_e = sd.probs.len();
        let mut dist = vec![vec![0.0f64; d_e]; d_e];
        #[allow(clippy::needless_range_loop)]
        for nu in 0..d_e {
            for nv in 0..d_e {
                let mut amp = Complex64::ZERO;
                for a in 0..du {
                    for b in 0..dv {
                        amp += (sd.basis_u[nu][a] * sd.basis_v[nv][b]).conj()
                            * st.amplitudes()[a * dv + b];
                    }
                }
                dist[nu][nv] = amp.norm_sqr();
            }
        }
        dists.push(dist);
    }

    let owner = partition.block_of(n);
    let p = partition.blocks.len();
    // enumerate joint outcomes, accumulating block marginals
    let mut block_marginals: Vec<HashMap<Vec<u16>, f64>> = vec![HashMap::new(); p];
    let mut joint_entropy = 0.0f64;
    let m = space.expanded_edges().len();
    let mut outcome = vec![(0usize, 0usize); m];

    fn walk(
        level: usize,
        prob: f64,
        outcome: &mut Vec<(usize, usize)>,
        dists: &[Vec<Vec<f64>>],
        on_leaf: &mut dyn FnMut(&[(usize, usize)], f64),
    ) {
        if prob < 1e-15 {
            return;
        }
        if level == dists.len() {
            on_leaf(outcome, prob);
            return;
        }
        for nu in 0..dists[level].len() {
            for nv in 0..dists[level][nu].len() {
                outcome[level] = (nu, nv);
                walk(level + 1, prob * dists[level][nu][nv], outcome, dists, on_leaf);
            }
        }
    }

    {
        let expanded = space.expanded_edges().to_vec();
        let edges = net.edges();
        let mut on_leaf = |outcome: &[(usize, usize)], prob: f64| {
            joint_entropy -= prob * prob.log2();
            for (alpha, marg) in block_marginals.iter_mut().enumerate() {
                // the block sees the outcomes of halves at its vertices
                let mut key: Vec<u16> = Vec::new();
                for (x, &(nu, nv)) in outcome.iter().enumerate() {
                    let e = &edges[expanded[x].edge];
                    if owner[e.u] == alpha {
                        key.push(nu as u16);
                    }
                    if owner[e.v] == alpha {
                        key.push(nv as u16);
                    }
                }
                *marg.entry(key).or_insert(0.0) += prob;
            }
        };
        walk(0, 1.0, &mut outcome, &dists, &mut on_leaf);
    }

    let block_entropies: Vec<f64> = block_marginals
        .iter()
        .map(|m| m.values().map(|&q| if q > 0.0 { -q * q.log2() } else { 0.0 }).sum())
        .collect();
    let total_correlation = block_entropies.iter().sum::<f64>() - joint_entropy;

    let w = derive_weights(net, WeightKind::EntropyS)?;
    let expected: f64 = net
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| owner[e.u] != owner[e.v])
        .map(|(i, _)| w.effective(net, i))
        .sum();

    Ok(TotalCorrelationReport {
        total_correlation,
        expected_cross_entropy: expected,
        block_entropies,
        joint_entropy,
        pass: (total_correlation - expected).abs() <= 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::EdgeSpec;
    use approx::assert_abs_diff_eq;

    fn triangle() -> PenNetwork {
        PenNetwork::new(
            3,
            vec![
                EdgeSpec::new(1, 2, StateSpec::Bell),
                EdgeSpec::new(1, 3, StateSpec::Bell),
                EdgeSpec::new(2, 3, StateSpec::Bell),
            ],
            [1, 2, 3],
        )
        .unwrap()
    }

    #[test]
    fn sigma_star_single_bell_edge() {
        let net =
            PenNetwork::new(2, vec![EdgeSpec::new(1, 2, StateSpec::Bell)], [1, 2]).unwrap();
        let sigma = build_sigma_star(&net, &[(1, 2)]).unwrap();
        assert_eq!(sigma.support_rank(), 2);
        let dense = sigma.assembled();
        // dephased Bell: diag(1/2, 0, 0, 1/2)
        assert_abs_diff_eq!(dense.entry(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dense.entry(3, 3).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dense.entry(0, 3).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dense.entry(1, 1).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sigma_star_triangle_divergence_is_two() {
        let net = triangle();
        let sigma = build_sigma_star(&net, &[(1, 2), (1, 3)]).unwrap();
        assert_eq!(sigma.dim, 64);
        let space = NetworkSpace::new(&net).unwrap();
        let psi = space.pure_network_vector(&net).unwrap();
        let rho = pure_projector(&psi);
        let d = relative_entropy(&rho, &sigma.assembled()).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn sigma_star_rejects_improper_cut() {
        // triangle with seekers {2,3}: cutting out vertex 1 leaves a block
        // with no seeker
        let net = triangle().with_seekers([2, 3]).unwrap();
        assert!(matches!(
            build_sigma_star(&net, &[(1, 2), (1, 3)]),
            Err(Error::Precondition(_))
        ));
        // the (2,3)-separating cut is fine
        assert!(build_sigma_star(&net, &[(1, 2), (2, 3)]).is_ok());
    }

    #[test]
    fn divergence_equals_cut_entropy_for_every_proper_cut() {
        // D(rho||sigma*) = sum of S_e over the cut, minimizing or not
        let net = triangle();
        let space = NetworkSpace::new(&net).unwrap();
        let psi = space.pure_network_vector(&net).unwrap();
        let rho = pure_projector(&psi);
        for cut in [
            vec![(1, 2), (1, 3)],
            vec![(1, 2), (2, 3)],
            vec![(1, 3), (2, 3)],
        ] {
            let sigma = build_sigma_star(&net, &cut).unwrap();
            let d = relative_entropy(&rho, &sigma.assembled()).unwrap();
            assert_abs_diff_eq!(d, 2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn identity_on_single_bell() {
        let net =
            PenNetwork::new(2, vec![EdgeSpec::new(1, 2, StateSpec::Bell)], [1, 2]).unwrap();
        let rep =
            verify_gme_identity(&net, &GmeVerifyConfig { samples: 200, ..Default::default() })
                .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_abs_diff_eq!(rep.cut_value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.d_sigma_star, 1.0, epsilon = 1e-9);
        assert!(rep.d_sigma_star_dense.is_some());
    }

    #[test]
    fn identity_on_triangle() {
        let rep = verify_gme_identity(
            &triangle(),
            &GmeVerifyConfig { samples: 300, ..Default::default() },
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_abs_diff_eq!(rep.cut_value, 2.0, epsilon = 1e-12);
        // sampled states never undercut W*, and only sigma* attains it
        assert!(rep.min_sampled >= rep.cut_value - 1e-8);
    }

    #[test]
    fn identity_on_weighted_path() {
        let net = PenNetwork::new(
            3,
            vec![
                EdgeSpec::new(1, 2, StateSpec::Bell),
                EdgeSpec::new(2, 3, StateSpec::Pure(vec![0.9, 0.1])),
            ],
            [1, 2, 3],
        )
        .unwrap();
        let rep =
            verify_gme_identity(&net, &GmeVerifyConfig { samples: 200, ..Default::default() })
                .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_abs_diff_eq!(rep.cut_value, crate::linalg::h(0.1), epsilon = 1e-9);
    }

    #[test]
    fn sampled_minimum_attained_only_at_sigma_star_on_triangle() {
        let rep = verify_gme_identity(
            &triangle(),
            &GmeVerifyConfig { samples: 500, ..Default::default() },
        )
        .unwrap();
        // min over finite sampled divergences: exactly W* (the x = 1 mixtures)
        assert_abs_diff_eq!(rep.min_sampled, rep.cut_value, epsilon = 1e-9);
        // strictly away from W* for the non-sigma* mixtures
        let rep2 = {
            let mut cfg = GmeVerifyConfig { samples: 500, ..Default::default() };
            cfg.seed = 0xBEEF;
            verify_gme_identity(&triangle(), &cfg).unwrap()
        };
        assert!(rep2.pass);
    }

    #[test]
    fn derivative_check_on_triangle() {
        let rep = directional_derivative_check(&triangle(), 300, 0x5EED).unwrap();
        assert!(rep.pass, "{:?}", rep.violations);
        assert!(rep.max_abs_one_minus_fprime <= 1.0 + 1e-9);
        assert!(rep.max_closed_quadrature_gap <= 1e-6);
        assert!(rep.stationarity_residual <= 1e-8);
    }

    #[test]
    fn derivative_check_rejects_nonuniform_edges() {
        let net = PenNetwork::new(
            2,
            vec![EdgeSpec::new(1, 2, StateSpec::Pure(vec![0.9, 0.1]))],
            [1, 2],
        )
        .unwrap();
        assert!(matches!(
            directional_derivative_check(&net, 10, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn total_correlation_triangle_singletons() {
        let part = Partition::new(vec![vec![1], vec![2], vec![3]]);
        let rep = total_correlation_check(&triangle(), &part).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_abs_diff_eq!(rep.total_correlation, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn total_correlation_single_edge_bipartition() {
        let net =
            PenNetwork::new(2, vec![EdgeSpec::new(1, 2, StateSpec::Bell)], [1, 2]).unwrap();
        let part = Partition::new(vec![vec![1], vec![2]]);
        let rep = total_correlation_check(&net, &part).unwrap();
        assert_abs_diff_eq!(rep.total_correlation, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn total_correlation_no_cross_edges() {
        let part = Partition::new(vec![vec![1, 2, 3]]);
        let rep = total_correlation_check(&triangle(), &part).unwrap();
        assert_abs_diff_eq!(rep.total_correlation, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rep.expected_cross_entropy, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn total_correlation_every_proper_partition_small_networks() {
        let nets = [
            triangle(),
            PenNetwork::new(
                4,
                vec![
                    EdgeSpec::new(1, 2, StateSpec::Bell),
                    EdgeSpec::new(2, 3, StateSpec::Pure(vec![0.75, 0.25])),
                    EdgeSpec::new(3, 4, StateSpec::Bell),
                ],
                [1, 2, 3, 4],
            )
            .unwrap(),
        ];
        for net in &nets {
            for part in crate::partition::enumerate_proper_partitions(
                net.n_vertices(),
                net.seekers(),
            )
            .unwrap()
            {
                let rep = total_correlation_check(net, &part).unwrap();
                assert!(rep.pass, "partition {part:?}: {rep:?}");
            }
        }
    }
}
