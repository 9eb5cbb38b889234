//! Subsystem bookkeeping for whole-network states.
//!
//! The global Hilbert space is ordered vertex-major: for each vertex in
//! increasing order, the halves of its incident edges in edge-index order.
//! Edges with multiplicity expand into independent copies. States are
//! assembled from groups of subsystems, each carrying a row-major amplitude
//! tensor over its own subsystem order.

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::network::PenNetwork;

/// One edge copy of the expanded multigraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCopy {
    /// Index into the network edge list.
    pub edge: usize,
    pub copy: u32,
}

#[derive(Debug, Clone, Copy)]
struct Subsystem {
    dim: usize,
}

/// Vertex-major subsystem layout of a pure-edge network.
pub struct NetworkSpace {
    subs: Vec<Subsystem>,
    strides: Vec<usize>,
    /// per expanded edge: positions of its (u-half, v-half)
    halves: Vec<(usize, usize)>,
    expanded: Vec<EdgeCopy>,
    /// per vertex (1-based): subsystem positions
    vertex_positions: Vec<Vec<usize>>,
    pub total_dim: usize,
}

impl NetworkSpace {
    /// Lay out the network's edge halves. All edges must carry quantum states
    /// (no weight overrides).
    pub fn new(net: &PenNetwork) -> Result<Self> {
        let mut expanded = Vec::new();
        for (i, e) in net.edges().iter().enumerate() {
            if e.dims().is_none() {
                return Err(Error::UnsupportedEdgeState {
                    u: e.u,
                    v: e.v,
                    reason: "weight overrides carry no state to assemble".into(),
                });
            }
            for copy in 0..e.multiplicity {
                expanded.push(EdgeCopy { edge: i, copy });
            }
        }
        let mut subs = Vec::new();
        let mut halves = vec![(usize::MAX, usize::MAX); expanded.len()];
        let mut vertex_positions = vec![Vec::new(); net.n_vertices() + 1];
        for v in 1..=net.n_vertices() {
            for (x, ec) in expanded.iter().enumerate() {
                let e = &net.edges()[ec.edge];
                let (du, dv) = e.dims().expect("checked above");
                if e.u == v {
                    halves[x].0 = subs.len();
                    vertex_positions[v].push(subs.len());
                    subs.push(Subsystem { dim: du });
                } else if e.v == v {
                    halves[x].1 = subs.len();
                    vertex_positions[v].push(subs.len());
                    subs.push(Subsystem { dim: dv });
                }
            }
        }
        let mut total_dim = 1usize;
        for s in &subs {
            total_dim = total_dim.checked_mul(s.dim).ok_or_else(|| {
                Error::LimitExceeded("network Hilbert space dimension overflows".into())
            })?;
        }
        let mut strides = vec![1usize; subs.len()];
        for i in (0..subs.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * subs[i + 1].dim;
        }
        Ok(Self { subs, strides, halves, expanded, vertex_positions, total_dim })
    }

    pub fn expanded_edges(&self) -> &[EdgeCopy] {
        &self.expanded
    }

    /// Positions of the `(u, v)` halves of expanded edge `x`.
    pub fn edge_half_positions(&self, x: usize) -> (usize, usize) {
        self.halves[x]
    }

    pub fn subsystem_dim(&self, pos: usize) -> usize {
        self.subs[pos].dim
    }

    /// Subsystem positions owned by the given vertices, ascending.
    pub fn positions_of_vertices(&self, vertices: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut out: Vec<usize> = vertices
            .into_iter()
            .flat_map(|v| self.vertex_positions[v].iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Compose a global state vector from disjoint groups covering all
    /// subsystems. Each group holds its subsystem positions and a row-major
    /// amplitude tensor over exactly those positions, in the listed order.
    pub fn assemble(&self, groups: &[(Vec<usize>, Vec<Complex64>)]) -> Vec<Complex64> {
        let n_subs = self.subs.len();
        let mut covered = vec![false; n_subs];
        for (positions, amps) in groups {
            let size: usize = positions.iter().map(|&p| self.subs[p].dim).product();
            assert_eq!(size, amps.len(), "group tensor size mismatch");
            for &p in positions {
                assert!(!covered[p], "subsystem {p} assigned twice");
                covered[p] = true;
            }
        }
        assert!(covered.iter().all(|&c| c), "groups must cover every subsystem");

        // local strides per group
        let local_strides: Vec<Vec<usize>> = groups
            .iter()
            .map(|(positions, _)| {
                let mut ls = vec![1usize; positions.len()];
                for i in (0..positions.len().saturating_sub(1)).rev() {
                    ls[i] = ls[i + 1] * self.subs[positions[i + 1]].dim;
                }
                ls
            })
            .collect();

        let mut out = vec![Complex64::ZERO; self.total_dim];
        let mut digits = vec![0usize; n_subs];
        for (g, slot) in out.iter_mut().enumerate() {
            for (s, d) in digits.iter_mut().enumerate() {
                *d = (g / self.strides[s]) % self.subs[s].dim;
            }
            let mut amp = Complex64::ONE;
            for (gi, (positions, amps)) in groups.iter().enumerate() {
                let mut local = 0usize;
                for (k, &p) in positions.iter().enumerate() {
                    local += digits[p] * local_strides[gi][k];
                }
                amp *= amps[local];
                if amp == Complex64::ZERO {
                    break;
                }
            }
            *slot = amp;
        }
        out
    }

    /// The pure network state: the product of all edge states (each copy).
    pub fn pure_network_vector(&self, net: &PenNetwork) -> Result<Vec<Complex64>> {
        let mut groups = Vec::new();
        for (x, ec) in self.expanded.iter().enumerate() {
            let e = &net.edges()[ec.edge];
            let st = e.pure_state().ok_or_else(|| Error::UnsupportedEdgeState {
                u: e.u,
                v: e.v,
                reason: "network state assembly requires pure edges".into(),
            })?;
            let (hu, hv) = self.halves[x];
            groups.push((vec![hu, hv], st.amplitudes().to_vec()));
        }
        Ok(self.assemble(&groups))
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Haar-random unit vector (normalized complex Gaussian).
pub(crate) fn haar_vector(dim: usize, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}
