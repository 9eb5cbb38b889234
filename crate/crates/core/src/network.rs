//! The PEN graph: vertices, edges carrying bipartite states or explicit
//! weights, the secrecy-seeking set, file ingestion and edge weighting.
//!
//! Vertices are 1-based. Parallel edges are modeled by `multiplicity`, not by
//! duplicate entries. The file schema (JSON, UTF-8) is:
//!
//! ```json
//! {
//!   "n_vertices": 3,
//!   "seekers": [1, 2, 3],
//!   "edges": [
//!     { "u": 1, "v": 2, "state": "bell" },
//!     { "u": 2, "v": 3, "state": { "pure": [0.9, 0.1] }, "multiplicity": 2 },
//!     { "u": 1, "v": 3, "state": { "weight_override": 0.25 } }
//!   ]
//! }
//! ```
//!
//! `state` also admits `dense_pure` (`dims` plus complex `amplitudes`) and
//! `dense_mixed` (`dims` plus a row-major complex `matrix`). Unknown fields
//! are rejected.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, entanglement_entropy, entanglement_of_formation_2qubit, DensityMatrix,
    PureBipartiteState,
};

/// The quantum state (or explicit weight) carried by one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// One maximally entangled qubit pair.
    Bell,
    /// Pure state given by its squared Schmidt coefficients (a probability vector).
    Pure(Vec<f64>),
    /// Pure state given densely, row-major over `(a, b)`.
    DensePure { dims: (usize, usize), amplitudes: Vec<Complex64> },
    /// Mixed state given densely as a `(d_a d_b) x (d_a d_b)` matrix.
    DenseMixed { dims: (usize, usize), matrix: Vec<Complex64> },
    /// No state: the edge contributes a fixed nonnegative weight (e.g. a known
    /// bipartite distillable key for a state this library cannot evaluate).
    WeightOverride(f64),
}

/// One edge of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub state: StateSpec,
    #[serde(default = "default_multiplicity")]
    pub multiplicity: u32,
}

fn default_multiplicity() -> u32 {
    1
}

impl EdgeSpec {
    pub fn new(u: usize, v: usize, state: StateSpec) -> Self {
        Self { u, v, state, multiplicity: 1 }
    }

    pub fn with_multiplicity(mut self, m: u32) -> Self {
        self.multiplicity = m;
        self
    }

    /// Unordered endpoint pair with the smaller vertex first.
    pub fn endpoints(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    /// Local dimensions `(d_u, d_v)`; `None` for weight overrides.
    pub fn dims(&self) -> Option<(usize, usize)> {
        match &self.state {
            StateSpec::Bell => Some((2, 2)),
            StateSpec::Pure(p) => Some((p.len(), p.len())),
            StateSpec::DensePure { dims, .. } | StateSpec::DenseMixed { dims, .. } => Some(*dims),
            StateSpec::WeightOverride(_) => None,
        }
    }

    /// The edge state as a pure bipartite state, when it is one.
    pub fn pure_state(&self) -> Option<PureBipartiteState> {
        match &self.state {
            StateSpec::Bell => Some(PureBipartiteState::bell()),
            StateSpec::Pure(p) => PureBipartiteState::from_schmidt_probs(p).ok(),
            StateSpec::DensePure { dims, amplitudes } => {
                PureBipartiteState::new(dims.0, dims.1, amplitudes.clone()).ok()
            }
            _ => None,
        }
    }
}

/// A validated pair-entangled network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "NetworkFile", into = "NetworkFile")]
pub struct PenNetwork {
    n_vertices: usize,
    edges: Vec<EdgeSpec>,
    seekers: BTreeSet<usize>,
}

/// On-disk shape; identical fields, but deserialization funnels through
/// validation so only well-formed networks exist in memory.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n_vertices: usize,
    seekers: Vec<usize>,
    edges: Vec<EdgeSpec>,
}

impl TryFrom<NetworkFile> for PenNetwork {
    type Error = Error;
    fn try_from(f: NetworkFile) -> Result<Self> {
        PenNetwork::new(f.n_vertices, f.edges, f.seekers)
    }
}

impl From<PenNetwork> for NetworkFile {
    fn from(n: PenNetwork) -> Self {
        NetworkFile {
            n_vertices: n.n_vertices,
            seekers: n.seekers.into_iter().collect(),
            edges: n.edges,
        }
    }
}

impl PenNetwork {
    pub fn new(
        n_vertices: usize,
        edges: Vec<EdgeSpec>,
        seekers: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let seekers: BTreeSet<usize> = seekers.into_iter().collect();
        let net = Self { n_vertices, edges, seekers };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        if self.n_vertices < 1 {
            return Err(Error::InvalidNetwork("n_vertices must be positive".into()));
        }
        if self.seekers.len() < 2 {
            return Err(Error::InvalidNetwork(format!(
                "need at least 2 seekers, got {:?}",
                self.seekers
            )));
        }
        for &s in &self.seekers {
            if s < 1 || s > self.n_vertices {
                return Err(Error::InvalidNetwork(format!(
                    "seeker {s} outside vertex range 1..={}",
                    self.n_vertices
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for (idx, e) in self.edges.iter().enumerate() {
            let locus = format!("edge #{idx} ({},{})", e.u, e.v);
            if e.u == e.v {
                return Err(Error::InvalidNetwork(format!("{locus}: self-loop")));
            }
            if e.u < 1 || e.u > self.n_vertices || e.v < 1 || e.v > self.n_vertices {
                return Err(Error::InvalidNetwork(format!("{locus}: endpoint outside 1..={}", self.n_vertices)));
            }
            if e.multiplicity < 1 {
                return Err(Error::InvalidNetwork(format!("{locus}: multiplicity must be >= 1")));
            }
            if !seen.insert(e.endpoints()) {
                return Err(Error::InvalidNetwork(format!(
                    "{locus}: duplicate edge; use multiplicity for parallel copies"
                )));
            }
            match &e.state {
                StateSpec::Bell => {}
                StateSpec::Pure(p) => {
                    let sum: f64 = p.iter().sum();
                    if p.is_empty()
                        || p.iter().any(|&x| x < -linalg::HERMITICITY_TOL)
                        || (sum - 1.0).abs() > linalg::HERMITICITY_TOL
                    {
                        return Err(Error::InvalidNetwork(format!(
                            "{locus}: Schmidt coefficients must form a probability vector"
                        )));
                    }
                }
                StateSpec::DensePure { dims, amplitudes } => {
                    PureBipartiteState::new(dims.0, dims.1, amplitudes.clone())
                        .map_err(|err| Error::InvalidNetwork(format!("{locus}: {err}")))?;
                }
                StateSpec::DenseMixed { dims, matrix } => {
                    DensityMatrix::new(dims.0 * dims.1, matrix.clone())
                        .map_err(|err| Error::InvalidNetwork(format!("{locus}: {err}")))?;
                }
                StateSpec::WeightOverride(w) => {
                    if !w.is_finite() || *w < 0.0 {
                        return Err(Error::InvalidNetwork(format!(
                            "{locus}: weight override must be a finite nonnegative number"
                        )));
                    }
                }
            }
        }
        // connectivity
        if let Some(unreached) = self.first_unreachable() {
            return Err(Error::Disconnected(unreached));
        }
        Ok(())
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut adj = vec![Vec::new(); self.n_vertices + 1];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n_vertices + 1];
        let mut stack = vec![1usize];
        seen[1] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        (1..=self.n_vertices).find(|&v| !seen[v])
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn seekers(&self) -> &BTreeSet<usize> {
        &self.seekers
    }

    pub fn is_seeker(&self, v: usize) -> bool {
        self.seekers.contains(&v)
    }

    pub fn all_seekers(&self) -> bool {
        self.seekers.len() == self.n_vertices
    }

    /// Replace the seeker set (revalidates).
    pub fn with_seekers(&self, seekers: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(self.n_vertices, self.edges.clone(), seekers)
    }

    /// Edge index for an unordered endpoint pair.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.iter().position(|e| e.endpoints() == key)
    }

    /// True when the simple graph underlying the network is a tree.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n_vertices
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialization cannot fail")
    }
}

/// Parse and validate a network document.
pub fn load_network(document: &str) -> Result<PenNetwork> {
    serde_json::from_str::<PenNetwork>(document).map_err(|e| {
        // serde_json wraps our validation errors in its own; keep the message.
        Error::Parse(e.to_string())
    })
}

/// [`load_network`] from a file path.
pub fn load_network_file(path: &std::path::Path) -> Result<PenNetwork> {
    let text = std::fs::read_to_string(path)?;
    load_network(&text)
}

/// What a per-edge weight means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// Entanglement entropy `S_e` (pure edges).
    #[serde(rename = "entropy_S")]
    EntropyS,
    /// Entanglement of formation `E_F` (mixed two-qubit edges allowed).
    #[serde(rename = "eof_EF")]
    EofEf,
    #[serde(rename = "custom")]
    Custom,
}

/// Nonnegative weights, one per edge (multiplicity is applied by consumers).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeWeighting {
    pub kind: WeightKind,
    pub weights: Vec<f64>,
}

impl EdgeWeighting {
    pub fn custom(net: &PenNetwork, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != net.edges().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} edges",
                weights.len(),
                net.edges().len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::OutOfRange("weights must be finite and nonnegative".into()));
        }
        Ok(Self { kind: WeightKind::Custom, weights })
    }

    /// Effective weight of edge `idx` including its multiplicity.
    pub fn effective(&self, net: &PenNetwork, idx: usize) -> f64 {
        self.weights[idx] * f64::from(net.edges()[idx].multiplicity)
    }
}

/// Compute per-edge weights of the requested kind.
///
/// `entropy_S`: Bell -> 1, Schmidt vector -> its Shannon entropy, dense pure
/// -> entanglement entropy, override -> the given value; dense mixed edges are
/// rejected. `eof_EF`: additionally evaluates two-qubit mixed edges by the
/// concurrence closed form; larger mixed edges still need overrides.
pub fn derive_weights(net: &PenNetwork, kind: WeightKind) -> Result<EdgeWeighting> {
    if kind == WeightKind::Custom {
        return Err(Error::OutOfRange(
            "custom weightings are built with EdgeWeighting::custom".into(),
        ));
    }
    let mut weights = Vec::with_capacity(net.edges().len());
    for e in net.edges() {
        let w = match (&e.state, kind) {
            (StateSpec::Bell, _) => 1.0,
            (StateSpec::Pure(_), _) | (StateSpec::DensePure { .. }, _) => {
                entanglement_entropy(&e.pure_state().expect("validated pure edge"))?
            }
            (StateSpec::WeightOverride(w), _) => *w,
            (StateSpec::DenseMixed { dims, matrix }, WeightKind::EofEf)
                if *dims == (2, 2) =>
            {
                let rho = DensityMatrix::new(4, matrix.clone())?;
                entanglement_of_formation_2qubit(&rho)?
            }
            (StateSpec::DenseMixed { .. }, WeightKind::EofEf) => {
                return Err(Error::UnsupportedEdgeState {
                    u: e.u,
                    v: e.v,
                    reason: "mixed edges beyond two qubits need a weight_override".into(),
                })
            }
            (StateSpec::DenseMixed { .. }, _) => {
                return Err(Error::UnsupportedEdgeState {
                    u: e.u,
                    v: e.v,
                    reason: "entropy_S weights are only defined for pure edges; \
                             use eof_EF or a weight_override"
                        .into(),
                })
            }
        };
        weights.push(w);
    }
    Ok(EdgeWeighting { kind, weights })
}

/// Edge set of the minimal subtree spanning the seekers of a tree network.
///
/// Returns sorted edge indices. Every leaf of the returned subtree is a seeker.
pub fn steiner_subtree(net: &PenNetwork) -> Result<Vec<usize>> {
    if !net.is_tree() {
        return Err(Error::NotATree(format!(
            "{} edges on {} vertices",
            net.edges().len(),
            net.n_vertices()
        )));
    }
    let n = net.n_vertices();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (idx, e) in net.edges().iter().enumerate() {
        incident[e.u].push(idx);
        incident[e.v].push(idx);
    }
    let mut alive_edge = vec![true; net.edges().len()];
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut queue: Vec<usize> = (1..=n)
        .filter(|&v| degree[v] <= 1 && !net.is_seeker(v))
        .collect();
    while let Some(v) = queue.pop() {
        let Some(&edge) = incident[v].iter().find(|&&e| alive_edge[e]) else {
            continue;
        };
        alive_edge[edge] = false;
        let e = &net.edges()[edge];
        let other = if e.u == v { e.v } else { e.u };
        degree[v] = 0;
        degree[other] -= 1;
        if degree[other] == 1 && !net.is_seeker(other) {
            queue.push(other);
        }
    }
    Ok((0..net.edges().len()).filter(|&i| alive_edge[i]).collect())
}
