//! Spanning-tree packing of the key-rate multigraph and simulation of
//! conference-key propagation by XOR announcements.
//!
//! Fractional packing: enumerate all spanning trees (contraction/deletion)
//! and maximize the total tree weight under per-edge capacities with an LP.
//! By Nash-Williams-Tutte duality the optimum equals the partition bound when
//! every vertex is a seeker. Integer packing finds the maximum number of
//! edge-disjoint spanning trees in the rounds-expanded multigraph.
//!
//! The simulator turns each packed tree into one conference bit: the root
//! draws a uniform bit and every tree edge carries one XOR announcement
//! encrypted with a fresh edge-key bit (one-time-pad discipline).

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::network::{EdgeWeighting, PenNetwork, StateSpec};
use crate::partition::{enumerate_proper_partitions_with_limit, DEFAULT_PARTITION_LIMIT};
use crate::simplex;

/// Abort spanning-tree enumeration beyond this many trees.
pub const DEFAULT_TREE_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingMode {
    Fractional,
    Integer { rounds: u32 },
}

/// A weighted collection of spanning trees respecting per-edge capacities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreePacking {
    /// Each tree as a sorted list of edge indices into the network edge list.
    pub trees: Vec<Vec<usize>>,
    /// Weight per tree (all 1 for integer packings).
    pub weights: Vec<f64>,
    /// Available capacity per edge.
    pub capacity: Vec<f64>,
    /// Capacity consumed per edge by the packing.
    pub consumed: Vec<f64>,
    /// Total packed weight.
    pub value: f64,
    pub mode: PackingMode,
}

impl TreePacking {
    pub fn rounds(&self) -> Option<u32> {
        match self.mode {
            PackingMode::Integer { rounds } => Some(rounds),
            PackingMode::Fractional => None,
        }
    }
}

/// All spanning trees of the connected graph on vertices `1..=n`, by
/// contraction/deletion, in deterministic order. Trees are sorted edge-index
/// lists. Errors once more than `cap` trees exist.
pub fn enumerate_spanning_trees(
    n: usize,
    edges: &[(usize, usize)],
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    fn connected(n_labels: usize, edges: &[(usize, usize, usize)]) -> bool {
        if n_labels <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); n_labels];
        for &(u, v, _) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n_labels];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n_labels
    }

    fn recurse(
        n_labels: usize,
        edges: &[(usize, usize, usize)],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if n_labels == 1 {
            if out.len() >= cap {
                return Err(Error::LimitExceeded(format!(
                    "more than {cap} spanning trees"
                )));
            }
            let mut t = chosen.clone();
            t.sort_unstable();
            out.push(t);
            return Ok(());
        }
        let Some((&(u, v, idx), rest)) = edges.split_first() else {
            return Ok(());
        };
        if u == v {
            return recurse(n_labels, rest, chosen, out, cap);
        }
        // include: contract v into u, relabeling the last label down to keep 0..n-1
        let (keep, drop) = (u.min(v), u.max(v));
        let contracted: Vec<(usize, usize, usize)> = rest
            .iter()
            .map(|&(a, b, i)| {
                let relabel = |x: usize| {
                    if x == drop {
                        keep
                    } else if x == n_labels - 1 {
                        drop.min(n_labels - 1)
                    } else {
                        x
                    }
                };
                // move the last label into the vacated slot unless drop was last
                let map = |x: usize| if drop == n_labels - 1 { if x == drop { keep } else { x } } else { relabel(x) };
                (map(a), map(b), i)
            })
            .collect();
        chosen.push(idx);
        recurse(n_labels - 1, &contracted, chosen, out, cap)?;
        chosen.pop();
        // exclude: only if the rest still connects everything
        if connected(n_labels, rest) {
            recurse(n_labels, rest, chosen, out, cap)?;
        }
        Ok(())
    }

    let labeled: Vec<(usize, usize, usize)> =
        edges.iter().enumerate().map(|(i, &(u, v))| (u - 1, v - 1, i)).collect();
    if !connected(n, &labeled) {
        return Err(Error::Disconnected(0));
    }
    let mut out = Vec::new();
    recurse(n, &labeled, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}

fn require_all_seekers(net: &PenNetwork) -> Result<()> {
    if !net.all_seekers() {
        return Err(Error::Precondition(
            "spanning-tree packing requires every vertex to be a seeker".into(),
        ));
    }
    Ok(())
}

/// Maximum fractional spanning-tree packing under capacities `w_e * mult_e`.
pub fn pack_trees_fractional(net: &PenNetwork, w: &EdgeWeighting) -> Result<TreePacking> {
    require_all_seekers(net)?;
    if w.weights.len() != net.edges().len() {
        return Err(Error::DimensionMismatch("weighting does not match edge list".into()));
    }
    let pairs: Vec<(usize, usize)> = net.edges().iter().map(|e| e.endpoints()).collect();
    let trees = enumerate_spanning_trees(net.n_vertices(), &pairs, DEFAULT_TREE_CAP)?;
    let m = net.edges().len();
    let capacity: Vec<f64> = (0..m).map(|i| w.effective(net, i)).collect();

    let mut rows = vec![vec![0.0f64; trees.len()]; m];
    for (t, tree) in trees.iter().enumerate() {
        for &e in tree {
            rows[e][t] = 1.0;
        }
    }
    let sol = simplex::maximize(&vec![1.0; trees.len()], &rows, &capacity)
        .map_err(Error::Numerical)?;

    let mut kept_trees = Vec::new();
    let mut weights = Vec::new();
    let mut consumed = vec![0.0f64; m];
    for (t, tree) in trees.into_iter().enumerate() {
        if sol.x[t] > 1e-12 {
            for &e in &tree {
                consumed[e] += sol.x[t];
            }
            kept_trees.push(tree);
            weights.push(sol.x[t]);
        }
    }
    Ok(TreePacking {
        trees: kept_trees,
        weights,
        capacity,
        consumed,
        value: sol.objective,
        mode: PackingMode::Fractional,
    })
}

/// Nash-Williams-Tutte value of an integer-capacitated multigraph: the
/// maximum number of edge-disjoint spanning trees.
fn nwt_tree_count(net: &PenNetwork, caps: &[u64]) -> Result<u64> {
    let n = net.n_vertices();
    let all: BTreeSet<usize> = (1..=n).collect();
    let mut best = u64::MAX;
    for part in enumerate_proper_partitions_with_limit(n, &all, DEFAULT_PARTITION_LIMIT)? {
        if part.size() < 2 {
            continue;
        }
        let owner = part.block_of(n);
        let cross: u64 = net
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| owner[e.u] != owner[e.v])
            .map(|(i, _)| caps[i])
            .sum();
        best = best.min(cross / (part.size() as u64 - 1));
    }
    Ok(best)
}

/// Maximum set of edge-disjoint spanning trees in the multigraph whose edge
/// `e` appears `rounds * mult_e` times. All edges must be Bell pairs (one key
/// bit per copy per round).
pub fn pack_trees_integer(net: &PenNetwork, rounds: u32) -> Result<TreePacking> {
    require_all_seekers(net)?;
    if rounds < 1 {
        return Err(Error::Precondition("need at least one round".into()));
    }
    if let Some(e) = net.edges().iter().find(|e| e.state != StateSpec::Bell) {
        return Err(Error::Precondition(format!(
            "integer packing assumes one key bit per edge copy per round; edge ({},{}) is not a Bell pair",
            e.u, e.v
        )));
    }
    let m = net.edges().len();
    let mut caps: Vec<u64> =
        net.edges().iter().map(|e| u64::from(rounds) * u64::from(e.multiplicity)).collect();
    let target = nwt_tree_count(net, &caps)?;

    let mut trees = Vec::new();
    for remaining in (0..target).rev() {
        let pairs: Vec<(usize, usize)> = net.edges().iter().map(|e| e.endpoints()).collect();
        let alive: Vec<usize> = (0..m).filter(|&i| caps[i] > 0).collect();
        let alive_pairs: Vec<(usize, usize)> = alive.iter().map(|&i| pairs[i]).collect();
        let candidates =
            enumerate_spanning_trees(net.n_vertices(), &alive_pairs, DEFAULT_TREE_CAP)?;
        let mut found = false;
        for cand in candidates {
            let tree: Vec<usize> = cand.iter().map(|&k| alive[k]).collect();
            for &e in &tree {
                caps[e] -= 1;
            }
            if nwt_tree_count(net, &caps)? >= remaining {
                trees.push(tree);
                found = true;
                break;
            }
            for &e in &tree {
                caps[e] += 1;
            }
        }
        if !found {
            return Err(Error::Numerical(
                "integer packing construction failed below the NWT value".into(),
            ));
        }
    }

    let capacity: Vec<f64> =
        net.edges().iter().map(|e| f64::from(rounds) * f64::from(e.multiplicity)).collect();
    let mut consumed = vec![0.0f64; m];
    for tree in &trees {
        for &e in tree {
            consumed[e] += 1.0;
        }
    }
    let value = trees.len() as f64;
    Ok(TreePacking {
        weights: vec![1.0; trees.len()],
        trees,
        capacity,
        consumed,
        value,
        mode: PackingMode::Integer { rounds },
    })
}

/// The relay protocol on a tree network with helpers: the Steiner subtree is
/// packed once per available edge copy, giving `rounds * min mult` trees that
/// span the subtree vertices (all seekers included).
pub fn steiner_relay_packing(net: &PenNetwork, rounds: u32) -> Result<TreePacking> {
    if rounds < 1 {
        return Err(Error::Precondition("need at least one round".into()));
    }
    if let Some(e) = net.edges().iter().find(|e| e.state != StateSpec::Bell) {
        return Err(Error::Precondition(format!(
            "relay simulation assumes Bell edges; edge ({},{}) is not one",
            e.u, e.v
        )));
    }
    let subtree = crate::network::steiner_subtree(net)?;
    let min_mult = subtree
        .iter()
        .map(|&i| net.edges()[i].multiplicity)
        .min()
        .ok_or_else(|| Error::InvalidNetwork("empty Steiner subtree".into()))?;
    let copies = rounds * min_mult;
    let m = net.edges().len();
    let capacity: Vec<f64> =
        net.edges().iter().map(|e| f64::from(rounds) * f64::from(e.multiplicity)).collect();
    let mut consumed = vec![0.0f64; m];
    for &e in &subtree {
        consumed[e] = f64::from(copies);
    }
    Ok(TreePacking {
        trees: vec![subtree; copies as usize],
        weights: vec![1.0; copies as usize],
        capacity,
        consumed,
        value: f64::from(copies),
        mode: PackingMode::Integer { rounds },
    })
}

/// A pad bit: copy `slot` of edge `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadRef {
    pub edge: usize,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub tree: usize,
    pub announcer: usize,
    pub learner: usize,
    pub pad: PadRef,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptTree {
    pub root: usize,
    /// `(u, v, pad)` for every tree edge, in BFS announcement order.
    pub edges: Vec<(usize, usize, PadRef)>,
}

/// Per-round record of edge keys, tree packing, announcements and resulting
/// conference key bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyTranscript {
    pub seed: u64,
    pub rounds: u32,
    pub trees: Vec<TranscriptTree>,
    /// One bit per edge copy, indexed `[edge][slot]` with
    /// `slot = round * multiplicity + copy`.
    pub edge_keys: Vec<Vec<u8>>,
    pub announcements: Vec<Announcement>,
    /// Conference key bits recovered by each seeker (one bit per tree).
    pub conference_keys: BTreeMap<usize, Vec<u8>>,
}

fn bits_to_hex(bits: &[u8]) -> String {
    let mut out = String::new();
    for chunk in bits.chunks(4) {
        let mut nibble = 0u8;
        for (k, &b) in chunk.iter().enumerate() {
            nibble |= (b & 1) << (3 - k);
        }
        out.push(char::from_digit(u32::from(nibble), 16).expect("nibble"));
    }
    out
}

impl KeyTranscript {
    /// Structured export: rounds, trees (edge lists), announcements and keys
    /// as hex strings.
    pub fn export(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "rounds": self.rounds,
            "trees": self.trees.iter().map(|t| json!({
                "root": t.root,
                "edges": t.edges.iter().map(|(u, v, _)| json!([u, v])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "announcements": self.announcements.iter().map(|a| json!({
                "announcer": a.announcer,
                "bit": a.bit,
            })).collect::<Vec<_>>(),
            "keys": self.conference_keys.iter().map(|(v, bits)| {
                (v.to_string(), json!({
                    "bits": bits.len(),
                    "hex": bits_to_hex(bits),
                }))
            }).collect::<serde_json::Map<_, _>>(),
        })
    }

    /// Identical conference key at every seeker, when one exists.
    pub fn agreed_key(&self) -> Option<&[u8]> {
        let mut iter = self.conference_keys.values();
        let first = iter.next()?;
        iter.all(|k| k == first).then(|| first.as_slice())
    }
}

/// Run the XOR-propagation protocol on an integer packing.
///
/// Every edge must be a Bell pair (one perfect key bit per copy per round)
/// and every packed tree must contain all seekers.
pub fn simulate_conference_key(
    net: &PenNetwork,
    packing: &TreePacking,
    seed: u64,
) -> Result<KeyTranscript> {
    let PackingMode::Integer { rounds } = packing.mode else {
        return Err(Error::Precondition(
            "simulation needs an integer packing (weights are whole edge copies)".into(),
        ));
    };
    if let Some(e) = net.edges().iter().find(|e| e.state != StateSpec::Bell) {
        return Err(Error::Precondition(format!(
            "simulation models Bell edges only; edge ({},{}) is not one",
            e.u, e.v
        )));
    }
    let m = net.edges().len();

    // capacity audit before consuming anything
    let mut uses = vec![0u64; m];
    for tree in &packing.trees {
        for &e in tree {
            uses[e] += 1;
        }
    }
    for (i, e) in net.edges().iter().enumerate() {
        if uses[i] > u64::from(rounds) * u64::from(e.multiplicity) {
            return Err(Error::CapacityViolation(e.u, e.v));
        }
    }

    // edge keys, one stream per round so rounds are independently seedable
    let mut edge_keys: Vec<Vec<u8>> = vec![Vec::new(); m];
    for round in 0..rounds {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(round) + 1);
        for (i, e) in net.edges().iter().enumerate() {
            for _ in 0..e.multiplicity {
                edge_keys[i].push(u8::from(rng.random::<bool>()));
            }
        }
    }
    // reorder per edge so slot = round * mult + copy
    // (generation above already appends per round in edge order; regroup)
    let mut keys_by_slot: Vec<Vec<u8>> = vec![Vec::new(); m];
    for (i, e) in net.edges().iter().enumerate() {
        let mult = e.multiplicity as usize;
        for round in 0..rounds as usize {
            for copy in 0..mult {
                keys_by_slot[i].push(edge_keys[i][round * mult + copy]);
            }
        }
    }
    let edge_keys = keys_by_slot;

    let mut root_rng = ChaCha12Rng::seed_from_u64(seed);
    root_rng.set_stream(0);

    let seekers: Vec<usize> = net.seekers().iter().copied().collect();
    let mut next_slot = vec![0usize; m];
    let mut trees_out = Vec::new();
    let mut announcements = Vec::new();
    let mut conference: BTreeMap<usize, Vec<u8>> =
        seekers.iter().map(|&s| (s, Vec::new())).collect();

    for (t, tree) in packing.trees.iter().enumerate() {
        // vertices spanned by this tree
        let mut verts: BTreeSet<usize> = BTreeSet::new();
        let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for &e in tree {
            let (u, v) = net.edges()[e].endpoints();
            verts.insert(u);
            verts.insert(v);
            adj.entry(u).or_default().push((v, e));
            adj.entry(v).or_default().push((u, e));
        }
        if tree.len() + 1 != verts.len() {
            return Err(Error::Precondition(format!("packed tree {t} is not a tree")));
        }
        if !seekers.iter().all(|s| verts.contains(s)) {
            return Err(Error::Precondition(format!(
                "packed tree {t} does not reach every seeker"
            )));
        }

        let root = *verts.iter().next().expect("nonempty tree");
        let key_bit = u8::from(root_rng.random::<bool>());

        // BFS announcement order from the root
        let mut tree_edges = Vec::new();
        let mut learned: BTreeMap<usize, u8> = BTreeMap::from([(root, key_bit)]);
        let mut queue = VecDeque::from([root]);
        let mut visited: BTreeSet<usize> = BTreeSet::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in adj.get(&u).into_iter().flatten() {
                if visited.contains(&v) {
                    continue;
                }
                visited.insert(v);
                let slot = next_slot[e];
                next_slot[e] += 1;
                if slot >= edge_keys[e].len() {
                    let (eu, ev) = net.edges()[e].endpoints();
                    return Err(Error::CapacityViolation(eu, ev));
                }
                let pad = PadRef { edge: e, slot };
                let announced = learned[&u] ^ edge_keys[e][slot];
                announcements.push(Announcement {
                    tree: t,
                    announcer: u,
                    learner: v,
                    pad,
                    bit: announced,
                });
                // the learner decodes with its own copy of the pad bit
                learned.insert(v, announced ^ edge_keys[e][slot]);
                tree_edges.push((u, v, pad));
                queue.push_back(v);
            }
        }
        for &s in &seekers {
            conference.get_mut(&s).expect("seeker entry").push(learned[&s]);
        }
        trees_out.push(TranscriptTree { root, edges: tree_edges });
    }

    Ok(KeyTranscript {
        seed,
        rounds,
        trees: trees_out,
        edge_keys,
        announcements,
        conference_keys: conference,
    })
}

/// Structural and statistical audit of transcripts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub transcripts: usize,
    /// One-time-pad violations: a pad bit consumed more than once.
    pub pad_reuse: Vec<String>,
    /// Seekers whose conference keys disagree.
    pub disagreements: Vec<String>,
    /// Announcement/conference-bit pairs with correlation above threshold.
    pub correlation_violations: Vec<String>,
    pub max_abs_correlation: Option<f64>,
    pub correlation_threshold: Option<f64>,
    pub pass: bool,
}

/// Checks (a) one-time-pad discipline and (b) seeker agreement on every
/// transcript; with two or more transcripts (many seeds of the same packing)
/// it also tests that every announcement bit is uncorrelated with every
/// conference bit, at threshold `4 / sqrt(trials)`.
pub fn audit_secrecy(transcripts: &[KeyTranscript]) -> AuditReport {
    let mut report = AuditReport {
        transcripts: transcripts.len(),
        pad_reuse: Vec::new(),
        disagreements: Vec::new(),
        correlation_violations: Vec::new(),
        max_abs_correlation: None,
        correlation_threshold: None,
        pass: true,
    };
    for (ti, tr) in transcripts.iter().enumerate() {
        let mut used: HashSet<PadRef> = HashSet::new();
        for a in &tr.announcements {
            if !used.insert(a.pad) {
                report.pad_reuse.push(format!(
                    "transcript {ti}: pad (edge {}, slot {}) reused",
                    a.pad.edge, a.pad.slot
                ));
            }
        }
        if tr.agreed_key().is_none() {
            report.disagreements.push(format!("transcript {ti}: seekers disagree"));
        }
    }

    let trials = transcripts.len();
    if trials >= 2 {
        let threshold = 4.0 / (trials as f64).sqrt();
        report.correlation_threshold = Some(threshold);
        let n_ann = transcripts[0].announcements.len();
        let n_bits = transcripts[0]
            .conference_keys
            .values()
            .next()
            .map_or(0, Vec::len);
        let consistent = transcripts
            .iter()
            .all(|t| t.announcements.len() == n_ann
                && t.conference_keys.values().next().map_or(0, Vec::len) == n_bits);
        if !consistent {
            report
                .correlation_violations
                .push("transcripts have differing structure; correlation test skipped".into());
        } else {
            let mut max_abs = 0.0f64;
            let pm = |b: u8| if b == 1 { 1.0f64 } else { -1.0 };
            for i in 0..n_ann {
                let xs: Vec<f64> =
                    transcripts.iter().map(|t| pm(t.announcements[i].bit)).collect();
                let mx = xs.iter().sum::<f64>() / trials as f64;
                for j in 0..n_bits {
                    let ys: Vec<f64> = transcripts
                        .iter()
                        .map(|t| pm(t.conference_keys.values().next().expect("keys")[j]))
                        .collect();
                    let my = ys.iter().sum::<f64>() / trials as f64;
                    let corr = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>()
                        / trials as f64
                        - mx * my;
                    max_abs = max_abs.max(corr.abs());
                    if corr.abs() > threshold {
                        report.correlation_violations.push(format!(
                            "announcement {i} vs conference bit {j}: correlation {corr:.4}"
                        ));
                    }
                }
            }
            report.max_abs_correlation = Some(max_abs);
        }
    }

    report.pass = report.pad_reuse.is_empty()
        && report.disagreements.is_empty()
        && report.correlation_violations.is_empty();
    report
}
