//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with its runtime (visible under `--nocapture`).
//!
//! Run with `cargo test -p penkey --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use penkey::bb84;
use penkey::bounds::{
    devetak_winter_bound, partition_bound, tree_exact_rate, weakest_cut_bound, Witness,
};
use penkey::gme::{
    directional_derivative_check, total_correlation_check, verify_gme_identity, GmeVerifyConfig,
};
use penkey::linalg::h;
use penkey::network::{derive_weights, EdgeSpec, PenNetwork, StateSpec, WeightKind};
use penkey::packing::{audit_secrecy, pack_trees_fractional, pack_trees_integer, simulate_conference_key};
use penkey::partition::{enumerate_proper_partitions, Partition};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

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

fn fig1() -> PenNetwork {
    let pairs = [
        (1, 2), (1, 4), (2, 3), (2, 5), (3, 5), (3, 6),
        (4, 6), (4, 7), (5, 8), (6, 7), (6, 8), (7, 8),
    ];
    PenNetwork::new(
        8,
        pairs.iter().map(|&(u, v)| EdgeSpec::new(u, v, StateSpec::Bell)).collect(),
        [2, 5, 6, 7],
    )
    .unwrap()
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    started: Instant,
}

impl Criterion {
    fn start(name: &'static str, budget_secs: u64) -> Self {
        Self { name, budget: Duration::from_secs(budget_secs), started: Instant::now() }
    }

    fn finish(self, ok: bool, detail: &str) {
        let elapsed = self.started.elapsed();
        let verdict = if ok && elapsed <= self.budget { "PASS" } else { "FAIL" };
        println!(
            "[{verdict}] {} ({detail}; {:.2}s of {:.0}s budget)",
            self.name,
            elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        );
        assert!(ok, "{} failed: {detail}", self.name);
        assert!(
            elapsed <= self.budget,
            "{} exceeded its {:?} runtime budget ({:?})",
            self.name,
            self.budget,
            elapsed
        );
    }
}

#[test]
fn criterion_1_triangle_cut_and_partition_exact() {
    let c = Criterion::start("criterion 1: triangle weakest cut 2, partition 3/2", 1);
    let net = triangle();
    let w = derive_weights(&net, WeightKind::EntropyS).unwrap();
    let cut = weakest_cut_bound(&net, &w).unwrap();
    let part = partition_bound(&net, &w).unwrap();
    let ok = cut.value == 2.0 && part.value == 1.5;
    c.finish(ok, &format!("cut = {}, partition = {}", cut.value, part.value));
}

#[test]
fn criterion_2_eight_node_network_bounds() {
    let c = Criterion::start("criterion 2: 8-node network cut 3, partition 5/2", 5);
    let net = fig1();
    let w = derive_weights(&net, WeightKind::EntropyS).unwrap();
    let cut = weakest_cut_bound(&net, &w).unwrap();
    let part = partition_bound(&net, &w).unwrap();
    let (blocks, cross) = match &part.witness {
        Witness::Partition { blocks } => {
            let owner = Partition::new(blocks.clone()).block_of(8);
            let cross =
                net.edges().iter().filter(|e| owner[e.u] != owner[e.v]).count();
            (blocks.len(), cross)
        }
        _ => (0, 0),
    };
    let ok = cut.value == 3.0 && part.value == 2.5 && blocks == 3 && cross == 5;
    c.finish(
        ok,
        &format!(
            "cut = {}, partition = {} with {blocks} blocks / {cross} cross edges",
            cut.value, part.value
        ),
    );
}

#[test]
fn criterion_3_devetak_winter_triangle() {
    let c = Criterion::start("criterion 3: Devetak-Winter bound 1.0 on the triangle", 1);
    let rep = devetak_winter_bound(&triangle(), 1).unwrap();
    c.finish(rep.value == 1.0, &format!("value = {}", rep.value));
}

#[test]
fn criterion_4_bb84_rate_and_ceiling() {
    let c = Criterion::start("criterion 4: BB84 Carrara rate and ceiling search", 5);
    let carrara =
        bb84::bb84_rate(&bb84::correlators_from_state(&bb84::carrara_state()).unwrap());
    let exact = 1.0 - h(0.25);
    let search = bb84::bb84_ceiling_search(1000).unwrap();
    let ok = (carrara - exact).abs() <= 1e-9 && (search.rate - 0.18872).abs() <= 1e-4;
    c.finish(
        ok,
        &format!("Carrara rate = {carrara:.9}, ceiling search = {:.6}", search.rate),
    );
}

fn random_pure_edge_network(rng: &mut ChaCha12Rng) -> PenNetwork {
    loop {
        let n = rng.random_range(2..=4usize);
        // random connected graph
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for v in 2..=n {
            pairs.push((rng.random_range(1..v), v));
        }
        for u in 1..=n {
            for v in (u + 1)..=n {
                if !pairs.contains(&(u, v)) && rng.random_range(0..100) < 40 {
                    pairs.push((u, v));
                }
            }
        }
        let edges: Vec<EdgeSpec> = pairs
            .iter()
            .map(|&(u, v)| {
                let state = match rng.random_range(0..3) {
                    0 => StateSpec::Bell,
                    1 => {
                        let p = rng.random_range(0.05..0.95);
                        StateSpec::Pure(vec![p, 1.0 - p])
                    }
                    _ => {
                        let (da, db) = *[(2, 2), (2, 3), (3, 3)]
                            .get(rng.random_range(0..3))
                            .unwrap();
                        let mut amps: Vec<Complex64> = (0..da * db)
                            .map(|_| {
                                Complex64::new(
                                    rng.random_range(-1.0..1.0),
                                    rng.random_range(-1.0..1.0),
                                )
                            })
                            .collect();
                        let norm =
                            amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        amps.iter_mut().for_each(|a| *a /= norm);
                        StateSpec::DensePure { dims: (da, db), amplitudes: amps }
                    }
                };
                EdgeSpec::new(u, v, state)
            })
            .collect();
        let total_dim: usize = edges
            .iter()
            .map(|e| {
                let (a, b) = e.dims().unwrap();
                a * b
            })
            .product();
        if total_dim > 4096 {
            continue;
        }
        let seekers: Vec<usize> = if rng.random_range(0..3) == 0 && n > 2 {
            let mut s: Vec<usize> =
                (1..=n).filter(|_| rng.random_range(0..2) == 1).collect();
            while s.len() < 2 {
                let v = rng.random_range(1..=n);
                if !s.contains(&v) {
                    s.push(v);
                }
            }
            s
        } else {
            (1..=n).collect()
        };
        if let Ok(net) = PenNetwork::new(n, edges, seekers) {
            return net;
        }
    }
}

#[test]
fn criterion_5_gme_identity_on_triangle_and_random_networks() {
    let c = Criterion::start("criterion 5: relative-entropy identity vs weakest cut", 60);
    let cfg = GmeVerifyConfig { samples: 1000, seed: 0x5EED, ..Default::default() };
    let mut checked = 0usize;
    let mut all_ok = true;
    let mut detail = String::new();

    let rep = verify_gme_identity(&triangle(), &cfg).unwrap();
    all_ok &= rep.pass && (rep.d_sigma_star - rep.cut_value).abs() <= 1e-8;
    checked += 1;

    let mut rng = ChaCha12Rng::seed_from_u64(0xC0FFEE);
    let mut max_dim = 0usize;
    for _ in 0..50 {
        let net = random_pure_edge_network(&mut rng);
        let rep = verify_gme_identity(&net, &cfg).unwrap();
        if !rep.pass {
            all_ok = false;
            detail = format!("failure on {}-vertex network: {rep:?}", net.n_vertices());
            break;
        }
        max_dim = max_dim.max(rep.d_sigma_star_dense.map_or(4096, |_| 0).max(0));
        checked += 1;
    }
    c.finish(
        all_ok,
        &if detail.is_empty() {
            format!("{checked} networks, 1000 biseparable samples each")
        } else {
            detail
        },
    );
}

#[test]
fn criterion_6_derivative_inequality_on_triangle() {
    let c = Criterion::start("criterion 6: directional derivative inequality", 30);
    let rep = directional_derivative_check(&triangle(), 1000, 0x5EED).unwrap();
    let ok = rep.pass
        && rep.max_abs_one_minus_fprime <= 1.0 + 1e-9
        && rep.max_closed_quadrature_gap <= 1e-6;
    c.finish(
        ok,
        &format!(
            "max |1-f'(0)| = {:.9}, closed-vs-quadrature gap = {:.2e}",
            rep.max_abs_one_minus_fprime, rep.max_closed_quadrature_gap
        ),
    );
}

#[test]
fn criterion_7_protocol_achievability_and_duality() {
    let c = Criterion::start("criterion 7: tree-packing protocol and NWT duality", 60);
    // triangle, 2 rounds: 3 conference bits at rate 3/2, matching the bound
    let net = triangle();
    let packing = pack_trees_integer(&net, 2).unwrap();
    let transcript = simulate_conference_key(&net, &packing, 0x5EED).unwrap();
    let audit = audit_secrecy(std::slice::from_ref(&transcript));
    let w = derive_weights(&net, WeightKind::EntropyS).unwrap();
    let bound = partition_bound(&net, &w).unwrap().value;
    let bits = transcript.agreed_key().map_or(0, <[u8]>::len);
    let mut ok = bits == 3 && audit.pass && (bits as f64 / 2.0 - bound).abs() == 0.0;

    // duality on 100 random connected graphs
    let mut rng = ChaCha12Rng::seed_from_u64(0xD0A1);
    for case in 0..100 {
        let n = rng.random_range(3..=7usize);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for v in 2..=n {
            pairs.push((rng.random_range(1..v), v));
        }
        for u in 1..=n {
            for v in (u + 1)..=n {
                if !pairs.contains(&(u, v)) && rng.random_range(0..100) < 40 {
                    pairs.push((u, v));
                }
            }
        }
        let net = PenNetwork::new(
            n,
            pairs
                .iter()
                .map(|&(u, v)| {
                    EdgeSpec::new(
                        u,
                        v,
                        StateSpec::WeightOverride(rng.random_range(1..=32) as f64 / 8.0),
                    )
                })
                .collect(),
            1..=n,
        )
        .unwrap();
        let w = derive_weights(&net, WeightKind::EntropyS).unwrap();
        let packing = pack_trees_fractional(&net, &w).unwrap();
        let bound = partition_bound(&net, &w).unwrap();
        if (packing.value - bound.value).abs() > 1e-6 {
            ok = false;
            println!("duality gap at case {case}: {} vs {}", packing.value, bound.value);
            break;
        }
    }
    c.finish(ok, &format!("{bits} bits at rate {}, 100 duality checks", bits as f64 / 2.0));
}

#[test]
fn criterion_8_tree_networks_exact_rate() {
    let c = Criterion::start("criterion 8: tree rate equals partition bound", 10);
    let mut rng = ChaCha12Rng::seed_from_u64(0x7EE5);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(3..=10usize);
        let mut edges = Vec::new();
        for v in 2..=n {
            let u = rng.random_range(1..v);
            let state = if rng.random_range(0..2) == 0 {
                StateSpec::Bell
            } else {
                let p = rng.random_range(0.05..0.95);
                StateSpec::Pure(vec![p, 1.0 - p])
            };
            edges.push(EdgeSpec::new(u, v, state));
        }
        let mut seekers: Vec<usize> =
            (1..=n).filter(|_| rng.random_range(0..2) == 1).collect();
        while seekers.len() < 2 {
            let v = rng.random_range(1..=n);
            if !seekers.contains(&v) {
                seekers.push(v);
            }
        }
        let net = PenNetwork::new(n, edges, seekers).unwrap();
        let w = derive_weights(&net, WeightKind::EntropyS).unwrap();
        let tree = tree_exact_rate(&net, &w).unwrap().value;
        let part = partition_bound(&net, &w).unwrap().value;
        if (tree - part).abs() > 1e-9 {
            ok = false;
            println!("tree {tree} vs partition {part}");
            break;
        }
    }
    c.finish(ok, "100 random trees, up to 10 vertices");
}

#[test]
fn criterion_9_total_correlation_achievability() {
    let c = Criterion::start("criterion 9: total correlation equals cross entropy", 10);
    let path4 = PenNetwork::new(
        4,
        vec![
            EdgeSpec::new(1, 2, StateSpec::Bell),
            EdgeSpec::new(2, 3, StateSpec::Bell),
            EdgeSpec::new(3, 4, StateSpec::Bell),
        ],
        [1, 2, 3, 4],
    )
    .unwrap();
    let mut ok = true;
    let mut partitions = 0usize;
    for net in [triangle(), path4] {
        for part in
            enumerate_proper_partitions(net.n_vertices(), net.seekers()).unwrap()
        {
            let rep = total_correlation_check(&net, &part).unwrap();
            partitions += 1;
            if (rep.total_correlation - rep.expected_cross_entropy).abs() > 1e-9 {
                ok = false;
                println!("mismatch on {part:?}: {rep:?}");
            }
        }
    }
    c.finish(ok, &format!("{partitions} proper partitions checked at 1e-9"));
}
