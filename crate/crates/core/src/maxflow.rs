//! Exact s-t minimum cut on small undirected graphs (Dinic over rationals).
//!
//! Capacities are `BigRational`, so every f64 weight converts exactly and cut
//! comparisons need no epsilon.

use num_rational::BigRational;
use num_traits::Zero;

pub(crate) struct MinCutResult {
    pub value: BigRational,
    /// Indices (into the input edge list) of edges crossing the cut.
    pub cut_edges: Vec<usize>,
    /// `side[v]` is true when v lies on the source side (1-based vertices).
    #[cfg_attr(not(test), allow(dead_code))]
    pub side: Vec<bool>,
}

struct Arc {
    to: usize,
    cap: BigRational,
    flow: BigRational,
}

pub(crate) fn min_cut(
    n: usize,
    edges: &[(usize, usize, BigRational)],
    s: usize,
    t: usize,
) -> MinCutResult {
    assert!(s != t && s >= 1 && t >= 1 && s <= n && t <= n);
    let mut arcs: Vec<Arc> = Vec::with_capacity(edges.len() * 2);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for &(u, v, ref c) in edges {
        adj[u].push(arcs.len());
        arcs.push(Arc { to: v, cap: c.clone(), flow: BigRational::zero() });
        adj[v].push(arcs.len());
        arcs.push(Arc { to: u, cap: c.clone(), flow: BigRational::zero() });
    }

    let residual = |arcs: &[Arc], a: usize| &arcs[a].cap - &arcs[a].flow;
    let mut total = BigRational::zero();
    loop {
        // BFS levels in the residual graph
        let mut level = vec![usize::MAX; n + 1];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &adj[u] {
                let v = arcs[a].to;
                if level[v] == usize::MAX && residual(&arcs, a) > BigRational::zero() {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if level[t] == usize::MAX {
            break;
        }
        // blocking flow (DFS with per-vertex arc cursors)
        let mut cursor = vec![0usize; n + 1];
        loop {
            let pushed = augment(&mut arcs, &adj, &level, &mut cursor, s, t, None);
            if pushed.is_zero() {
                break;
            }
            total += pushed;
        }
    }

    // source side of the min cut = residual-reachable vertices
    let mut side = vec![false; n + 1];
    side[s] = true;
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for &a in &adj[u] {
            let v = arcs[a].to;
            if !side[v] && residual(&arcs, a) > BigRational::zero() {
                side[v] = true;
                stack.push(v);
            }
        }
    }
    let cut_edges = edges
        .iter()
        .enumerate()
        .filter(|(_, (u, v, _))| side[*u] != side[*v])
        .map(|(i, _)| i)
        .collect();
    MinCutResult { value: total, cut_edges, side }
}

fn augment(
    arcs: &mut [Arc],
    adj: &[Vec<usize>],
    level: &[usize],
    cursor: &mut [usize],
    u: usize,
    t: usize,
    limit: Option<BigRational>,
) -> BigRational {
    if u == t {
        return limit.expect("t reached with a concrete bottleneck");
    }
    while cursor[u] < adj[u].len() {
        let a = adj[u][cursor[u]];
        let v = arcs[a].to;
        let res = &arcs[a].cap - &arcs[a].flow;
        if res > BigRational::zero() && level[v] == level[u] + 1 {
            let bottleneck = match &limit {
                Some(l) if *l < res => l.clone(),
                _ => res,
            };
            let pushed = augment(arcs, adj, level, cursor, v, t, Some(bottleneck));
            if !pushed.is_zero() {
                arcs[a].flow += &pushed;
                arcs[a ^ 1].flow -= &pushed;
                return pushed;
            }
        }
        cursor[u] += 1;
    }
    // First call has no limit: signal exhaustion with zero.
    BigRational::zero()
}

pub(crate) fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("weights are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn r(x: f64) -> BigRational {
        rational(x)
    }

    #[test]
    fn single_edge() {
        let res = min_cut(2, &[(1, 2, r(0.7))], 1, 2);
        assert_eq!(res.value, r(0.7));
        assert_eq!(res.cut_edges, vec![0]);
    }

    #[test]
    fn triangle_unit_cut_is_two() {
        let edges = vec![(1, 2, r(1.0)), (1, 3, r(1.0)), (2, 3, r(1.0))];
        let res = min_cut(3, &edges, 1, 2);
        assert_eq!(res.value.to_f64().unwrap(), 2.0);
        assert_eq!(res.cut_edges.len(), 2);
    }

    #[test]
    fn bottleneck_path() {
        let edges = vec![(1, 2, r(2.0)), (2, 3, r(0.5)), (3, 4, r(2.0))];
        let res = min_cut(4, &edges, 1, 4);
        assert_eq!(res.value, r(0.5));
        assert_eq!(res.cut_edges, vec![1]);
        assert!(res.side[1] && res.side[2] && !res.side[3] && !res.side[4]);
    }

    #[test]
    fn exact_on_dyadic_weights() {
        // value must come out exactly 1.25, no epsilon
        let edges = vec![(1, 2, r(0.75)), (1, 3, r(0.5)), (2, 3, r(0.5)), (3, 4, r(10.0)), (2, 4, r(10.0))];
        let res = min_cut(4, &edges, 1, 4);
        assert_eq!(res.value, r(1.25));
    }
}
