//! Dense primal simplex for `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible, so no phase-1 is needed. Dantzig pricing with
//! a switch to Bland's rule after a stall guards against cycling on the highly
//! degenerate packing LPs this crate feeds it.

const EPS: f64 = 1e-9;

pub(crate) struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

/// `rows[i]` is one constraint row of `A`; `c` the objective.
pub(crate) fn maximize(c: &[f64], rows: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, String> {
    let m = rows.len();
    let n = c.len();
    if b.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err("inconsistent LP dimensions".into());
    }
    if b.iter().any(|&bi| bi < -EPS) {
        return Err("negative right-hand side".into());
    }

    // tableau: m constraint rows + objective row; columns: n vars, m slacks, rhs
    let width = n + m + 1;
    let mut t = vec![vec![0.0f64; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&rows[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i].max(0.0);
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iters = 50 * (n + m) + 1000;
    let bland_after = 5 * (n + m) + 200;
    for iter in 0..max_iters {
        let bland = iter >= bland_after;
        // entering column
        let mut enter: Option<usize> = None;
        if bland {
            enter = (0..n + m).find(|&j| t[m][j] < -EPS);
        } else {
            let mut best = -EPS;
            for j in 0..n + m {
                if t[m][j] < best {
                    best = t[m][j];
                    enter = Some(j);
                }
            }
        }
        let Some(e) = enter else {
            let mut x = vec![0.0; n];
            for i in 0..m {
                if basis[i] < n {
                    x[basis[i]] = t[i][width - 1];
                }
            }
            return Ok(LpSolution { objective: t[m][width - 1], x });
        };
        // leaving row (ratio test; ties by smallest basis index)
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][e] > EPS {
                let ratio = t[i][width - 1] / t[i][e];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best_ratio - EPS
                            || (ratio < best_ratio + EPS && basis[i] < basis[l])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            return Err("LP is unbounded".into());
        };
        // pivot on (l, e)
        let pivot = t[l][e];
        for v in &mut t[l] {
            *v /= pivot;
        }
        for i in 0..=m {
            if i != l && t[i][e].abs() > 0.0 {
                let f = t[i][e];
                for j in 0..width {
                    t[i][j] -= f * t[l][j];
                }
            }
        }
        basis[l] = e;
    }
    Err("simplex iteration limit reached".into())
}
