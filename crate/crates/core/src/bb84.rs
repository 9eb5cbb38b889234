//! Tripartite BB84 rate evaluation and the rate ceiling over states
//! preparable in a three-node pair-entangled network.
//!
//! The analysis lives at the correlator level: the rate is a function of
//! `<XXX>`, `<Z_A Z_B>` and `<Z_A Z_C>`, and network preparability enters
//! through two inequalities (an inflation constraint and an uncertainty
//! relation) that the feasibility test checks directly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{h, DensityMatrix};

/// The Pauli-string expectations entering the BB84 rate and the
/// preparability constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    /// `<X_A X_B X_C>`
    pub xxx: f64,
    /// `<Z_A Z_B>`
    pub zab: f64,
    /// `<Z_A Z_C>`
    pub zac: f64,
    /// `<Z_B>`
    pub zb: f64,
    /// `<Z_C>`
    pub zc: f64,
}

impl CorrelatorSet {
    /// Values within `1e-9` of the `[-1, 1]` boundary are clamped to it.
    pub fn new(xxx: f64, zab: f64, zac: f64, zb: f64, zc: f64) -> Result<Self> {
        let clamp = |name: &str, v: f64| -> Result<f64> {
            if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::OutOfRange(format!("correlator {name} = {v} outside [-1,1]")));
            }
            Ok(v.clamp(-1.0, 1.0))
        };
        Ok(Self {
            xxx: clamp("xxx", xxx)?,
            zab: clamp("zab", zab)?,
            zac: clamp("zac", zac)?,
            zb: clamp("zb", zb)?,
            zc: clamp("zc", zc)?,
        })
    }

    /// GHZ-state correlators.
    pub fn ghz() -> Self {
        Self { xxx: 1.0, zab: 1.0, zac: 1.0, zb: 0.0, zc: 0.0 }
    }
}

/// Pauli matrices as 2x2 row-major entries.
fn pauli(which: char) -> [Complex64; 4] {
    let o = Complex64::ZERO;
    let one = Complex64::ONE;
    match which {
        'i' => [one, o, o, one],
        'x' => [o, one, one, o],
        'z' => [one, o, o, -one],
        _ => unreachable!("unused Pauli"),
    }
}

fn pauli_expectation(rho: &DensityMatrix, ops: [char; 3]) -> f64 {
    // Tr(P rho) with P = p0 (x) p1 (x) p2, expanded entrywise
    let ps: Vec<[Complex64; 4]> = ops.iter().map(|&c| pauli(c)).collect();
    let mut tr = Complex64::ZERO;
    for i in 0..8 {
        for j in 0..8 {
            let (i0, i1, i2) = (i >> 2 & 1, i >> 1 & 1, i & 1);
            let (j0, j1, j2) = (j >> 2 & 1, j >> 1 & 1, j & 1);
            let p = ps[0][i0 * 2 + j0] * ps[1][i1 * 2 + j1] * ps[2][i2 * 2 + j2];
            if p != Complex64::ZERO {
                tr += p * rho.entry(j, i);
            }
        }
    }
    debug_assert!(tr.im.abs() < 1e-9, "Pauli expectation has imaginary residue {}", tr.im);
    tr.re
}

/// Extract the correlator set from a 3-qubit state (subsystem order A, B, C).
pub fn correlators_from_state(rho: &DensityMatrix) -> Result<CorrelatorSet> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 3-qubit (8-dimensional) state, got dim {}",
            rho.dim()
        )));
    }
    CorrelatorSet::new(
        pauli_expectation(rho, ['x', 'x', 'x']),
        pauli_expectation(rho, ['z', 'z', 'i']),
        pauli_expectation(rho, ['z', 'i', 'z']),
        pauli_expectation(rho, ['i', 'z', 'i']),
        pauli_expectation(rho, ['i', 'i', 'z']),
    )
}

/// Asymptotic tripartite BB84 rate. May be negative (no key); reported as-is.
pub fn bb84_rate(c: &CorrelatorSet) -> f64 {
    let err_x = (1.0 - c.xxx) / 2.0;
    let err_ab = (1.0 - c.zab) / 2.0;
    let err_ac = (1.0 - c.zac) / 2.0;
    1.0 - h(err_x) - h(err_ab).max(h(err_ac))
}

/// Feasibility of a correlator set in a 3-node pair-entangled network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Slack of `|zab| + |zac| <= 1 + |zb| |zc|` (nonnegative when satisfied).
    pub inflation_slack: f64,
    /// Slack of `xxx^2 + 2 min(zab, zac) <= 2`.
    pub combined_slack: f64,
}

/// Checks the two network-preparability inequalities within `tol`.
pub fn pen3_feasible(c: &CorrelatorSet, tol: f64) -> FeasibilityReport {
    let inflation_slack = 1.0 + c.zb.abs() * c.zc.abs() - c.zab.abs() - c.zac.abs();
    let combined_slack = 2.0 - c.xxx * c.xxx - 2.0 * c.zab.min(c.zac);
    FeasibilityReport {
        feasible: inflation_slack >= -tol && combined_slack >= -tol,
        inflation_slack,
        combined_slack,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CeilingSearchResult {
    pub rate: f64,
    pub argmax: CorrelatorSet,
    pub evaluations: usize,
}

/// Maximize [`bb84_rate`] over feasible correlators by grid search plus local
/// refinement over `(xxx, min(zab, zac))`. Resolution must be at least 100.
pub fn bb84_ceiling_search(resolution: usize) -> Result<CeilingSearchResult> {
    bb84_ceiling_search_bounded(resolution, (-1.0, 1.0))
}

/// [`bb84_ceiling_search`] with the `xxx` axis restricted to a subinterval.
///
/// The search runs over the canonical sector of BB84 statistics: both error
/// rates at most 1/2, i.e. `xxx` and the z-correlators in `[0, 1]` (any
/// network state reaches this sector by local bit flips, which leave
/// preparability untouched, and there the rate is monotone in both axes).
/// An `x_range` reaching below 0 is clamped to the `xxx = 0` boundary.
pub fn bb84_ceiling_search_bounded(
    resolution: usize,
    x_range: (f64, f64),
) -> Result<CeilingSearchResult> {
    if resolution < 100 {
        return Err(Error::OutOfRange(format!(
            "ceiling search needs resolution >= 100, got {resolution}"
        )));
    }
    if !(-1.0..=1.0).contains(&x_range.0)
        || !(-1.0..=1.0).contains(&x_range.1)
        || x_range.0 > x_range.1
    {
        return Err(Error::OutOfRange(format!(
            "bad xxx range [{}, {}]",
            x_range.0, x_range.1
        )));
    }
    let x_range = (x_range.0.max(0.0), x_range.1.max(0.0));
    let (mut xlo, mut xhi) = x_range;
    // The z-singles enter only through the inflation slack; |zb| = |zc| = 1
    // maximizes it, leaving the combined condition as the active constraint.
    let candidate = |x: f64, z: f64| CorrelatorSet { xxx: x, zab: z, zac: z, zb: 1.0, zc: 1.0 };

    let (mut zlo, mut zhi) = (0.0f64, 1.0f64);
    let mut best: Option<(f64, CorrelatorSet)> = None;
    let mut evaluations = 0usize;
    for _zoom in 0..4 {
        let mut local_best: Option<(f64, f64, f64)> = None;
        for i in 0..=resolution {
            let x = xlo + (xhi - xlo) * i as f64 / resolution as f64;
            for j in 0..=resolution {
                let z = zlo + (zhi - zlo) * j as f64 / resolution as f64;
                let c = candidate(x, z);
                if !pen3_feasible(&c, 1e-12).feasible {
                    continue;
                }
                evaluations += 1;
                let r = bb84_rate(&c);
                let improves = match (&best, &local_best) {
                    (Some((bv, _)), _) if r <= *bv => false,
                    (_, Some((lv, _, _))) if r <= *lv => false,
                    _ => true,
                };
                if improves {
                    local_best = Some((r, x, z));
                }
            }
        }
        let Some((r, x, z)) = local_best else {
            break;
        };
        if best.as_ref().is_none_or(|(bv, _)| r > *bv) {
            best = Some((r, candidate(x, z)));
        }
        // zoom into a window of a few grid steps around the argmax
        let step_x = (xhi - xlo) / resolution as f64;
        let step_z = (zhi - zlo) / resolution as f64;
        (xlo, xhi) = ((x - 3.0 * step_x).max(x_range.0), (x + 3.0 * step_x).min(x_range.1));
        (zlo, zhi) = ((z - 3.0 * step_z).max(0.0), (z + 3.0 * step_z).min(1.0));
    }
    let (rate, argmax) = best.ok_or_else(|| {
        Error::Numerical("no feasible correlators in the search domain".into())
    })?;
    Ok(CeilingSearchResult { rate, argmax, evaluations })
}

/// The biseparable three-qubit state achieving the BB84 ceiling:
/// an equal mixture of a Bell pair on AB with `|+>` on C and a Bell pair on
/// AC with `|+>` on B.
pub fn carrara_state() -> DensityMatrix {
    // vector of |phi+>_AB (x) |+>_C in A,B,C order
    let mut v1 = vec![Complex64::ZERO; 8];
    let mut v2 = vec![Complex64::ZERO; 8];
    let amp = Complex64::new(0.5, 0.0); // (1/sqrt 2) * (1/sqrt 2)
    for c in 0..2 {
        v1[c] += amp; // |0 0 c>
        v1[0b110 | c] += amp; // |1 1 c>
    }
    for b in 0..2 {
        v2[b << 1] += amp; // |0 b 0>
        v2[0b100 | (b << 1) | 1] += amp; // |1 b 1>
    }
    let mut entries = vec![Complex64::ZERO; 64];
    for i in 0..8 {
        for j in 0..8 {
            entries[i * 8 + j] =
                (v1[i] * v1[j].conj() + v2[i] * v2[j].conj()) * Complex64::new(0.5, 0.0);
        }
    }
    DensityMatrix::new(8, entries).expect("Carrara state is a valid density matrix")
}

/// `1 - h(1/4)`, the BB84 ceiling for three-node pair-entangled networks.
pub fn bb84_ceiling_exact() -> f64 {
    1.0 - h(0.25)
}
