//! Seeded verification suites over the numerical certificates, reported
//! as JSON records `{check, params, seed, trials, failures, max_residual}`.
//!
//! `max_residual` carries the largest numeric residual relevant to the
//! check (relative trace discrepancy, degeneration ratio spread) and is
//! zero for purely boolean counting checks. A record passes when its
//! failure count does not exceed the allowance stored in `params`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use serde_json::json;

use crate::combinatorics::{enumerate_compositions, enumerate_permutations};
use crate::error::Result;

use super::{
    construct_pair, d_matrix, degeneration_check, draw_c64, draw_matrix, draw_rect_tuple,
    draw_tuple, is_simple, random_tuple, rank_condition, trace_discrepancy, trace_scale, Tolerance,
    C64,
};

#[derive(Clone, Debug, Serialize)]
pub struct VerificationRecord {
    pub check: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub trials: u64,
    pub failures: u64,
    pub max_residual: f64,
    #[serde(skip)]
    allowed_failures: u64,
}

/// Round to 12 significant digits so reports print identically across
/// runs and platforms.
fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

impl VerificationRecord {
    fn new(
        check: &str,
        params: serde_json::Value,
        seed: u64,
        trials: u64,
        failures: u64,
        max_residual: f64,
        allowed_failures: u64,
    ) -> Self {
        VerificationRecord {
            check: check.to_string(),
            params,
            seed,
            trials,
            failures,
            max_residual: round_sig(max_residual),
            allowed_failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures <= self.allowed_failures
    }
}

/// The rank condition on scalar diagonal data with `n = 2` is vacuous:
/// it must hold on every draw.
pub fn rank_condition_vacuous(
    trials: u64,
    seed: u64,
    tol: Tolerance,
) -> Result<VerificationRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let b11 = draw_tuple(&mut rng, 2, 1);
        let b22 = draw_tuple(&mut rng, 2, 1);
        let c = draw_rect_tuple(&mut rng, 2, 1, 1);
        let cp = draw_rect_tuple(&mut rng, 2, 1, 1);
        if !rank_condition(&b11, &b22, &c, &cp, tol)? {
            failures += 1;
        }
    }
    Ok(VerificationRecord::new(
        "rank_condition_vacuous",
        json!({"n": 2, "p1": 1, "p2": 1, "expect": true, "allowed_failures": 0}),
        seed,
        trials,
        failures,
        0.0,
        0,
    ))
}

/// On generic scalar data with `n >= 3` the rank condition fails almost
/// surely; up to 1% of trials may collide.
pub fn rank_condition_generic(
    n: usize,
    trials: u64,
    seed: u64,
    tol: Tolerance,
) -> Result<VerificationRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let b11 = draw_tuple(&mut rng, n, 1);
        let b22 = draw_tuple(&mut rng, n, 1);
        let c = draw_rect_tuple(&mut rng, n, 1, 1);
        let cp = draw_rect_tuple(&mut rng, n, 1, 1);
        if rank_condition(&b11, &b22, &c, &cp, tol)? {
            failures += 1;
        }
    }
    let allowed = trials / 100;
    Ok(VerificationRecord::new(
        "rank_condition_generic",
        json!({"n": n, "p1": 1, "p2": 1, "expect": false, "allowed_failures": allowed}),
        seed,
        trials,
        failures,
        0.0,
        allowed,
    ))
}

/// Data built to satisfy the rank condition by construction: the second
/// off-diagonal block is an image element minus a multiple of the first.
pub fn rank_condition_dependent(
    n: usize,
    p1: usize,
    p2: usize,
    trials: u64,
    seed: u64,
    tol: Tolerance,
) -> Result<VerificationRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let b11 = draw_tuple(&mut rng, n, p1);
        let b22 = draw_tuple(&mut rng, n, p2);
        let c = draw_rect_tuple(&mut rng, n, p1, p2);
        let x = draw_matrix(&mut rng, p1, p2);
        let w = draw_c64(&mut rng);
        let cp: Vec<DMatrix<C64>> = (0..n)
            .map(|k| b11.matrix(k) * &x - &x * b22.matrix(k) - &c[k] * w)
            .collect();
        if !rank_condition(&b11, &b22, &c, &cp, tol)? {
            failures += 1;
        }
    }
    Ok(VerificationRecord::new(
        "rank_condition_dependent",
        json!({"n": n, "p1": p1, "p2": p2, "expect": true, "allowed_failures": 0}),
        seed,
        trials,
        failures,
        0.0,
        0,
    ))
}

/// Schur and rank-nullity behaviour of the intertwiner map on simple
/// tuples: self-maps have a one-dimensional kernel, non-isomorphic pairs
/// none, and the integer identities hold exactly.
pub fn hom_ext_consistency(
    n: usize,
    p: usize,
    trials: u64,
    seed: u64,
    tol: Tolerance,
) -> Result<VerificationRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let b = draw_tuple(&mut rng, n, p);
        let bp = draw_tuple(&mut rng, n, p);
        if !is_simple(&b, tol) || !is_simple(&bp, tol) {
            failures += 1;
            continue;
        }
        let self_map = d_matrix(&b, &b)?;
        let cross = d_matrix(&b, &bp)?;
        let ok = self_map.hom_dim(tol) == 1
            && cross.hom_dim(tol) == 0
            && cross.ext_dim(tol) == (n - 1) * p * p
            && cross.ext_dim(tol) + cross.rank(tol) == n * p * p;
        if !ok {
            failures += 1;
        }
    }
    Ok(VerificationRecord::new(
        "hom_ext_consistency",
        json!({"n": n, "p": p, "allowed_failures": 0}),
        seed,
        trials,
        failures,
        0.0,
        0,
    ))
}

/// The simplicity verdict must not change under simultaneous conjugation
/// by a random invertible matrix.
pub fn simplicity_conjugation_invariance(
    n: usize,
    p: usize,
    trials: u64,
    seed: u64,
    tol: Tolerance,
) -> Result<VerificationRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let a = draw_tuple(&mut rng, n, p);
        let g = draw_matrix(&mut rng, p, p);
        let before = is_simple(&a, tol);
        let after = match a.conjugate_by(&g) {
            Ok(conj) => is_simple(&conj, tol),
            Err(_) => continue, // singular draw, skip
        };
        if before != after {
            failures += 1;
        }
    }
    Ok(VerificationRecord::new(
        "simplicity_conjugation_invariance",
        json!({"n": n, "p": p, "allowed_failures": 0}),
        seed,
        trials,
        failures,
        0.0,
        0,
    ))
}

/// Constructed pairs must agree on every trace word up to `max_len`,
/// relative to the trace scale. Runs over all index pairs `(pi, sigma)`
/// for the given `p` (capped), seeding each case separately.
pub fn trace_match_suite(
    p: u32,
    n: usize,
    max_len: usize,
    seed: u64,
    tol: Tolerance,
    case_cap: usize,
) -> Result<VerificationRecord> {
    let mut failures = 0;
    let mut max_rel = 0.0f64;
    let mut cases = 0u64;
    'outer: for k in 1..=p {
        for pi in enumerate_compositions(p, k)? {
            for sigma in enumerate_permutations(k as usize) {
                if cases as usize >= case_cap {
                    break 'outer;
                }
                let (a, b) = construct_pair(&pi, &sigma, n, seed + cases, false, tol)?;
                let d = trace_discrepancy(a.tuple(), b.tuple(), max_len)?;
                let scale = trace_scale(a.tuple(), b.tuple(), max_len)?;
                let rel = d / scale;
                max_rel = max_rel.max(rel);
                if d > tol.rel * scale {
                    failures += 1;
                }
                cases += 1;
            }
        }
    }
    Ok(VerificationRecord::new(
        "trace_match_constructed_pairs",
        json!({"p": p, "n": n, "max_len": max_len, "allowed_failures": 0}),
        seed,
        cases,
        failures,
        max_rel,
        0,
    ))
}

/// Independent random tuples must be separated by short trace words in
/// at least 99% of trials.
pub fn trace_distinguish_suite(
    n: usize,
    p: usize,
    max_len: usize,
    trials: u64,
    seed: u64,
) -> Result<VerificationRecord> {
    let mut failures = 0;
    let mut min_gap = f64::INFINITY;
    for t in 0..trials {
        let a = random_tuple(n, p, seed.wrapping_add(2 * t))?;
        let b = random_tuple(n, p, seed.wrapping_add(2 * t + 1).wrapping_add(0x9e3779b9))?;
        let d = trace_discrepancy(&a, &b, max_len)?;
        min_gap = min_gap.min(d);
        if d <= 0.1 {
            failures += 1;
        }
    }
    let allowed = trials / 100;
    Ok(VerificationRecord::new(
        "trace_distinguish_independent_pairs",
        json!({"n": n, "p": p, "max_len": max_len, "threshold": 0.1, "allowed_failures": allowed}),
        seed,
        trials,
        failures,
        if min_gap.is_finite() { min_gap } else { 0.0 },
        allowed,
    ))
}

/// Degeneration residuals must scale linearly: the ratios `r(t)/t` stay
/// within a factor of 10 across six decades of `t`.
pub fn degeneration_suite(
    n: usize,
    p1: usize,
    p2: usize,
    cases: u64,
    seed: u64,
    tol: Tolerance,
) -> Result<VerificationRecord> {
    let ts: Vec<f64> = (1..=6).map(|e| 10f64.powi(-e)).collect();
    let mut failures = 0;
    let mut max_spread = 0.0f64;
    for case in 0..cases {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(case));
        let b11 = draw_tuple(&mut rng, n, p1);
        let b22 = draw_tuple(&mut rng, n, p2);
        let b12 = draw_rect_tuple(&mut rng, n, p1, p2);
        let bp12 = draw_rect_tuple(&mut rng, n, p2, p1);
        let pi = crate::combinatorics::Composition::new(vec![p1 as u32, p2 as u32])?;
        let pip = crate::combinatorics::Composition::new(vec![p2 as u32, p1 as u32])?;
        let a = super::assemble_upper(&mut rng, &pi, n, &[b11.clone(), b22.clone()], &[b12]);
        let b = super::assemble_upper(&mut rng, &pip, n, &[b22, b11], &[bp12]);
        let rs = degeneration_check(&a, &b, &ts, tol)?;
        let ratios: Vec<f64> = rs.iter().zip(&ts).map(|(r, t)| r / t).collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        max_spread = max_spread.max(spread);
        if !spread.is_finite() || spread > 10.0 {
            failures += 1;
        }
    }
    Ok(VerificationRecord::new(
        "degeneration_linearity",
        json!({"n": n, "p1": p1, "p2": p2, "t_decades": 6, "allowed_failures": 0}),
        seed,
        cases,
        failures,
        max_spread,
        0,
    ))
}

/// The full numeric battery for a given `(p, n)`.
pub fn run_numeric_suite(
    p: u32,
    n: usize,
    trials: u64,
    seed: u64,
    tol: Tolerance,
    max_word_len: usize,
) -> Result<Vec<VerificationRecord>> {
    let mut records = Vec::new();
    records.push(rank_condition_vacuous(trials, seed, tol)?);
    if n >= 3 {
        records.push(rank_condition_generic(n, trials, seed, tol)?);
    }
    records.push(rank_condition_dependent(n.max(2), 1, 1, trials, seed, tol)?);
    records.push(rank_condition_dependent(n.max(2), 2, 1, trials, seed, tol)?);
    records.push(hom_ext_consistency(
        n.max(2),
        (p as usize).min(3),
        trials.min(100),
        seed,
        tol,
    )?);
    records.push(simplicity_conjugation_invariance(
        n.max(2),
        p as usize,
        trials.min(100),
        seed,
        tol,
    )?);
    records.push(trace_match_suite(p, n.max(1), max_word_len, seed, tol, 80)?);
    records.push(trace_distinguish_suite(
        n.max(1),
        p as usize,
        2,
        trials,
        seed,
    )?);
    if p >= 2 {
        let p1 = (p as usize).div_ceil(2);
        let p2 = p as usize - p1;
        records.push(degeneration_suite(n.max(1), p1, p2, 20, seed, tol)?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_at_default_tolerance() {
        let tol = Tolerance::default();
        let records = run_numeric_suite(3, 3, 100, 1, tol, 5).unwrap();
        for r in &records {
            assert!(
                r.passed(),
                "{} failed: {}/{} failures, residual {}",
                r.check,
                r.failures,
                r.trials,
                r.max_residual
            );
        }
    }

    #[test]
    fn absurd_tolerance_breaks_the_generic_check() {
        let tol = Tolerance::new(100.0).unwrap();
        let rec = rank_condition_generic(3, 50, 1, tol).unwrap();
        assert!(!rec.passed());
    }

    #[test]
    fn records_serialize_with_fixed_keys() {
        let tol = Tolerance::default();
        let rec = rank_condition_vacuous(5, 1, tol).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 6);
        for key in [
            "check",
            "params",
            "seed",
            "trials",
            "failures",
            "max_residual",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn residuals_round_to_twelve_significant_digits() {
        assert_eq!(round_sig(0.0), 0.0);
        let x = std::f64::consts::PI * 1e-7;
        let r = round_sig(x);
        assert!((r - x).abs() <= 1e-11 * x);
        assert_eq!(format!("{r:e}"), "3.14159265359e-7");
    }
}
