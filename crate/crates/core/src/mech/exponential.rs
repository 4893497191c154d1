//! Finite and lazy exponential mechanisms.

use rand::Rng;

use crate::error::{Error, Result};

/// Samples index `h` with probability proportional to
/// `exp(eps · score(h) / (2 · sensitivity))`.
///
/// Utility: with `|C|` candidates,
/// `Pr[score(out) ≤ max − (2Δ/ε)(ln|C| + t)] ≤ e^{−t}`. `eps = ∞`
/// degenerates to a uniform choice among the maximizers.
pub fn exponential_mechanism_finite<R: Rng + ?Sized>(
    scores: &[f64],
    sensitivity: f64,
    eps: f64,
    rng: &mut R,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::invalid("empty candidate set".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores must be finite".into()));
    }
    if !(sensitivity > 0.0) || !sensitivity.is_finite() {
        return Err(Error::invalid(format!("sensitivity must be positive, got {sensitivity}")));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }

    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if eps.is_infinite() {
        let winners: Vec<usize> =
            (0..scores.len()).filter(|&i| scores[i] == max).collect();
        let pick = rng.random_range(0..winners.len());
        return Ok(winners[pick]);
    }

    let weights: Vec<f64> =
        scores.iter().map(|&s| (eps * (s - max) / (2.0 * sensitivity)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return Ok(i);
        }
    }
    Ok(scores.len() - 1)
}

/// Exact exponential mechanism over `m` bins scored by occupancy count,
/// materializing only the occupied bins.
///
/// `bins_of(object)` lists the (at most `C`) bins an object falls in; `m`
/// may be astronomically large. Sensitivity is 1 (occupancy counts).
/// Empty bins share one aggregated weight class; when that class is
/// drawn, a uniformly random empty bin index is reconstructed by rank
/// search over the sorted occupied indices, so the output distribution is
/// exactly the exponential mechanism over all `m` bins.
pub fn lazy_exponential_mechanism<T, R, F>(
    m: u128,
    objects: &[T],
    mut bins_of: F,
    eps: f64,
    rng: &mut R,
) -> Result<u128>
where
    R: Rng + ?Sized,
    F: FnMut(&T) -> Result<Vec<u128>>,
{
    if m == 0 {
        return Err(Error::invalid("need at least one bin".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }

    // Occupancy, keyed by bin index in sorted order for deterministic
    // iteration.
    let mut counts: std::collections::BTreeMap<u128, u64> = std::collections::BTreeMap::new();
    for obj in objects {
        for bin in bins_of(obj)? {
            if bin >= m {
                return Err(Error::BinIndexOverflow(format!("bin {bin} >= m = {m}")));
            }
            *counts.entry(bin).or_insert(0) += 1;
        }
    }

    let occupied = counts.len() as u128;
    let empties = m - occupied;
    let max_count = counts.values().cloned().max().unwrap_or(0) as f64;

    if eps.is_infinite() {
        // Degenerate limit: argmax occupancy (first in index order), or a
        // uniform bin when nothing is occupied.
        if max_count > 0.0 {
            let best = counts.iter().find(|(_, &c)| c as f64 == max_count).map(|(&b, _)| b);
            return Ok(best.expect("nonempty counts"));
        }
        return Ok(rng.random_range(0..m));
    }

    // Weights relative to the maximum occupancy; the empty class carries
    // weight (m − |J|) · exp(−eps·max/2).
    let shifted = |c: f64| (eps * (c - max_count) / 2.0).exp();
    let occupied_mass: f64 = counts.values().map(|&c| shifted(c as f64)).sum();
    let empty_mass = empties as f64 * shifted(0.0);
    let total = occupied_mass + empty_mass;
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::invalid(format!("degenerate weight mass {total}")));
    }

    let mut u = rng.random::<f64>() * total;
    for (&bin, &c) in &counts {
        u -= shifted(c as f64);
        if u <= 0.0 {
            return Ok(bin);
        }
    }

    // The ⊥ class: draw the t-th empty bin uniformly (0-based rank), then
    // binary search for the smallest x with exactly t empty bins below it.
    debug_assert!(empties > 0);
    let t = rng.random_range(0..empties);
    let occupied_keys: Vec<u128> = counts.keys().cloned().collect();
    let occ_leq = |x: u128| occupied_keys.partition_point(|&k| k <= x) as u128;
    let (mut lo, mut hi) = (0u128, m - 1);
    // empties_leq(x) = x + 1 − occ_leq(x) is nondecreasing; find the least
    // x with empties_leq(x) = t + 1. That x is itself empty.
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let empties_leq = mid + 1 - occ_leq(mid);
        if empties_leq >= t + 1 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}
